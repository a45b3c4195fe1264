#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psmote/encode.hpp"
#include "psmote/error.hpp"

namespace psmote {

// Row ids of the k stored rows nearest to `point` under Euclidean distance,
// ties broken by ascending row id; k is clamped to the row count. Rows equal
// to `exclude` are skipped (pass matrix.rows() or larger to keep all rows).
inline std::vector<std::size_t> nearest_rows(const EncodedMatrix& encoded,
                                             std::span<const double> point, std::size_t k,
                                             std::size_t exclude) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(encoded.rows());
    for (std::size_t other = 0; other < encoded.rows(); ++other) {
        if (other == exclude) continue;
        const auto row = encoded.row(other);
        double dist_sq = 0.0;
        for (std::size_t d = 0; d < row.size(); ++d) {
            const double delta = row[d] - point[d];
            dist_sq += delta * delta;
        }
        scored.emplace_back(dist_sq, other);
    }
    k = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                      scored.end());
    std::vector<std::size_t> ids(k);
    for (std::size_t i = 0; i < k; ++i) ids[i] = scored[i].second;
    return ids;
}

// Exact k-nearest-neighbor index under Euclidean distance over encoded rows.
// Queries exclude the query row itself; distance ties break by ascending
// row id. Brute force (each row is scored against all others), so results
// are exact; the per-row lists at the fitted k are computed once here and
// served from memory afterwards.
class NeighborIndex {
public:
    NeighborIndex(EncodedMatrix encoded, std::size_t k)
        : encoded_(std::move(encoded)), k_(k) {
        if (encoded_.rows() < 2)
            throw InputError("neighbor index: need at least 2 rows, got " +
                             std::to_string(encoded_.rows()));
        if (k_ < 1) throw InputError("neighbor index: k must be at least 1");
        if (k_ > encoded_.rows() - 1) {
            warn("neighbor index: k=" + std::to_string(k_) + " clamped to " +
                 std::to_string(encoded_.rows() - 1) + " (only " +
                 std::to_string(encoded_.rows()) + " rows)");
            k_ = encoded_.rows() - 1;
        }
        neighbors_.reserve(encoded_.rows());
        for (std::size_t row = 0; row < encoded_.rows(); ++row)
            neighbors_.push_back(nearest_rows(encoded_, encoded_.row(row), k_, row));
    }

    std::size_t k() const { return k_; }
    std::size_t n_rows() const { return encoded_.rows(); }
    const EncodedMatrix& encoded() const { return encoded_; }

    // k nearest stored rows to the stored row `row`, self excluded.
    std::vector<std::size_t> query(std::size_t row) const { return query(row, k_); }

    std::vector<std::size_t> query(std::size_t row, std::size_t k) const {
        if (row >= encoded_.rows())
            throw InputError("neighbor query: row " + std::to_string(row) +
                             " out of range (n=" + std::to_string(encoded_.rows()) + ")");
        k = std::min(k, encoded_.rows() - 1);
        if (k <= k_)
            return {neighbors_[row].begin(),
                    neighbors_[row].begin() + static_cast<std::ptrdiff_t>(k)};
        return nearest_rows(encoded_, encoded_.row(row), k, row);
    }

    // k nearest stored rows to an arbitrary point; no self-exclusion.
    std::vector<std::size_t> nearest_to(std::span<const double> point, std::size_t k) const {
        if (point.size() != encoded_.cols())
            throw InputError("neighbor query: point has " + std::to_string(point.size()) +
                             " dims, index has " + std::to_string(encoded_.cols()));
        return nearest_rows(encoded_, point, k, encoded_.rows());
    }

private:
    EncodedMatrix encoded_;
    std::size_t k_;
    std::vector<std::vector<std::size_t>> neighbors_;
};

inline NeighborIndex fit_neighbors(const Dataset& dataset, std::size_t k) {
    return NeighborIndex(encode(dataset), k);
}

}  // namespace psmote
