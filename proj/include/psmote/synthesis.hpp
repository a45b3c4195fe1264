#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psmote/dataset.hpp"
#include "psmote/encode.hpp"
#include "psmote/error.hpp"
#include "psmote/neighbors.hpp"
#include "psmote/risk.hpp"
#include "psmote/rng.hpp"

namespace psmote {

struct SynthesisConfig {
    std::size_t n_replicates = 1;  // synthetic rows per high-risk original
    std::size_t knn = 3;           // neighbors consulted per interpolation
    PrivacyBudget epsilon{5.0};    // Laplace scale is 1/epsilon
    std::uint64_t seed = 42;
    bool per_row_neighbor = false;  // draw one neighbor per row instead of per attribute
    std::size_t risk_threshold = kHighRiskThreshold;
    std::size_t workers = 1;
};

enum class Origin { Original, Synthetic };

struct Provenance {
    Origin origin;
    std::size_t source;     // row id in the input dataset
    std::size_t replicate;  // 0 for originals

    bool operator==(const Provenance&) const = default;
};

struct SyntheticDataset {
    Dataset dataset;
    std::vector<Provenance> provenance;  // one entry per output row
};

inline nlohmann::ordered_json provenance_to_json(const std::vector<Provenance>& provenance) {
    auto doc = nlohmann::ordered_json::array();
    for (std::size_t row = 0; row < provenance.size(); ++row) {
        const Provenance& p = provenance[row];
        doc.push_back({{"row", row},
                       {"origin", p.origin == Origin::Original ? "original" : "synthetic"},
                       {"source", p.source},
                       {"replicate", p.replicate}});
    }
    return doc;
}

inline std::vector<Provenance> provenance_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw InputError("provenance: expected a JSON array");
    std::vector<Provenance> provenance(doc.size());
    std::vector<bool> seen(doc.size(), false);
    for (const auto& entry : doc) {
        const std::size_t row = entry.at("row").get<std::size_t>();
        if (row >= provenance.size() || seen[row])
            throw InputError("provenance: row ids must cover 0..n-1 exactly once");
        seen[row] = true;
        const std::string origin = entry.at("origin").get<std::string>();
        if (origin != "original" && origin != "synthetic")
            throw InputError("provenance: unknown origin '" + origin + "'");
        provenance[row] = {origin == "original" ? Origin::Original : Origin::Synthetic,
                           entry.at("source").get<std::size_t>(),
                           entry.at("replicate").get<std::size_t>()};
    }
    return provenance;
}

// a + lambda * (b - a); shared by the private generator and vanilla SMOTE.
inline double lerp(double a, double b, double lambda) { return a + lambda * (b - a); }

// One numeric attribute of a synthetic row. When the base and neighbor agree
// the interpolation direction is degenerate, so the weight is applied to the
// column's standard deviation with a random sign instead.
inline double interpolate_numeric(double a, double b, double lambda, int sign,
                                  double column_std) {
    if (a != b) return lerp(a, b, lambda);
    return a + lambda * static_cast<double>(sign) * column_std;
}

namespace detail {

struct SynthesisPlan {
    const Dataset& dataset;
    const NeighborIndex& index;
    const SynthesisConfig& config;
    std::vector<double> column_stds;             // per column, 0 for non-numeric
    std::vector<std::vector<std::size_t>> hood;  // neighbor list per high-risk row
    const std::vector<std::size_t>& high_risk;
};

inline std::vector<Cell> synthesize_row(const SynthesisPlan& plan, std::size_t h,
                                        std::size_t neighbors_of, std::size_t replicate) {
    const Dataset& d = plan.dataset;
    const Schema& schema = d.schema();
    const std::vector<std::size_t>& neighbors = plan.hood[neighbors_of];
    const RngStream row_stream =
        RngStream(plan.config.seed).child(stream_domain::kSynthesis).child(h).child(replicate);

    std::size_t row_neighbor = 0;
    if (plan.config.per_row_neighbor) {
        RngStream pick = row_stream.child(0);
        row_neighbor = neighbors[uniform_index(pick, neighbors.size())];
    }

    std::vector<Cell> cells(schema.size());
    for (std::size_t col = 0; col < schema.size(); ++col) {
        if (col == schema.target_index()) {
            cells[col] = d.cell(col, h);
            continue;
        }
        RngStream attr = row_stream.child(col + 1);
        if (schema.kind(col) == ColumnKind::Numeric) {
            const std::size_t b = plan.config.per_row_neighbor
                                      ? row_neighbor
                                      : neighbors[uniform_index(attr, neighbors.size())];
            const double lambda = laplace_draw(plan.config.epsilon, attr);
            const double a = d.number(col, h);
            const double bv = d.number(col, b);
            const int sign = a == bv ? sign_choice(attr) : 1;
            cells[col] = interpolate_numeric(a, bv, lambda, sign, plan.column_stds[col]);
        } else {
            std::vector<std::int32_t> candidates;
            for (const std::size_t nb : neighbors) candidates.push_back(d.code(col, nb));
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()),
                             candidates.end());
            const std::int32_t own = d.code(col, h);
            if (candidates.size() < 2) {
                candidates.clear();
                const auto n_cat = static_cast<std::int32_t>(d.categories(col).size());
                for (std::int32_t c = 0; c < n_cat; ++c)
                    if (c != own || n_cat == 1) candidates.push_back(c);
            }
            const std::size_t pick = uniform_index(attr, candidates.size());
            cells[col] = d.categories(col)[static_cast<std::size_t>(candidates[pick])];
        }
    }
    return cells;
}

template <typename Fn>
inline void run_tasks(std::size_t n_tasks, std::size_t workers, Fn&& task) {
    workers = std::max<std::size_t>(1, std::min(workers, n_tasks));
    if (workers == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n_tasks; i += workers) task(i);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

namespace detail {

inline SyntheticDataset unchanged_release(const Dataset& dataset, std::size_t threshold) {
    warn("synthesis: no high-risk rows at threshold " + std::to_string(threshold) +
         "; output equals input");
    std::vector<Provenance> provenance(dataset.n_rows());
    for (std::size_t row = 0; row < dataset.n_rows(); ++row)
        provenance[row] = {Origin::Original, row, 0};
    return {dataset, std::move(provenance)};
}

}  // namespace detail

// Algorithm: find the rows whose QI combination occurs at most `risk_threshold`
// times, drop them, and append `n_replicates` synthetic rows per dropped row,
// interpolated towards nearest neighbors with Laplace-distributed weights.
// This overload reuses a precomputed risk report and neighbor index.
inline SyntheticDataset private_smote(const Dataset& dataset, const SynthesisConfig& config,
                                      const RiskReport& risk, const NeighborIndex& index) {
    if (config.n_replicates < 1) throw InputError("synthesis: n_replicates must be at least 1");
    if (config.knn < 1) throw InputError("synthesis: knn must be at least 1");

    const std::vector<std::size_t>& high_risk = risk.high_risk();
    if (high_risk.empty()) return detail::unchanged_release(dataset, config.risk_threshold);

    detail::SynthesisPlan plan{dataset, index, config, {}, {}, high_risk};
    plan.column_stds.resize(dataset.schema().size(), 0.0);
    for (std::size_t col = 0; col < dataset.schema().size(); ++col)
        if (dataset.schema().kind(col) == ColumnKind::Numeric &&
            col != dataset.schema().target_index())
            plan.column_stds[col] = column_std(dataset, col);
    plan.hood.resize(high_risk.size());
    detail::run_tasks(high_risk.size(), config.workers, [&](std::size_t i) {
        plan.hood[i] = index.query(high_risk[i], config.knn);
    });

    const std::size_t n_tasks = high_risk.size() * config.n_replicates;
    std::vector<std::vector<Cell>> synthetic(n_tasks);
    detail::run_tasks(n_tasks, config.workers, [&](std::size_t task) {
        const std::size_t i = task / config.n_replicates;
        const std::size_t replicate = task % config.n_replicates;
        synthetic[task] = detail::synthesize_row(plan, high_risk[i], i, replicate);
    });

    DatasetBuilder builder(dataset.schema());
    std::vector<Provenance> provenance;
    provenance.reserve(dataset.n_rows() - high_risk.size() + n_tasks);
    std::vector<Cell> cells(dataset.schema().size());
    for (std::size_t row = 0; row < dataset.n_rows(); ++row) {
        if (risk.is_high_risk(row)) continue;
        for (std::size_t col = 0; col < cells.size(); ++col) cells[col] = dataset.cell(col, row);
        builder.add_row(cells);
        provenance.push_back({Origin::Original, row, 0});
    }
    for (std::size_t task = 0; task < n_tasks; ++task) {
        builder.add_row(synthetic[task]);
        provenance.push_back({Origin::Synthetic, high_risk[task / config.n_replicates],
                              task % config.n_replicates});
    }
    return {std::move(builder).build(), std::move(provenance)};
}

inline SyntheticDataset private_smote(const Dataset& dataset, const QiSet& qis,
                                      const SynthesisConfig& config) {
    if (config.n_replicates < 1) throw InputError("synthesis: n_replicates must be at least 1");
    if (config.knn < 1) throw InputError("synthesis: knn must be at least 1");
    const RiskReport risk = highest_risk(dataset, qis, config.risk_threshold);
    if (risk.high_risk().empty())
        return detail::unchanged_release(dataset, config.risk_threshold);
    const NeighborIndex index(encode(dataset), config.knn);
    return private_smote(dataset, config, risk, index);
}

namespace detail {

struct BinarySplit {
    std::vector<std::size_t> minority;  // ascending row ids
    std::vector<std::size_t> majority;
    Cell minority_value;
    Cell majority_value;
};

// Requires exactly two distinct target values. On equal counts the greater
// value (numeric order, or lexicographic label order) is the minority.
inline BinarySplit split_binary_target(const Dataset& dataset) {
    const std::size_t t = dataset.schema().target_index();
    std::vector<Cell> values;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t row = 0; row < dataset.n_rows(); ++row) {
        const Cell value = dataset.cell(t, row);
        const auto found = std::find(values.begin(), values.end(), value);
        if (found == values.end()) {
            values.push_back(value);
            members.emplace_back();
            members.back().push_back(row);
        } else {
            members[static_cast<std::size_t>(found - values.begin())].push_back(row);
        }
    }
    if (values.size() != 2)
        throw InputError("binary target required: column '" + dataset.schema().target() +
                         "' has " + std::to_string(values.size()) + " distinct values");
    std::size_t lo = members[0].size() < members[1].size() ? 0 : 1;
    if (members[0].size() == members[1].size()) lo = values[0] < values[1] ? 1 : 0;
    return {members[lo], members[1 - lo], values[lo], values[1 - lo]};
}

}  // namespace detail

// Vanilla SMOTE: keep every original row and append uniformly interpolated
// minority-class rows until minority/majority reaches `ratio`.
inline Dataset baseline_smote(const Dataset& dataset, double ratio, std::size_t knn,
                              std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw InputError("smote: ratio must be in (0, 1]");
    const detail::BinarySplit split = detail::split_binary_target(dataset);
    const auto target_minority = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(split.majority.size())));
    if (target_minority <= split.minority.size())
        throw InputError("smote: minority/majority ratio already at or above " +
                         std::to_string(ratio));
    const std::size_t n_new = target_minority - split.minority.size();

    const Dataset minority = dataset.take_rows(split.minority);
    const NeighborIndex index(encode(minority), knn);

    const Schema& schema = dataset.schema();
    DatasetBuilder builder(schema);
    std::vector<Cell> cells(schema.size());
    for (std::size_t row = 0; row < dataset.n_rows(); ++row) {
        for (std::size_t col = 0; col < cells.size(); ++col) cells[col] = dataset.cell(col, row);
        builder.add_row(cells);
    }

    const RngStream base_stream = RngStream(seed).child(stream_domain::kBaselineSmote);
    for (std::size_t sample = 0; sample < n_new; ++sample) {
        RngStream stream = base_stream.child(sample);
        const std::size_t base_local = uniform_index(stream, split.minority.size());
        const auto neighbors = index.query(base_local);
        const std::size_t pair_local = neighbors[uniform_index(stream, neighbors.size())];
        const std::size_t base_row = split.minority[base_local];
        const std::size_t pair_row = split.minority[pair_local];
        for (std::size_t col = 0; col < schema.size(); ++col) {
            if (col == schema.target_index()) {
                cells[col] = split.minority_value;
            } else if (schema.kind(col) == ColumnKind::Numeric) {
                cells[col] = lerp(dataset.number(col, base_row), dataset.number(col, pair_row),
                                  stream.unit_open());
            } else {
                cells[col] = dataset.label(col, base_row);
            }
        }
        builder.add_row(cells);
    }
    return std::move(builder).build();
}

// Random under-sampling: drop majority rows uniformly until
// minority/majority = ratio. Keeps original row order.
inline Dataset baseline_rus(const Dataset& dataset, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw InputError("rus: ratio must be in (0, 1]");
    const detail::BinarySplit split = detail::split_binary_target(dataset);
    const auto target_majority = static_cast<std::size_t>(
        std::floor(static_cast<double>(split.minority.size()) / ratio));
    const std::size_t keep = std::min(split.majority.size(), target_majority);

    RngStream stream = RngStream(seed).child(stream_domain::kRandomUndersample);
    std::vector<std::size_t> pool = split.majority;
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + uniform_index(stream, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(keep);

    std::vector<std::size_t> rows = split.minority;
    rows.insert(rows.end(), pool.begin(), pool.end());
    std::sort(rows.begin(), rows.end());
    return dataset.take_rows(rows);
}

}  // namespace psmote
