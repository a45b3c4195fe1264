#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "psmote/dataset.hpp"
#include "psmote/error.hpp"

namespace psmote {

// Definition 1 threshold: a record is highest-risk when its QI value
// combination occurs at most this many times.
inline constexpr std::size_t kHighRiskThreshold = 2;

// Partition of row ids keyed by the packed tuple of raw QI values.
inline std::unordered_map<std::string, std::vector<std::size_t>> equivalence_classes(
    const Dataset& dataset, const QiSet& qis) {
    std::unordered_map<std::string, std::vector<std::size_t>> classes;
    classes.reserve(dataset.n_rows());
    for (std::size_t row = 0; row < dataset.n_rows(); ++row)
        classes[qi_tuple_key(dataset, qis, row)].push_back(row);
    return classes;
}

class RiskReport {
public:
    RiskReport(std::vector<std::size_t> class_size, std::size_t threshold)
        : class_size_(std::move(class_size)), threshold_(threshold) {
        if (class_size_.empty()) throw InputError("risk report: dataset has no rows");
        min_k_ = class_size_[0];
        for (std::size_t row = 0; row < class_size_.size(); ++row) {
            min_k_ = std::min(min_k_, class_size_[row]);
            if (class_size_[row] <= threshold_) high_risk_.push_back(row);
        }
    }

    std::size_t n_rows() const { return class_size_.size(); }
    std::size_t class_size(std::size_t row) const { return class_size_.at(row); }
    std::size_t min_k() const { return min_k_; }
    std::size_t threshold() const { return threshold_; }

    // Ascending row ids whose class size is at most the threshold.
    const std::vector<std::size_t>& high_risk() const { return high_risk_; }

    bool is_high_risk(std::size_t row) const { return class_size_.at(row) <= threshold_; }

    // Histogram over distinct QI combinations: class size -> number of classes.
    std::map<std::size_t, std::size_t> class_histogram() const {
        std::map<std::size_t, std::size_t> occurrences;
        for (const std::size_t size : class_size_) ++occurrences[size];
        std::map<std::size_t, std::size_t> histogram;
        // Each class of size s contributes s rows to occurrences[s].
        for (const auto& [size, rows] : occurrences) histogram[size] = rows / size;
        return histogram;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc;
        doc["min_k"] = min_k_;
        doc["high_risk_count"] = high_risk_.size();
        doc["high_risk_ids"] = high_risk_;
        nlohmann::ordered_json histogram = nlohmann::ordered_json::object();
        for (const auto& [size, count] : class_histogram())
            histogram[std::to_string(size)] = count;
        doc["class_histogram"] = std::move(histogram);
        return doc;
    }

private:
    std::vector<std::size_t> class_size_;
    std::size_t threshold_;
    std::size_t min_k_ = 0;
    std::vector<std::size_t> high_risk_;
};

inline RiskReport highest_risk(const Dataset& dataset, const QiSet& qis,
                               std::size_t threshold = kHighRiskThreshold) {
    std::vector<std::size_t> class_size(dataset.n_rows(), 0);
    for (const auto& [key, rows] : equivalence_classes(dataset, qis))
        for (const std::size_t row : rows) class_size[row] = rows.size();
    return RiskReport(std::move(class_size), threshold);
}

}  // namespace psmote
