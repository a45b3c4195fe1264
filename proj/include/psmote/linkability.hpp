#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "psmote/dataset.hpp"
#include "psmote/encode.hpp"
#include "psmote/error.hpp"
#include "psmote/neighbors.hpp"
#include "psmote/rng.hpp"
#include "psmote/synthesis.hpp"

namespace psmote {

struct LinkabilityReport {
    double exact_match_rate = 0.0;
    double knn_attack_rate = 0.0;
    double control_attack_rate = 0.0;
    double normalized_risk = 0.0;
    std::size_t k = 0;
    std::size_t n_attacked = 0;
};

// Attack success above what the control group achieves by chance, rescaled
// to [0, 1]. A control rate of 1 means matching is trivially easy and no
// excess risk can be attributed to the release.
inline double normalized_risk(double attack_rate, double control_rate) {
    if (control_rate >= 1.0) return 0.0;
    return std::max(0.0, (attack_rate - control_rate) / (1.0 - control_rate));
}

// Fraction of original rows whose full QI tuple appears verbatim in the
// variant (Definition 3 linkage).
inline double exact_match_rate(const Dataset& original, const Dataset& variant,
                               const QiSet& qis) {
    if (!(original.schema() == variant.schema()))
        throw InputError("exact match rate: datasets have different schemas");
    if (original.n_rows() == 0)
        throw InputError("exact match rate: original dataset is empty");
    std::unordered_set<std::string> variant_keys;
    variant_keys.reserve(variant.n_rows());
    for (std::size_t row = 0; row < variant.n_rows(); ++row)
        variant_keys.insert(qi_tuple_key(variant, qis, row));
    std::size_t matched = 0;
    for (std::size_t row = 0; row < original.n_rows(); ++row)
        matched += variant_keys.contains(qi_tuple_key(original, qis, row));
    return static_cast<double>(matched) / static_cast<double>(original.n_rows());
}

namespace detail {

// Rate of queries whose top-k retrieved variant rows contain a hit.
// `hit(query_row, variant_row)` decides a hit; `eligible` filters queries.
template <typename Eligible, typename Hit>
inline std::pair<double, std::size_t> retrieval_rate(const EncodedMatrix& queries,
                                                     const EncodedMatrix& variant,
                                                     std::size_t k, Eligible&& eligible,
                                                     Hit&& hit) {
    std::size_t attacked = 0;
    std::size_t successes = 0;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        if (!eligible(q)) continue;
        ++attacked;
        for (const std::size_t v : nearest_rows(variant, queries.row(q), k, variant.rows()))
            if (hit(q, v)) {
                ++successes;
                break;
            }
    }
    const double rate =
        attacked == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(attacked);
    return {rate, attacked};
}

}  // namespace detail

// k-NN linkage attack in the encoded QI subspace, baselined by a control
// group of held-out rows. Encoding statistics are fitted on the original
// dataset and applied to variant and control so distances are comparable.
// With provenance, attack success means a descendant of the queried original
// row is retrieved; without it (and always for the control), success means
// an exactly QI-matching row is retrieved.
inline LinkabilityReport knn_linkability(const Dataset& original, const Dataset& variant,
                                         const Dataset& control, const QiSet& qis,
                                         std::size_t k,
                                         const std::vector<Provenance>* provenance = nullptr) {
    if (!(original.schema() == variant.schema()) || !(original.schema() == control.schema()))
        throw InputError("linkability: datasets have different schemas");
    if (original.n_rows() == 0) throw InputError("linkability: original dataset is empty");
    if (variant.n_rows() == 0) throw InputError("linkability: variant dataset is empty");
    if (control.n_rows() == 0) throw InputError("linkability: control dataset is empty");
    if (k < 1) throw InputError("linkability: k must be at least 1");
    if (provenance && provenance->size() != variant.n_rows())
        throw InputError("linkability: provenance has " + std::to_string(provenance->size()) +
                         " entries for " + std::to_string(variant.n_rows()) + " variant rows");
    if (k > variant.n_rows()) {
        warn("linkability: k=" + std::to_string(k) + " clamped to variant size " +
             std::to_string(variant.n_rows()));
        k = variant.n_rows();
    }

    const Encoder encoder = Encoder::fit(original, qis.columns());
    const EncodedMatrix original_enc = encoder.transform(original);
    const EncodedMatrix variant_enc = encoder.transform(variant);
    const EncodedMatrix control_enc = encoder.transform(control);

    std::vector<std::string> variant_keys(variant.n_rows());
    for (std::size_t row = 0; row < variant.n_rows(); ++row)
        variant_keys[row] = qi_tuple_key(variant, qis, row);

    LinkabilityReport report;
    report.k = k;
    report.exact_match_rate = exact_match_rate(original, variant, qis);

    if (provenance) {
        std::vector<std::vector<std::size_t>> descendants(original.n_rows());
        for (std::size_t row = 0; row < provenance->size(); ++row) {
            const Provenance& p = (*provenance)[row];
            if (p.origin != Origin::Synthetic) continue;
            if (p.source >= original.n_rows())
                throw InputError("linkability: provenance source " + std::to_string(p.source) +
                                 " out of range for original dataset");
            descendants[p.source].push_back(row);
        }
        const auto [rate, attacked] = detail::retrieval_rate(
            original_enc, variant_enc, k,
            [&](std::size_t q) { return !descendants[q].empty(); },
            [&](std::size_t q, std::size_t v) {
                return std::find(descendants[q].begin(), descendants[q].end(), v) !=
                       descendants[q].end();
            });
        report.knn_attack_rate = rate;
        report.n_attacked = attacked;
        if (attacked == 0)
            warn("linkability: variant has no synthetic rows; attack rate reported as 0");
    } else {
        std::vector<std::string> original_keys(original.n_rows());
        for (std::size_t row = 0; row < original.n_rows(); ++row)
            original_keys[row] = qi_tuple_key(original, qis, row);
        const auto [rate, attacked] = detail::retrieval_rate(
            original_enc, variant_enc, k, [](std::size_t) { return true; },
            [&](std::size_t q, std::size_t v) { return original_keys[q] == variant_keys[v]; });
        report.knn_attack_rate = rate;
        report.n_attacked = attacked;
    }

    std::vector<std::string> control_keys(control.n_rows());
    for (std::size_t row = 0; row < control.n_rows(); ++row)
        control_keys[row] = qi_tuple_key(control, qis, row);
    const auto [control_rate, n_control] = detail::retrieval_rate(
        control_enc, variant_enc, k, [](std::size_t) { return true; },
        [&](std::size_t q, std::size_t v) { return control_keys[q] == variant_keys[v]; });
    (void)n_control;
    report.control_attack_rate = control_rate;
    report.normalized_risk = normalized_risk(report.knn_attack_rate, report.control_attack_rate);
    return report;
}

struct HoldoutSplit {
    Dataset train;
    Dataset control;
};

// Uniform row split without replacement; both sides keep ascending original
// row order. The control side receives round(fraction * n) rows.
inline HoldoutSplit make_holdout(const Dataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InputError("holdout: fraction must be strictly between 0 and 1");
    const std::size_t n = dataset.n_rows();
    const auto n_control =
        static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
    if (n_control == 0 || n_control == n)
        throw InputError("holdout: fraction " + std::to_string(fraction) + " on " +
                         std::to_string(n) + " rows leaves an empty side");

    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    RngStream stream = RngStream(seed).child(stream_domain::kHoldout);
    for (std::size_t i = 0; i < n_control; ++i) {
        const std::size_t j = i + uniform_index(stream, rows.size() - i);
        std::swap(rows[i], rows[j]);
    }
    std::vector<std::size_t> control_rows(rows.begin(),
                                          rows.begin() + static_cast<std::ptrdiff_t>(n_control));
    std::vector<std::size_t> train_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_control),
                                        rows.end());
    std::sort(control_rows.begin(), control_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {dataset.take_rows(train_rows), dataset.take_rows(control_rows)};
}

inline nlohmann::ordered_json linkability_to_json(const LinkabilityReport& report,
                                                  const std::vector<std::string>& qi_names,
                                                  std::optional<std::uint64_t> seed = {}) {
    nlohmann::ordered_json doc;
    doc["exact_match_rate"] = report.exact_match_rate;
    doc["knn_attack_rate"] = report.knn_attack_rate;
    doc["control_attack_rate"] = report.control_attack_rate;
    doc["normalized_risk"] = report.normalized_risk;
    doc["k"] = report.k;
    doc["n_attacked"] = report.n_attacked;
    doc["qis"] = qi_names;
    if (seed)
        doc["seed"] = *seed;
    else
        doc["seed"] = nullptr;
    return doc;
}

}  // namespace psmote
