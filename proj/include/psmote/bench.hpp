#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psmote/synthesis.hpp"

namespace psmote {

struct SweepGrid {
    std::vector<std::size_t> n_replicates;
    std::vector<std::size_t> knn;
    std::vector<double> epsilons;

    std::size_t size() const { return n_replicates.size() * knn.size() * epsilons.size(); }
};

struct SweepEntry {
    SynthesisConfig config;
    SyntheticDataset variant;
    double elapsed_seconds = 0.0;
};

struct BenchReport {
    std::size_t variants_generated = 0;
    double total_elapsed = 0.0;      // wall span of the whole sweep, seconds
    double time_per_variant = 0.0;   // total_elapsed / variants_generated
    double rows_per_second = 0.0;    // released rows across all variants / total_elapsed
};

// One synthesis run per grid point (epsilon varies fastest, then knn, then
// n_replicates). The risk report and the neighbor table at the largest
// requested k are computed once and shared: smaller k values read a prefix
// of the same distance-ordered neighbor lists, so every variant is
// bit-identical to a standalone run with that configuration.
inline std::pair<std::vector<SweepEntry>, BenchReport> sweep(const Dataset& dataset,
                                                             const QiSet& qis,
                                                             const SweepGrid& grid,
                                                             std::uint64_t seed,
                                                             std::size_t workers = 1) {
    if (grid.n_replicates.empty() || grid.knn.empty() || grid.epsilons.empty())
        throw InputError("sweep: every grid dimension needs at least one value");
    for (const std::size_t n : grid.n_replicates)
        if (n < 1) throw InputError("sweep: n_replicates values must be at least 1");
    std::size_t k_max = 0;
    for (const std::size_t k : grid.knn) {
        if (k < 1) throw InputError("sweep: knn values must be at least 1");
        k_max = std::max(k_max, k);
    }
    std::vector<PrivacyBudget> budgets;
    for (const double epsilon : grid.epsilons) budgets.emplace_back(epsilon);

    const auto sweep_start = std::chrono::steady_clock::now();
    const RiskReport risk = highest_risk(dataset, qis);
    // The index is only needed when something will be replaced.
    const bool any_high_risk = !risk.high_risk().empty();
    std::optional<NeighborIndex> index;
    if (any_high_risk) index.emplace(encode(dataset), k_max);

    std::vector<SweepEntry> entries;
    entries.reserve(grid.size());
    std::size_t total_rows = 0;
    for (const std::size_t n : grid.n_replicates)
        for (const std::size_t k : grid.knn)
            for (std::size_t e = 0; e < budgets.size(); ++e) {
                SynthesisConfig config;
                config.n_replicates = n;
                config.knn = k;
                config.epsilon = budgets[e];
                config.seed = seed;
                config.workers = workers;
                const auto start = std::chrono::steady_clock::now();
                SyntheticDataset variant =
                    any_high_risk ? private_smote(dataset, config, risk, *index)
                                  : detail::unchanged_release(dataset, config.risk_threshold);
                const std::chrono::duration<double> elapsed =
                    std::chrono::steady_clock::now() - start;
                total_rows += variant.dataset.n_rows();
                entries.push_back({config, std::move(variant), elapsed.count()});
            }

    const std::chrono::duration<double> span = std::chrono::steady_clock::now() - sweep_start;
    BenchReport report;
    report.variants_generated = entries.size();
    report.total_elapsed = span.count();
    report.time_per_variant = report.total_elapsed / static_cast<double>(entries.size());
    report.rows_per_second = static_cast<double>(total_rows) / report.total_elapsed;
    return {std::move(entries), report};
}

// One JSON object per variant, then a summary object, newline separated.
inline std::string bench_to_jsonl(const std::vector<SweepEntry>& entries,
                                  const BenchReport& report, std::uint64_t seed) {
    std::ostringstream out;
    for (const SweepEntry& entry : entries) {
        nlohmann::ordered_json line;
        line["n_replicates"] = entry.config.n_replicates;
        line["knn"] = entry.config.knn;
        line["epsilon"] = entry.config.epsilon.epsilon();
        line["rows"] = entry.variant.dataset.n_rows();
        line["elapsed_seconds"] = entry.elapsed_seconds;
        line["energy"] = nullptr;
        out << line.dump() << "\n";
    }
    nlohmann::ordered_json summary;
    summary["variants_generated"] = report.variants_generated;
    summary["total_elapsed"] = report.total_elapsed;
    summary["time_per_variant"] = report.time_per_variant;
    summary["rows_per_second"] = report.rows_per_second;
    summary["seed"] = seed;
    summary["energy"] = nullptr;
    out << summary.dump() << "\n";
    return out.str();
}

}  // namespace psmote
