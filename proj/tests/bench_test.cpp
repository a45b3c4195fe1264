#include <gtest/gtest.h>

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psmote/bench.hpp"
#include "support.hpp"

namespace psmote {
namespace {

Dataset sweep_fixture() {
    DatasetBuilder builder(Schema({{"age", ColumnKind::Numeric},
                                   {"income", ColumnKind::Numeric},
                                   {"city", ColumnKind::Nominal},
                                   {"label", ColumnKind::Nominal}},
                                  "label"));
    // A duplicated block keeps a few QI combinations safe while the
    // remaining rows are unique, so both branches stay exercised.
    for (int i = 0; i < 4; ++i) builder.add_row({30.0, 50000.0, "lyon", "yes"});
    for (int i = 0; i < 20; ++i) {
        builder.add_row({20.0 + i, 30000.0 + 1000.0 * i, i % 2 == 0 ? "paris" : "nice",
                         i % 3 == 0 ? "yes" : "no"});
    }
    return std::move(builder).build();
}

QiSet fixture_qis(const Dataset& data) {
    return QiSet(data.schema(), std::vector<std::size_t>{0, 1, 2});
}

TEST(SweepTest, VariantCountMatchesGridCardinality) {
    const Dataset data = sweep_fixture();
    const SweepGrid grid{{1, 2, 3}, {1, 3, 5}, {0.5, 1.0, 5.0}};
    const auto [entries, report] = sweep(data, fixture_qis(data), grid, 42);
    EXPECT_EQ(entries.size(), 27u);
    EXPECT_EQ(report.variants_generated, 27u);
}

TEST(SweepTest, EntriesMatchStandaloneRuns) {
    const Dataset data = sweep_fixture();
    const QiSet qis = fixture_qis(data);
    const SweepGrid grid{{1, 2}, {2, 4}, {1.0, 10.0}};
    const auto [entries, report] = sweep(data, qis, grid, 7);
    ASSERT_EQ(entries.size(), 8u);
    for (const SweepEntry& entry : entries) {
        const SyntheticDataset direct = private_smote(data, qis, entry.config);
        EXPECT_EQ(entry.variant.dataset, direct.dataset);
        EXPECT_EQ(entry.variant.provenance, direct.provenance);
    }
}

TEST(SweepTest, GridOrderEpsilonVariesFastest) {
    const Dataset data = sweep_fixture();
    const SweepGrid grid{{1, 2}, {3}, {0.5, 5.0}};
    const auto [entries, report] = sweep(data, fixture_qis(data), grid, 42);
    ASSERT_EQ(entries.size(), 4u);
    EXPECT_EQ(entries[0].config.n_replicates, 1u);
    EXPECT_EQ(entries[0].config.epsilon.epsilon(), 0.5);
    EXPECT_EQ(entries[1].config.n_replicates, 1u);
    EXPECT_EQ(entries[1].config.epsilon.epsilon(), 5.0);
    EXPECT_EQ(entries[2].config.n_replicates, 2u);
    EXPECT_EQ(entries[2].config.epsilon.epsilon(), 0.5);
    EXPECT_EQ(entries[3].config.n_replicates, 2u);
    EXPECT_EQ(entries[3].config.epsilon.epsilon(), 5.0);
}

TEST(SweepTest, DeterministicAcrossRepeats) {
    const Dataset data = sweep_fixture();
    const QiSet qis = fixture_qis(data);
    const SweepGrid grid{{1, 3}, {2, 3}, {1.0}};
    const auto [first, report_a] = sweep(data, qis, grid, 99);
    const auto [second, report_b] = sweep(data, qis, grid, 99);
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        EXPECT_EQ(first[i].variant.dataset, second[i].variant.dataset);
        EXPECT_EQ(first[i].variant.provenance, second[i].variant.provenance);
    }
}

TEST(SweepTest, SeedChangesVariants) {
    const Dataset data = sweep_fixture();
    const QiSet qis = fixture_qis(data);
    const SweepGrid grid{{1}, {3}, {1.0}};
    const auto [a, ra] = sweep(data, qis, grid, 1);
    const auto [b, rb] = sweep(data, qis, grid, 2);
    EXPECT_FALSE(a[0].variant.dataset == b[0].variant.dataset);
}

TEST(SweepTest, ReportInvariants) {
    const Dataset data = sweep_fixture();
    const SweepGrid grid{{1, 2, 3}, {3}, {1.0}};
    const auto [entries, report] = sweep(data, fixture_qis(data), grid, 42);
    EXPECT_GT(report.total_elapsed, 0.0);
    EXPECT_DOUBLE_EQ(report.time_per_variant,
                     report.total_elapsed / static_cast<double>(report.variants_generated));
    EXPECT_GT(report.rows_per_second, 0.0);
    double per_variant_sum = 0.0;
    std::size_t rows = 0;
    for (const SweepEntry& entry : entries) {
        EXPECT_GE(entry.elapsed_seconds, 0.0);
        per_variant_sum += entry.elapsed_seconds;
        rows += entry.variant.dataset.n_rows();
    }
    // The wall span also covers the shared risk report and neighbor fit.
    EXPECT_GE(report.total_elapsed, per_variant_sum);
    EXPECT_DOUBLE_EQ(report.rows_per_second,
                     static_cast<double>(rows) / report.total_elapsed);
}

TEST(SweepTest, NoHighRiskRowsReleasesInputForEveryGridPoint) {
    DatasetBuilder builder(
        Schema({{"a", ColumnKind::Numeric}, {"y", ColumnKind::Nominal}}, "y"));
    for (int i = 0; i < 9; ++i) builder.add_row({static_cast<double>(i % 3), "yes"});
    const Dataset data = std::move(builder).build();
    const QiSet qis(data.schema(), std::vector<std::size_t>{0});
    WarningCapture warnings;
    const auto [entries, report] = sweep(data, qis, SweepGrid{{1, 2}, {3}, {1.0}}, 42);
    ASSERT_EQ(entries.size(), 2u);
    for (const SweepEntry& entry : entries) EXPECT_EQ(entry.variant.dataset, data);
    EXPECT_EQ(warnings.messages().size(), 2u);
}

TEST(SweepTest, RejectsEmptyGridDimensions) {
    const Dataset data = sweep_fixture();
    const QiSet qis = fixture_qis(data);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{}, {3}, {1.0}}, 42), InputError);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{1}, {}, {1.0}}, 42), InputError);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{1}, {3}, {}}, 42), InputError);
}

TEST(SweepTest, RejectsInvalidGridValues) {
    const Dataset data = sweep_fixture();
    const QiSet qis = fixture_qis(data);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{0}, {3}, {1.0}}, 42), InputError);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{1}, {0}, {1.0}}, 42), InputError);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{1}, {3}, {0.0}}, 42), InputError);
    EXPECT_THROW(sweep(data, qis, SweepGrid{{1}, {3}, {-2.0}}, 42), InputError);
}

TEST(BenchJsonlTest, OneLinePerVariantPlusSummary) {
    const Dataset data = sweep_fixture();
    const SweepGrid grid{{1, 2}, {3}, {1.0, 5.0}};
    const auto [entries, report] = sweep(data, fixture_qis(data), grid, 42);
    const std::string jsonl = bench_to_jsonl(entries, report, 42);

    std::vector<nlohmann::json> lines;
    std::istringstream stream(jsonl);
    std::string line;
    while (std::getline(stream, line)) lines.push_back(nlohmann::json::parse(line));
    ASSERT_EQ(lines.size(), 5u);

    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(lines[i]["n_replicates"].get<std::size_t>(),
                  entries[i].config.n_replicates);
        EXPECT_EQ(lines[i]["knn"].get<std::size_t>(), entries[i].config.knn);
        EXPECT_EQ(lines[i]["epsilon"].get<double>(), entries[i].config.epsilon.epsilon());
        EXPECT_EQ(lines[i]["rows"].get<std::size_t>(), entries[i].variant.dataset.n_rows());
        EXPECT_TRUE(lines[i]["energy"].is_null());
    }
    const nlohmann::json& summary = lines.back();
    EXPECT_EQ(summary["variants_generated"].get<std::size_t>(), 4u);
    EXPECT_EQ(summary["seed"].get<std::uint64_t>(), 42u);
    EXPECT_TRUE(summary["energy"].is_null());
    EXPECT_DOUBLE_EQ(summary["time_per_variant"].get<double>(), report.time_per_variant);
}

}  // namespace
}  // namespace psmote
