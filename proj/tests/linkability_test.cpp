#include "psmote/linkability.hpp"

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "support.hpp"

namespace psmote {
namespace {

Schema xy_schema() {
    return Schema({{"x", ColumnKind::Numeric}, {"y", ColumnKind::Numeric}}, "y");
}

Dataset from_values(const std::vector<double>& xs) {
    DatasetBuilder b(xy_schema());
    for (const double x : xs) b.add_row({x, 0.0});
    return std::move(b).build();
}

QiSet qi_x(const Dataset& d) { return QiSet(d.schema(), std::vector<std::string>{"x"}); }

TEST(ExactMatchRateTest, CopyScoresOne) {
    const Dataset d = from_values({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(exact_match_rate(d, d, qi_x(d)), 1.0);
}

TEST(ExactMatchRateTest, DisjointScoresZero) {
    const Dataset original = from_values({1, 2, 3});
    const Dataset variant = from_values({10, 20, 30});
    EXPECT_DOUBLE_EQ(exact_match_rate(original, variant, qi_x(original)), 0.0);
}

TEST(ExactMatchRateTest, PartialOverlapCountsOriginalRows) {
    const Dataset original = from_values({1, 2, 3});
    const Dataset variant = from_values({1});
    EXPECT_NEAR(exact_match_rate(original, variant, qi_x(original)), 1.0 / 3.0, 1e-15);
}

TEST(ExactMatchRateTest, RemovingVariantRowsNeverIncreasesRate) {
    const Dataset original = from_values({1, 2, 3, 4, 5, 6});
    const Dataset variant = from_values({2, 4, 6, 8, 10});
    const double full = exact_match_rate(original, variant, qi_x(original));
    for (std::size_t drop = 0; drop < variant.n_rows(); ++drop) {
        std::vector<std::size_t> keep;
        for (std::size_t row = 0; row < variant.n_rows(); ++row)
            if (row != drop) keep.push_back(row);
        const Dataset smaller = variant.take_rows(keep);
        EXPECT_LE(exact_match_rate(original, smaller, qi_x(original)), full);
    }
}

TEST(ExactMatchRateTest, SchemaMismatchRejected) {
    const Dataset d = from_values({1});
    DatasetBuilder b(Schema({{"other", ColumnKind::Numeric}, {"y", ColumnKind::Numeric}}, "y"));
    b.add_row({1.0, 0.0});
    EXPECT_THROW(exact_match_rate(d, std::move(b).build(), qi_x(d)), InputError);
}

TEST(NormalizedRiskTest, FormulaAndClamping) {
    EXPECT_DOUBLE_EQ(normalized_risk(0.6, 0.2), 0.5);
    EXPECT_DOUBLE_EQ(normalized_risk(0.1, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(normalized_risk(1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(normalized_risk(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(normalized_risk(0.7, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(normalized_risk(1.0, 0.999), 1.0);
}

TEST(KnnLinkabilityTest, CopyVariantIsFullyLinkable) {
    const Dataset original = from_values({1, 2, 3, 4, 5});
    const Dataset control = from_values({10, 20});
    const LinkabilityReport report =
        knn_linkability(original, original, control, qi_x(original), 1);
    EXPECT_DOUBLE_EQ(report.exact_match_rate, 1.0);
    EXPECT_DOUBLE_EQ(report.knn_attack_rate, 1.0);
    EXPECT_DOUBLE_EQ(report.control_attack_rate, 0.0);
    EXPECT_DOUBLE_EQ(report.normalized_risk, 1.0);
    EXPECT_EQ(report.n_attacked, original.n_rows());
}

TEST(KnnLinkabilityTest, DisjointVariantHasZeroRisk) {
    const Dataset original = from_values({1, 2, 3});
    const Dataset variant = from_values({100, 200, 300});
    const Dataset control = from_values({50, 60});
    const LinkabilityReport report =
        knn_linkability(original, variant, control, qi_x(original), 2);
    EXPECT_DOUBLE_EQ(report.exact_match_rate, 0.0);
    EXPECT_DOUBLE_EQ(report.knn_attack_rate, 0.0);
    EXPECT_DOUBLE_EQ(report.control_attack_rate, 0.0);
    EXPECT_DOUBLE_EQ(report.normalized_risk, 0.0);
}

TEST(KnnLinkabilityTest, ControlMatchesLowerNormalizedRisk) {
    // Variant contains exact copies of both control rows, so the control
    // baseline saturates and no excess risk remains.
    const Dataset original = from_values({1, 2, 3});
    const Dataset variant = from_values({1, 2, 3, 50, 60});
    const Dataset control = from_values({50, 60});
    const LinkabilityReport report =
        knn_linkability(original, variant, control, qi_x(original), 1);
    EXPECT_DOUBLE_EQ(report.knn_attack_rate, 1.0);
    EXPECT_DOUBLE_EQ(report.control_attack_rate, 1.0);
    EXPECT_DOUBLE_EQ(report.normalized_risk, 0.0);
}

TEST(KnnLinkabilityTest, ProvenanceGroundTruthHandComputed) {
    // Descendant of row 0 sits next to it; descendant of row 1 sits nearer
    // to row 2 than to its own source. At k=1 only the first query links.
    const Dataset original = from_values({0, 10, 20, 30});
    const Dataset variant = from_values({0.5, 21});
    const Dataset control = from_values({100});
    const std::vector<Provenance> provenance{{Origin::Synthetic, 0, 0},
                                             {Origin::Synthetic, 1, 0}};

    const LinkabilityReport at_one =
        knn_linkability(original, variant, control, qi_x(original), 1, &provenance);
    EXPECT_EQ(at_one.n_attacked, 2u);
    EXPECT_DOUBLE_EQ(at_one.knn_attack_rate, 0.5);
    EXPECT_DOUBLE_EQ(at_one.control_attack_rate, 0.0);
    EXPECT_DOUBLE_EQ(at_one.normalized_risk, 0.5);

    const LinkabilityReport at_two =
        knn_linkability(original, variant, control, qi_x(original), 2, &provenance);
    EXPECT_DOUBLE_EQ(at_two.knn_attack_rate, 1.0);
}

TEST(KnnLinkabilityTest, EncodingStatsComeFromOriginal) {
    // Column scales chosen so that ranking under original-fitted statistics
    // differs from ranking under variant-fitted ones: with the original's
    // stds the non-descendant is retrieved first, so the attack must miss.
    DatasetBuilder ob(Schema({{"q1", ColumnKind::Numeric},
                              {"q2", ColumnKind::Numeric},
                              {"y", ColumnKind::Numeric}},
                             "y"));
    ob.add_row({0.0, 0.0, 0.0});
    ob.add_row({10.0, 1000.0, 0.0});
    const Dataset original = std::move(ob).build();

    DatasetBuilder vb(original.schema());
    vb.add_row({2.0, 900.0, 0.0});   // descendant of row 0
    vb.add_row({8.0, 100.0, 0.0});   // descendant of row 1
    const Dataset variant = std::move(vb).build();

    DatasetBuilder cb(original.schema());
    cb.add_row({50.0, 500.0, 0.0});
    const Dataset control = std::move(cb).build();

    const std::vector<Provenance> provenance{{Origin::Synthetic, 0, 0},
                                             {Origin::Synthetic, 1, 0}};
    const QiSet qis(original.schema(), std::vector<std::string>{"q1", "q2"});
    const LinkabilityReport report =
        knn_linkability(original, variant, control, qis, 1, &provenance);
    EXPECT_DOUBLE_EQ(report.knn_attack_rate, 0.0);
}

TEST(KnnLinkabilityTest, NoSyntheticRowsWarnsAndReportsZero) {
    const Dataset original = from_values({1, 2, 3});
    const Dataset control = from_values({9});
    const std::vector<Provenance> provenance{{Origin::Original, 0, 0},
                                             {Origin::Original, 1, 0},
                                             {Origin::Original, 2, 0}};
    WarningCapture capture;
    const LinkabilityReport report =
        knn_linkability(original, original, control, qi_x(original), 1, &provenance);
    EXPECT_EQ(report.n_attacked, 0u);
    EXPECT_DOUBLE_EQ(report.knn_attack_rate, 0.0);
    ASSERT_EQ(capture.messages().size(), 1u);
    EXPECT_NE(capture.messages()[0].find("no synthetic rows"), std::string::npos);
}

TEST(KnnLinkabilityTest, OversizedKClampsWithWarning) {
    const Dataset original = from_values({1, 2, 3});
    const Dataset variant = from_values({1, 2});
    const Dataset control = from_values({9});
    WarningCapture capture;
    const LinkabilityReport report =
        knn_linkability(original, variant, control, qi_x(original), 10);
    EXPECT_EQ(report.k, 2u);
    ASSERT_EQ(capture.messages().size(), 1u);
    EXPECT_NE(capture.messages()[0].find("clamped"), std::string::npos);
}

TEST(KnnLinkabilityTest, InputValidation) {
    const Dataset d = from_values({1, 2, 3});
    const Dataset empty = from_values({});
    EXPECT_THROW(knn_linkability(d, d, empty, qi_x(d), 1), InputError);
    EXPECT_THROW(knn_linkability(d, empty, d, qi_x(d), 1), InputError);
    EXPECT_THROW(knn_linkability(d, d, d, qi_x(d), 0), InputError);

    const std::vector<Provenance> short_prov{{Origin::Original, 0, 0}};
    EXPECT_THROW(knn_linkability(d, d, d, qi_x(d), 1, &short_prov), InputError);

    const std::vector<Provenance> bad_source{{Origin::Synthetic, 7, 0},
                                             {Origin::Original, 1, 0},
                                             {Origin::Original, 2, 0}};
    EXPECT_THROW(knn_linkability(d, d, d, qi_x(d), 1, &bad_source), InputError);
}

TEST(KnnLinkabilityTest, SyntheticVariantEndToEnd) {
    // Full pipeline sanity: every row high risk, synthetic replacements only.
    DatasetBuilder b(Schema({{"x", ColumnKind::Numeric},
                             {"z", ColumnKind::Numeric},
                             {"y", ColumnKind::Numeric}},
                            "y"));
    for (std::size_t i = 0; i < 120; ++i)
        b.add_row({static_cast<double>(i), static_cast<double>((i * 13) % 120),
                   static_cast<double>(i % 2)});
    const Dataset d = std::move(b).build();
    const QiSet qis(d.schema(), std::vector<std::string>{"x", "z"});

    const HoldoutSplit split = make_holdout(d, 0.2, 42);
    SynthesisConfig config;
    config.epsilon = PrivacyBudget(1.0);
    const SyntheticDataset out = private_smote(split.train, qis, config);

    // All QI tuples are unique, so every released row is synthetic and none
    // may reproduce an original tuple exactly.
    EXPECT_DOUBLE_EQ(exact_match_rate(split.train, out.dataset, qis), 0.0);

    const LinkabilityReport report =
        knn_linkability(split.train, out.dataset, split.control, qis, 10, &out.provenance);
    EXPECT_EQ(report.n_attacked, split.train.n_rows());
    EXPECT_GE(report.normalized_risk, 0.0);
    EXPECT_LE(report.normalized_risk, 1.0);
}

TEST(MakeHoldoutTest, SplitsSizesAndDisjointness) {
    std::vector<double> values(100);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
    const Dataset d = from_values(values);
    const HoldoutSplit split = make_holdout(d, 0.2, 42);
    EXPECT_EQ(split.train.n_rows(), 80u);
    EXPECT_EQ(split.control.n_rows(), 20u);

    std::set<double> seen;
    for (std::size_t row = 0; row < split.train.n_rows(); ++row)
        seen.insert(split.train.number(0, row));
    for (std::size_t row = 0; row < split.control.n_rows(); ++row) {
        const bool inserted = seen.insert(split.control.number(0, row)).second;
        EXPECT_TRUE(inserted) << "row leaked into both sides";
    }
    EXPECT_EQ(seen.size(), 100u);
}

TEST(MakeHoldoutTest, DeterministicAndSeedSensitive) {
    std::vector<double> values(50);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
    const Dataset d = from_values(values);
    EXPECT_EQ(make_holdout(d, 0.2, 7).control, make_holdout(d, 0.2, 7).control);
    EXPECT_NE(make_holdout(d, 0.2, 7).control, make_holdout(d, 0.2, 8).control);
}

TEST(MakeHoldoutTest, FractionValidation) {
    const Dataset d = from_values({1, 2, 3, 4, 5});
    EXPECT_THROW(make_holdout(d, 0.0, 1), InputError);
    EXPECT_THROW(make_holdout(d, 1.0, 1), InputError);
    EXPECT_THROW(make_holdout(d, -0.5, 1), InputError);
    EXPECT_THROW(make_holdout(from_values({1, 2, 3}), 0.1, 1), InputError);
}

TEST(LinkabilityJsonTest, ReportShape) {
    LinkabilityReport report;
    report.exact_match_rate = 0.25;
    report.knn_attack_rate = 0.5;
    report.control_attack_rate = 0.1;
    report.normalized_risk = normalized_risk(0.5, 0.1);
    report.k = 10;
    report.n_attacked = 40;
    const auto doc = linkability_to_json(report, {"age", "city"}, 42);
    EXPECT_DOUBLE_EQ(doc["exact_match_rate"].get<double>(), 0.25);
    EXPECT_DOUBLE_EQ(doc["normalized_risk"].get<double>(), (0.5 - 0.1) / 0.9);
    EXPECT_EQ(doc["k"], 10);
    EXPECT_EQ(doc["n_attacked"], 40);
    EXPECT_EQ(doc["qis"], (std::vector<std::string>{"age", "city"}));
    EXPECT_EQ(doc["seed"], 42);
    EXPECT_TRUE(linkability_to_json(report, {"age"})["seed"].is_null());
}

}  // namespace
}  // namespace psmote
