#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "psmote/dataset.hpp"
#include "psmote/encode.hpp"
#include "psmote/error.hpp"

namespace psmote {

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct LossGradient {
    double loss = 0.0;
    std::vector<double> grad_weights;
    double grad_bias = 0.0;

    double max_norm() const {
        double m = std::abs(grad_bias);
        for (const double g : grad_weights) m = std::max(m, std::abs(g));
        return m;
    }
};

// Mean binary cross-entropy plus (l2/2)*||w||^2; the penalty spares the bias
// and does not scale with n, so duplicating every row leaves the objective
// unchanged.
inline LossGradient logistic_loss(const EncodedMatrix& features,
                                  const std::vector<double>& labels,
                                  const std::vector<double>& weights, double bias, double l2) {
    const std::size_t n = features.rows();
    if (n == 0 || labels.size() != n)
        throw InputError("logistic loss: labels must match feature rows");
    LossGradient out;
    out.grad_weights.assign(weights.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = features.row(i);
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
        // log(1 + exp(-|z|)) form keeps the loss finite for large |z|.
        out.loss += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
        const double residual = sigmoid(z) - labels[i];
        for (std::size_t j = 0; j < weights.size(); ++j)
            out.grad_weights[j] += residual * x[j];
        out.grad_bias += residual;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.loss *= inv_n;
    out.grad_bias *= inv_n;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out.grad_weights[j] = out.grad_weights[j] * inv_n + l2 * weights[j];
        out.loss += 0.5 * l2 * weights[j] * weights[j];
    }
    return out;
}

struct TrainingSettings {
    double learning_rate = 0.1;
    std::size_t max_iterations = 10000;
    double gradient_tolerance = 1e-6;
    double l2 = 1.0;
};

// Logistic regression over the one-hot + z-score encoding, fit by plain
// gradient descent from zero weights, so training is fully deterministic.
class LogisticModel {
public:
    static LogisticModel train(const Dataset& train, TrainingSettings settings = {}) {
        if (train.n_rows() == 0) throw InputError("classifier: training set is empty");
        const Encoder encoder = Encoder::fit(train);
        const EncodedMatrix features = encoder.transform(train);
        const Cell positive = positive_class(train);
        std::vector<double> labels(train.n_rows());
        std::size_t positives = 0;
        const std::size_t t = train.schema().target_index();
        for (std::size_t row = 0; row < train.n_rows(); ++row) {
            labels[row] = train.cell(t, row) == positive ? 1.0 : 0.0;
            positives += labels[row] == 1.0;
        }
        if (positives < 2 || train.n_rows() - positives < 2)
            throw InputError("classifier: need at least 2 rows per class");

        std::vector<double> weights(features.cols(), 0.0);
        double bias = 0.0;
        for (std::size_t iter = 0; iter < settings.max_iterations; ++iter) {
            const LossGradient lg = logistic_loss(features, labels, weights, bias, settings.l2);
            if (lg.max_norm() < settings.gradient_tolerance) break;
            for (std::size_t j = 0; j < weights.size(); ++j)
                weights[j] -= settings.learning_rate * lg.grad_weights[j];
            bias -= settings.learning_rate * lg.grad_bias;
        }
        return LogisticModel(encoder, std::move(weights), bias, positive);
    }

    // P(target = positive class) per row.
    std::vector<double> score(const Dataset& dataset) const {
        const EncodedMatrix features = encoder_.transform(dataset);
        std::vector<double> scores(dataset.n_rows());
        for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
            const auto x = features.row(i);
            double z = bias_;
            for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * x[j];
            scores[i] = sigmoid(z);
        }
        return scores;
    }

    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }
    const Cell& positive() const { return positive_; }

    // The greater of the two target values (numeric order, or lexicographic
    // label order), so the choice does not depend on row order.
    static Cell positive_class(const Dataset& dataset) {
        const std::size_t t = dataset.schema().target_index();
        std::vector<Cell> values;
        for (std::size_t row = 0; row < dataset.n_rows(); ++row) {
            const Cell value = dataset.cell(t, row);
            if (std::find(values.begin(), values.end(), value) == values.end())
                values.push_back(value);
        }
        if (values.size() != 2)
            throw InputError("classifier: binary target required, column '" +
                             dataset.schema().target() + "' has " +
                             std::to_string(values.size()) + " distinct values");
        return std::max(values[0], values[1]);
    }

private:
    LogisticModel(Encoder encoder, std::vector<double> weights, double bias, Cell positive)
        : encoder_(std::move(encoder)), weights_(std::move(weights)), bias_(bias),
          positive_(std::move(positive)) {}

    Encoder encoder_;
    std::vector<double> weights_;
    double bias_;
    Cell positive_;
};

inline LogisticModel train_classifier(const Dataset& train, TrainingSettings settings = {}) {
    return LogisticModel::train(train, settings);
}

// Mann-Whitney statistic: fraction of (positive, negative) pairs where the
// positive scores higher, ties counted half.
inline double auc_from_scores(const std::vector<double>& scores,
                              const std::vector<bool>& is_positive) {
    if (scores.size() != is_positive.size())
        throw InputError("auc: scores and labels differ in length");
    std::size_t n_pos = 0;
    for (const bool p : is_positive) n_pos += p;
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw InputError("auc: test set must contain both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of positive ranks with average ranks across tie groups.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t t = i; t < j; ++t)
            if (is_positive[order[t]]) positive_rank_sum += avg_rank;
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    return (positive_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
           (n_pos_d * static_cast<double>(n_neg));
}

inline double auc(const LogisticModel& model, const Dataset& test) {
    const std::vector<double> scores = model.score(test);
    std::vector<bool> is_positive(test.n_rows());
    const std::size_t t = test.schema().target_index();
    for (std::size_t row = 0; row < test.n_rows(); ++row)
        is_positive[row] = test.cell(t, row) == model.positive();
    return auc_from_scores(scores, is_positive);
}

// (Ra - Rb) / Rb * 100: by how many percent the variant-trained score
// deviates from the baseline-trained score.
inline double pct_diff(double ra, double rb) {
    if (rb == 0.0) throw InputError("pct_diff: baseline score is zero");
    return (ra - rb) / rb * 100.0;
}

struct RopeInterval {
    double low = -1.0;
    double high = 1.0;
};

enum class RopeLabel { Win, Draw, Lose };

inline std::string_view to_string(RopeLabel label) {
    switch (label) {
        case RopeLabel::Win: return "win";
        case RopeLabel::Draw: return "draw";
        default: return "lose";
    }
}

// Boundaries are inclusive: a percentage difference exactly on either edge
// still counts as practical equivalence.
inline RopeLabel rope_label(double pct, RopeInterval interval = {}) {
    if (!(interval.low <= interval.high))
        throw InputError("rope: interval low must not exceed high");
    if (pct > interval.high) return RopeLabel::Win;
    if (pct < interval.low) return RopeLabel::Lose;
    return RopeLabel::Draw;
}

struct UtilityReport {
    double auc_variant = 0.0;
    double auc_baseline = 0.0;
    double pct_diff = 0.0;
    RopeLabel label = RopeLabel::Draw;
    RopeInterval rope;
};

// Train one classifier on the released variant and one on the original
// training data, score both on the same held-out original rows, and label
// the relative change.
inline UtilityReport evaluate_utility(const Dataset& variant, const Dataset& baseline,
                                      const Dataset& holdout, RopeInterval rope = {},
                                      TrainingSettings settings = {}) {
    UtilityReport report;
    report.rope = rope;
    report.auc_variant = auc(train_classifier(variant, settings), holdout);
    report.auc_baseline = auc(train_classifier(baseline, settings), holdout);
    report.pct_diff = pct_diff(report.auc_variant, report.auc_baseline);
    report.label = rope_label(report.pct_diff, rope);
    return report;
}

inline nlohmann::ordered_json utility_to_json(const UtilityReport& report) {
    nlohmann::ordered_json doc;
    doc["auc_variant"] = report.auc_variant;
    doc["auc_baseline"] = report.auc_baseline;
    doc["pct_diff"] = report.pct_diff;
    doc["rope_label"] = std::string(to_string(report.label));
    doc["rope_interval"] = {report.rope.low, report.rope.high};
    return doc;
}

// Aggregate win/draw/lose counts over a sweep of variants.
inline nlohmann::ordered_json rope_counts_json(const std::vector<RopeLabel>& labels) {
    std::size_t wins = 0, draws = 0, losses = 0;
    for (const RopeLabel label : labels) {
        if (label == RopeLabel::Win) ++wins;
        else if (label == RopeLabel::Draw) ++draws;
        else ++losses;
    }
    return nlohmann::ordered_json{{"wins", wins}, {"draws", draws}, {"losses", losses}};
}

}  // namespace psmote
