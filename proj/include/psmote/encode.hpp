#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "psmote/dataset.hpp"
#include "psmote/error.hpp"

namespace psmote {

struct EncodedColumnRange {
    std::size_t offset = 0;
    std::size_t width = 0;  // 0 = column not part of the matrix
};

// Dense row-major matrix of encoded rows plus the mapping back to source
// columns and the standardization statistics that produced it.
class EncodedMatrix {
public:
    EncodedMatrix(std::size_t rows, std::size_t cols, std::vector<EncodedColumnRange> ranges,
                  std::vector<double> means, std::vector<double> stds)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0), ranges_(std::move(ranges)),
          means_(std::move(means)), stds_(std::move(stds)) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    // Indexed by source column; width 0 for the target and unselected columns.
    const std::vector<EncodedColumnRange>& column_map() const { return ranges_; }
    double mean_of(std::size_t source_col) const { return means_[source_col]; }
    double std_of(std::size_t source_col) const { return stds_[source_col]; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
    std::vector<EncodedColumnRange> ranges_;
    std::vector<double> means_, stds_;
};

// Fits one-hot + z-score statistics on one dataset and applies them to any
// dataset with the same columns. Numeric columns are standardized with the
// population std (constant columns map to zero); nominal columns expand to
// one-hot blocks with categories in first-appearance order of the fit
// data. Categories unseen at fit time transform to an all-zero block.
class Encoder {
public:
    static Encoder fit(const Dataset& dataset) {
        std::vector<std::size_t> columns;
        for (std::size_t c = 0; c < dataset.schema().size(); ++c)
            if (c != dataset.schema().target_index()) columns.push_back(c);
        return fit(dataset, columns);
    }

    static Encoder fit(const Dataset& dataset, std::span<const std::size_t> columns) {
        if (dataset.n_rows() == 0) throw InputError("encode: dataset is empty");
        Encoder encoder;
        std::size_t offset = 0;
        for (const std::size_t c : columns) {
            if (c == dataset.schema().target_index())
                throw InputError("encode: target column cannot be encoded");
            ColumnModel model;
            model.source_col = c;
            model.name = dataset.schema().name(c);
            model.kind = dataset.schema().kind(c);
            model.offset = offset;
            if (model.kind == ColumnKind::Numeric) {
                const auto values = dataset.numeric(c);
                model.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                             static_cast<double>(values.size());
                double accum = 0.0;
                for (const double v : values) accum += (v - model.mean) * (v - model.mean);
                model.std = std::sqrt(accum / static_cast<double>(values.size()));
                model.width = 1;
            } else {
                model.categories = dataset.categories(c);
                for (std::size_t i = 0; i < model.categories.size(); ++i)
                    model.category_index.emplace(model.categories[i],
                                                 static_cast<std::int32_t>(i));
                model.width = model.categories.size();
            }
            offset += model.width;
            encoder.models_.push_back(std::move(model));
        }
        encoder.total_width_ = offset;
        encoder.schema_size_ = dataset.schema().size();
        return encoder;
    }

    EncodedMatrix transform(const Dataset& dataset) const {
        std::vector<EncodedColumnRange> ranges(schema_size_);
        std::vector<double> means(schema_size_, 0.0);
        std::vector<double> stds(schema_size_, 0.0);
        for (const auto& model : models_) {
            if (model.source_col >= dataset.schema().size() ||
                dataset.schema().name(model.source_col) != model.name ||
                dataset.schema().kind(model.source_col) != model.kind)
                throw InputError("encoder fitted on a different schema (column '" +
                                 model.name + "')");
            ranges[model.source_col] = {model.offset, model.width};
            means[model.source_col] = model.mean;
            stds[model.source_col] = model.std;
        }

        EncodedMatrix out(dataset.n_rows(), total_width_, std::move(ranges),
                          std::move(means), std::move(stds));
        for (const auto& model : models_) {
            if (model.kind == ColumnKind::Numeric) {
                const auto values = dataset.numeric(model.source_col);
                for (std::size_t r = 0; r < values.size(); ++r) {
                    out.row(r)[model.offset] =
                        model.std > 0.0 ? (values[r] - model.mean) / model.std : 0.0;
                }
            } else {
                for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
                    const auto it = model.category_index.find(dataset.label(model.source_col, r));
                    if (it != model.category_index.end())
                        out.row(r)[model.offset + static_cast<std::size_t>(it->second)] = 1.0;
                }
            }
        }
        return out;
    }

    std::size_t width() const { return total_width_; }

private:
    struct ColumnModel {
        std::size_t source_col = 0;
        std::string name;
        ColumnKind kind = ColumnKind::Numeric;
        std::size_t offset = 0;
        std::size_t width = 0;
        double mean = 0.0;
        double std = 0.0;
        std::vector<std::string> categories;
        std::unordered_map<std::string, std::int32_t> category_index;
    };

    std::vector<ColumnModel> models_;
    std::size_t total_width_ = 0;
    std::size_t schema_size_ = 0;
};

// One-hot + standardization of all non-target columns, statistics fitted on
// the dataset itself.
inline EncodedMatrix encode(const Dataset& dataset) {
    return Encoder::fit(dataset).transform(dataset);
}

}  // namespace psmote
