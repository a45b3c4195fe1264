#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "psmote/csv.hpp"
#include "psmote/error.hpp"
#include "psmote/rng.hpp"

namespace psmote {

enum class ColumnKind { Numeric, Nominal };

inline std::string_view to_string(ColumnKind kind) {
    return kind == ColumnKind::Numeric ? "numeric" : "nominal";
}

struct ColumnSpec {
    std::string name;
    ColumnKind kind;
    bool operator==(const ColumnSpec&) const = default;
};

// Ordered column list plus the designated target column. Column names are
// unique; the target is excluded from QI candidacy and from encoding.
class Schema {
public:
    Schema(std::vector<ColumnSpec> columns, const std::string& target)
        : columns_(std::move(columns)) {
        if (columns_.size() < 2) throw InputError("schema needs at least 2 columns");
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            for (std::size_t j = i + 1; j < columns_.size(); ++j) {
                if (columns_[i].name == columns_[j].name)
                    throw InputError("duplicate column name: " + columns_[i].name);
            }
        }
        const auto found = find(target);
        if (!found) throw InputError("target column not present: " + target);
        target_index_ = *found;
    }

    const std::vector<ColumnSpec>& columns() const { return columns_; }
    std::size_t size() const { return columns_.size(); }
    std::size_t target_index() const { return target_index_; }
    const std::string& target() const { return columns_[target_index_].name; }
    ColumnKind kind(std::size_t col) const { return columns_[col].kind; }
    const std::string& name(std::size_t col) const { return columns_[col].name; }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i].name == name) return i;
        return std::nullopt;
    }

    std::size_t index_of(std::string_view name) const {
        const auto found = find(name);
        if (!found) throw InputError("unknown column: " + std::string(name));
        return *found;
    }

    bool operator==(const Schema&) const = default;

private:
    std::vector<ColumnSpec> columns_;
    std::size_t target_index_;
};

// One attribute value: a finite real or a non-empty category label.
using Cell = std::variant<double, std::string>;

// Non-empty subset of non-target column indices, in schema order.
class QiSet {
public:
    QiSet(const Schema& schema, std::vector<std::size_t> columns)
        : columns_(std::move(columns)) {
        if (columns_.empty()) throw InputError("QI set must be non-empty");
        std::sort(columns_.begin(), columns_.end());
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i] >= schema.size())
                throw InputError("QI column index out of range");
            if (columns_[i] == schema.target_index())
                throw InputError("target column cannot be a QI: " + schema.target());
            if (i > 0 && columns_[i] == columns_[i - 1])
                throw InputError("duplicate QI column: " + schema.name(columns_[i]));
        }
    }

    QiSet(const Schema& schema, const std::vector<std::string>& names)
        : QiSet(schema, resolve(schema, names)) {}

    const std::vector<std::size_t>& columns() const { return columns_; }
    std::size_t size() const { return columns_.size(); }

    std::vector<std::string> names(const Schema& schema) const {
        std::vector<std::string> out;
        out.reserve(columns_.size());
        for (const std::size_t c : columns_) out.push_back(schema.name(c));
        return out;
    }

private:
    static std::vector<std::size_t> resolve(const Schema& schema,
                                            const std::vector<std::string>& names) {
        std::vector<std::size_t> out;
        out.reserve(names.size());
        for (const auto& name : names) out.push_back(schema.index_of(name));
        return out;
    }

    std::vector<std::size_t> columns_;
};

namespace detail {

// Columnar storage: numeric columns hold doubles, nominal columns hold
// dictionary codes with labels in first-appearance order.
struct ColumnData {
    std::vector<double> numbers;
    std::vector<std::int32_t> codes;
    std::vector<std::string> categories;
    std::unordered_map<std::string, std::int32_t> category_index;

    std::int32_t intern(const std::string& label) {
        const auto it = category_index.find(label);
        if (it != category_index.end()) return it->second;
        const auto code = static_cast<std::int32_t>(categories.size());
        categories.push_back(label);
        category_index.emplace(label, code);
        return code;
    }
};

}  // namespace detail

class DatasetBuilder;

// Immutable typed table. Row identities are the positions 0..n-1.
class Dataset {
public:
    const Schema& schema() const { return schema_; }
    std::size_t n_rows() const { return n_rows_; }

    std::span<const double> numeric(std::size_t col) const {
        check_kind(col, ColumnKind::Numeric);
        return columns_[col].numbers;
    }

    double number(std::size_t col, std::size_t row) const {
        check_kind(col, ColumnKind::Numeric);
        return columns_[col].numbers[row];
    }

    std::int32_t code(std::size_t col, std::size_t row) const {
        check_kind(col, ColumnKind::Nominal);
        return columns_[col].codes[row];
    }

    const std::vector<std::string>& categories(std::size_t col) const {
        check_kind(col, ColumnKind::Nominal);
        return columns_[col].categories;
    }

    const std::string& label(std::size_t col, std::size_t row) const {
        check_kind(col, ColumnKind::Nominal);
        const auto& data = columns_[col];
        return data.categories[data.codes[row]];
    }

    Cell cell(std::size_t col, std::size_t row) const {
        if (schema_.kind(col) == ColumnKind::Numeric) return number(col, row);
        return label(col, row);
    }

    std::string cell_text(std::size_t col, std::size_t row) const {
        if (schema_.kind(col) == ColumnKind::Numeric)
            return csv::format_double(number(col, row));
        return label(col, row);
    }

    // Row subset (indices need not be sorted; order is preserved). Nominal
    // dictionaries are rebuilt so the result equals a freshly loaded table
    // of the same rows.
    Dataset take_rows(std::span<const std::size_t> rows) const;

    bool rows_equal(std::size_t row, const Dataset& other, std::size_t other_row) const {
        for (std::size_t c = 0; c < schema_.size(); ++c) {
            if (schema_.kind(c) == ColumnKind::Numeric) {
                if (number(c, row) != other.number(c, other_row)) return false;
            } else {
                if (label(c, row) != other.label(c, other_row)) return false;
            }
        }
        return true;
    }

    bool operator==(const Dataset& other) const {
        if (schema_ != other.schema_ || n_rows_ != other.n_rows_) return false;
        for (std::size_t r = 0; r < n_rows_; ++r)
            if (!rows_equal(r, other, r)) return false;
        return true;
    }

private:
    friend class DatasetBuilder;
    Dataset(Schema schema, std::vector<detail::ColumnData> columns, std::size_t n_rows)
        : schema_(std::move(schema)), columns_(std::move(columns)), n_rows_(n_rows) {}

    void check_kind(std::size_t col, ColumnKind kind) const {
        if (schema_.kind(col) != kind)
            throw InputError("column '" + schema_.name(col) + "' is not " +
                             std::string(to_string(kind)));
    }

    Schema schema_;
    std::vector<detail::ColumnData> columns_;
    std::size_t n_rows_;
};

class DatasetBuilder {
public:
    explicit DatasetBuilder(Schema schema)
        : schema_(std::move(schema)), columns_(schema_.size()) {}

    void add_row(std::span<const Cell> cells) {
        if (cells.size() != schema_.size())
            throw InputError("row " + std::to_string(n_rows_) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(schema_.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (schema_.kind(c) == ColumnKind::Numeric) {
                const double* value = std::get_if<double>(&cells[c]);
                if (!value)
                    throw InputError(cell_context(c) + ": expected a numeric value");
                if (!std::isfinite(*value))
                    throw InputError(cell_context(c) + ": numeric value must be finite");
                columns_[c].numbers.push_back(*value);
            } else {
                const std::string* label = std::get_if<std::string>(&cells[c]);
                if (!label)
                    throw InputError(cell_context(c) + ": expected a category label");
                if (label->empty())
                    throw InputError(cell_context(c) + ": empty cell");
                columns_[c].codes.push_back(columns_[c].intern(*label));
            }
        }
        ++n_rows_;
    }

    void add_row(std::initializer_list<Cell> cells) {
        add_row(std::span<const Cell>(cells.begin(), cells.size()));
    }

    Dataset build() && {
        return Dataset(std::move(schema_), std::move(columns_), n_rows_);
    }

private:
    std::string cell_context(std::size_t col) const {
        return "row " + std::to_string(n_rows_) + ", column '" + schema_.name(col) + "'";
    }

    Schema schema_;
    std::vector<detail::ColumnData> columns_;
    std::size_t n_rows_ = 0;
};

inline Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
    DatasetBuilder builder(schema_);
    std::vector<Cell> cells(schema_.size());
    for (const std::size_t r : rows) {
        for (std::size_t c = 0; c < schema_.size(); ++c) cells[c] = cell(c, r);
        builder.add_row(cells);
    }
    return std::move(builder).build();
}

// Population (divide-by-n) standard deviation of a raw numeric column.
inline double column_std(const Dataset& dataset, std::size_t col) {
    const auto values = dataset.numeric(col);
    if (values.empty()) throw InputError("column_std: empty column");
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double accum = 0.0;
    for (const double v : values) accum += (v - mean) * (v - mean);
    return std::sqrt(accum / static_cast<double>(values.size()));
}

inline double column_std(const Dataset& dataset, std::string_view name) {
    return column_std(dataset, dataset.schema().index_of(name));
}

// Uniformly samples ceil(25% of m) non-target columns when m < 10, else
// ceil(40% of m), where m is the non-target column count.
inline QiSet select_qis(const Schema& schema, std::uint64_t seed) {
    std::vector<std::size_t> candidates;
    for (std::size_t c = 0; c < schema.size(); ++c)
        if (c != schema.target_index()) candidates.push_back(c);
    const std::size_t m = candidates.size();
    if (m < 2) throw InputError("select_qis: need at least 2 non-target columns");
    const std::size_t count = m < 10 ? (m + 3) / 4 : (2 * m + 4) / 5;

    RngStream stream = RngStream(seed).child(stream_domain::kQiSelect);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + uniform_index(stream, m - i);
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(count);
    return QiSet(schema, std::move(candidates));
}

// Canonical byte key of a row's QI tuple. Numeric cells contribute their
// exact bit pattern, nominal cells their label, so keys are comparable
// across datasets that share a schema.
inline std::string qi_tuple_key(const Dataset& dataset, const QiSet& qis, std::size_t row) {
    std::string key;
    for (const std::size_t col : qis.columns()) {
        if (dataset.schema().kind(col) == ColumnKind::Numeric) {
            const auto bits = std::bit_cast<std::uint64_t>(dataset.number(col, row));
            key.push_back('N');
            for (int b = 0; b < 8; ++b)
                key.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
        } else {
            const std::string& label = dataset.label(col, row);
            const auto len = static_cast<std::uint32_t>(label.size());
            key.push_back('C');
            for (int b = 0; b < 4; ++b)
                key.push_back(static_cast<char>((len >> (8 * b)) & 0xFF));
            key.append(label);
        }
    }
    return key;
}

}  // namespace psmote
