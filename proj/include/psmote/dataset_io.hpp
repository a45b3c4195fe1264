#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "psmote/csv.hpp"
#include "psmote/dataset.hpp"
#include "psmote/error.hpp"

namespace psmote {

using KindOverrides = std::map<std::string, ColumnKind>;

// A column is Nominal if any data cell fails to parse as a finite real,
// else Numeric. Explicit overrides win. Empty cells are rejected.
inline Schema infer_schema(const std::string& csv_path, const KindOverrides& overrides,
                           const std::string& target) {
    const auto records = csv::read_file(csv_path);
    if (records.empty()) throw InputError(csv_path + ": missing header row");
    const auto& header = records.front();
    if (header.size() < 2) throw InputError(csv_path + ": need at least 2 columns");

    std::vector<bool> numeric(header.size(), true);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& record = records[r];
        if (record.size() != header.size())
            throw InputError(csv_path + ": row " + std::to_string(r) + " has " +
                             std::to_string(record.size()) + " cells, expected " +
                             std::to_string(header.size()));
        for (std::size_t c = 0; c < record.size(); ++c) {
            if (record[c].empty())
                throw InputError(csv_path + ": row " + std::to_string(r) + ", column '" +
                                 header[c] + "': empty cell");
            if (numeric[c] && !csv::parse_finite_double(record[c])) numeric[c] = false;
        }
    }

    std::vector<ColumnSpec> columns;
    columns.reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        ColumnKind kind = numeric[c] ? ColumnKind::Numeric : ColumnKind::Nominal;
        const auto it = overrides.find(header[c]);
        if (it != overrides.end()) kind = it->second;
        columns.push_back({header[c], kind});
    }
    for (const auto& [name, kind] : overrides) {
        bool known = false;
        for (const auto& col : columns) known |= (col.name == name);
        if (!known) throw InputError("override for unknown column: " + name);
    }
    return Schema(std::move(columns), target);
}

inline Dataset load_csv(const std::string& csv_path, const Schema& schema) {
    const auto records = csv::read_file(csv_path);
    if (records.empty()) throw InputError(csv_path + ": missing header row");
    const auto& header = records.front();
    if (header.size() != schema.size())
        throw InputError(csv_path + ": header has " + std::to_string(header.size()) +
                         " columns, schema expects " + std::to_string(schema.size()));
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != schema.name(c))
            throw InputError(csv_path + ": header column " + std::to_string(c) + " is '" +
                             header[c] + "', schema expects '" + schema.name(c) + "'");
    }

    DatasetBuilder builder(schema);
    std::vector<Cell> cells(schema.size());
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& record = records[r];
        if (record.size() != schema.size())
            throw InputError(csv_path + ": row " + std::to_string(r) + " has " +
                             std::to_string(record.size()) + " cells, expected " +
                             std::to_string(schema.size()));
        for (std::size_t c = 0; c < record.size(); ++c) {
            if (record[c].empty())
                throw InputError(csv_path + ": row " + std::to_string(r) + ", column '" +
                                 schema.name(c) + "': empty cell");
            if (schema.kind(c) == ColumnKind::Numeric) {
                const auto value = csv::parse_finite_double(record[c]);
                if (!value)
                    throw InputError(csv_path + ": row " + std::to_string(r) + ", column '" +
                                     schema.name(c) + "': cannot parse '" + record[c] +
                                     "' as a finite real");
                cells[c] = *value;
            } else {
                cells[c] = record[c];
            }
        }
        builder.add_row(cells);
    }
    return std::move(builder).build();
}

inline void write_csv(const Dataset& dataset, std::ostream& out) {
    std::vector<std::string> fields;
    fields.reserve(dataset.schema().size());
    for (const auto& col : dataset.schema().columns()) fields.push_back(col.name);
    csv::write_record(out, fields);
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        for (std::size_t c = 0; c < dataset.schema().size(); ++c)
            fields[c] = dataset.cell_text(c, r);
        csv::write_record(out, fields);
    }
}

inline void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    write_csv(dataset, out);
    if (!out) throw InputError("write failed: " + path);
}

// Sidecar format: {"target": name, "columns": [{"name":..., "kind":"numeric"|"nominal"}]}
inline nlohmann::ordered_json schema_to_json(const Schema& schema) {
    nlohmann::ordered_json doc;
    doc["target"] = schema.target();
    auto& cols = doc["columns"] = nlohmann::ordered_json::array();
    for (const auto& col : schema.columns())
        cols.push_back({{"name", col.name}, {"kind", std::string(to_string(col.kind))}});
    return doc;
}

inline Schema schema_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("target") || !doc.contains("columns"))
        throw InputError("schema document must have 'target' and 'columns'");
    std::vector<ColumnSpec> columns;
    for (const auto& entry : doc.at("columns")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::string kind = entry.at("kind").get<std::string>();
        if (kind == "numeric") columns.push_back({name, ColumnKind::Numeric});
        else if (kind == "nominal") columns.push_back({name, ColumnKind::Nominal});
        else throw InputError("column '" + name + "': unknown kind '" + kind + "'");
    }
    return Schema(std::move(columns), doc.at("target").get<std::string>());
}

inline Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open schema file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": invalid JSON: " + e.what());
    }
    return schema_from_json(doc);
}

inline void write_schema(const Schema& schema, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << schema_to_json(schema).dump(2) << "\n";
}

}  // namespace psmote
