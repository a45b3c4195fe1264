#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

// Validates instances against the subset of JSON Schema the shipped
// documents use: type, properties, required, items, enum,
// additionalProperties.
namespace jsonschema {

inline bool matches_type(const nlohmann::json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "integer") return value.is_number_integer();
    if (type == "number") return value.is_number();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
}

inline void validate_into(const nlohmann::json& schema, const nlohmann::json& value,
                          const std::string& path, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const nlohmann::json& type = schema.at("type");
        bool ok = false;
        if (type.is_string()) {
            ok = matches_type(value, type.get<std::string>());
        } else {
            for (const auto& option : type)
                if (matches_type(value, option.get<std::string>())) ok = true;
        }
        if (!ok) {
            errors.push_back(path + ": unexpected type " + std::string(value.type_name()));
            return;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& allowed : schema.at("enum"))
            if (allowed == value) ok = true;
        if (!ok) errors.push_back(path + ": value not allowed by enum");
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& name : schema.at("required"))
                if (!value.contains(name.get<std::string>()))
                    errors.push_back(path + ": missing required property '" +
                                     name.get<std::string>() + "'");
        const bool has_props = schema.contains("properties");
        for (const auto& member : value.items()) {
            const std::string child_path = path + "/" + member.key();
            if (has_props && schema.at("properties").contains(member.key())) {
                validate_into(schema.at("properties").at(member.key()), member.value(),
                              child_path, errors);
            } else if (schema.contains("additionalProperties")) {
                const nlohmann::json& extra = schema.at("additionalProperties");
                if (extra.is_boolean()) {
                    if (!extra.get<bool>())
                        errors.push_back(child_path + ": unexpected property");
                } else {
                    validate_into(extra, member.value(), child_path, errors);
                }
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i)
            validate_into(schema.at("items"), value[i], path + "/" + std::to_string(i),
                          errors);
    }
}

inline std::vector<std::string> validate(const nlohmann::json& schema,
                                         const nlohmann::json& value) {
    std::vector<std::string> errors;
    validate_into(schema, value, "$", errors);
    return errors;
}

}  // namespace jsonschema
