#include "hfrisk/schema.hpp"

#include <fstream>
#include <set>

#include "hfrisk/error.hpp"

namespace hfrisk {

std::string_view to_string(FeatureKind kind) noexcept {
    return kind == FeatureKind::continuous ? "continuous" : "binary";
}

std::string_view to_string(FeatureRole role) noexcept {
    return role == FeatureRole::feature ? "feature" : "identifier";
}

void validate(const FeatureSpec& spec) {
    if (spec.name.empty()) {
        throw ConfigError("schema entry with empty name");
    }
    if (spec.name == "outcome" || spec.name == "row_id") {
        throw ConfigError("schema entry uses reserved column name '" + spec.name + "'");
    }
    if (spec.kind == FeatureKind::continuous) {
        if (spec.prevalence) {
            throw ConfigError("continuous feature '" + spec.name + "' carries a prevalence");
        }
        if (spec.mean.has_value() != spec.std.has_value()) {
            throw ConfigError("continuous feature '" + spec.name + "' needs both mean and std");
        }
        if (spec.std && !(*spec.std >= 0.0)) {
            throw ConfigError("feature '" + spec.name + "' has negative std");
        }
    } else {
        if (spec.mean || spec.std) {
            throw ConfigError("binary feature '" + spec.name + "' carries mean/std");
        }
        if (spec.prevalence && !(*spec.prevalence >= 0.0 && *spec.prevalence <= 1.0)) {
            throw ConfigError("feature '" + spec.name + "' has prevalence outside [0,1]");
        }
    }
}

Schema::Schema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
    std::set<std::string> seen;
    for (const auto& f : features_) {
        validate(f);
        if (!seen.insert(f.name).second) {
            throw ConfigError("duplicate feature name '" + f.name + "' in schema");
        }
    }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Schema::require(std::string_view name) const {
    if (auto i = index_of(name)) {
        return *i;
    }
    throw ConfigError("unknown feature '" + std::string(name) + "'");
}

std::vector<std::string> Schema::names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) {
        out.push_back(f.name);
    }
    return out;
}

Schema Schema::select(const std::vector<std::size_t>& columns) const {
    std::vector<FeatureSpec> out;
    out.reserve(columns.size());
    for (std::size_t c : columns) {
        out.push_back(features_.at(c));
    }
    return Schema(std::move(out));
}

nlohmann::json to_json(const Schema& schema) {
    auto doc = nlohmann::json::array();
    for (const auto& f : schema.features()) {
        nlohmann::json e;
        e["name"] = f.name;
        e["kind"] = std::string(to_string(f.kind));
        e["units"] = f.units;
        e["mean"] = f.mean ? nlohmann::json(*f.mean) : nlohmann::json(nullptr);
        e["std"] = f.std ? nlohmann::json(*f.std) : nlohmann::json(nullptr);
        e["prevalence"] = f.prevalence ? nlohmann::json(*f.prevalence) : nlohmann::json(nullptr);
        if (f.role != FeatureRole::feature) {
            e["role"] = std::string(to_string(f.role));
        }
        doc.push_back(std::move(e));
    }
    return doc;
}

namespace {

std::optional<double> optional_number(const nlohmann::json& e, const char* key) {
    auto it = e.find(key);
    if (it == e.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number()) {
        throw ConfigError(std::string("schema field '") + key + "' must be a number or null");
    }
    return it->get<double>();
}

}  // namespace

Schema schema_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) {
        throw ConfigError("schema document must be a JSON array");
    }
    std::vector<FeatureSpec> features;
    for (const auto& e : doc) {
        if (!e.is_object() || !e.contains("name") || !e.contains("kind")) {
            throw ConfigError("schema entries need at least 'name' and 'kind'");
        }
        FeatureSpec f;
        f.name = e.at("name").get<std::string>();
        const auto kind = e.at("kind").get<std::string>();
        if (kind == "continuous") {
            f.kind = FeatureKind::continuous;
        } else if (kind == "binary") {
            f.kind = FeatureKind::binary;
        } else {
            throw ConfigError("feature '" + f.name + "' has unknown kind '" + kind + "'");
        }
        f.units = e.value("units", std::string{});
        f.mean = optional_number(e, "mean");
        f.std = optional_number(e, "std");
        f.prevalence = optional_number(e, "prevalence");
        const auto role = e.value("role", std::string("feature"));
        if (role == "identifier") {
            f.role = FeatureRole::identifier;
        } else if (role != "feature") {
            throw ConfigError("feature '" + f.name + "' has unknown role '" + role + "'");
        }
        features.push_back(std::move(f));
    }
    return Schema(std::move(features));
}

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open schema file " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("schema file " + path.string() + ": " + e.what());
    }
    return schema_from_json(doc);
}

const Schema& bundled_schema() {
    static const Schema schema = schema_from_json(nlohmann::json::parse(bundled_schema_json()));
    return schema;
}

}  // namespace hfrisk
