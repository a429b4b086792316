#include "xclus/schema.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "xclus/errors.hpp"

namespace xclus {

using nlohmann::json;

Schema::Schema(std::vector<FeatureSchema> features) : features_(std::move(features)) {
    std::set<std::string> seen;
    for (const auto& f : features_) {
        if (!seen.insert(f.name).second) {
            throw Error(Errc::ConfigError, "duplicate feature name in schema: " + f.name);
        }
        if (f.kind != FeatureKind::numeric && f.levels.empty()) {
            throw Error(Errc::ConfigError,
                        "categorical/ordinal feature must declare its level set: " + f.name);
        }
    }
}

const FeatureSchema* Schema::find(const std::string& name) const {
    for (const auto& f : features_) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

const FeatureSchema& Schema::at(const std::string& name) const {
    const FeatureSchema* f = find(name);
    if (!f) throw Error(Errc::UnknownFeature, name);
    return *f;
}

void PreprocessSpec::validate(const Schema& schema) const {
    for (const auto& [name, rule] : rules) {
        const FeatureSchema* f = schema.find(name);
        if (!f) throw Error(Errc::UnknownFeature, "preprocess rule for unknown feature: " + name);
        if (rule.encoding == Encoding::one_hot && f->kind != FeatureKind::categorical) {
            throw Error(Errc::ConfigError, "one_hot requires categorical kind: " + name);
        }
        if (rule.encoding == Encoding::ordinal && f->kind != FeatureKind::ordinal) {
            throw Error(Errc::ConfigError, "ordinal encoding requires ordinal kind: " + name);
        }
    }
}

namespace {

template <typename T>
T enum_from(const std::string& s, const std::vector<std::pair<const char*, T>>& table,
            const char* what) {
    for (const auto& [key, value] : table) {
        if (s == key) return value;
    }
    throw Error(Errc::ConfigError, std::string("unknown ") + what + ": " + s);
}

template <typename T>
std::string enum_to(T v, const std::vector<std::pair<const char*, T>>& table) {
    for (const auto& [key, value] : table) {
        if (v == value) return key;
    }
    return "?";
}

const std::vector<std::pair<const char*, FeatureCategory>> kCategories = {
    {"physical_activity", FeatureCategory::physical_activity},
    {"sleep", FeatureCategory::sleep},
    {"health", FeatureCategory::health},
    {"mental_health", FeatureCategory::mental_health},
    {"demographics", FeatureCategory::demographics},
    {"personality", FeatureCategory::personality},
    {"behavior", FeatureCategory::behavior},
    {"other", FeatureCategory::other}};

const std::vector<std::pair<const char*, FeatureKind>> kKinds = {
    {"numeric", FeatureKind::numeric},
    {"categorical", FeatureKind::categorical},
    {"ordinal", FeatureKind::ordinal}};

const std::vector<std::pair<const char*, NativeGranularity>> kNative = {
    {"sub_hourly", NativeGranularity::sub_hourly}, {"hourly", NativeGranularity::hourly},
    {"daily", NativeGranularity::daily},           {"multi_day", NativeGranularity::multi_day},
    {"weekly", NativeGranularity::weekly},         {"arbitrary", NativeGranularity::arbitrary},
    {"entry", NativeGranularity::entry}};

const std::vector<std::pair<const char*, TargetGranularity>> kTarget = {
    {"hourly", TargetGranularity::hourly}, {"daily", TargetGranularity::daily}};

const std::vector<std::pair<const char*, Aggregation>> kAggregation = {
    {"sum", Aggregation::sum},
    {"mean", Aggregation::mean},
    {"count", Aggregation::count},
    {"last", Aggregation::last},
    {"none", Aggregation::none}};

const std::vector<std::pair<const char*, GranularityFill>> kFill = {
    {"forward", GranularityFill::forward},
    {"backward", GranularityFill::backward},
    {"daily", GranularityFill::daily},
    {"periodic", GranularityFill::periodic},
    {"none", GranularityFill::none}};

const std::vector<std::pair<const char*, MissingPolicy>> kMissing = {
    {"mean", MissingPolicy::mean},
    {"zero", MissingPolicy::zero},
    {"mode", MissingPolicy::mode},
    {"drop", MissingPolicy::drop},
    {"none", MissingPolicy::none}};

const std::vector<std::pair<const char*, Encoding>> kEncoding = {
    {"none", Encoding::none}, {"one_hot", Encoding::one_hot}, {"ordinal", Encoding::ordinal}};

const std::vector<std::pair<const char*, Normalization>> kNormalization = {
    {"zscore", Normalization::zscore},
    {"minmax", Normalization::minmax},
    {"none", Normalization::none}};

json read_json_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, path);
    std::ifstream in(path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, path + ": " + e.what());
    }
    return doc;
}

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace

std::string to_string(FeatureCategory v) { return enum_to(v, kCategories); }
std::string to_string(FeatureKind v) { return enum_to(v, kKinds); }
std::string to_string(NativeGranularity v) { return enum_to(v, kNative); }
std::string to_string(TargetGranularity v) { return enum_to(v, kTarget); }
std::string to_string(Aggregation v) { return enum_to(v, kAggregation); }
std::string to_string(GranularityFill v) { return enum_to(v, kFill); }
std::string to_string(MissingPolicy v) { return enum_to(v, kMissing); }
std::string to_string(Encoding v) { return enum_to(v, kEncoding); }
std::string to_string(Normalization v) { return enum_to(v, kNormalization); }

FeatureCategory category_from_string(const std::string& s) {
    return enum_from(s, kCategories, "category");
}
FeatureKind kind_from_string(const std::string& s) { return enum_from(s, kKinds, "kind"); }
NativeGranularity native_granularity_from_string(const std::string& s) {
    return enum_from(s, kNative, "native_granularity");
}
TargetGranularity target_granularity_from_string(const std::string& s) {
    return enum_from(s, kTarget, "target_granularity");
}
Aggregation aggregation_from_string(const std::string& s) {
    return enum_from(s, kAggregation, "aggregation");
}
GranularityFill fill_from_string(const std::string& s) {
    return enum_from(s, kFill, "granularity_fill");
}
MissingPolicy missing_policy_from_string(const std::string& s) {
    return enum_from(s, kMissing, "missing_policy");
}
Encoding encoding_from_string(const std::string& s) { return enum_from(s, kEncoding, "encoding"); }
Normalization normalization_from_string(const std::string& s) {
    return enum_from(s, kNormalization, "normalization");
}

Schema load_schema(const std::string& path) {
    const json doc = read_json_file(path);
    if (!doc.contains("features") || !doc["features"].is_array()) {
        throw Error(Errc::ConfigError, path + ": expected top-level \"features\" array");
    }
    std::vector<FeatureSchema> features;
    for (const auto& item : doc["features"]) {
        FeatureSchema f;
        f.name = item.at("name").get<std::string>();
        f.category = category_from_string(item.at("category").get<std::string>());
        f.kind = kind_from_string(item.at("kind").get<std::string>());
        f.native_granularity =
            native_granularity_from_string(item.at("native_granularity").get<std::string>());
        if (item.contains("levels")) f.levels = item["levels"].get<std::vector<std::string>>();
        features.push_back(std::move(f));
    }
    return Schema(std::move(features));
}

void save_schema(const Schema& schema, const std::string& path) {
    json doc;
    doc["features"] = json::array();
    for (const auto& f : schema.features()) {
        json item;
        item["name"] = f.name;
        item["category"] = to_string(f.category);
        item["kind"] = to_string(f.kind);
        item["native_granularity"] = to_string(f.native_granularity);
        if (!f.levels.empty()) item["levels"] = f.levels;
        doc["features"].push_back(item);
    }
    write_json_file(doc, path);
}

PreprocessConfig load_preprocess_config(const std::string& path) {
    const json doc = read_json_file(path);
    PreprocessConfig config;
    try {
        config.spec.target =
            target_granularity_from_string(doc.value("target_granularity", "daily"));
        config.spec.normalization =
            normalization_from_string(doc.value("normalization", "zscore"));
        if (doc.contains("features")) {
            for (const auto& [name, r] : doc["features"].items()) {
                FeatureRule rule;
                rule.aggregation = aggregation_from_string(r.value("aggregation", "last"));
                rule.fill = fill_from_string(r.value("granularity_fill", "none"));
                rule.missing = missing_policy_from_string(r.value("missing_policy", "none"));
                rule.encoding = encoding_from_string(r.value("encoding", "none"));
                config.spec.rules[name] = rule;
            }
        }
        if (doc.contains("variants")) {
            for (const auto& v : doc["variants"]) {
                VariantSpec spec;
                spec.name = v.at("name").get<std::string>();
                spec.granularity =
                    target_granularity_from_string(v.at("granularity").get<std::string>());
                const auto& filter = v.at("filter");
                if (filter.is_string() && filter.get<std::string>() == "full") {
                    spec.filter = VariantSpec::Filter::full;
                } else if (filter.is_object() && filter.contains("categories")) {
                    spec.filter = VariantSpec::Filter::categories;
                    for (const auto& c : filter["categories"]) {
                        spec.categories.push_back(category_from_string(c.get<std::string>()));
                    }
                } else if (filter.is_object() && filter.contains("features")) {
                    spec.filter = VariantSpec::Filter::explicit_list;
                    spec.features = filter["features"].get<std::vector<std::string>>();
                } else {
                    throw Error(Errc::ConfigError, "variant filter must be \"full\", "
                                                   "{\"categories\":[..]} or {\"features\":[..]}");
                }
                config.variants.push_back(std::move(spec));
            }
        }
        config.training_features =
            doc.value("training_features", std::vector<std::string>{});
        config.validation_features =
            doc.value("validation_features", std::vector<std::string>{});
        config.pca_retained_variance = doc.value("pca_retained_variance", 0.0);
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, path + ": " + e.what());
    }
    return config;
}

void save_preprocess_config(const PreprocessConfig& config, const std::string& path) {
    json doc;
    doc["target_granularity"] = to_string(config.spec.target);
    doc["normalization"] = to_string(config.spec.normalization);
    doc["features"] = json::object();
    for (const auto& [name, rule] : config.spec.rules) {
        json r;
        r["aggregation"] = to_string(rule.aggregation);
        r["granularity_fill"] = to_string(rule.fill);
        r["missing_policy"] = to_string(rule.missing);
        r["encoding"] = to_string(rule.encoding);
        doc["features"][name] = r;
    }
    doc["variants"] = json::array();
    for (const auto& v : config.variants) {
        json item;
        item["name"] = v.name;
        item["granularity"] = to_string(v.granularity);
        switch (v.filter) {
            case VariantSpec::Filter::full:
                item["filter"] = "full";
                break;
            case VariantSpec::Filter::categories: {
                json cats = json::array();
                for (auto c : v.categories) cats.push_back(to_string(c));
                item["filter"] = json{{"categories", cats}};
                break;
            }
            case VariantSpec::Filter::explicit_list:
                item["filter"] = json{{"features", v.features}};
                break;
        }
        doc["variants"].push_back(item);
    }
    doc["training_features"] = config.training_features;
    doc["validation_features"] = config.validation_features;
    if (config.pca_retained_variance > 0.0) {
        doc["pca_retained_variance"] = config.pca_retained_variance;
    }
    write_json_file(doc, path);
}

}  // namespace xclus
