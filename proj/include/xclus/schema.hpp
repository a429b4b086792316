#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xclus {

enum class FeatureCategory {
    physical_activity,
    sleep,
    health,
    mental_health,
    demographics,
    personality,
    behavior,
    other,
};

enum class FeatureKind { numeric, categorical, ordinal };

enum class NativeGranularity { sub_hourly, hourly, daily, multi_day, weekly, arbitrary, entry };

enum class TargetGranularity { hourly, daily };

enum class Aggregation { sum, mean, count, last, none };

enum class GranularityFill { forward, backward, daily, periodic, none };

enum class MissingPolicy { mean, zero, mode, drop, none };

enum class Encoding { none, one_hot, ordinal };

enum class Normalization { zscore, minmax, none };

struct FeatureSchema {
    std::string name;
    FeatureCategory category = FeatureCategory::other;
    FeatureKind kind = FeatureKind::numeric;
    NativeGranularity native_granularity = NativeGranularity::arbitrary;
    std::vector<std::string> levels;  // declared level set (categorical/ordinal, in order)

    bool operator==(const FeatureSchema&) const = default;
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<FeatureSchema> features);

    const std::vector<FeatureSchema>& features() const { return features_; }
    const FeatureSchema* find(const std::string& name) const;
    const FeatureSchema& at(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }
    std::size_t size() const { return features_.size(); }

    bool operator==(const Schema&) const = default;

private:
    std::vector<FeatureSchema> features_;
};

struct FeatureRule {
    Aggregation aggregation = Aggregation::last;
    GranularityFill fill = GranularityFill::none;
    MissingPolicy missing = MissingPolicy::none;
    Encoding encoding = Encoding::none;

    bool operator==(const FeatureRule&) const = default;
};

struct PreprocessSpec {
    std::map<std::string, FeatureRule> rules;  // keyed by feature name
    TargetGranularity target = TargetGranularity::daily;
    Normalization normalization = Normalization::zscore;

    // Throws when a rule references a feature missing from the schema, or an
    // encoding does not match the feature kind.
    void validate(const Schema& schema) const;
};

struct VariantSpec {
    enum class Filter { full, categories, explicit_list };

    std::string name;
    TargetGranularity granularity = TargetGranularity::daily;
    Filter filter = Filter::full;
    std::vector<FeatureCategory> categories;
    std::vector<std::string> features;
};

// enum <-> config-key string mappings (keys exactly match the config schema)
std::string to_string(FeatureCategory v);
std::string to_string(FeatureKind v);
std::string to_string(NativeGranularity v);
std::string to_string(TargetGranularity v);
std::string to_string(Aggregation v);
std::string to_string(GranularityFill v);
std::string to_string(MissingPolicy v);
std::string to_string(Encoding v);
std::string to_string(Normalization v);

FeatureCategory category_from_string(const std::string& s);
FeatureKind kind_from_string(const std::string& s);
NativeGranularity native_granularity_from_string(const std::string& s);
TargetGranularity target_granularity_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);
GranularityFill fill_from_string(const std::string& s);
MissingPolicy missing_policy_from_string(const std::string& s);
Encoding encoding_from_string(const std::string& s);
Normalization normalization_from_string(const std::string& s);

// JSON config files (see docs/config.md for the canonical schema)
Schema load_schema(const std::string& path);
void save_schema(const Schema& schema, const std::string& path);

struct PreprocessConfig {
    PreprocessSpec spec;
    std::vector<VariantSpec> variants;
    std::vector<std::string> training_features;    // role split, by name
    std::vector<std::string> validation_features;  // held out for cluster characterization
    double pca_retained_variance = 0.0;            // 0 disables the optional PCA stage
};

PreprocessConfig load_preprocess_config(const std::string& path);
void save_preprocess_config(const PreprocessConfig& config, const std::string& path);

}  // namespace xclus
