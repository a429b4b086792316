#pragma once

#include <map>
#include <string>
#include <vector>

#include "xclus/dataset.hpp"
#include "xclus/schema.hpp"

namespace xclus {

// CSV ingestion. The file must have a header row; the reserved columns "id"
// and "date" carry the entity key and timestamp (ISO-8601 or epoch seconds,
// auto-detected and recorded in the load report). Header names not in the
// schema are ignored with a warning; if no schema feature is found at all the
// load fails with HeaderMismatch.
RawTable load_csv(const std::string& path, const Schema& schema);

// One row per (entity, target-granularity bucket), spanning whole days from
// the entity's first to last observation. Each feature is reduced by its
// declared aggregator; buckets without observations become missing.
Dataset aggregate(const RawTable& raw, const Schema& schema, const PreprocessSpec& spec);

Dataset fill_granularity(const Dataset& ds, const PreprocessSpec& spec);

Dataset impute(const Dataset& ds, const PreprocessSpec& spec);

// Expands one-hot/ordinal encodings; afterwards every column is numeric and
// level-dependent column names look like "feature=level".
Dataset encode(const Dataset& ds, const Schema& schema, const PreprocessSpec& spec);

struct NormalizeResult {
    Dataset dataset;
    NormalizationStats stats;
};

NormalizeResult normalize(const Dataset& ds, Normalization mode);

struct IqrReport {
    double factor = 1.5;
    std::string quantile_rule = "linear interpolation (type 7)";
    std::map<std::string, std::size_t> removed_per_feature;
    std::vector<std::size_t> removed_rows;  // original row indices
    std::size_t rows_before = 0;
    std::size_t rows_after = 0;
};

struct IqrResult {
    Dataset dataset;
    IqrReport report;
};

// Drops a row iff any feature value falls outside [Q1 - f*IQR, Q3 + f*IQR].
IqrResult remove_outliers_iqr(const Dataset& ds, double factor = 1.5);

struct RoleSplit {
    Dataset training;
    Dataset validation;
};

RoleSplit split_roles(const Dataset& ds, const std::vector<std::string>& training_features,
                      const std::vector<std::string>& validation_features);

// Applies per-variant feature filters. Hourly and daily variants draw from
// differently aggregated tables, so the source carries one Dataset per target
// granularity; all six canonical variants come out of one call.
std::map<std::string, Dataset> make_variants(
    const std::map<TargetGranularity, Dataset>& by_granularity, const Schema& schema,
    const std::vector<VariantSpec>& specs);

struct PcaResult {
    Dataset dataset;
    Matrix components;               // rows = retained components
    std::vector<double> explained;   // variance ratio per retained component
    std::vector<double> col_means;
};

// Optional dimensionality reduction; keeps the smallest set of principal
// components reaching the requested retained-variance fraction.
PcaResult pca_reduce(const Dataset& ds, double retained_variance);

double type7_quantile(std::vector<double> values, double q);

}  // namespace xclus
