#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xclus/matrix.hpp"
#include "xclus/schema.hpp"

namespace xclus {

enum class DatasetRole { training, validation };

// Dense, fully numeric table. After preprocessing completes it contains no NaN.
//
// Categorical/ordinal features travel through the pipeline as level indices
// into the schema's declared level set; `pending_levels` lists, per such
// feature, any undeclared level strings met in the data (indexed after the
// declared ones) so encode() can raise UnknownLevel with the offending value.
struct Dataset {
    Matrix values;
    std::vector<std::string> feature_names;
    std::vector<std::string> entity_ids;   // per row
    std::vector<std::int64_t> timestamps;  // per row, epoch seconds (bucket start)
    DatasetRole role = DatasetRole::training;
    std::map<std::string, std::vector<std::string>> pending_levels;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }

    std::size_t feature_index(const std::string& name) const;
    std::string row_id(std::size_t i) const;  // "<entity>@<timestamp>"
    std::optional<std::size_t> find_row(const std::string& row_id) const;

    bool has_missing() const;

    bool operator==(const Dataset&) const = default;
};

void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path, DatasetRole role);

struct NormalizationStats {
    struct Column {
        double mean = 0.0;
        double sigma = 0.0;  // population sigma (divide by n); 0 marks a constant column
        double min = 0.0;
        double max = 0.0;

        bool operator==(const Column&) const = default;
    };

    Normalization mode = Normalization::none;
    std::vector<std::string> names;
    std::vector<Column> columns;

    double to_original(std::size_t col, double normalized) const;
    double to_normalized(std::size_t col, double original) const;
    std::vector<double> row_to_original(std::span<const double> normalized) const;
    double range(std::size_t col) const { return columns[col].max - columns[col].min; }

    bool operator==(const NormalizationStats&) const = default;
};

// Typed column store straight out of CSV. Missing cells (empty or unparseable
// numerics) are marked absent rather than erroring.
struct RawColumn {
    FeatureSchema schema;
    std::vector<double> numeric;     // valid where present and kind==numeric
    std::vector<std::string> text;   // valid where present and kind!=numeric
    std::vector<std::uint8_t> present;
};

struct LoadReport {
    std::vector<std::string> ignored_columns;
    std::map<std::string, std::size_t> coerced_cells;  // unparseable numeric -> missing
    std::string timestamp_format;                      // "iso8601" or "epoch_seconds"
    std::vector<std::string> warnings;
};

struct RawTable {
    std::vector<std::string> entity_ids;
    std::vector<std::int64_t> timestamps;
    std::vector<RawColumn> columns;
    LoadReport report;

    std::size_t rows() const { return entity_ids.size(); }
};

}  // namespace xclus
