#include "xclus/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "xclus/csv.hpp"
#include "xclus/errors.hpp"

namespace xclus {

std::size_t Dataset::feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        if (feature_names[j] == name) return j;
    }
    throw Error(Errc::UnknownFeature, name);
}

std::string Dataset::row_id(std::size_t i) const {
    return entity_ids[i] + "@" + std::to_string(timestamps[i]);
}

std::optional<std::size_t> Dataset::find_row(const std::string& row_id) const {
    for (std::size_t i = 0; i < rows(); ++i) {
        if (this->row_id(i) == row_id) return i;
    }
    return std::nullopt;
}

bool Dataset::has_missing() const {
    for (double v : values.data()) {
        if (std::isnan(v)) return true;
    }
    return false;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
    std::vector<std::string> header = {"id", "timestamp"};
    header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
    csv::write_row(out, header);
    std::vector<std::string> row(header.size());
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        row[0] = ds.entity_ids[i];
        row[1] = std::to_string(ds.timestamps[i]);
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            row[2 + j] = csv::format_double(ds.values(i, j));
        }
        csv::write_row(out, row);
    }
}

Dataset load_dataset_csv(const std::string& path, DatasetRole role) {
    const auto rows = csv::parse_file(path);
    if (rows.empty()) throw Error(Errc::EmptyTable, path);
    const auto& header = rows[0];
    if (header.size() < 2 || header[0] != "id" || header[1] != "timestamp") {
        throw Error(Errc::HeaderMismatch, path + ": expected id,timestamp,<features...>");
    }
    Dataset ds;
    ds.role = role;
    ds.feature_names.assign(header.begin() + 2, header.end());
    ds.values = Matrix(rows.size() - 1, ds.feature_names.size());
    ds.entity_ids.resize(rows.size() - 1);
    ds.timestamps.resize(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != header.size()) {
            throw Error(Errc::CorruptFile, path + ": ragged row " + std::to_string(i));
        }
        ds.entity_ids[i - 1] = r[0];
        ds.timestamps[i - 1] = std::stoll(r[1]);
        for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
            const std::string& cell = r[2 + j];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw Error(Errc::CorruptFile, path + ": bad numeric cell '" + cell + "'");
            }
            ds.values(i - 1, j) = v;
        }
    }
    return ds;
}

double NormalizationStats::to_original(std::size_t col, double normalized) const {
    const Column& c = columns[col];
    switch (mode) {
        case Normalization::zscore:
            return normalized * c.sigma + c.mean;
        case Normalization::minmax:
            return normalized * (c.max - c.min) + c.min;
        case Normalization::none:
            return normalized;
    }
    return normalized;
}

double NormalizationStats::to_normalized(std::size_t col, double original) const {
    const Column& c = columns[col];
    switch (mode) {
        case Normalization::zscore:
            return c.sigma == 0.0 ? 0.0 : (original - c.mean) / c.sigma;
        case Normalization::minmax:
            return c.max == c.min ? 0.0 : (original - c.min) / (c.max - c.min);
        case Normalization::none:
            return original;
    }
    return original;
}

std::vector<double> NormalizationStats::row_to_original(std::span<const double> normalized) const {
    std::vector<double> out(normalized.size());
    for (std::size_t j = 0; j < normalized.size(); ++j) out[j] = to_original(j, normalized[j]);
    return out;
}

}  // namespace xclus
