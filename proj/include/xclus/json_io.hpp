#pragma once

#include <json.hpp>

#include "xclus/clustering.hpp"
#include "xclus/dataset.hpp"
#include "xclus/explainers.hpp"
#include "xclus/validity.hpp"

// JSON views of the core types, shared by the thesaurus file, the CLI
// artifacts and the report sidecars. Unbounded metric values serialize as the
// string "unbounded", never as a float infinity.
namespace xclus::jsonio {

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json metric_to_json(const std::optional<double>& v);
std::optional<double> metric_from_json(const nlohmann::json& j);

nlohmann::json validity_to_json(const ValidityReport& v);
ValidityReport validity_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ClusteringConfig& c);
ClusteringConfig config_from_json(const nlohmann::json& j);

nlohmann::json profile_to_json(const ClusterProfile& p);
ClusterProfile profile_from_json(const nlohmann::json& j);

nlohmann::json fiv_to_json(const FeatureImportanceVector& f);
FeatureImportanceVector fiv_from_json(const nlohmann::json& j);

nlohmann::json norm_to_json(const NormalizationStats& s);
NormalizationStats norm_from_json(const nlohmann::json& j);

void write_json_file(const nlohmann::json& doc, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace xclus::jsonio
