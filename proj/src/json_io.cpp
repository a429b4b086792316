#include "xclus/json_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "xclus/errors.hpp"

namespace xclus::jsonio {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data() = j.at("data").get<std::vector<double>>();
    if (m.data().size() != m.rows() * m.cols()) {
        throw Error(Errc::CorruptFile, "matrix payload size mismatch");
    }
    return m;
}

json metric_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    if (std::isinf(*v)) return "unbounded";
    return *v;
}

std::optional<double> metric_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) {
        if (j.get<std::string>() == "unbounded") return std::numeric_limits<double>::infinity();
        throw Error(Errc::CorruptFile, "unexpected metric string: " + j.get<std::string>());
    }
    return j.get<double>();
}

json validity_to_json(const ValidityReport& v) {
    return json{{"silhouette", metric_to_json(v.silhouette)},
                {"dbi", metric_to_json(v.dbi)},
                {"chi", metric_to_json(v.chi)},
                {"dunn", metric_to_json(v.dunn)},
                {"pbm", metric_to_json(v.pbm)},
                {"xie_beni", metric_to_json(v.xie_beni)},
                {"k", v.k},
                {"n_used", v.n_used}};
}

ValidityReport validity_from_json(const json& j) {
    ValidityReport v;
    v.silhouette = metric_from_json(j.at("silhouette"));
    v.dbi = metric_from_json(j.at("dbi"));
    v.chi = metric_from_json(j.at("chi"));
    v.dunn = metric_from_json(j.at("dunn"));
    v.pbm = metric_from_json(j.at("pbm"));
    v.xie_beni = metric_from_json(j.at("xie_beni"));
    v.k = j.at("k").get<int>();
    v.n_used = j.at("n_used").get<int>();
    return v;
}

json config_to_json(const ClusteringConfig& c) {
    return json{{"algorithm", to_string(c.algorithm)},
                {"k", c.k},
                {"eps", c.eps},
                {"min_samples", c.min_samples},
                {"fuzzifier", c.fuzzifier},
                {"seed", c.seed},
                {"restarts", c.restarts},
                {"max_iter", c.max_iter},
                {"tol", c.tol},
                {"spectral_cap", c.spectral_cap}};
}

ClusteringConfig config_from_json(const json& j) {
    ClusteringConfig c;
    c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    c.k = j.at("k").get<int>();
    c.eps = j.at("eps").get<double>();
    c.min_samples = j.at("min_samples").get<int>();
    c.fuzzifier = j.at("fuzzifier").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.restarts = j.at("restarts").get<int>();
    c.max_iter = j.at("max_iter").get<int>();
    c.tol = j.at("tol").get<double>();
    c.spectral_cap = j.at("spectral_cap").get<int>();
    return c;
}

json profile_to_json(const ClusterProfile& p) {
    json rows = json::array();
    for (const auto& r : p.rows) {
        rows.push_back(json{{"feature", r.feature},
                            {"mean_a", r.mean_a},
                            {"mean_b", r.mean_b},
                            {"median_a", r.median_a},
                            {"median_b", r.median_b},
                            {"u", r.u},
                            {"p", r.p},
                            {"significant", r.significant}});
    }
    return json{{"alpha", p.alpha},
                {"cluster_a", p.cluster_a},
                {"cluster_b", p.cluster_b},
                {"label_a", p.label_a},
                {"label_b", p.label_b},
                {"rows", rows}};
}

ClusterProfile profile_from_json(const json& j) {
    ClusterProfile p;
    p.alpha = j.at("alpha").get<double>();
    p.cluster_a = j.at("cluster_a").get<int>();
    p.cluster_b = j.at("cluster_b").get<int>();
    p.label_a = j.at("label_a").get<std::string>();
    p.label_b = j.at("label_b").get<std::string>();
    for (const auto& r : j.at("rows")) {
        ClusterProfileRow row;
        row.feature = r.at("feature").get<std::string>();
        row.mean_a = r.at("mean_a").get<double>();
        row.mean_b = r.at("mean_b").get<double>();
        row.median_a = r.at("median_a").get<double>();
        row.median_b = r.at("median_b").get<double>();
        row.u = r.at("u").get<double>();
        row.p = r.at("p").get<double>();
        row.significant = r.at("significant").get<bool>();
        p.rows.push_back(std::move(row));
    }
    return p;
}

json fiv_to_json(const FeatureImportanceVector& f) {
    json items = json::array();
    for (const auto& item : f.items) {
        items.push_back(json{{"feature", item.feature}, {"weight", item.weight}});
    }
    return json{{"items", items},
                {"method", f.method},
                {"instance_id", f.instance_id},
                {"intercept", f.intercept}};
}

FeatureImportanceVector fiv_from_json(const json& j) {
    FeatureImportanceVector f;
    for (const auto& item : j.at("items")) {
        f.items.push_back(
            {item.at("feature").get<std::string>(), item.at("weight").get<double>()});
    }
    f.method = j.at("method").get<std::string>();
    f.instance_id = j.at("instance_id").get<std::string>();
    f.intercept = j.at("intercept").get<double>();
    return f;
}

json norm_to_json(const NormalizationStats& s) {
    json cols = json::array();
    for (const auto& c : s.columns) {
        cols.push_back(json{{"mean", c.mean}, {"sigma", c.sigma}, {"min", c.min}, {"max", c.max}});
    }
    return json{{"mode", to_string(s.mode)}, {"names", s.names}, {"columns", cols}};
}

NormalizationStats norm_from_json(const json& j) {
    NormalizationStats s;
    s.mode = normalization_from_string(j.at("mode").get<std::string>());
    s.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& c : j.at("columns")) {
        s.columns.push_back({c.at("mean").get<double>(), c.at("sigma").get<double>(),
                             c.at("min").get<double>(), c.at("max").get<double>()});
    }
    return s;
}

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, path);
    std::ifstream in(path, std::ios::binary);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptFile, path + ": " + e.what());
    }
    return doc;
}

}  // namespace xclus::jsonio
