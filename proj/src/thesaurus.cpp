#include "xclus/thesaurus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "xclus/csv.hpp"
#include "xclus/json_io.hpp"
#include "xclus/errors.hpp"
#include "xclus/parallel.hpp"
#include "xclus/rng.hpp"
#include "xclus/sha256.hpp"

namespace xclus {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string metric_cell(const std::optional<double>& v) {
    if (!v) return "";
    if (std::isinf(*v)) return "unbounded";
    std::ostringstream os;
    os.precision(6);
    os << *v;
    return os.str();
}

}  // namespace

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::failed: return "failed";
        case RunStatus::skipped: return "skipped";
    }
    return "?";
}

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::silhouette: return "silhouette";
        case Criterion::dbi: return "dbi";
        case Criterion::chi: return "chi";
        case Criterion::dunn: return "dunn";
        case Criterion::pbm: return "pbm";
        case Criterion::xie_beni: return "xie_beni";
    }
    return "?";
}

Criterion criterion_from_string(const std::string& s) {
    if (s == "silhouette") return Criterion::silhouette;
    if (s == "dbi") return Criterion::dbi;
    if (s == "chi") return Criterion::chi;
    if (s == "dunn") return Criterion::dunn;
    if (s == "pbm") return Criterion::pbm;
    if (s == "xie_beni") return Criterion::xie_beni;
    throw Error(Errc::ConfigError, "unknown criterion: " + s);
}

std::string BenchmarkReport::to_csv() const {
    std::ostringstream os;
    os << "variant,algorithm,silhouette,dbi,chi,dunn,pbm,xie_beni,k,status\n";
    for (const auto& row : rows) {
        std::vector<std::string> cells = {
            row.variant,
            row.algorithm,
            metric_cell(row.validity.silhouette),
            metric_cell(row.validity.dbi),
            metric_cell(row.validity.chi),
            metric_cell(row.validity.dunn),
            metric_cell(row.validity.pbm),
            metric_cell(row.validity.xie_beni),
            row.status == RunStatus::ok ? std::to_string(row.k) : "",
            to_string(row.status),
        };
        csv::write_row(os, cells);
    }
    return os.str();
}

namespace {

// content-addressed per-cell seed so the report is invariant under grid
// enumeration order
std::uint64_t cell_seed(std::uint64_t base, const std::string& variant,
                        const std::string& algorithm) {
    std::uint64_t h = base ^ 0xcbf29ce484222325ULL;
    for (char c : variant + "/" + algorithm) {
        h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    }
    return Rng::splitmix64(h);
}

std::vector<double> default_eps_grid(const Matrix& x, std::uint64_t seed) {
    // pairwise-distance quantiles over a bounded sample
    Rng rng(seed);
    const std::size_t n = x.rows();
    const std::size_t m = std::min<std::size_t>(n, 300);
    const auto idx = rng.sample_without_replacement(n, m);
    std::vector<double> dists;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            dists.push_back(euclidean(x.row(idx[a]), x.row(idx[b])));
        }
    }
    if (dists.empty()) return {0.5, 1.0, 1.5};
    std::sort(dists.begin(), dists.end());
    auto q = [&](double p) {
        return dists[std::min(dists.size() - 1,
                              static_cast<std::size_t>(p * static_cast<double>(dists.size())))];
    };
    return {q(0.05), q(0.10), q(0.25)};
}

BenchmarkRow run_cell(const std::string& variant_name, const Dataset& data, Algorithm algorithm,
                      const BenchmarkOptions& options) {
    BenchmarkRow row;
    row.variant = variant_name;
    row.algorithm = to_string(algorithm);
    const auto started = std::chrono::steady_clock::now();
    try {
        ClusteringConfig cfg;
        cfg.algorithm = algorithm;
        cfg.seed = cell_seed(options.seed, variant_name, row.algorithm);
        cfg.restarts = options.restarts;
        cfg.spectral_cap = options.spectral_cap;

        Assignment assignment;
        if (algorithm == Algorithm::dbscan) {
            const std::vector<double> eps_grid =
                options.eps_grid.empty() ? default_eps_grid(data.values, cfg.seed)
                                         : options.eps_grid;
            const std::vector<int> min_samples_grid =
                options.min_samples_grid.empty() ? std::vector<int>{3, 5, 10}
                                                 : options.min_samples_grid;
            const DbscanGridResult grid =
                grid_search_dbscan(data.values, eps_grid, min_samples_grid);
            cfg.eps = grid.eps;
            cfg.min_samples = grid.min_samples;
            assignment = dbscan(data.values, cfg);
            std::ostringstream hp;
            hp << "eps=" << grid.eps << ";min_samples=" << grid.min_samples;
            row.hyperparameters = hp.str();
        } else {
            const ElbowResult elbow =
                elbow_select_k(data.values, options.k_min, options.k_max, cfg.seed,
                               options.restarts);
            cfg.k = elbow.k;
            row.hyperparameters = "k=" + std::to_string(elbow.k);
            switch (algorithm) {
                case Algorithm::kmeans:
                    assignment = kmeans(data.values, cfg);
                    break;
                case Algorithm::fuzzy_cmeans: {
                    const FuzzyAssignment fuzzy = fuzzy_cmeans(data.values, cfg);
                    assignment.labels = fuzzy.hardened();
                    assignment.centroids = fuzzy.centers;
                    row.validity.xie_beni = [&] {
                        try {
                            return std::optional<double>(
                                xie_beni(data.values, fuzzy.membership, fuzzy.centers));
                        } catch (const Error&) {
                            return std::optional<double>();
                        }
                    }();
                    break;
                }
                case Algorithm::spectral:
                    assignment = spectral(data.values, cfg);
                    break;
                default:
                    break;
            }
        }

        const std::optional<double> fuzzy_xb = row.validity.xie_beni;
        row.validity = validity_report(
            data.values, assignment.labels,
            assignment.centroids ? &*assignment.centroids : nullptr);
        if (fuzzy_xb) row.validity.xie_beni = fuzzy_xb;  // true membership version
        row.k = row.validity.k;
        row.config = cfg;
        row.status = RunStatus::ok;
    } catch (const Error& e) {
        row.status = RunStatus::failed;
        row.reason = e.what();
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return row;
}

}  // namespace

BenchmarkReport run_benchmark(const std::map<std::string, Dataset>& variants,
                              const std::vector<Algorithm>& algorithms,
                              const BenchmarkOptions& options) {
    if (variants.empty() || algorithms.empty()) {
        throw Error(Errc::ConfigError, "benchmark needs >= 1 variant and >= 1 algorithm");
    }
    struct Cell {
        const std::string* variant;
        const Dataset* data;
        Algorithm algorithm;
    };
    std::vector<Cell> cells;
    for (const auto& [name, data] : variants) {
        for (Algorithm a : algorithms) cells.push_back({&name, &data, a});
    }

    BenchmarkReport report;
    report.seed = options.seed;
    report.rows.resize(cells.size());
    parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
        report.rows[i] =
            run_cell(*cells[i].variant, *cells[i].data, cells[i].algorithm, options);
    });

    if (options.include_reserved_rows) {
        for (const auto& [name, data] : variants) {
            for (const char* reserved : {"hdbscan", "robp"}) {
                BenchmarkRow row;
                row.variant = name;
                row.algorithm = reserved;
                row.status = RunStatus::skipped;
                row.reason = "algorithm out of scope; name reserved for grid compatibility";
                report.rows.push_back(std::move(row));
            }
        }
    }

    std::ostringstream acc;
    acc << report.rows.size() << " clustering cells + 4 XAI methods on the winner "
        << "+ 2 LLMs x 3 shot modes at explain time = "
        << report.rows.size() + 4 + 6 << " combinations";
    report.accounting = acc.str();
    return report;
}

Winner select_best(const BenchmarkReport& report, Criterion criterion) {
    const bool lower_is_better = criterion == Criterion::dbi || criterion == Criterion::xie_beni;
    auto value_of = [&](const BenchmarkRow& row) -> std::optional<double> {
        switch (criterion) {
            case Criterion::silhouette: return row.validity.silhouette;
            case Criterion::dbi: return row.validity.dbi;
            case Criterion::chi: return row.validity.chi;
            case Criterion::dunn: return row.validity.dunn;
            case Criterion::pbm: return row.validity.pbm;
            case Criterion::xie_beni: return row.validity.xie_beni;
        }
        return std::nullopt;
    };

    const BenchmarkRow* best = nullptr;
    double best_value = 0.0;
    for (const auto& row : report.rows) {
        if (row.status != RunStatus::ok) continue;
        const auto v = value_of(row);
        if (!v) continue;
        const double score = lower_is_better ? -*v : *v;
        if (!best || score > best_value) {
            best = &row;
            best_value = score;
        } else if (score == best_value) {
            // tie break: lower DBI, then higher CHI
            const double dbi_best = best->validity.dbi.value_or(kInf);
            const double dbi_row = row.validity.dbi.value_or(kInf);
            if (dbi_row < dbi_best ||
                (dbi_row == dbi_best &&
                 row.validity.chi.value_or(-kInf) > best->validity.chi.value_or(-kInf))) {
                best = &row;
            }
        }
    }
    if (!best) throw Error(Errc::NoSuccessfulRun, "no ok row carries the selection criterion");

    Winner winner;
    winner.variant = best->variant;
    winner.config = best->config;
    winner.validity = best->validity;
    std::ostringstream why;
    why << "argmax of " << to_string(criterion) << " over " << report.rows.size()
        << " cells; winner " << best->variant << "/" << best->algorithm << " ("
        << to_string(criterion) << "=" << metric_cell(value_of(*best)) << ", "
        << best->hyperparameters << ")";
    winner.rationale = why.str();
    return winner;
}

DatasetFingerprint fingerprint_of(const Dataset& ds) {
    std::string names;
    for (const auto& n : ds.feature_names) {
        names += n;
        names.push_back('\x1f');
    }
    return {sha256_hex(names), ds.rows(), ds.cols()};
}

const Exemplar* Thesaurus::find_exemplar(const std::string& instance_id) const {
    for (const auto& e : bank) {
        if (e.instance_id == instance_id) return &e;
    }
    return nullptr;
}

Thesaurus build_thesaurus(const ThesaurusBuildInputs& in, std::vector<std::string>* warnings) {
    if (!in.dataset || !in.assignment || !in.surrogate) {
        throw Error(Errc::ConfigError, "dataset, assignment and surrogate are required");
    }
    if (in.exemplar_ids.empty()) {
        throw Error(Errc::EmptyExemplarBank, "no exemplar ids supplied");
    }
    const Dataset& ds = *in.dataset;

    Thesaurus t;
    t.fingerprint = fingerprint_of(ds);
    t.variant = in.variant;
    t.config = in.config;
    t.validity = in.validity;
    t.cluster_labels = in.cluster_labels;
    t.profile = in.profile;
    t.surrogate = *in.surrogate;
    t.surrogate_accuracy = in.surrogate_eval.accuracy;
    t.surrogate_f1 = in.surrogate_eval.macro_f1;
    t.normalization = in.normalization;
    t.domain_preamble = in.domain_preamble;
    t.glossary = in.glossary;

    const PredictFn predict = surrogate_predict_fn(*in.surrogate);
    const TrainingStats stats = TrainingStats::from(ds.values);

    std::vector<std::optional<Exemplar>> built(in.exemplar_ids.size());
    std::vector<std::string> errors(in.exemplar_ids.size());
    parallel_for(in.exemplar_ids.size(), in.jobs, [&](std::size_t i) {
        const std::string& id = in.exemplar_ids[i];
        try {
            const auto row = ds.find_row(id);
            if (!row) throw Error(Errc::UnknownFeature, "instance id not in dataset: " + id);
            const std::vector<double> x = ds.values.row_vec(*row);

            LimeConfig lime_cfg = in.lime;
            lime_cfg.seed = Rng(in.lime.seed).fork(i).seed();
            LimeResult lime = lime_explain(predict, x, ds.feature_names, stats, lime_cfg);
            lime.importance.instance_id = id;

            Exemplar e;
            e.instance_id = id;
            e.features_original = in.normalization.row_to_original(ds.values.row(*row));
            e.cluster = in.assignment->labels[*row];
            e.cluster_label =
                e.cluster >= 0 && static_cast<std::size_t>(e.cluster) < in.cluster_labels.size()
                    ? in.cluster_labels[e.cluster]
                    : "cluster-" + std::to_string(e.cluster);
            e.fidelity = lime_fidelity(lime, predict);
            e.lime = std::move(lime.importance);
            built[i] = std::move(e);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < built.size(); ++i) {
        if (built[i]) {
            t.bank.push_back(std::move(*built[i]));
        } else if (warnings) {
            warnings->push_back("exemplar " + in.exemplar_ids[i] + " skipped: " + errors[i]);
        }
    }
    if (t.bank.empty()) {
        throw Error(Errc::EmptyExemplarBank, "every exemplar failed to explain");
    }
    return t;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

using jsonio::config_from_json;
using jsonio::config_to_json;
using jsonio::fiv_from_json;
using jsonio::fiv_to_json;
using jsonio::matrix_from_json;
using jsonio::matrix_to_json;
using jsonio::norm_from_json;
using jsonio::norm_to_json;
using jsonio::profile_from_json;
using jsonio::profile_to_json;
using jsonio::validity_from_json;
using jsonio::validity_to_json;

constexpr const char* kSupportedVersion = "1";

}  // namespace

void save_thesaurus(const Thesaurus& t, const std::string& path) {
    json bank = json::array();
    for (const auto& e : t.bank) {
        bank.push_back(json{{"instance_id", e.instance_id},
                            {"features_original", e.features_original},
                            {"cluster", e.cluster},
                            {"cluster_label", e.cluster_label},
                            {"lime", fiv_to_json(e.lime)},
                            {"fidelity", e.fidelity}});
    }
    const json payload{
        {"version", t.version},
        {"fingerprint", json{{"schema_hash", t.fingerprint.schema_hash},
                             {"rows", t.fingerprint.rows},
                             {"cols", t.fingerprint.cols}}},
        {"variant", t.variant},
        {"config", config_to_json(t.config)},
        {"validity", validity_to_json(t.validity)},
        {"cluster_labels", t.cluster_labels},
        {"profile", profile_to_json(t.profile)},
        {"surrogate", json{{"weights", matrix_to_json(t.surrogate.weights)},
                           {"bias", t.surrogate.bias},
                           {"classes", t.surrogate.classes},
                           {"epochs_run", t.surrogate.epochs_run},
                           {"final_loss", t.surrogate.final_loss},
                           {"seed", t.surrogate.seed}}},
        {"surrogate_accuracy", t.surrogate_accuracy},
        {"surrogate_f1", t.surrogate_f1},
        {"normalization", norm_to_json(t.normalization)},
        {"bank", bank},
        {"domain_preamble", t.domain_preamble},
        {"glossary", t.glossary},
    };
    const std::string text = payload.dump(2);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
    out << text << "\nsha256:" << sha256_hex(text) << "\n";
}

Thesaurus load_thesaurus(const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, path);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    const std::string marker = "\nsha256:";
    const auto pos = content.rfind(marker);
    if (pos == std::string::npos) {
        throw Error(Errc::CorruptFile, path + ": missing checksum footer");
    }
    const std::string payload = content.substr(0, pos);
    std::string digest = content.substr(pos + marker.size());
    while (!digest.empty() && (digest.back() == '\n' || digest.back() == '\r')) digest.pop_back();
    if (digest.size() != 64 || sha256_hex(payload) != digest) {
        throw Error(Errc::CorruptFile, path + ": checksum mismatch");
    }

    json j;
    try {
        j = json::parse(payload);
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptFile, path + ": " + e.what());
    }

    try {
        Thesaurus t;
        t.version = j.at("version").get<std::string>();
        if (t.version != kSupportedVersion) {
            throw Error(Errc::VersionMismatch,
                        "file version " + t.version + ", supported " + kSupportedVersion);
        }
        const auto& fp = j.at("fingerprint");
        t.fingerprint = {fp.at("schema_hash").get<std::string>(),
                         fp.at("rows").get<std::size_t>(), fp.at("cols").get<std::size_t>()};
        t.variant = j.at("variant").get<std::string>();
        t.config = config_from_json(j.at("config"));
        t.validity = validity_from_json(j.at("validity"));
        t.cluster_labels = j.at("cluster_labels").get<std::vector<std::string>>();
        t.profile = profile_from_json(j.at("profile"));
        const auto& s = j.at("surrogate");
        t.surrogate.weights = matrix_from_json(s.at("weights"));
        t.surrogate.bias = s.at("bias").get<std::vector<double>>();
        t.surrogate.classes = s.at("classes").get<std::vector<int>>();
        t.surrogate.epochs_run = s.at("epochs_run").get<int>();
        t.surrogate.final_loss = s.at("final_loss").get<double>();
        t.surrogate.seed = s.at("seed").get<std::uint64_t>();
        t.surrogate_accuracy = j.at("surrogate_accuracy").get<double>();
        t.surrogate_f1 = j.at("surrogate_f1").get<double>();
        t.normalization = norm_from_json(j.at("normalization"));
        for (const auto& e : j.at("bank")) {
            Exemplar ex;
            ex.instance_id = e.at("instance_id").get<std::string>();
            ex.features_original = e.at("features_original").get<std::vector<double>>();
            ex.cluster = e.at("cluster").get<int>();
            ex.cluster_label = e.at("cluster_label").get<std::string>();
            ex.lime = fiv_from_json(e.at("lime"));
            ex.fidelity = e.at("fidelity").get<double>();
            t.bank.push_back(std::move(ex));
        }
        t.domain_preamble = j.at("domain_preamble").get<std::string>();
        t.glossary = j.at("glossary").get<std::map<std::string, std::string>>();
        return t;
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptFile, path + ": " + e.what());
    }
}

}  // namespace xclus
