#include "xclus/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "xclus/csv.hpp"
#include "xclus/errors.hpp"
#include "xclus/rng.hpp"

namespace xclus {

using nlohmann::json;

int ShotMode::shot_count() const {
    switch (kind) {
        case Kind::zero: return 0;
        case Kind::one: return 1;
        case Kind::few: return k;
    }
    return 0;
}

std::string ShotMode::name() const {
    switch (kind) {
        case Kind::zero: return "zero-shot";
        case Kind::one: return "one-shot";
        case Kind::few: return "few-shot";
    }
    return "?";
}

ShotMode shot_mode_from_string(const std::string& s) {
    if (s == "zero") return ShotMode::zero();
    if (s == "one") return ShotMode::one();
    if (s == "few") return ShotMode::few();
    if (s.rfind("few:", 0) == 0) {
        const int k = std::stoi(s.substr(4));
        if (k < 2) throw Error(Errc::ConfigError, "few-shot k must be >= 2");
        return ShotMode::few(k);
    }
    throw Error(Errc::ConfigError, "unknown shot mode: " + s + " (zero|one|few|few:k)");
}

LlmConfig::Backend backend_from_string(const std::string& s) {
    if (s == "http") return LlmConfig::Backend::http;
    if (s == "stub") return LlmConfig::Backend::stub;
    throw Error(Errc::ConfigError, "unknown backend: " + s);
}

LlmConfig::StubBehavior stub_behavior_from_string(const std::string& s) {
    if (s == "echo") return LlmConfig::StubBehavior::echo;
    if (s == "reversed") return LlmConfig::StubBehavior::reversed;
    if (s == "from_shots") return LlmConfig::StubBehavior::from_shots;
    if (s == "alphabetical") return LlmConfig::StubBehavior::alphabetical;
    if (s == "scripted") return LlmConfig::StubBehavior::scripted;
    throw Error(Errc::ConfigError, "unknown stub behavior: " + s);
}

std::string response_contract_text() {
    return "Answer in exactly two sections.\n"
           "First a line \"RANKING:\" followed by one line per feature, most important first,\n"
           "formatted as \"<rank>. <feature_name>: <+|->\" where + means the feature pushes the\n"
           "instance toward its cluster and - means it pushes away.\n"
           "Then a line \"EXPLANATION:\" followed by a short plain-language explanation for a\n"
           "non-expert reader.";
}

std::string render_answer(const std::vector<std::pair<std::string, int>>& ranking,
                          const std::string& narrative) {
    std::ostringstream os;
    os << "RANKING:\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        os << (i + 1) << ". " << ranking[i].first << ": " << (ranking[i].second < 0 ? '-' : '+')
           << "\n";
    }
    os << "EXPLANATION:\n" << narrative << "\n";
    return os.str();
}

std::string render_answer(const FeatureImportanceVector& fiv, const std::string& narrative) {
    const auto names = fiv.ranking();
    const auto signs = fiv.ranking_signs();
    std::vector<std::pair<std::string, int>> ranking;
    for (std::size_t i = 0; i < names.size(); ++i) ranking.emplace_back(names[i], signs[i]);
    return render_answer(ranking, narrative);
}

std::string template_narrative(const FeatureImportanceVector& fiv,
                               const std::string& cluster_label) {
    const auto names = fiv.ranking();
    const auto signs = fiv.ranking_signs();
    std::ostringstream os;
    os << "This data point sits in the " << cluster_label << " group";
    if (!names.empty()) {
        os << " mostly because of " << names[0] << ", which "
           << (signs[0] < 0 ? "lowers" : "raises") << " the fit to this group";
        if (names.size() > 1) {
            os << ", with " << names[1] << " also " << (signs[1] < 0 ? "working against" : "supporting")
               << " it";
        }
    }
    os << ".";
    return os.str();
}

namespace {

std::string render_instance_block(const std::vector<std::string>& feature_names,
                                  const std::vector<double>& features,
                                  const std::string& cluster_label) {
    std::ostringstream os;
    os << "Data point (values in original units):\n";
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        os << "  " << feature_names[j] << ": " << csv::format_double(features[j]) << "\n";
    }
    os << "Assigned cluster: " << cluster_label << "\n";
    return os.str();
}

std::string profile_summary(const Thesaurus& t) {
    std::ostringstream os;
    os << "Cluster comparison (" << t.profile.label_a << " vs " << t.profile.label_b << "):\n";
    for (const auto& row : t.profile.rows) {
        if (!row.significant) continue;
        os << "  " << row.feature << " differs significantly (p=" << row.p << "): "
           << (row.mean_a > row.mean_b ? "higher" : "lower") << " in " << t.profile.label_a
           << " (" << row.mean_a << " vs " << row.mean_b << ")\n";
    }
    return os.str();
}

}  // namespace

PromptBundle build_prompt(const Thesaurus& thesaurus, const ExplainInstance& instance,
                          ShotMode mode, std::uint64_t seed) {
    if (!(instance.fingerprint == thesaurus.fingerprint)) {
        throw Error(Errc::FingerprintMismatch,
                    "instance dataset fingerprint differs from the thesaurus");
    }
    const int shots_wanted = mode.shot_count();
    if (shots_wanted > static_cast<int>(thesaurus.bank.size())) {
        throw Error(Errc::BankTooSmall, std::to_string(shots_wanted) + " shots requested, bank has " +
                                            std::to_string(thesaurus.bank.size()));
    }

    PromptBundle bundle;
    bundle.mode = mode;
    bundle.instance_id = instance.id;

    std::ostringstream sys;
    sys << "You explain why individual data points were assigned to their cluster.\n\n"
        << thesaurus.domain_preamble << "\n\n";
    if (!thesaurus.glossary.empty()) {
        sys << "Feature glossary:\n";
        for (const auto& [name, description] : thesaurus.glossary) {
            sys << "  " << name << ": " << description << "\n";
        }
        sys << "\n";
    }
    sys << profile_summary(thesaurus) << "\n" << response_contract_text();
    bundle.system_text = sys.str();

    if (shots_wanted > 0) {
        Rng rng(seed);
        const auto picks =
            rng.sample_without_replacement(thesaurus.bank.size(), static_cast<std::size_t>(shots_wanted));
        for (std::size_t idx : picks) {
            const Exemplar& e = thesaurus.bank[idx];
            PromptShot shot;
            shot.instance_id = e.instance_id;
            shot.instance_text = render_instance_block(thesaurus.normalization.names,
                                                       e.features_original, e.cluster_label);
            shot.answer_text = render_answer(e.lime, template_narrative(e.lime, e.cluster_label));
            bundle.shots.push_back(std::move(shot));
        }
    }

    bundle.user_text = render_instance_block(thesaurus.normalization.names,
                                             instance.features_original, instance.cluster_label);
    bundle.user_text += "\nExplain this assignment.\n";

    std::size_t chars = bundle.system_text.size() + bundle.user_text.size();
    for (const auto& s : bundle.shots) chars += s.instance_text.size() + s.answer_text.size();
    bundle.token_estimate = chars / 4;
    return bundle;
}

std::string render_user_message(const PromptBundle& bundle) {
    std::ostringstream os;
    for (std::size_t i = 0; i < bundle.shots.size(); ++i) {
        os << "### Example " << (i + 1) << "\n"
           << bundle.shots[i].instance_text << "\n"
           << bundle.shots[i].answer_text << "\n";
    }
    if (!bundle.shots.empty()) os << "### Now your turn\n";
    os << bundle.user_text;
    return os.str();
}

namespace {

Completion complete_stub(const LlmConfig& cfg, const PromptBundle& bundle,
                         const Thesaurus* thesaurus) {
    Completion out;
    out.model = cfg.model_name;

    auto need_thesaurus = [&]() -> const Thesaurus& {
        if (!thesaurus) {
            throw Error(Errc::ConfigError, "this stub behavior needs the thesaurus ground truth");
        }
        return *thesaurus;
    };

    switch (cfg.stub_behavior) {
        case LlmConfig::StubBehavior::scripted: {
            if (!std::filesystem::exists(cfg.stub_script_path)) {
                throw Error(Errc::MissingFile, cfg.stub_script_path);
            }
            std::ifstream in(cfg.stub_script_path);
            json doc;
            try {
                in >> doc;
            } catch (const json::exception& e) {
                throw Error(Errc::CorruptFile, cfg.stub_script_path + ": " + e.what());
            }
            if (!doc.contains(bundle.instance_id)) {
                throw Error(Errc::StubKeyMissing, bundle.instance_id);
            }
            out.text = doc[bundle.instance_id].get<std::string>();
            return out;
        }
        case LlmConfig::StubBehavior::echo: {
            const Thesaurus& t = need_thesaurus();
            const Exemplar* e = t.find_exemplar(bundle.instance_id);
            if (!e) throw Error(Errc::StubKeyMissing, bundle.instance_id + " not in exemplar bank");
            out.text = render_answer(e->lime, template_narrative(e->lime, e->cluster_label));
            return out;
        }
        case LlmConfig::StubBehavior::reversed: {
            const Thesaurus& t = need_thesaurus();
            const Exemplar* e = t.find_exemplar(bundle.instance_id);
            if (!e) throw Error(Errc::StubKeyMissing, bundle.instance_id + " not in exemplar bank");
            const auto names = e->lime.ranking();
            const auto signs = e->lime.ranking_signs();
            std::vector<std::pair<std::string, int>> ranking;
            for (std::size_t i = names.size(); i-- > 0;) ranking.emplace_back(names[i], signs[i]);
            out.text = render_answer(ranking, "Reversed-ranking control response.");
            return out;
        }
        case LlmConfig::StubBehavior::from_shots: {
            if (bundle.shots.empty()) {
                // no context to copy from: degrade to the alphabetical control
                break;
            }
            // consensus: mean reciprocal rank per feature across shots,
            // majority sign
            std::map<std::string, double> score;
            std::map<std::string, int> sign_sum;
            for (const auto& shot : bundle.shots) {
                std::istringstream is(shot.answer_text);
                std::string line;
                std::size_t rank = 0;
                bool in_block = false;
                while (std::getline(is, line)) {
                    if (line == "RANKING:") {
                        in_block = true;
                        continue;
                    }
                    if (!in_block) continue;
                    if (line.rfind("EXPLANATION:", 0) == 0) break;
                    const auto dot = line.find(". ");
                    const auto colon = line.rfind(": ");
                    if (dot == std::string::npos || colon == std::string::npos || colon <= dot)
                        continue;
                    const std::string feature = line.substr(dot + 2, colon - dot - 2);
                    const char sign = line.back();
                    ++rank;
                    score[feature] += 1.0 / static_cast<double>(rank);
                    sign_sum[feature] += (sign == '-') ? -1 : 1;
                }
            }
            std::vector<std::pair<std::string, double>> order(score.begin(), score.end());
            std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
            std::vector<std::pair<std::string, int>> ranking;
            for (const auto& [feature, total] : order) {
                ranking.emplace_back(feature, sign_sum[feature] < 0 ? -1 : 1);
            }
            out.text = render_answer(ranking, "Consensus of the provided worked examples.");
            return out;
        }
        case LlmConfig::StubBehavior::alphabetical:
            break;
    }

    // alphabetical control: fixed ranking independent of any context
    const Thesaurus& t = need_thesaurus();
    std::vector<std::string> names = t.normalization.names;
    std::sort(names.begin(), names.end());
    std::vector<std::pair<std::string, int>> ranking;
    for (const auto& n : names) ranking.emplace_back(n, 1);
    out.text = render_answer(ranking, "Context-free control response.");
    return out;
}

Completion complete_http(const LlmConfig& cfg, const PromptBundle& bundle) {
    const json body{
        {"model", cfg.model_name},
        {"messages", json::array({json{{"role", "system"}, {"content", bundle.system_text}},
                                  json{{"role", "user"},
                                       {"content", render_user_message(bundle)}}})},
        {"temperature", cfg.temperature},
        {"max_tokens", cfg.max_tokens},
    };

    httplib::Client client(cfg.endpoint_url);
    client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
    httplib::Headers headers;
    if (!cfg.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    Completion out;
    out.model = cfg.model_name;
    for (int attempt = 0;; ++attempt) {
        auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
        const bool transient =
            !res ||
            (res->status >= 500 || res->status == 429);
        if (res && res->status == 200) {
            out.http_status = res->status;
            out.retries = attempt;
            try {
                const json reply = json::parse(res->body);
                out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw Error(Errc::Unparseable, std::string("malformed completion body: ") + e.what());
            }
            return out;
        }
        if (res && !transient) {
            throw Error(Errc::HttpStatus,
                        "endpoint returned " + std::to_string(res->status));
        }
        if (attempt >= cfg.max_retries) {
            if (!res) {
                const auto err = res.error();
                if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                    err == httplib::Error::Write) {
                    throw Error(Errc::Timeout, "request timed out after " +
                                                   std::to_string(attempt) + " retries");
                }
                throw Error(Errc::EndpointUnreachable, cfg.endpoint_url);
            }
            throw Error(Errc::HttpStatus, "endpoint returned " + std::to_string(res->status) +
                                              " after " + std::to_string(attempt) + " retries");
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(
            cfg.retry_backoff_s * static_cast<double>(1 << attempt)));
    }
}

}  // namespace

Completion complete(const LlmConfig& cfg, const PromptBundle& bundle, const Thesaurus* thesaurus) {
    if (cfg.backend == LlmConfig::Backend::stub) return complete_stub(cfg, bundle, thesaurus);
    return complete_http(cfg, bundle);
}

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool word_boundary(const std::string& text, std::size_t pos, std::size_t len) {
    auto is_word = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    if (pos > 0 && is_word(text[pos - 1])) return false;
    if (pos + len < text.size() && is_word(text[pos + len])) return false;
    return true;
}

const std::vector<std::string> kPositiveWords = {"increase", "increases", "increased", "positive",
                                                 "positively", "higher", "high", "more", "raises",
                                                 "supports"};
const std::vector<std::string> kNegativeWords = {"decrease", "decreases", "decreased", "negative",
                                                 "negatively", "lower", "low", "less", "reduces",
                                                 "against"};

int polarity_near(const std::string& lower_text, std::size_t pos, std::size_t len) {
    const std::size_t window = 60;
    const std::size_t begin = pos > window ? pos - window : 0;
    const std::size_t end = std::min(lower_text.size(), pos + len + window);
    const std::string context = lower_text.substr(begin, end - begin);

    std::size_t best_dist = std::string::npos;
    int best_sign = 1;
    auto scan = [&](const std::vector<std::string>& words, int sign) {
        for (const auto& w : words) {
            std::size_t at = context.find(w);
            while (at != std::string::npos) {
                const std::size_t abs_at = begin + at;
                const std::size_t dist = abs_at > pos ? abs_at - pos : pos - abs_at;
                if (dist < best_dist) {
                    best_dist = dist;
                    best_sign = sign;
                }
                at = context.find(w, at + 1);
            }
        }
    };
    scan(kPositiveWords, 1);
    scan(kNegativeWords, -1);
    return best_sign;
}

}  // namespace

ParsedExplanation parse_response(const std::string& text,
                                 const std::vector<std::string>& schema_features) {
    if (text.empty()) throw Error(Errc::Unparseable, "empty response");
    ParsedExplanation parsed;
    parsed.raw_response = text;

    // primary path: the contracted block
    std::istringstream is(text);
    std::string line;
    bool in_block = false;
    bool in_narrative = false;
    std::ostringstream narrative;
    std::vector<std::pair<std::string, int>> ranking;
    std::map<std::string, bool> seen;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!in_narrative && line == "RANKING:") {
            in_block = true;
            continue;
        }
        if (in_block && line.rfind("EXPLANATION:", 0) == 0) {
            in_block = false;
            in_narrative = true;
            const std::string rest = line.substr(12);
            if (!rest.empty()) narrative << rest << "\n";
            continue;
        }
        if (in_block) {
            // "<rank>. <feature_name>: <+|->"
            std::size_t p = 0;
            while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
            std::size_t digits = p;
            while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits])))
                ++digits;
            if (digits == p || digits >= line.size() || line[digits] != '.') continue;
            std::size_t name_start = digits + 1;
            while (name_start < line.size() &&
                   std::isspace(static_cast<unsigned char>(line[name_start])))
                ++name_start;
            const std::size_t colon = line.rfind(':');
            if (colon == std::string::npos || colon <= name_start) continue;
            std::string feature = line.substr(name_start, colon - name_start);
            while (!feature.empty() && feature.back() == ' ') feature.pop_back();
            std::size_t sign_at = colon + 1;
            while (sign_at < line.size() &&
                   std::isspace(static_cast<unsigned char>(line[sign_at])))
                ++sign_at;
            if (sign_at >= line.size()) continue;
            const char sign = line[sign_at];
            if (sign != '+' && sign != '-') continue;
            if (std::find(schema_features.begin(), schema_features.end(), feature) ==
                schema_features.end())
                continue;
            if (seen[feature]) continue;
            seen[feature] = true;
            ranking.emplace_back(feature, sign == '-' ? -1 : 1);
            continue;
        }
        if (in_narrative) narrative << line << "\n";
    }
    if (!ranking.empty()) {
        parsed.ranking = std::move(ranking);
        parsed.narrative = narrative.str();
        while (!parsed.narrative.empty() && parsed.narrative.back() == '\n')
            parsed.narrative.pop_back();
        if (parsed.narrative.empty()) parsed.narrative = text;
        parsed.parse_path = ParsedExplanation::ParsePath::structured_block;
        return parsed;
    }

    // fallback: schema features by first mention, polarity words nearby
    const std::string lower = lowercase(text);
    std::vector<std::pair<std::size_t, std::pair<std::string, int>>> mentions;
    for (const auto& feature : schema_features) {
        const std::string needle = lowercase(feature);
        std::size_t at = lower.find(needle);
        while (at != std::string::npos) {
            if (word_boundary(lower, at, needle.size())) {
                mentions.emplace_back(
                    at, std::make_pair(feature, polarity_near(lower, at, needle.size())));
                break;
            }
            at = lower.find(needle, at + 1);
        }
    }
    if (mentions.empty()) {
        throw Error(Errc::Unparseable, "no RANKING block and no schema feature mentioned");
    }
    std::sort(mentions.begin(), mentions.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [pos, entry] : mentions) parsed.ranking.push_back(entry);
    parsed.narrative = text;
    parsed.parse_path = ParsedExplanation::ParsePath::fallback_scan;
    return parsed;
}

}  // namespace xclus
