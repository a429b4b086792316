#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xclus/explainers.hpp"
#include "xclus/thesaurus.hpp"

namespace xclus {

struct ShotMode {
    enum class Kind { zero, one, few };
    Kind kind = Kind::zero;
    int k = 3;  // few-shot count, >= 2

    static ShotMode zero() { return {Kind::zero, 0}; }
    static ShotMode one() { return {Kind::one, 1}; }
    static ShotMode few(int k = 3) { return {Kind::few, k}; }

    int shot_count() const;
    std::string name() const;  // "zero-shot" / "one-shot" / "few-shot"
};

ShotMode shot_mode_from_string(const std::string& s);  // "zero" | "one" | "few" | "few:k"

struct PromptShot {
    std::string instance_id;
    std::string instance_text;
    std::string answer_text;  // RANKING block + EXPLANATION narrative
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;  // target instance rendering (features verbatim)
    std::vector<PromptShot> shots;
    ShotMode mode;
    std::size_t token_estimate = 0;  // total characters / 4
    std::string instance_id;
};

struct LlmConfig {
    enum class Backend { http, stub };
    enum class StubBehavior { echo, reversed, from_shots, alphabetical, scripted };

    Backend backend = Backend::stub;
    std::string endpoint_url;            // e.g. http://localhost:8000
    std::string model_name = "stub-llm";
    double temperature = 0.0;
    int max_tokens = 512;
    double timeout_s = 30.0;
    int max_retries = 2;
    double retry_backoff_s = 0.5;        // doubled per attempt
    std::string api_key_env;             // env var holding the bearer token
    StubBehavior stub_behavior = StubBehavior::echo;
    std::string stub_script_path;        // behavior=scripted: JSON map id -> text
};

LlmConfig::Backend backend_from_string(const std::string& s);
LlmConfig::StubBehavior stub_behavior_from_string(const std::string& s);

// The instance to explain, in original units, tied to its dataset fingerprint.
struct ExplainInstance {
    std::string id;
    std::vector<double> features_original;  // training-role features only
    int cluster = 0;
    std::string cluster_label;
    DatasetFingerprint fingerprint;
};

// The exact dual-audience output contract quoted to the model verbatim.
std::string response_contract_text();

// Rendering of a ranking + narrative in the contract's grammar; the inverse
// of parse_response on the structured path.
std::string render_answer(const FeatureImportanceVector& fiv, const std::string& narrative);
std::string render_answer(const std::vector<std::pair<std::string, int>>& ranking,
                          const std::string& narrative);

// Plain-language narrative template used for exemplar shots and stub echoes.
std::string template_narrative(const FeatureImportanceVector& fiv,
                               const std::string& cluster_label);

PromptBundle build_prompt(const Thesaurus& thesaurus, const ExplainInstance& instance,
                          ShotMode mode, std::uint64_t seed);

// The wire messages: shots are worked examples inside the user message (the
// protocol carries system|user roles only).
std::string render_user_message(const PromptBundle& bundle);

struct Completion {
    std::string text;
    int http_status = 0;
    int retries = 0;
    std::string model;
};

// Stub backends need the ground truth; pass the thesaurus that built the
// bundle. The stub path performs no network access.
Completion complete(const LlmConfig& cfg, const PromptBundle& bundle,
                    const Thesaurus* thesaurus = nullptr);

struct ParsedExplanation {
    enum class ParsePath { structured_block, fallback_scan };

    std::vector<std::pair<std::string, int>> ranking;  // (feature, sign +1/-1)
    std::string narrative;
    std::string raw_response;
    ParsePath parse_path = ParsePath::structured_block;
};

// Primary path: the contracted RANKING/EXPLANATION block. Fallback: schema
// feature names scanned in order of first mention, sign from nearby polarity
// words. Unparseable when neither path finds a feature.
ParsedExplanation parse_response(const std::string& text,
                                 const std::vector<std::string>& schema_features);

}  // namespace xclus
