#pragma once

#include <map>
#include <string>
#include <vector>

#include "xclus/explainers.hpp"
#include "xclus/llm.hpp"

namespace xclus {

struct StructureQuality {
    double coherence = 0.0;
    int grammar_errors = 0;
    double readability_ari = 0.0;
    double sentiment_consistency = 0.0;
};

struct ContentQuality {
    double spearman = 0.0;
    double ndcg_difference = 0.0;
    double euclidean = 0.0;
};

struct QualityReport {
    StructureQuality structure;
    ContentQuality content;
    std::string instance_id;
    std::string model;
    std::string technique;  // zero-shot / one-shot / few-shot
};

// TF-IDF cosine over the two documents' union vocabulary (lowercased
// alphanumeric tokens, sublinear TF, smoothed IDF). Range [0,1].
double coherence(const std::string& prompt_text, const std::string& response_text);

// Pluggable checker; the builtin counts a small auditable rule set.
class GrammarChecker {
public:
    virtual ~GrammarChecker() = default;
    virtual int count(const std::string& text) const = 0;
};

class BuiltinGrammarChecker final : public GrammarChecker {
public:
    // (a) doubled words, (b) sentence not starting uppercase, (c) unmatched
    // brackets/quotes, (d) space before punctuation
    int count(const std::string& text) const override;
};

int grammar_error_count(const std::string& text);

// 4.71*(chars/words) + 0.5*(words/sentences) - 21.43; characters are
// alphanumeric only, sentences split on runs of .!?
double ari_readability(const std::string& text);

class SentimentLexicon {
public:
    static const SentimentLexicon& builtin();  // v1, also shipped at data/sentiment_lexicon_v1.tsv
    static SentimentLexicon load(const std::string& path);

    const std::string& version() const { return version_; }
    std::size_t size() const { return polarity_.size(); }
    // mean polarity of matched words in [-1,1]; 0 when nothing matches
    double polarity_of(const std::string& text) const;
    const std::map<std::string, double>& entries() const { return polarity_; }

    SentimentLexicon(std::string version, std::map<std::string, double> polarity)
        : version_(std::move(version)), polarity_(std::move(polarity)) {}

private:
    std::string version_;
    std::map<std::string, double> polarity_;
};

// |polarity(prompt) - polarity(response)| in [0,2]
double sentiment_consistency(const std::string& prompt_text, const std::string& response_text,
                             const SentimentLexicon& lexicon = SentimentLexicon::builtin());

// rho over the ground feature set with midrank ties; LLM-missing features sit
// at a tied last rank. Needs >= 2 features mentioned on both sides.
double spearman_rank(const FeatureImportanceVector& ground, const ParsedExplanation& llm);

// gains = |ground weights| normalized to sum 1; 1 - DCG(llm order)/IDCG.
// Ground features absent from the LLM order are appended in ground order.
double ndcg_difference(const FeatureImportanceVector& ground,
                       const std::vector<std::string>& llm_order);

double euclidean_distance(std::span<const double> v1, std::span<const double> v2);

// Reciprocal-rank vectorization (1, 1/2, 1/3, ... with signs), aligned to the
// ground feature order and L2-normalized; both sides of the euclidean content
// metric go through this.
std::vector<double> rank_weight_vector(const std::vector<std::string>& ground_order,
                                       const std::vector<std::pair<std::string, int>>& ranking);

struct QualityProvenance {
    std::string instance_id;
    std::string model;
    std::string technique;
};

QualityReport evaluate_quality(const std::string& prompt_text, const std::string& response_text,
                               const ParsedExplanation& parsed,
                               const FeatureImportanceVector& ground,
                               const QualityProvenance& provenance = {});

// CSV layouts: per-instance rows and a per-(model, technique) mean summary.
std::string quality_csv(const std::vector<QualityReport>& reports);
std::string quality_summary_csv(const std::vector<QualityReport>& reports);

}  // namespace xclus
