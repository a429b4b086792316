#include "xclus/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "xclus/csv.hpp"
#include "xclus/errors.hpp"

namespace xclus {

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

double coherence(const std::string& prompt_text, const std::string& response_text) {
    if (prompt_text.empty() || response_text.empty()) {
        throw Error(Errc::EmptyText, "coherence needs two non-empty texts");
    }
    const auto a_tokens = tokenize(prompt_text);
    const auto b_tokens = tokenize(response_text);
    if (a_tokens.empty() || b_tokens.empty()) {
        throw Error(Errc::EmptyText, "coherence needs alphanumeric content");
    }

    std::map<std::string, double> tf_a, tf_b;
    for (const auto& t : a_tokens) tf_a[t] += 1.0;
    for (const auto& t : b_tokens) tf_b[t] += 1.0;

    // sublinear tf, idf smoothed over the two documents
    auto weight = [&](const std::map<std::string, double>& tf, const std::string& term) {
        const auto it = tf.find(term);
        if (it == tf.end()) return 0.0;
        const double df = (tf_a.count(term) ? 1.0 : 0.0) + (tf_b.count(term) ? 1.0 : 0.0);
        const double idf = std::log(3.0 / (1.0 + df)) + 1.0;  // N = 2 documents
        return (1.0 + std::log(it->second)) * idf;
    };

    std::set<std::string> vocabulary;
    for (const auto& [t, c] : tf_a) vocabulary.insert(t);
    for (const auto& [t, c] : tf_b) vocabulary.insert(t);

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& term : vocabulary) {
        const double wa = weight(tf_a, term);
        const double wb = weight(tf_b, term);
        dot += wa * wb;
        na += wa * wa;
        nb += wb * wb;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

int BuiltinGrammarChecker::count(const std::string& text) const {
    int errors = 0;

    // (a) doubled words (case-insensitive, adjacent)
    const auto tokens = tokenize(text);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i] == tokens[i - 1]) ++errors;
    }

    // (b) each sentence must start with an uppercase letter
    bool expect_capital = true;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') {
            expect_capital = true;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (expect_capital && std::isalpha(static_cast<unsigned char>(c))) {
            if (std::islower(static_cast<unsigned char>(c))) ++errors;
            expect_capital = false;
        } else if (expect_capital && std::isdigit(static_cast<unsigned char>(c))) {
            expect_capital = false;
        }
    }

    // (c) unmatched brackets and double quotes
    int round = 0, square = 0, curly = 0, quotes = 0;
    int unmatched_closers = 0;
    for (char c : text) {
        switch (c) {
            case '(': ++round; break;
            case ')': round > 0 ? --round : ++unmatched_closers; break;
            case '[': ++square; break;
            case ']': square > 0 ? --square : ++unmatched_closers; break;
            case '{': ++curly; break;
            case '}': curly > 0 ? --curly : ++unmatched_closers; break;
            case '"': ++quotes; break;
            default: break;
        }
    }
    errors += round + square + curly + unmatched_closers + (quotes % 2);

    // (d) whitespace immediately before punctuation
    for (std::size_t i = 1; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') &&
            std::isspace(static_cast<unsigned char>(text[i - 1]))) {
            ++errors;
        }
    }
    return errors;
}

int grammar_error_count(const std::string& text) {
    static const BuiltinGrammarChecker checker;
    return checker.count(text);
}

double ari_readability(const std::string& text) {
    std::size_t characters = 0;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) ++characters;
    }
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) {
            ++words;
            in_word = true;
        } else if (space) {
            in_word = false;
        }
    }
    std::size_t sentences = 0;
    bool content_pending = false;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') {
            if (content_pending) ++sentences;
            content_pending = false;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            content_pending = true;
        }
    }
    if (content_pending) ++sentences;
    if (words == 0 || characters == 0) throw Error(Errc::NoWords, "ARI needs at least one word");
    if (sentences == 0) sentences = 1;

    return 4.71 * (static_cast<double>(characters) / static_cast<double>(words)) +
           0.5 * (static_cast<double>(words) / static_cast<double>(sentences)) - 21.43;
}

// compiled mirror of data/sentiment_lexicon_v1.tsv; a test keeps them in sync
namespace detail {
extern const char* kLexiconVersion;
extern const std::pair<const char*, double> kLexiconEntries[];
extern const std::size_t kLexiconSize;
}  // namespace detail

const SentimentLexicon& SentimentLexicon::builtin() {
    static const SentimentLexicon instance = [] {
        std::map<std::string, double> entries;
        for (std::size_t i = 0; i < detail::kLexiconSize; ++i) {
            entries.emplace(detail::kLexiconEntries[i].first, detail::kLexiconEntries[i].second);
        }
        return SentimentLexicon(detail::kLexiconVersion, std::move(entries));
    }();
    return instance;
}

SentimentLexicon SentimentLexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::MissingFile, path);
    std::map<std::string, double> entries;
    std::string version = "unversioned";
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto at = line.find("version=");
            if (at != std::string::npos) version = line.substr(at + 8);
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        entries[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
    }
    return SentimentLexicon(version, std::move(entries));
}

double SentimentLexicon::polarity_of(const std::string& text) const {
    const auto tokens = tokenize(text);
    double total = 0.0;
    std::size_t matched = 0;
    for (const auto& token : tokens) {
        const auto it = polarity_.find(token);
        if (it != polarity_.end()) {
            total += it->second;
            ++matched;
        }
    }
    return matched ? total / static_cast<double>(matched) : 0.0;
}

double sentiment_consistency(const std::string& prompt_text, const std::string& response_text,
                             const SentimentLexicon& lexicon) {
    if (prompt_text.empty() || response_text.empty()) {
        throw Error(Errc::EmptyText, "sentiment consistency needs two non-empty texts");
    }
    return std::abs(lexicon.polarity_of(prompt_text) - lexicon.polarity_of(response_text));
}

namespace {

// midranks (1-based) of values ranked descending
std::vector<double> midranks_desc(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace

double spearman_rank(const FeatureImportanceVector& ground, const ParsedExplanation& llm) {
    // universe: the ground features; LLM extras are ignored
    std::map<std::string, std::size_t> llm_position;
    for (std::size_t i = 0; i < llm.ranking.size(); ++i) {
        llm_position.emplace(llm.ranking[i].first, i);
    }
    std::size_t common = 0;
    for (const auto& item : ground.items) {
        if (llm_position.count(item.feature)) ++common;
    }
    if (common < 2) {
        throw Error(Errc::TooFewCommonFeatures,
                    "need >= 2 shared features, got " + std::to_string(common));
    }

    const std::size_t n = ground.items.size();
    std::vector<double> ground_score(n);   // |weight|, ranked descending
    std::vector<double> llm_score(n);      // mentioned features by order, missing tied last
    std::size_t mentioned = 0;
    for (const auto& item : ground.items) mentioned += llm_position.count(item.feature);
    for (std::size_t i = 0; i < n; ++i) {
        ground_score[i] = std::abs(ground.items[i].weight);
        const auto it = llm_position.find(ground.items[i].feature);
        // higher score = earlier rank; all missing features share one score
        llm_score[i] = it != llm_position.end()
                           ? static_cast<double>(llm.ranking.size() - it->second)
                           : -1.0;
    }
    const std::vector<double> ground_ranks = midranks_desc(ground_score);
    const std::vector<double> llm_ranks = midranks_desc(llm_score);
    return pearson(ground_ranks, llm_ranks);
}

double ndcg_difference(const FeatureImportanceVector& ground,
                       const std::vector<std::string>& llm_order) {
    const std::size_t n = ground.items.size();
    if (n == 0) throw Error(Errc::ZeroGainVector, "empty ground vector");

    std::map<std::string, double> gain;
    double total = 0.0;
    for (const auto& item : ground.items) {
        gain[item.feature] = std::abs(item.weight);
        total += std::abs(item.weight);
    }
    if (total == 0.0) throw Error(Errc::ZeroGainVector, "all ground weights are zero");
    for (auto& [feature, g] : gain) g /= total;

    // LLM ordering restricted to the ground universe, missing features
    // appended in ground order (deterministic, flagged by position)
    std::vector<std::string> order;
    std::set<std::string> used;
    for (const auto& feature : llm_order) {
        if (gain.count(feature) && !used.count(feature)) {
            order.push_back(feature);
            used.insert(feature);
        }
    }
    for (const auto& item : ground.items) {
        if (!used.count(item.feature)) order.push_back(item.feature);
    }

    auto dcg_of = [&](const std::vector<std::string>& seq) {
        double dcg = 0.0;
        for (std::size_t pos = 0; pos < seq.size(); ++pos) {
            dcg += gain[seq[pos]] / std::log2(static_cast<double>(pos) + 2.0);
        }
        return dcg;
    };

    std::vector<std::string> ideal;
    for (const auto& item : ground.items) ideal.push_back(item.feature);
    std::stable_sort(ideal.begin(), ideal.end(),
                     [&](const std::string& a, const std::string& b) { return gain[a] > gain[b]; });

    const double idcg = dcg_of(ideal);
    return 1.0 - dcg_of(order) / idcg;
}

double euclidean_distance(std::span<const double> v1, std::span<const double> v2) {
    if (v1.size() != v2.size()) {
        throw Error(Errc::DimensionMismatch, std::to_string(v1.size()) + " vs " +
                                                 std::to_string(v2.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        const double d = v1[i] - v2[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<double> rank_weight_vector(const std::vector<std::string>& ground_order,
                                       const std::vector<std::pair<std::string, int>>& ranking) {
    std::map<std::string, double> value;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        value.emplace(ranking[i].first,
                      static_cast<double>(ranking[i].second) / static_cast<double>(i + 1));
    }
    std::vector<double> out;
    out.reserve(ground_order.size());
    double norm = 0.0;
    for (const auto& feature : ground_order) {
        const auto it = value.find(feature);
        const double v = it != value.end() ? it->second : 0.0;
        out.push_back(v);
        norm += v * v;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : out) v /= norm;
    }
    return out;
}

QualityReport evaluate_quality(const std::string& prompt_text, const std::string& response_text,
                               const ParsedExplanation& parsed,
                               const FeatureImportanceVector& ground,
                               const QualityProvenance& provenance) {
    QualityReport report;
    report.instance_id = provenance.instance_id;
    report.model = provenance.model;
    report.technique = provenance.technique;

    report.structure.coherence = coherence(prompt_text, response_text);
    report.structure.grammar_errors = grammar_error_count(parsed.narrative);
    report.structure.readability_ari = ari_readability(parsed.narrative);
    report.structure.sentiment_consistency = sentiment_consistency(prompt_text, response_text);

    report.content.spearman = spearman_rank(ground, parsed);
    std::vector<std::string> llm_order;
    for (const auto& [feature, sign] : parsed.ranking) llm_order.push_back(feature);
    report.content.ndcg_difference = ndcg_difference(ground, llm_order);

    const std::vector<std::string> ground_order = ground.ranking();
    const std::vector<int> ground_signs = ground.ranking_signs();
    std::vector<std::pair<std::string, int>> ground_ranking;
    for (std::size_t i = 0; i < ground_order.size(); ++i) {
        ground_ranking.emplace_back(ground_order[i], ground_signs[i]);
    }
    const std::vector<double> v_ground = rank_weight_vector(ground_order, ground_ranking);
    const std::vector<double> v_llm = rank_weight_vector(ground_order, parsed.ranking);
    report.content.euclidean = euclidean_distance(v_ground, v_llm);
    return report;
}

std::string quality_csv(const std::vector<QualityReport>& reports) {
    std::ostringstream os;
    os << "instance_id,model,technique,coherence,grammar_errors,readability,"
          "sentiment_consistency,spearman,ndcg_difference,euclidean\n";
    for (const auto& r : reports) {
        csv::write_row(os, {r.instance_id, r.model, r.technique,
                            csv::format_double(r.structure.coherence),
                            std::to_string(r.structure.grammar_errors),
                            csv::format_double(r.structure.readability_ari),
                            csv::format_double(r.structure.sentiment_consistency),
                            csv::format_double(r.content.spearman),
                            csv::format_double(r.content.ndcg_difference),
                            csv::format_double(r.content.euclidean)});
    }
    return os.str();
}

std::string quality_summary_csv(const std::vector<QualityReport>& reports) {
    struct Acc {
        double coherence = 0, grammar = 0, ari = 0, sentiment = 0;
        double spearman = 0, ndcg = 0, euclidean = 0;
        std::size_t n = 0;
    };
    std::map<std::pair<std::string, std::string>, Acc> groups;  // (technique, model)
    for (const auto& r : reports) {
        Acc& a = groups[{r.technique, r.model}];
        a.coherence += r.structure.coherence;
        a.grammar += r.structure.grammar_errors;
        a.ari += r.structure.readability_ari;
        a.sentiment += r.structure.sentiment_consistency;
        a.spearman += r.content.spearman;
        a.ndcg += r.content.ndcg_difference;
        a.euclidean += r.content.euclidean;
        ++a.n;
    }
    std::ostringstream os;
    os << "technique,model,coherence,grammar_errors,readability,sentiment_consistency,"
          "spearman,ndcg_difference,euclidean\n";
    for (const auto& [key, a] : groups) {
        const double n = static_cast<double>(a.n);
        csv::write_row(os, {key.first, key.second, csv::format_double(a.coherence / n),
                            csv::format_double(a.grammar / n), csv::format_double(a.ari / n),
                            csv::format_double(a.sentiment / n),
                            csv::format_double(a.spearman / n), csv::format_double(a.ndcg / n),
                            csv::format_double(a.euclidean / n)});
    }
    return os.str();
}

}  // namespace xclus
