// compiled mirror of data/sentiment_lexicon_v1.tsv
#include <cstddef>
#include <utility>

namespace xclus::detail {

const char* kLexiconVersion = "v1";

const std::pair<const char*, double> kLexiconEntries[] = {
    {"amazing", 0.8},
    {"awful", -0.9},
    {"bad", -0.7},
    {"balanced", 0.4},
    {"beneficial", 0.6},
    {"best", 0.9},
    {"better", 0.5},
    {"boring", -0.5},
    {"calm", 0.4},
    {"clear", 0.4},
    {"comfortable", 0.5},
    {"concerning", -0.5},
    {"confident", 0.5},
    {"confusing", -0.5},
    {"consistent", 0.3},
    {"dangerous", -0.8},
    {"declining", -0.5},
    {"depressed", -0.9},
    {"difficult", -0.4},
    {"distressing", -0.7},
    {"dreadful", -0.9},
    {"encouraging", 0.6},
    {"energetic", 0.6},
    {"enjoyable", 0.7},
    {"excellent", 0.9},
    {"exhausted", -0.6},
    {"fail", -0.7},
    {"failing", -0.7},
    {"fantastic", 0.9},
    {"favorable", 0.6},
    {"fit", 0.5},
    {"friendly", 0.5},
    {"frustrating", -0.6},
    {"good", 0.7},
    {"great", 0.8},
    {"happy", 0.8},
    {"harmful", -0.7},
    {"healthy", 0.7},
    {"helpful", 0.5},
    {"hopeful", 0.5},
    {"hopeless", -0.8},
    {"ill", -0.6},
    {"improving", 0.6},
    {"inactive", -0.4},
    {"insufficient", -0.4},
    {"irregular", -0.3},
    {"joyful", 0.8},
    {"lazy", -0.4},
    {"lonely", -0.6},
    {"low", -0.3},
    {"miserable", -0.9},
    {"motivated", 0.6},
    {"negative", -0.6},
    {"nervous", -0.5},
    {"nice", 0.5},
    {"optimal", 0.7},
    {"optimistic", 0.6},
    {"pain", -0.7},
    {"painful", -0.7},
    {"peaceful", 0.6},
    {"pleasant", 0.6},
    {"poor", -0.6},
    {"positive", 0.6},
    {"problem", -0.5},
    {"problematic", -0.5},
    {"productive", 0.5},
    {"rested", 0.5},
    {"restless", -0.4},
    {"risky", -0.5},
    {"sad", -0.8},
    {"satisfied", 0.6},
    {"severe", -0.6},
    {"sick", -0.7},
    {"sleepy", -0.2},
    {"steady", 0.3},
    {"stressed", -0.7},
    {"strong", 0.5},
    {"struggling", -0.6},
    {"successful", 0.7},
    {"sufficient", 0.3},
    {"supportive", 0.5},
    {"terrible", -0.9},
    {"thriving", 0.8},
    {"tired", -0.4},
    {"troubled", -0.6},
    {"uncomfortable", -0.5},
    {"unhappy", -0.7},
    {"unhealthy", -0.7},
    {"unpleasant", -0.6},
    {"unstable", -0.5},
    {"unwell", -0.6},
    {"upbeat", 0.6},
    {"vigorous", 0.5},
    {"weak", -0.4},
    {"well", 0.5},
    {"wonderful", 0.9},
    {"worried", -0.6},
    {"worrying", -0.6},
    {"worse", -0.6},
    {"worst", -0.9},
};

const std::size_t kLexiconSize = sizeof(kLexiconEntries) / sizeof(kLexiconEntries[0]);

}  // namespace xclus::detail
