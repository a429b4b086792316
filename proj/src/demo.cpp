#include "xclus/demo.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "xclus/csv.hpp"
#include "xclus/errors.hpp"
#include "xclus/rng.hpp"

namespace xclus {

namespace {

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kEpoch2021 = 18628LL * kDay;  // 2021-01-01

struct FeatureLevels {
    double negative;  // group 0: lower well-being
    double positive;  // group 1: higher well-being
    double sigma;
};

std::string two_digits(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

// inverse of the civil-days mapping (Howard Hinnant)
void civil_from_days(std::int64_t z, int* y, int* m, int* d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t year = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    *d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    *m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    *y = static_cast<int>(year + (*m <= 2));
}

}  // namespace

Schema demo_schema() {
    using C = FeatureCategory;
    using K = FeatureKind;
    using G = NativeGranularity;
    return Schema({
        {"steps", C::physical_activity, K::numeric, G::sub_hourly, {}},
        {"sedentary_minutes", C::physical_activity, K::numeric, G::daily, {}},
        {"exercise_sessions", C::physical_activity, K::numeric, G::arbitrary, {}},
        {"sleep_duration", C::sleep, K::numeric, G::daily, {}},
        {"heart_rate", C::health, K::numeric, G::sub_hourly, {}},
        {"calories", C::health, K::numeric, G::sub_hourly, {}},
        {"place", C::other, K::categorical, G::arbitrary, {"home", "work", "outside"}},
        {"stimulus_control", C::behavior, K::ordinal, G::weekly, {"never", "sometimes", "often"}},
        {"mood", C::mental_health, K::numeric, G::daily, {}},
        {"stress_score", C::mental_health, K::numeric, G::daily, {}},
        {"responsiveness_points", C::mental_health, K::numeric, G::daily, {}},
        {"age", C::demographics, K::numeric, G::entry, {}},
    });
}

PreprocessConfig demo_preprocess_config() {
    PreprocessConfig config;
    auto& rules = config.spec.rules;
    rules["steps"] = {Aggregation::sum, GranularityFill::none, MissingPolicy::mean, Encoding::none};
    rules["sedentary_minutes"] = {Aggregation::mean, GranularityFill::daily, MissingPolicy::mean,
                                  Encoding::none};
    rules["exercise_sessions"] = {Aggregation::count, GranularityFill::daily, MissingPolicy::zero,
                                  Encoding::none};
    rules["sleep_duration"] = {Aggregation::mean, GranularityFill::forward, MissingPolicy::zero,
                               Encoding::none};
    rules["heart_rate"] = {Aggregation::mean, GranularityFill::none, MissingPolicy::mean,
                           Encoding::none};
    rules["calories"] = {Aggregation::sum, GranularityFill::none, MissingPolicy::mean,
                         Encoding::none};
    rules["place"] = {Aggregation::last, GranularityFill::backward, MissingPolicy::mode,
                      Encoding::one_hot};
    rules["stimulus_control"] = {Aggregation::last, GranularityFill::periodic, MissingPolicy::mode,
                                 Encoding::ordinal};
    rules["mood"] = {Aggregation::mean, GranularityFill::daily, MissingPolicy::mean,
                     Encoding::none};
    rules["stress_score"] = {Aggregation::mean, GranularityFill::daily, MissingPolicy::mean,
                             Encoding::none};
    rules["responsiveness_points"] = {Aggregation::mean, GranularityFill::daily,
                                      MissingPolicy::mean, Encoding::none};
    rules["age"] = {Aggregation::last, GranularityFill::forward, MissingPolicy::mean,
                    Encoding::none};
    config.spec.normalization = Normalization::zscore;

    config.training_features = {"steps",      "sedentary_minutes", "exercise_sessions",
                                "sleep_duration", "heart_rate",    "calories",
                                "place",      "stimulus_control"};
    config.validation_features = {"mood", "stress_score", "responsiveness_points"};

    using F = VariantSpec::Filter;
    using C = FeatureCategory;
    const std::vector<C> categories = {C::physical_activity, C::sleep, C::health};
    const std::vector<std::string> clean = {"steps", "sedentary_minutes", "sleep_duration",
                                            "calories"};
    config.variants = {
        {"hourly_full", TargetGranularity::hourly, F::full, {}, {}},
        {"hourly_categories", TargetGranularity::hourly, F::categories, categories, {}},
        {"hourly_clean", TargetGranularity::hourly, F::explicit_list, {}, clean},
        {"daily_full", TargetGranularity::daily, F::full, {}, {}},
        {"daily_categories", TargetGranularity::daily, F::categories, categories, {}},
        {"daily_clean", TargetGranularity::daily, F::explicit_list, {}, clean},
    };
    return config;
}

DemoFiles generate_demo(const DemoSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    DemoFiles files;
    files.data_csv = (fs::path(out_dir) / "data.csv").string();
    files.schema_json = (fs::path(out_dir) / "schema.json").string();
    files.preprocess_json = (fs::path(out_dir) / "preprocess.json").string();

    save_schema(demo_schema(), files.schema_json);
    save_preprocess_config(demo_preprocess_config(), files.preprocess_json);

    // per-tick group levels; "positive" entities move more, sleep more,
    // carry a lower resting heart rate
    const double gap = spec.separation;
    const std::map<std::string, FeatureLevels> levels = {
        {"steps", {450.0, 450.0 + gap * 120.0, 120.0}},
        {"sedentary_minutes", {560.0 + gap * 45.0, 560.0, 45.0}},
        {"sleep_duration", {6.1, 6.1 + gap * 0.45, 0.45}},
        {"heart_rate", {64.0 + gap * 3.5, 64.0, 3.5}},
        {"calories", {95.0, 95.0 + gap * 14.0, 14.0}},
    };

    std::ofstream out(files.data_csv, std::ios::binary);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + files.data_csv);
    const std::vector<std::string> header = {
        "id",       "date",           "steps",          "sedentary_minutes",
        "exercise_sessions", "sleep_duration", "heart_rate", "calories",
        "place",    "stimulus_control", "mood",         "stress_score",
        "responsiveness_points", "age"};
    csv::write_row(out, header);

    Rng rng(spec.seed);
    auto iso = [&](int day, int hour, int minute) {
        int y = 0, m = 0, d = 0;
        civil_from_days(kEpoch2021 / kDay + day, &y, &m, &d);
        return std::to_string(y) + "-" + two_digits(m) + "-" + two_digits(d) + "T" +
               two_digits(hour) + ":" + two_digits(minute) + ":00";
    };
    auto row_with = [&](const std::string& entity, int day, int hour, int minute,
                        std::map<std::string, std::string> cells) {
        std::vector<std::string> row(header.size());
        row[0] = entity;
        row[1] = iso(day, hour, minute);
        for (const auto& [name, value] : cells) {
            for (std::size_t j = 2; j < header.size(); ++j) {
                if (header[j] == name) row[j] = value;
            }
        }
        csv::write_row(out, row);
    };
    auto num = [](double v) { return csv::format_double(v); };

    const std::vector<std::string> places = {"home", "work", "outside"};
    const std::vector<std::string> stimulus = {"never", "sometimes", "often"};

    for (int e = 0; e < spec.entities; ++e) {
        const std::string entity = "p" + two_digits(e + 1);
        const int group = e % 2;  // alternating keeps both groups at n/2
        Rng erng = rng.fork(static_cast<std::uint64_t>(e));

        for (int day = 0; day < spec.days; ++day) {
            auto level = [&](const std::string& name) {
                const FeatureLevels& l = levels.at(name);
                const double mean = group == 0 ? l.negative : l.positive;
                return mean + l.sigma * erng.normal();
            };

            // activity ticks through the waking hours
            for (int hour : {8, 10, 12, 14, 16, 18}) {
                double steps = std::max(0.0, level("steps"));
                double calories = std::max(0.0, level("calories"));
                if (erng.uniform() < spec.outlier_fraction) steps *= 6.0;
                row_with(entity, day, hour, 10,
                         {{"steps", num(steps)},
                          {"heart_rate", num(level("heart_rate"))},
                          {"calories", num(calories)}});
            }
            // one daily summary row
            row_with(entity, day, 0, 30,
                     {{"sedentary_minutes", num(std::max(0.0, level("sedentary_minutes")))},
                      {"sleep_duration", num(std::max(0.0, level("sleep_duration")))}});
            // exercise events (counted per day)
            const int sessions = group == 0 ? (erng.uniform() < 0.35 ? 1 : 0)
                                            : 1 + static_cast<int>(erng.index(2));
            for (int s = 0; s < sessions; ++s) {
                row_with(entity, day, 7 + static_cast<int>(erng.index(12)), 45,
                         {{"exercise_sessions", num(20.0 + 10.0 * erng.uniform())}});
            }
            // place check-ins morning/evening
            row_with(entity, day, 9, 0, {{"place", places[erng.index(places.size())]}});
            row_with(entity, day, 19, 0, {{"place", places[erng.index(places.size())]}});
            // weekly behavior survey
            if (day % 7 == 0) {
                const std::size_t idx =
                    group == 0 ? erng.index(2) : 1 + erng.index(2);  // never/sometimes vs sometimes/often
                row_with(entity, day, 12, 0, {{"stimulus_control", stimulus[idx]}});
            }
            // validation-side well-being indicators
            const double mood = group == 0 ? 2.0 + 0.6 * erng.normal() : 4.0 + 0.6 * erng.normal();
            const double stress =
                group == 0 ? 72.0 + 8.0 * erng.normal() : 45.0 + 8.0 * erng.normal();
            const double responsiveness =
                group == 0 ? 40.0 + 9.0 * erng.normal() : 68.0 + 9.0 * erng.normal();
            row_with(entity, day, 20, 0,
                     {{"mood", num(std::clamp(mood, 1.0, 5.0))},
                      {"stress_score", num(std::clamp(stress, 0.0, 100.0))},
                      {"responsiveness_points", num(std::clamp(responsiveness, 0.0, 100.0))}});
        }
        // demographics entry survey
        row_with(entity, 0, 8, 0, {{"age", num(22.0 + static_cast<double>(erng.index(40)))}});
    }
    return files;
}

std::string demo_domain_preamble() {
    return "The data comes from wearable activity trackers worn day to day. Each data point is "
           "one person's aggregated behavior for one time bucket: movement (steps, active and "
           "sedentary time, exercise sessions), sleep duration, and physiological signals (heart "
           "rate, calories). Clustering grouped the data points into well-being profiles; "
           "held-out mood, stress and responsiveness scores characterize what the groups mean.";
}

std::map<std::string, std::string> demo_glossary() {
    return {
        {"steps", "steps counted in the bucket"},
        {"sedentary_minutes", "minutes spent sitting or idle per day"},
        {"exercise_sessions", "number of logged workouts"},
        {"sleep_duration", "hours slept the previous night"},
        {"heart_rate", "average heart rate in beats per minute"},
        {"calories", "energy burned in the bucket"},
        {"place", "self-reported location (home, work, outside)"},
        {"stimulus_control", "how often the person arranges their environment to support healthy "
                             "habits (never, sometimes, often)"},
    };
}

}  // namespace xclus
