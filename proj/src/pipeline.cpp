#include "xclus/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "xclus/csv.hpp"
#include "xclus/errors.hpp"

namespace xclus {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kHour = 3600;
constexpr std::int64_t kDay = 86400;

bool parse_double(const std::string& s, double* out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    if (begin == end) return false;
    auto [ptr, ec] = std::from_chars(begin, end, *out);
    return ec == std::errc() && ptr == end;
}

bool parse_int64(const std::string& s, std::int64_t* out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// days since 1970-01-01 (Howard Hinnant's civil-days algorithm)
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// ISO-8601 date or date-time: YYYY-MM-DD[( |T)HH:MM[:SS]][Z]
bool parse_iso8601(const std::string& s, std::int64_t* out) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    auto num = [&](std::size_t pos, std::size_t len, int* v) {
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, *v);
        return ec == std::errc() && ptr == s.data() + pos + len;
    };
    if (!num(0, 4, &y) || !num(5, 2, &mo) || !num(8, 2, &d)) return false;
    std::size_t rest = 10;
    if (s.size() > rest && (s[rest] == 'T' || s[rest] == ' ')) {
        ++rest;
        if (s.size() < rest + 5 || s[rest + 2] != ':') return false;
        if (!num(rest, 2, &h) || !num(rest + 3, 2, &mi)) return false;
        rest += 5;
        if (s.size() > rest && s[rest] == ':') {
            if (s.size() < rest + 3 || !num(rest + 1, 2, &se)) return false;
            rest += 3;
        }
    }
    if (s.size() > rest && s[rest] == 'Z') ++rest;
    if (rest != s.size()) return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return false;
    *out = days_from_civil(y, mo, d) * kDay + h * 3600 + mi * 60 + se;
    return true;
}

std::int64_t bucket_start(std::int64_t ts, TargetGranularity g) {
    const std::int64_t unit = (g == TargetGranularity::hourly) ? kHour : kDay;
    std::int64_t b = ts / unit;
    if (ts < 0 && ts % unit != 0) --b;
    return b * unit;
}

std::int64_t day_start(std::int64_t ts) { return bucket_start(ts, TargetGranularity::daily); }

const FeatureRule& rule_for(const PreprocessSpec& spec, const std::string& name) {
    static const FeatureRule kDefault{};
    auto it = spec.rules.find(name);
    return it == spec.rules.end() ? kDefault : it->second;
}

std::string base_feature(const std::string& column_name) {
    const auto pos = column_name.find('=');
    return pos == std::string::npos ? column_name : column_name.substr(0, pos);
}

}  // namespace

RawTable load_csv(const std::string& path, const Schema& schema) {
    const auto rows = csv::parse_file(path);
    if (rows.empty()) throw Error(Errc::EmptyTable, path + ": no rows");
    const auto& header = rows[0];
    if (rows.size() < 2) throw Error(Errc::EmptyTable, path + ": header only");

    RawTable table;
    std::size_t id_col = std::numeric_limits<std::size_t>::max();
    std::size_t date_col = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "id") {
            id_col = j;
        } else if (header[j] == "date") {
            date_col = j;
        } else if (const FeatureSchema* f = schema.find(header[j])) {
            feature_cols.push_back(j);
            RawColumn col;
            col.schema = *f;
            table.columns.push_back(std::move(col));
        } else {
            table.report.ignored_columns.push_back(header[j]);
        }
    }
    if (table.columns.empty()) {
        throw Error(Errc::HeaderMismatch, path + ": no schema feature found in header");
    }
    if (id_col == std::numeric_limits<std::size_t>::max() ||
        date_col == std::numeric_limits<std::size_t>::max()) {
        throw Error(Errc::HeaderMismatch, path + ": reserved columns id,date are required");
    }
    for (const auto& name : table.report.ignored_columns) {
        table.report.warnings.push_back("ignored column not in schema: " + name);
    }

    // timestamp format auto-detection from the first non-empty cell
    table.report.timestamp_format = "epoch_seconds";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (date_col < rows[i].size() && !rows[i][date_col].empty()) {
            std::int64_t tmp = 0;
            table.report.timestamp_format =
                parse_int64(rows[i][date_col], &tmp) ? "epoch_seconds" : "iso8601";
            break;
        }
    }
    const bool epoch = table.report.timestamp_format == "epoch_seconds";

    const std::size_t n = rows.size() - 1;
    table.entity_ids.resize(n);
    table.timestamps.resize(n);
    for (auto& col : table.columns) {
        col.present.assign(n, 0);
        if (col.schema.kind == FeatureKind::numeric) col.numeric.assign(n, kMissing);
        else col.text.assign(n, "");
    }

    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        table.entity_ids[i - 1] = id_col < r.size() ? r[id_col] : "";
        std::int64_t ts = 0;
        const std::string& cell = date_col < r.size() ? r[date_col] : "";
        const bool ok = epoch ? parse_int64(cell, &ts) : parse_iso8601(cell, &ts);
        if (!ok) {
            throw Error(Errc::ConfigError,
                        path + ": row " + std::to_string(i) + " has unparseable date '" + cell + "'");
        }
        table.timestamps[i - 1] = ts;
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            const std::size_t j = feature_cols[k];
            if (j >= r.size() || r[j].empty()) continue;
            RawColumn& col = table.columns[k];
            if (col.schema.kind == FeatureKind::numeric) {
                double v = 0.0;
                if (parse_double(r[j], &v)) {
                    col.numeric[i - 1] = v;
                    col.present[i - 1] = 1;
                } else {
                    ++table.report.coerced_cells[col.schema.name];
                }
            } else {
                col.text[i - 1] = r[j];
                col.present[i - 1] = 1;
            }
        }
    }
    for (const auto& [name, count] : table.report.coerced_cells) {
        table.report.warnings.push_back("coerced " + std::to_string(count) +
                                        " unparseable numeric cells to missing in " + name);
    }
    return table;
}

Dataset aggregate(const RawTable& raw, const Schema& schema, const PreprocessSpec& spec) {
    spec.validate(schema);
    const std::int64_t unit = spec.target == TargetGranularity::hourly ? kHour : kDay;

    // whole-day bucket ranges per entity, entities in lexicographic order
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> spans;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        auto [it, inserted] = spans.try_emplace(raw.entity_ids[i], raw.timestamps[i], raw.timestamps[i]);
        if (!inserted) {
            it->second.first = std::min(it->second.first, raw.timestamps[i]);
            it->second.second = std::max(it->second.second, raw.timestamps[i]);
        }
    }

    Dataset ds;
    ds.role = DatasetRole::training;
    std::map<std::string, std::size_t> row_of;  // "<entity>@<bucket>" -> row
    for (const auto& [entity, span] : spans) {
        const std::int64_t first = day_start(span.first);
        const std::int64_t last = day_start(span.second) + kDay - unit;
        for (std::int64_t b = first; b <= last; b += unit) {
            row_of[entity + "@" + std::to_string(b)] = ds.entity_ids.size();
            ds.entity_ids.push_back(entity);
            ds.timestamps.push_back(b);
        }
    }
    const std::size_t n_rows = ds.entity_ids.size();

    // per-bucket observation lists per feature, in (timestamp, file order)
    struct Obs {
        std::int64_t ts;
        std::size_t file_row;
        double value;       // numeric or level index
    };

    std::vector<std::vector<double>> agg_cols;
    for (const auto& col : raw.columns) {
        const FeatureRule& rule = rule_for(spec, col.schema.name);
        const bool numeric_kind = col.schema.kind == FeatureKind::numeric;
        if (!numeric_kind &&
            (rule.aggregation == Aggregation::sum || rule.aggregation == Aggregation::mean)) {
            throw Error(Errc::UnsupportedAggregator,
                        to_string(rule.aggregation) + " over " + to_string(col.schema.kind) +
                            " feature " + col.schema.name);
        }

        std::vector<std::string> extra_levels;
        auto level_index = [&](const std::string& value) -> double {
            for (std::size_t l = 0; l < col.schema.levels.size(); ++l) {
                if (col.schema.levels[l] == value) return static_cast<double>(l);
            }
            for (std::size_t l = 0; l < extra_levels.size(); ++l) {
                if (extra_levels[l] == value)
                    return static_cast<double>(col.schema.levels.size() + l);
            }
            extra_levels.push_back(value);
            return static_cast<double>(col.schema.levels.size() + extra_levels.size() - 1);
        };

        std::map<std::size_t, std::vector<Obs>> by_row;
        for (std::size_t i = 0; i < raw.rows(); ++i) {
            if (!col.present[i]) continue;
            const std::int64_t b = bucket_start(raw.timestamps[i], spec.target);
            const auto it = row_of.find(raw.entity_ids[i] + "@" + std::to_string(b));
            if (it == row_of.end()) continue;
            const double v = numeric_kind ? col.numeric[i] : level_index(col.text[i]);
            by_row[it->second].push_back({raw.timestamps[i], i, v});
        }

        std::vector<double> out(n_rows, kMissing);
        for (auto& [row, obs] : by_row) {
            std::stable_sort(obs.begin(), obs.end(),
                             [](const Obs& a, const Obs& b) { return a.ts < b.ts; });
            switch (rule.aggregation) {
                case Aggregation::sum: {
                    double s = 0.0;
                    for (const auto& o : obs) s += o.value;
                    out[row] = s;
                    break;
                }
                case Aggregation::mean: {
                    double s = 0.0;
                    for (const auto& o : obs) s += o.value;
                    out[row] = s / static_cast<double>(obs.size());
                    break;
                }
                case Aggregation::count:
                    out[row] = static_cast<double>(obs.size());
                    break;
                case Aggregation::last:
                case Aggregation::none:
                    out[row] = obs.back().value;
                    break;
            }
        }

        ds.feature_names.push_back(col.schema.name);
        agg_cols.push_back(std::move(out));
        const bool keeps_levels =
            !numeric_kind && rule.aggregation != Aggregation::count;
        if (keeps_levels) ds.pending_levels[col.schema.name] = extra_levels;
    }

    ds.values = Matrix(n_rows, agg_cols.size());
    for (std::size_t j = 0; j < agg_cols.size(); ++j) {
        for (std::size_t i = 0; i < n_rows; ++i) ds.values(i, j) = agg_cols[j][i];
    }
    return ds;
}

Dataset fill_granularity(const Dataset& ds, const PreprocessSpec& spec) {
    Dataset out = ds;
    const std::size_t n = out.rows();
    if (n == 0) return out;

    // contiguous row blocks per entity (aggregate() emits them sorted)
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || out.entity_ids[i] != out.entity_ids[start]) {
            blocks.emplace_back(start, i);
            start = i;
        }
    }

    for (std::size_t j = 0; j < out.feature_names.size(); ++j) {
        const FeatureRule& rule = rule_for(spec, out.feature_names[j]);
        if (rule.fill == GranularityFill::none) continue;
        for (const auto& [lo, hi] : blocks) {
            switch (rule.fill) {
                case GranularityFill::forward: {
                    double carry = kMissing;
                    for (std::size_t i = lo; i < hi; ++i) {
                        if (!std::isnan(out.values(i, j))) carry = out.values(i, j);
                        else if (!std::isnan(carry)) out.values(i, j) = carry;
                    }
                    break;
                }
                case GranularityFill::backward: {
                    double carry = kMissing;
                    for (std::size_t i = hi; i-- > lo;) {
                        if (!std::isnan(out.values(i, j))) carry = out.values(i, j);
                        else if (!std::isnan(carry)) out.values(i, j) = carry;
                    }
                    break;
                }
                case GranularityFill::daily: {
                    // replicate the day's (last) observed value across the day
                    std::map<std::int64_t, double> day_value;
                    for (std::size_t i = lo; i < hi; ++i) {
                        if (!std::isnan(out.values(i, j)))
                            day_value[day_start(out.timestamps[i])] = out.values(i, j);
                    }
                    for (std::size_t i = lo; i < hi; ++i) {
                        const auto it = day_value.find(day_start(out.timestamps[i]));
                        if (it != day_value.end()) out.values(i, j) = it->second;
                    }
                    break;
                }
                case GranularityFill::periodic: {
                    // survey value holds from its observation to the next one;
                    // the leading gap before the first observation is backfilled
                    double carry = kMissing;
                    for (std::size_t i = lo; i < hi; ++i) {
                        if (!std::isnan(out.values(i, j))) carry = out.values(i, j);
                        else if (!std::isnan(carry)) out.values(i, j) = carry;
                    }
                    double lead = kMissing;
                    for (std::size_t i = hi; i-- > lo;) {
                        if (!std::isnan(out.values(i, j))) lead = out.values(i, j);
                        else if (!std::isnan(lead)) out.values(i, j) = lead;
                    }
                    break;
                }
                case GranularityFill::none:
                    break;
            }
        }
    }
    return out;
}

Dataset impute(const Dataset& ds, const PreprocessSpec& spec) {
    Dataset out = ds;
    const std::size_t n = out.rows();

    // drop policies first: the removed rows must not contribute to means/modes
    std::vector<bool> keep(n, true);
    for (std::size_t j = 0; j < out.feature_names.size(); ++j) {
        if (rule_for(spec, out.feature_names[j]).missing != MissingPolicy::drop) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(out.values(i, j))) keep[i] = false;
        }
    }
    if (std::find(keep.begin(), keep.end(), false) != keep.end()) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (keep[i]) idx.push_back(i);
        }
        Dataset filtered = out;
        filtered.values = out.values.select_rows(idx);
        filtered.entity_ids.clear();
        filtered.timestamps.clear();
        for (std::size_t i : idx) {
            filtered.entity_ids.push_back(out.entity_ids[i]);
            filtered.timestamps.push_back(out.timestamps[i]);
        }
        out = std::move(filtered);
    }

    for (std::size_t j = 0; j < out.feature_names.size(); ++j) {
        const MissingPolicy policy = rule_for(spec, out.feature_names[j]).missing;
        if (policy == MissingPolicy::none || policy == MissingPolicy::drop) continue;
        std::size_t observed = 0;
        double sum = 0.0;
        std::map<double, std::size_t> counts;
        for (std::size_t i = 0; i < out.rows(); ++i) {
            const double v = out.values(i, j);
            if (std::isnan(v)) continue;
            ++observed;
            sum += v;
            ++counts[v];
        }
        double fill = 0.0;
        switch (policy) {
            case MissingPolicy::mean:
                if (observed == 0)
                    throw Error(Errc::AllMissingColumn, out.feature_names[j] + " (policy mean)");
                fill = sum / static_cast<double>(observed);
                break;
            case MissingPolicy::mode: {
                if (observed == 0)
                    throw Error(Errc::AllMissingColumn, out.feature_names[j] + " (policy mode)");
                std::size_t best = 0;
                for (const auto& [value, count] : counts) {
                    if (count > best) {  // ties -> smallest value (map order)
                        best = count;
                        fill = value;
                    }
                }
                break;
            }
            case MissingPolicy::zero:
                fill = 0.0;
                break;
            default:
                break;
        }
        for (std::size_t i = 0; i < out.rows(); ++i) {
            if (std::isnan(out.values(i, j))) out.values(i, j) = fill;
        }
    }
    return out;
}

Dataset encode(const Dataset& ds, const Schema& schema, const PreprocessSpec& spec) {
    Dataset out;
    out.role = ds.role;
    out.entity_ids = ds.entity_ids;
    out.timestamps = ds.timestamps;
    const std::size_t n = ds.rows();

    std::vector<std::vector<double>> new_cols;
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        const std::string& name = ds.feature_names[j];
        const FeatureRule& rule = rule_for(spec, name);
        const auto pending = ds.pending_levels.find(name);
        const bool is_levels = pending != ds.pending_levels.end();

        if (is_levels) {
            const FeatureSchema& f = schema.at(name);
            // any index beyond the declared set is an undeclared level
            for (std::size_t i = 0; i < n; ++i) {
                const double v = ds.values(i, j);
                if (std::isnan(v)) continue;
                const auto idx = static_cast<std::size_t>(v);
                if (idx >= f.levels.size()) {
                    const std::size_t extra = idx - f.levels.size();
                    const std::string value = extra < pending->second.size()
                                                  ? pending->second[extra]
                                                  : "<index " + std::to_string(idx) + ">";
                    throw Error(Errc::UnknownLevel, name + " value '" + value + "' not in {" +
                                                        [&] {
                                                            std::string s;
                                                            for (const auto& l : f.levels) {
                                                                if (!s.empty()) s += ",";
                                                                s += l;
                                                            }
                                                            return s;
                                                        }() + "}");
                }
            }
            if (rule.encoding == Encoding::one_hot) {
                for (std::size_t l = 0; l < f.levels.size(); ++l) {
                    out.feature_names.push_back(name + "=" + f.levels[l]);
                    std::vector<double> col(n, kMissing);
                    for (std::size_t i = 0; i < n; ++i) {
                        const double v = ds.values(i, j);
                        if (!std::isnan(v))
                            col[i] = static_cast<std::size_t>(v) == l ? 1.0 : 0.0;
                    }
                    new_cols.push_back(std::move(col));
                }
                continue;
            }
            // ordinal (declared order is the code) and unencoded level indices
            out.feature_names.push_back(name);
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = ds.values(i, j);
            new_cols.push_back(std::move(col));
            continue;
        }

        out.feature_names.push_back(name);
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = ds.values(i, j);
        new_cols.push_back(std::move(col));
    }

    out.values = Matrix(n, new_cols.size());
    for (std::size_t j = 0; j < new_cols.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) out.values(i, j) = new_cols[j][i];
    }
    return out;
}

NormalizeResult normalize(const Dataset& ds, Normalization mode) {
    NormalizeResult result;
    result.dataset = ds;
    result.stats.mode = mode;
    result.stats.names = ds.feature_names;
    const std::size_t n = ds.rows();
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        NormalizationStats::Column c;
        double sum = 0.0;
        c.min = std::numeric_limits<double>::infinity();
        c.max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = ds.values(i, j);
            sum += v;
            c.min = std::min(c.min, v);
            c.max = std::max(c.max, v);
        }
        c.mean = n ? sum / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ds.values(i, j) - c.mean;
            ss += d * d;
        }
        c.sigma = n ? std::sqrt(ss / static_cast<double>(n)) : 0.0;  // population sigma
        if (n == 0) c.min = c.max = 0.0;
        result.stats.columns.push_back(c);

        for (std::size_t i = 0; i < n; ++i) {
            result.dataset.values(i, j) = result.stats.to_normalized(j, ds.values(i, j));
        }
    }
    return result;
}

double type7_quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IqrResult remove_outliers_iqr(const Dataset& ds, double factor) {
    IqrResult result;
    result.report.factor = factor;
    result.report.rows_before = ds.rows();

    const std::size_t n = ds.rows();
    std::vector<bool> keep(n, true);
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = ds.values(i, j);
        const double q1 = type7_quantile(col, 0.25);
        const double q3 = type7_quantile(col, 0.75);
        const double iqr = q3 - q1;
        const double lo = q1 - factor * iqr;
        const double hi = q3 + factor * iqr;
        std::size_t removed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = ds.values(i, j);
            if (v < lo || v > hi) {
                if (keep[i]) keep[i] = false;
                ++removed;
            }
        }
        if (removed) result.report.removed_per_feature[ds.feature_names[j]] = removed;
    }

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) idx.push_back(i);
        else result.report.removed_rows.push_back(i);
    }
    result.dataset = ds;
    result.dataset.values = ds.values.select_rows(idx);
    result.dataset.entity_ids.clear();
    result.dataset.timestamps.clear();
    for (std::size_t i : idx) {
        result.dataset.entity_ids.push_back(ds.entity_ids[i]);
        result.dataset.timestamps.push_back(ds.timestamps[i]);
    }
    result.report.rows_after = result.dataset.rows();
    return result;
}

RoleSplit split_roles(const Dataset& ds, const std::vector<std::string>& training_features,
                      const std::vector<std::string>& validation_features) {
    std::set<std::string> training_set(training_features.begin(), training_features.end());
    for (const auto& name : validation_features) {
        if (training_set.count(name)) throw Error(Errc::OverlappingRoles, name);
    }

    auto collect = [&](const std::vector<std::string>& wanted, DatasetRole role) {
        Dataset out;
        out.role = role;
        out.entity_ids = ds.entity_ids;
        out.timestamps = ds.timestamps;
        std::vector<std::size_t> cols;
        for (const auto& name : wanted) {
            bool found = false;
            for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
                // a requested base feature pulls in its expanded columns
                if (ds.feature_names[j] == name || base_feature(ds.feature_names[j]) == name) {
                    cols.push_back(j);
                    out.feature_names.push_back(ds.feature_names[j]);
                    found = true;
                }
            }
            if (!found) throw Error(Errc::UnknownFeature, name);
        }
        out.values = ds.values.select_cols(cols);
        return out;
    };

    return {collect(training_features, DatasetRole::training),
            collect(validation_features, DatasetRole::validation)};
}

std::map<std::string, Dataset> make_variants(
    const std::map<TargetGranularity, Dataset>& by_granularity, const Schema& schema,
    const std::vector<VariantSpec>& specs) {
    std::map<std::string, Dataset> out;
    for (const auto& spec : specs) {
        const auto src_it = by_granularity.find(spec.granularity);
        if (src_it == by_granularity.end()) {
            throw Error(Errc::ConfigError,
                        "no dataset provided for granularity " + to_string(spec.granularity));
        }
        const Dataset& src = src_it->second;

        std::vector<std::size_t> cols;
        std::vector<std::string> names;
        auto add_column = [&](std::size_t j) {
            cols.push_back(j);
            names.push_back(src.feature_names[j]);
        };

        switch (spec.filter) {
            case VariantSpec::Filter::full:
                for (std::size_t j = 0; j < src.feature_names.size(); ++j) {
                    const FeatureSchema* f = schema.find(base_feature(src.feature_names[j]));
                    if (f && f->category == FeatureCategory::demographics) continue;
                    add_column(j);
                }
                break;
            case VariantSpec::Filter::categories: {
                std::set<FeatureCategory> wanted(spec.categories.begin(), spec.categories.end());
                std::set<FeatureCategory> seen;
                for (std::size_t j = 0; j < src.feature_names.size(); ++j) {
                    const FeatureSchema* f = schema.find(base_feature(src.feature_names[j]));
                    if (f && wanted.count(f->category)) {
                        add_column(j);
                        seen.insert(f->category);
                    }
                }
                for (FeatureCategory c : wanted) {
                    if (!seen.count(c)) {
                        throw Error(Errc::UnknownFeature,
                                    "variant " + spec.name + ": no feature in category " +
                                        to_string(c));
                    }
                }
                break;
            }
            case VariantSpec::Filter::explicit_list:
                for (const auto& name : spec.features) {
                    bool found = false;
                    for (std::size_t j = 0; j < src.feature_names.size(); ++j) {
                        if (src.feature_names[j] == name ||
                            base_feature(src.feature_names[j]) == name) {
                            add_column(j);
                            found = true;
                        }
                    }
                    if (!found) {
                        throw Error(Errc::UnknownFeature, "variant " + spec.name + ": " + name);
                    }
                }
                break;
        }

        Dataset v;
        v.role = src.role;
        v.entity_ids = src.entity_ids;
        v.timestamps = src.timestamps;
        v.feature_names = std::move(names);
        v.values = src.values.select_cols(cols);
        if (!out.emplace(spec.name, std::move(v)).second) {
            throw Error(Errc::ConfigError, "duplicate variant name: " + spec.name);
        }
    }
    return out;
}

PcaResult pca_reduce(const Dataset& ds, double retained_variance) {
    const std::size_t n = ds.rows();
    const std::size_t d = ds.cols();
    if (n == 0 || d == 0) throw Error(Errc::EmptyTable, "pca on empty dataset");

    PcaResult result;
    result.col_means.resize(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) result.col_means[j] += ds.values(i, j);
        result.col_means[j] /= static_cast<double>(n);
    }
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += (ds.values(i, a) - result.col_means[a]) * (ds.values(i, b) - result.col_means[b]);
            }
            cov(a, b) = cov(b, a) = s / static_cast<double>(n);
        }
    }
    const EighResult eig = jacobi_eigh(cov);

    double total = 0.0;
    for (double v : eig.eigenvalues) total += std::max(v, 0.0);
    std::size_t keep = 0;
    double acc = 0.0;
    // eigenvalues come back ascending; walk from the largest down
    for (std::size_t r = 0; r < d; ++r) {
        const std::size_t j = d - 1 - r;
        acc += std::max(eig.eigenvalues[j], 0.0);
        ++keep;
        result.explained.push_back(total > 0.0 ? std::max(eig.eigenvalues[j], 0.0) / total : 0.0);
        if (total == 0.0 || acc / total >= retained_variance) break;
    }

    result.components = Matrix(keep, d);
    for (std::size_t r = 0; r < keep; ++r) {
        const std::size_t j = d - 1 - r;
        for (std::size_t a = 0; a < d; ++a) result.components(r, a) = eig.eigenvectors(a, j);
    }

    result.dataset.role = ds.role;
    result.dataset.entity_ids = ds.entity_ids;
    result.dataset.timestamps = ds.timestamps;
    for (std::size_t r = 0; r < keep; ++r) {
        result.dataset.feature_names.push_back("pc" + std::to_string(r + 1));
    }
    result.dataset.values = Matrix(n, keep);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < keep; ++r) {
            double s = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                s += (ds.values(i, a) - result.col_means[a]) * result.components(r, a);
            }
            result.dataset.values(i, r) = s;
        }
    }
    return result;
}

}  // namespace xclus
