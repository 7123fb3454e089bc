#include "dcqn/dataset.hpp"

#include "dcqn/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace dcqn {
namespace {

using namespace std::chrono;

constexpr std::int64_t kHoursPerDay = 24;

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

std::optional<Date> make_date(int y, int m, int d) {
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

// RFC-4180 record reader. Returns false at end of input.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& fields, std::size_t& start_line) {
        fields.clear();
        int ch = in_.get();
        if (ch == EOF) return false;
        ++line_;
        start_line = line_;
        std::string field;
        bool quoted = false;
        bool field_started = false;
        while (true) {
            if (ch == EOF) {
                if (quoted) throw RowError(start_line, "unterminated quoted field");
                break;
            }
            const char c = static_cast<char>(ch);
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field.push_back(c);
                }
            } else if (c == '"' && !field_started) {
                quoted = true;
                field_started = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                field_started = false;
            } else if (c == '\n') {
                break;
            } else if (c == '\r') {
                if (in_.peek() == '\n') in_.get();
                break;
            } else {
                field.push_back(c);
                field_started = true;
            }
            ch = in_.get();
        }
        fields.push_back(std::move(field));
        return true;
    }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

}  // namespace

std::string format_date(Date date) {
    const year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date parse_date(const std::string& text) {
    int y = 0;
    int m = 0;
    int d = 0;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-' && parse_int(std::string_view(text).substr(0, 4), y) &&
        parse_int(std::string_view(text).substr(5, 2), m) && parse_int(std::string_view(text).substr(8, 2), d)) {
        if (auto date = make_date(y, m, d)) return *date;
    }
    throw FormatError("invalid date '" + text + "' (expected YYYY-MM-DD)");
}

Date HourStamp::date() const {
    return Date{days{hours >= 0 ? hours / kHoursPerDay : (hours - kHoursPerDay + 1) / kHoursPerDay}};
}

int HourStamp::hour_of_day() const {
    return static_cast<int>(((hours % kHoursPerDay) + kHoursPerDay) % kHoursPerDay);
}

HourStamp parse_timestamp(const std::string& raw) {
    const std::string text = trim(raw);
    const std::string_view sv(text);
    int y = 0;
    int mo = 0;
    int d = 0;
    std::string_view time_part;
    if (sv.size() >= 10 && sv[4] == '-' && sv[7] == '-') {
        if (!parse_int(sv.substr(0, 4), y) || !parse_int(sv.substr(5, 2), mo) || !parse_int(sv.substr(8, 2), d)) {
            throw FormatError("invalid timestamp '" + text + "'");
        }
        if (sv.size() == 10) throw FormatError("timestamp '" + text + "' has no time of day");
        if (sv[10] != ' ' && sv[10] != 'T') throw FormatError("invalid timestamp '" + text + "'");
        time_part = sv.substr(11);
    } else if (sv.size() >= 8 && std::all_of(sv.begin(), sv.begin() + 8, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        parse_int(sv.substr(0, 4), y);
        parse_int(sv.substr(4, 2), mo);
        parse_int(sv.substr(6, 2), d);
        if (sv.size() < 10 || sv[8] != ' ') throw FormatError("invalid timestamp '" + text + "'");
        time_part = sv.substr(9);
    } else {
        throw FormatError("invalid timestamp '" + text + "'");
    }
    if (!time_part.empty() && time_part.back() == 'Z') time_part.remove_suffix(1);
    const auto colon = time_part.find(':');
    int hh = 0;
    int mm = 0;
    int ss = 0;
    if (colon == std::string_view::npos || !parse_int(time_part.substr(0, colon), hh)) {
        throw FormatError("invalid time in timestamp '" + text + "'");
    }
    std::string_view rest = time_part.substr(colon + 1);
    const auto colon2 = std::find(rest.begin(), rest.end(), ':');
    if (colon2 != rest.end()) {
        const auto pos = static_cast<std::size_t>(colon2 - rest.begin());
        if (!parse_int(rest.substr(pos + 1), ss)) throw FormatError("invalid seconds in '" + text + "'");
        rest = rest.substr(0, pos);
    }
    if (rest.size() != 2 || !parse_int(rest, mm)) throw FormatError("invalid minutes in '" + text + "'");
    if (hh < 0 || hh > 23 || mm != 0 || ss != 0) {
        throw FormatError("timestamp '" + text + "' is not on an hour boundary");
    }
    const auto date = make_date(y, mo, d);
    if (!date) throw FormatError("invalid calendar date in '" + text + "'");
    return HourStamp{static_cast<std::int64_t>(date->time_since_epoch().count()) * kHoursPerDay + hh};
}

CsvSchema CsvSchema::parse(const std::string& spec) {
    CsvSchema schema;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (trim(item).empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw SchemaError("schema entry '" + item + "' is not key=value");
        const std::string key = trim(item.substr(0, eq));
        const std::string value = trim(item.substr(eq + 1));
        if (key == "timestamp") {
            schema.timestamp = value;
        } else if (key == "power") {
            schema.power = value;
        } else if (key == "covariates") {
            std::stringstream cs(value);
            std::string name;
            while (std::getline(cs, name, ',')) {
                if (!trim(name).empty()) schema.covariates.push_back(trim(name));
            }
        } else {
            throw SchemaError("unknown schema key '" + key + "'");
        }
    }
    if (schema.timestamp.empty() || schema.power.empty() || schema.covariates.empty()) {
        throw SchemaError("schema must name a timestamp column, a power column and at least one covariate");
    }
    return schema;
}

std::string CsvSchema::to_string() const {
    std::string out = "timestamp=" + timestamp + ";power=" + power + ";covariates=";
    for (std::size_t i = 0; i < covariates.size(); ++i) {
        if (i) out += ',';
        out += covariates[i];
    }
    return out;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    LoadResult result;
    result.covariate_names = schema.covariates;

    CsvReader reader(in);
    std::vector<std::string> fields;
    std::size_t line = 0;
    if (!reader.next(fields, line)) return result;
    if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);

    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (trim(fields[i]) == name) return i;
        }
        throw SchemaError("column '" + name + "' not found in header of '" + path.string() + "'");
    };
    const std::size_t ts_col = column(schema.timestamp);
    const std::size_t power_col = column(schema.power);
    std::vector<std::size_t> cov_cols;
    for (const auto& name : schema.covariates) cov_cols.push_back(column(name));
    const std::size_t width = fields.size();

    while (reader.next(fields, line)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != width) {
            throw RowError(line, "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
        }
        RawRecord rec;
        try {
            rec.timestamp = parse_timestamp(fields[ts_col]);
        } catch (const FormatError& e) {
            throw RowError(line, e.what());
        }
        const std::string power = trim(fields[power_col]);
        if (is_missing(power)) {
            rec.power = std::nan("");
        } else if (!parse_real(power, rec.power)) {
            throw RowError(line, "unparseable power value '" + power + "'");
        } else if (rec.power < 0.0 || rec.power > 1.0) {
            rec.power = std::clamp(rec.power, 0.0, 1.0);
            ++result.clamped;
        }
        rec.covariates.reserve(cov_cols.size());
        for (std::size_t k = 0; k < cov_cols.size(); ++k) {
            const std::string v = trim(fields[cov_cols[k]]);
            double value = 0.0;
            if (is_missing(v)) {
                value = std::nan("");
            } else if (!parse_real(v, value)) {
                throw RowError(line, "unparseable value '" + v + "' in column '" + schema.covariates[k] + "'");
            }
            rec.covariates.push_back(value);
        }
        result.records.push_back(std::move(rec));
    }

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const RawRecord& a, const RawRecord& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < result.records.size(); ++i) {
        if (result.records[i].timestamp == result.records[i - 1].timestamp) {
            throw RowError(0, "duplicate timestamp " + format_date(result.records[i].timestamp.date()) + " hour " +
                                  std::to_string(result.records[i].timestamp.hour_of_day()));
        }
    }
    return result;
}

ForecastSample::ForecastSample(Date issue_date, Matrix covariates, Vector power)
    : issue_date_(issue_date), x_(std::move(covariates)), y_(std::move(power)) {
    if (y_.size() == 0) throw DimensionError("forecast sample has an empty horizon");
    if (x_.cols() != y_.size() || x_.rows() == 0) {
        throw DimensionError("forecast sample covariates must be features x horizon");
    }
    if (!x_.allFinite() || !y_.allFinite()) throw DomainError("forecast sample has missing entries");
}

SampleBuild build_samples(std::span<const RawRecord> records) {
    struct Day {
        std::vector<const RawRecord*> hours = std::vector<const RawRecord*>(kDayAheadHorizon, nullptr);
    };
    std::map<Date, Day> days;
    for (const auto& rec : records) {
        const int h = rec.timestamp.hour_of_day();
        Date day = rec.timestamp.date();
        std::size_t index = 0;
        if (h == 0) {
            day -= std::chrono::days{1};
            index = kDayAheadHorizon - 1;
        } else {
            index = static_cast<std::size_t>(h - 1);
        }
        days[day].hours[index] = &rec;
    }

    SampleBuild out;
    for (const auto& [date, day] : days) {
        const bool complete = std::all_of(day.hours.begin(), day.hours.end(), [](const RawRecord* r) {
            if (r == nullptr || !std::isfinite(r->power)) return false;
            return std::all_of(r->covariates.begin(), r->covariates.end(), [](double v) { return std::isfinite(v); });
        });
        if (!complete) {
            ++out.dropped_days;
            continue;
        }
        const auto features = static_cast<Eigen::Index>(day.hours.front()->covariates.size());
        Matrix x(features, kDayAheadHorizon);
        Vector y(kDayAheadHorizon);
        for (Eigen::Index t = 0; t < kDayAheadHorizon; ++t) {
            const RawRecord& r = *day.hours[static_cast<std::size_t>(t)];
            if (static_cast<Eigen::Index>(r.covariates.size()) != features) {
                throw SchemaError("records differ in covariate count");
            }
            for (Eigen::Index f = 0; f < features; ++f) x(f, t) = r.covariates[static_cast<std::size_t>(f)];
            y[t] = r.power;
        }
        out.samples.emplace_back(date, std::move(x), std::move(y));
    }
    return out;
}

void FeatureStats::apply(Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != mean.size()) {
        throw DimensionError("feature count does not match normalization statistics");
    }
    for (Eigen::Index f = 0; f < x.rows(); ++f) {
        const auto k = static_cast<std::size_t>(f);
        x.row(f).array() -= mean[k];
        if (stddev[k] >= kMinFeatureStd) x.row(f).array() /= stddev[k];
    }
}

SplitSizes split_sizes(std::size_t n) {
    SplitSizes s;
    s.train = n * 6 / 10;
    s.validation = n / 10;
    s.test = n - s.train - s.validation;
    return s;
}

DatasetSplit split_and_normalize(std::vector<ForecastSample> samples) {
    if (samples.size() < 10) {
        throw InsufficientDataError("need at least 10 samples to split, got " + std::to_string(samples.size()));
    }
    const SplitSizes sizes = split_sizes(samples.size());
    DatasetSplit split;
    auto first = std::make_move_iterator(samples.begin());
    split.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes.train));
    first += static_cast<std::ptrdiff_t>(sizes.train);
    split.validation.assign(first, first + static_cast<std::ptrdiff_t>(sizes.validation));
    first += static_cast<std::ptrdiff_t>(sizes.validation);
    split.test.assign(first, std::make_move_iterator(samples.end()));

    const Eigen::Index features = split.train.front().features();
    FeatureStats& stats = split.feature_stats;
    stats.mean.assign(static_cast<std::size_t>(features), 0.0);
    stats.stddev.assign(static_cast<std::size_t>(features), 0.0);
    double count = 0.0;
    for (const auto& s : split.train) {
        if (s.features() != features) throw DimensionError("samples differ in feature count");
        count += static_cast<double>(s.horizon());
        for (Eigen::Index f = 0; f < features; ++f) stats.mean[static_cast<std::size_t>(f)] += s.x().row(f).sum();
    }
    for (auto& m : stats.mean) m /= count;
    for (const auto& s : split.train) {
        for (Eigen::Index f = 0; f < features; ++f) {
            const double mu = stats.mean[static_cast<std::size_t>(f)];
            stats.stddev[static_cast<std::size_t>(f)] += (s.x().row(f).array() - mu).square().sum();
        }
    }
    for (auto& v : stats.stddev) v = std::sqrt(v / count);

    for (auto* part : {&split.train, &split.validation, &split.test}) {
        for (auto& s : *part) stats.apply(s.mutable_x());
    }
    return split;
}

}  // namespace dcqn
