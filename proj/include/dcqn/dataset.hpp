#pragma once

#include "dcqn/tensor.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dcqn {

inline constexpr Eigen::Index kDayAheadHorizon = 24;

using Date = std::chrono::sys_days;

std::string format_date(Date date);
// Accepts YYYY-MM-DD; throws FormatError otherwise.
Date parse_date(const std::string& text);

// Calendar hour in UTC, counted from the Unix epoch.
struct HourStamp {
    std::int64_t hours = 0;

    Date date() const;
    int hour_of_day() const;
    auto operator<=>(const HourStamp&) const = default;
};

// Parses `YYYY-MM-DD HH:MM`, ISO-8601 (`YYYY-MM-DDTHH:MM[:SS][Z]`) and the
// GEFCom native `YYYYMMDD H:MM`. Minutes must be zero.
HourStamp parse_timestamp(const std::string& text);

struct CsvSchema {
    std::string timestamp;
    std::string power;
    std::vector<std::string> covariates;

    // "timestamp=TIMESTAMP;power=TARGETVAR;covariates=U10,V10,U100,V100"
    static CsvSchema parse(const std::string& spec);
    std::string to_string() const;
};

struct RawRecord {
    HourStamp timestamp;
    double power = 0.0;  // per-unit, NaN when the field was empty
    std::vector<double> covariates;
};

struct LoadResult {
    std::vector<std::string> covariate_names;
    std::vector<RawRecord> records;
    std::size_t clamped = 0;
};

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema);

class ForecastSample {
public:
    ForecastSample(Date issue_date, Matrix covariates, Vector power);

    Date issue_date() const noexcept { return issue_date_; }
    const Matrix& x() const noexcept { return x_; }
    const Vector& y() const noexcept { return y_; }
    Matrix& mutable_x() noexcept { return x_; }
    Eigen::Index horizon() const noexcept { return y_.size(); }
    Eigen::Index features() const noexcept { return x_.rows(); }

private:
    Date issue_date_;
    Matrix x_;  // features x horizon
    Vector y_;  // horizon
};

struct SampleBuild {
    std::vector<ForecastSample> samples;
    std::size_t dropped_days = 0;
};

// One sample per calendar day with all 24 target hours present. A timestamp
// at 00:00 is hour 24 of the previous day; hours 1..24 map to indices 0..23.
SampleBuild build_samples(std::span<const RawRecord> records);

struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    void apply(Matrix& x) const;
    bool operator==(const FeatureStats&) const = default;
};

inline constexpr double kMinFeatureStd = 1e-8;

struct DatasetSplit {
    std::vector<ForecastSample> train;
    std::vector<ForecastSample> validation;
    std::vector<ForecastSample> test;
    FeatureStats feature_stats;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

// floor(0.6 n) / floor(0.1 n) / remainder.
SplitSizes split_sizes(std::size_t n);

DatasetSplit split_and_normalize(std::vector<ForecastSample> samples);

}  // namespace dcqn
