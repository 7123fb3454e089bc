#pragma once

#include "dcqn/dataset.hpp"
#include "dcqn/tensor.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace dcqn {

double mae(const Vector& y, const Vector& forecast);
double rmse(const Vector& y, const Vector& forecast);

// Mean pinball loss over t and levels; `curves` is levels x T. With no
// explicit levels the 19-level grid 0.05..0.95 is assumed.
double pinball_score(const Vector& y, const Matrix& curves);
double pinball_score(const Vector& y, const Matrix& curves, std::span<const double> levels);

// Sample estimators over an M x T scenario matrix. Pair sums run over all
// (m, m') including m = m', divided by 2 M^2.
double crps_sample(const Vector& y, const Matrix& scenarios);
double energy_score(const Vector& y, const Matrix& scenarios);

// sum_{t,t'} (|y_t - y_t'|^p - mean_m |s_t - s_t'|^p)^2, default p = 2.
double variogram_score(const Vector& y, const Matrix& scenarios, double order = 2.0);

struct MetricOptions {
    double variogram_order = 2.0;
};

struct ModelOutput {
    Vector point;
    Matrix quantile_curves;  // 19 x T at evaluation_levels()
    Matrix scenarios;        // M x T
};

struct MetricsReport {
    std::string model_id;
    std::size_t n_samples = 0;
    double mae = 0.0;
    double rmse = 0.0;
    double ps = 0.0;
    double crps = 0.0;
    double es = 0.0;
    double vs = 0.0;
};

struct SampleMetrics {
    double mae, rmse, ps, crps, es, vs;
};

SampleMetrics score_sample(const Vector& y, const ModelOutput& output, const MetricOptions& options = {});

// Arithmetic mean over test samples. Throws LookupError listing every test
// date without an output.
MetricsReport evaluate(std::span<const ForecastSample> test, const std::map<Date, ModelOutput>& outputs,
                       const std::string& model_id, const MetricOptions& options = {});

}  // namespace dcqn
