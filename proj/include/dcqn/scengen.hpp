#pragma once

#include "dcqn/cholesky.hpp"
#include "dcqn/dataset.hpp"
#include "dcqn/gaussian.hpp"
#include "dcqn/iqn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dcqn {

inline constexpr std::size_t kDefaultScenarioCount = 100;

struct ScenarioProvenance {
    std::string model_id;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    Date issue_date{};
};

struct ScenarioSet {
    Matrix scenarios;  // M x T
    ScenarioProvenance provenance;
};

// For m = 0..M-1 with its own rng stream: z ~ N(0, I), u = correlate(z, L),
// s^m = iqn_forward(x, u). `provenance` supplies model id and issue date;
// seed and count are filled in.
ScenarioSet generate(const Matrix& x, std::size_t count, const QuantileModel& iqn, const CholeskyFactor& factor,
                     std::uint64_t seed, ScenarioProvenance provenance = {});

// Static Gaussian copula of the IQN marginal CDF values of `train`.
StaticCopula fit_static_copula(std::span<const ForecastSample> train, const QuantileModel& iqn);

// Median forecast: iqn_forward(x, 0.5).
Vector point_forecast(const Matrix& x, const QuantileModel& iqn);

// levels x T quantile curves, sorted across levels at every t.
Matrix marginal_quantile_curves(const Matrix& x, const QuantileModel& iqn, const std::vector<double>& levels);

// 0.05, 0.10, ..., 0.95
std::vector<double> evaluation_levels();
// 0.1, 0.2, ..., 0.9
std::vector<double> fan_levels();

namespace detail {
// Shared by generate() and the test-only fixed-prior entry point.
Matrix compose_scenarios(const Matrix& x, const Matrix& priors, const QuantileModel& iqn,
                         const CholeskyFactor& factor);
}  // namespace detail

}  // namespace dcqn
