#include "dcqn/scengen.hpp"

#include "dcqn/dcn.hpp"
#include "dcqn/errors.hpp"
#include "dcqn/gaussian.hpp"
#include "dcqn/rng.hpp"
#include "dcqn/optim.hpp"

#include <algorithm>

namespace dcqn {

namespace detail {

Matrix compose_scenarios(const Matrix& x, const Matrix& priors, const QuantileModel& iqn,
                         const CholeskyFactor& factor) {
    const auto horizon = static_cast<Eigen::Index>(iqn.horizon);
    if (factor.horizon() != horizon || priors.cols() != horizon) {
        throw DimensionError("correlation factor or prior width does not match the IQN horizon");
    }
    const Matrix feats = iqn_features(x, iqn);
    Matrix out(priors.rows(), horizon);
    for (Eigen::Index m = 0; m < priors.rows(); ++m) {
        const Vector u = correlate(priors.row(m).transpose(), factor);
        out.row(m) = iqn_head(feats, u, iqn).transpose();
    }
    return out;
}

}  // namespace detail

ScenarioSet generate(const Matrix& x, std::size_t count, const QuantileModel& iqn, const CholeskyFactor& factor,
                     std::uint64_t seed, ScenarioProvenance provenance) {
    if (count < 1) throw DomainError("scenario count must be at least 1");
    const auto horizon = static_cast<Eigen::Index>(iqn.horizon);
    if (factor.horizon() != horizon) throw DimensionError("correlation factor does not match the IQN horizon");

    const Matrix feats = iqn_features(x, iqn);
    Matrix scenarios(static_cast<Eigen::Index>(count), horizon);
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t m = 0; m < n; ++m) {
        try {
            SeededRng rng(seed, kScenarioStreamBase + static_cast<std::uint64_t>(m));
            const Vector z = sample_standard_normal(rng, horizon);
            const Vector u = correlate(z, factor);
            scenarios.row(m) = iqn_head(feats, u, iqn).transpose();
        } catch (...) {
            errors[static_cast<std::size_t>(m)] = std::current_exception();
        }
    }
    rethrow_first(errors);
    provenance.seed = seed;
    provenance.count = count;
    return {std::move(scenarios), std::move(provenance)};
}

StaticCopula fit_static_copula(std::span<const ForecastSample> train, const QuantileModel& iqn) {
    const std::vector<Vector> u = marginal_cdfs(train, iqn);
    return fit_static_copula(std::span<const Vector>(u));
}

Vector point_forecast(const Matrix& x, const QuantileModel& iqn) {
    return iqn_forward(x, Vector::Constant(static_cast<Eigen::Index>(iqn.horizon), 0.5), iqn);
}

Matrix marginal_quantile_curves(const Matrix& x, const QuantileModel& iqn, const std::vector<double>& levels) {
    if (levels.empty()) throw DomainError("at least one quantile level is required");
    const auto horizon = static_cast<Eigen::Index>(iqn.horizon);
    Matrix grid(static_cast<Eigen::Index>(levels.size()), horizon);
    for (std::size_t i = 0; i < levels.size(); ++i) grid.row(static_cast<Eigen::Index>(i)).setConstant(levels[i]);
    // Rearrangement assumes levels are given in ascending order.
    if (!std::is_sorted(levels.begin(), levels.end())) throw DomainError("quantile levels must be ascending");
    Matrix curves = iqn_forward_many(x, grid, iqn);
    std::vector<double> column(levels.size());
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (std::size_t i = 0; i < levels.size(); ++i) column[i] = curves(static_cast<Eigen::Index>(i), t);
        std::sort(column.begin(), column.end());
        for (std::size_t i = 0; i < levels.size(); ++i) curves(static_cast<Eigen::Index>(i), t) = column[i];
    }
    return curves;
}

std::vector<double> evaluation_levels() {
    std::vector<double> out;
    for (int i = 1; i <= 19; ++i) out.push_back(i / 20.0);
    return out;
}

std::vector<double> fan_levels() {
    std::vector<double> out;
    for (int i = 1; i <= 9; ++i) out.push_back(i / 10.0);
    return out;
}

}  // namespace dcqn
