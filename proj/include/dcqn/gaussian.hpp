#pragma once

#include "dcqn/cholesky.hpp"
#include "dcqn/rng.hpp"
#include "dcqn/tensor.hpp"

#include <span>
#include <vector>

namespace dcqn {

// CDF clamp shared by marginal inversion and the correlation transform.
// Keeps Phi^-1 within roughly +-3.72.
inline constexpr double kCdfEpsilon = 1e-4;

double std_normal_cdf(double x);

// Rational approximation refined by one Halley step on the CDF.
// Throws DomainError unless 0 < u < 1.
double std_normal_quantile(double u);

Vector sample_standard_normal(SeededRng& rng, Eigen::Index n);

double clamp_cdf(double u) noexcept;

struct StaticCopula {
    Matrix correlation;  // R_static, unit diagonal
    CholeskyFactor factor;
    double jitter = 0.0;  // lambda that made the Cholesky succeed (0 if none)
};

// Gaussianize clamped marginal CDF values and take their sample correlation.
// Requires at least horizon + 1 vectors.
StaticCopula fit_static_copula(std::span<const Vector> cdf_values);

}  // namespace dcqn
