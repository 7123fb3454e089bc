#include "dcqn/gaussian.hpp"

#include "dcqn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dcqn {
namespace {

// Acklam's rational approximation of the inverse normal CDF
// (relative error about 1.15e-9 before refinement).
constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                        1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                        6.680131188771972e+01,  -1.328068155288572e+01};
constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                        -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                        3.754408661907416e+00};

constexpr double kLow = 0.02425;

double acklam(double u) {
    if (u < kLow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - kLow) {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("normal quantile requires u in (0,1), got " + std::to_string(u));
    }
    double x = acklam(u);
    // Halley step. In the upper tail work with the complement to keep
    // relative precision.
    double e = 0.0;
    if (u > 0.5) {
        e = -(0.5 * std::erfc(x / std::numbers::sqrt2) - (1.0 - u));
    } else {
        e = std_normal_cdf(x) - u;
    }
    const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= step / (1.0 + 0.5 * x * step);
    return x;
}

Vector sample_standard_normal(SeededRng& rng, Eigen::Index n) {
    if (n < 1) throw DomainError("sample count must be at least 1");
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.normal();
    return out;
}

double clamp_cdf(double u) noexcept { return std::clamp(u, kCdfEpsilon, 1.0 - kCdfEpsilon); }

StaticCopula fit_static_copula(std::span<const Vector> cdf_values) {
    if (cdf_values.empty()) throw InsufficientDataError("static copula fit needs training vectors");
    const Eigen::Index horizon = cdf_values.front().size();
    const auto count = static_cast<Eigen::Index>(cdf_values.size());
    if (count < horizon + 1) {
        throw InsufficientDataError("static copula fit needs at least " + std::to_string(horizon + 1) +
                                    " vectors, got " + std::to_string(count));
    }
    Matrix latent(count, horizon);
    for (Eigen::Index n = 0; n < count; ++n) {
        const Vector& u = cdf_values[static_cast<std::size_t>(n)];
        if (u.size() != horizon) throw DimensionError("CDF vectors differ in length");
        for (Eigen::Index t = 0; t < horizon; ++t) latent(n, t) = std_normal_quantile(clamp_cdf(u[t]));
    }
    const Eigen::RowVectorXd mean = latent.colwise().mean();
    latent.rowwise() -= mean;
    const Matrix cov = latent.transpose() * latent / static_cast<double>(count);
    Matrix corr(horizon, horizon);
    for (Eigen::Index i = 0; i < horizon; ++i) {
        if (!(cov(i, i) > 0.0)) {
            throw NumericError("static copula: coordinate " + std::to_string(i) + " has zero variance");
        }
    }
    for (Eigen::Index i = 0; i < horizon; ++i) {
        for (Eigen::Index j = 0; j < horizon; ++j) {
            corr(i, j) = i == j ? 1.0 : cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
        }
    }

    // Shrink toward the identity while keeping the unit diagonal:
    // (R + lambda I) / (1 + lambda).
    double lambda = 0.0;
    for (int attempt = 0; attempt < 200; ++attempt) {
        Matrix candidate = corr;
        if (lambda > 0.0) {
            candidate = (corr + lambda * Matrix::Identity(horizon, horizon)) / (1.0 + lambda);
            candidate.diagonal().setOnes();
        }
        Eigen::LLT<Matrix> llt(candidate);
        if (llt.info() == Eigen::Success) {
            Matrix lower = llt.matrixL();
            bool ok = true;
            for (Eigen::Index t = 0; t < horizon; ++t) {
                if (!(lower(t, t) > 1e-6)) ok = false;
                const double norm = lower.row(t).norm();
                if (ok) lower.row(t) /= norm;  // absorbs round-off in the unit rows
            }
            if (ok) {
                CholeskyFactor factor(lower);
                Matrix correlation = factor.covariance();
                correlation.diagonal().setOnes();
                return StaticCopula{std::move(correlation), std::move(factor), lambda};
            }
        }
        lambda = lambda == 0.0 ? 1e-8 : 2.0 * lambda;
    }
    throw NumericError("static copula: Cholesky factorization failed after jitter");
}

}  // namespace dcqn
