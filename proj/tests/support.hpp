#pragma once

#include "dcqn/cholesky.hpp"
#include "dcqn/dataset.hpp"
#include "dcqn/dcn.hpp"
#include "dcqn/iqn.hpp"
#include "dcqn/rng.hpp"
#include "dcqn/tensor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

namespace dcqn::test {

inline Matrix random_matrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * (2.0 * rng.uniform() - 1.0);
    }
    return m;
}

inline Vector random_vector(SeededRng& rng, Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform();
    return v;
}

inline Date day(int offset) { return Date{std::chrono::days{15340 + offset}}; }

inline ForecastSample random_sample(SeededRng& rng, Eigen::Index features, Eigen::Index horizon, int offset = 0) {
    return ForecastSample(day(offset), random_matrix(rng, features, horizon), random_vector(rng, horizon, 0.05, 0.95));
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
inline double ks_uniform(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - v, v - static_cast<double>(i) / n));
    }
    return d;
}

// IQN whose quantile function is sigmoid(slope * u + bias_t), independent of x.
inline QuantileModel logistic_iqn(std::size_t features, const Vector& bias, double slope, std::size_t layers = 1,
                                  std::size_t channels = 4) {
    IqnConfig cfg;
    cfg.backbone = TcnConfig::with_layers(layers, channels, 2);
    cfg.downscale_channels = 3;
    cfg.embed_terms = 4;
    cfg.embed_channels = 2;
    QuantileModel m = init_iqn(cfg, features, static_cast<std::size_t>(bias.size()), 11);
    auto emb = as_matrix(m.params.at("iqn.embed.weight"));
    emb.setZero();
    emb(0, 0) = slope;
    as_vector(m.params.at("iqn.embed.bias")).setZero();
    auto head = as_matrix(m.params.at("iqn.head.weight"));
    head.setZero();
    head.col(static_cast<Eigen::Index>(cfg.downscale_channels)).setOnes();
    as_vector(m.params.at("iqn.head.bias")) = bias;
    return m;
}

// Lower-triangular factor with unit rows and diagonal bounded away from zero.
inline CholeskyFactor random_factor(SeededRng& rng, Eigen::Index horizon) {
    Matrix l = Matrix::Zero(horizon, horizon);
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (Eigen::Index j = 0; j < t; ++j) l(t, j) = 2.0 * rng.uniform() - 1.0;
        l(t, t) = 0.3 + rng.uniform();
        l.row(t) /= l.row(t).norm();
    }
    return CholeskyFactor(l);
}

// DCN whose backbone passes the single covariate row through unchanged, so
// the pre-Softplus features equal x.
inline CorrelationModel passthrough_dcn(std::size_t horizon) {
    DcnConfig cfg;
    cfg.backbone = TcnConfig::with_layers(1, 1, 2);
    cfg.projection_channels = 1;
    CorrelationModel m = init_dcn(cfg, 1, horizon, 1);
    for (auto& [name, t] : m.params) std::fill(t.values.begin(), t.values.end(), 0.0);
    m.params.at("dcn.tcn.in.weight").values[0] = 1.0;
    m.params.at("dcn.tcn.skip0.weight").values[0] = 1.0;
    m.params.at("dcn.proj.weight").values[0] = 1.0;
    return m;
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace dcqn::test
