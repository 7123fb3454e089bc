#pragma once

#include "dcqn/backbone.hpp"
#include "dcqn/cholesky.hpp"
#include "dcqn/dataset.hpp"
#include "dcqn/iqn.hpp"
#include "dcqn/optim.hpp"

#include <span>
#include <vector>

namespace dcqn {

struct DcnConfig {
    TcnConfig backbone;
    std::size_t projection_channels = 16;
    bool operator==(const DcnConfig&) const = default;
};

struct CorrelationModel {
    DcnConfig config;
    std::size_t features = 0;
    std::size_t horizon = 0;
    FeatureStats feature_stats;
    ParameterSet params;
};

CorrelationModel init_dcn(const DcnConfig& config, std::size_t features, std::size_t horizon, std::uint64_t seed);

// Softplus(W_p * tcn(x) + b_p) -> channel transpose product -> lower mask ->
// row L2 normalization. Throws DegenerateFeatureError for a zero row.
CholeskyFactor build_cholesky(const Matrix& x, const CorrelationModel& model);

// Divides each row of a lower-triangular matrix by its L2 norm. Throws
// DegenerateFeatureError when a row is zero.
Matrix normalize_lower_rows(const Matrix& masked);

// sum_t ln L_tt + 0.5 * |v|^2 with L v = latent (forward substitution).
double gaussian_nll_term(const CholeskyFactor& factor, const Vector& latent);

// Diagonal shift applied before row normalization when `jitter` is enabled
// and some L_tt falls below kMinCholeskyDiagonal.
inline constexpr double kMinCholeskyDiagonal = 1e-8;
inline constexpr double kCholeskyJitter = 1e-6;

// Mean over the batch of sum_t ln L_tt + 0.5 * |L^-1 z'|^2 with
// z' = Phi^-1(u~). Without jitter a diagonal entry <= 1e-8 raises
// ConditioningError naming the sample index.
double dcn_nll(std::span<const Vector> cdf_values, std::span<const Matrix> covariates, const CorrelationModel& model,
               ParameterSet* grads = nullptr, bool jitter = false);

// Same objective on already-Gaussianized latent vectors z'.
double dcn_nll_latent(std::span<const Vector> latent, std::span<const Matrix> covariates, const CorrelationModel& model,
                      ParameterSet* grads = nullptr, bool jitter = false);

struct DcnTrainResult {
    CorrelationModel model;
    TrainResult training;
};

// Marginal CDF values of every train/validation sample are inferred once
// with the frozen IQN before optimization starts.
DcnTrainResult train_dcn(const DatasetSplit& split, const QuantileModel& iqn, const DcnConfig& config,
                         const TrainConfig& train, const EpochCallback& on_epoch = {},
                         const ParameterSet* resume = nullptr);

// u = clamp(Phi(L z), eps, 1 - eps)
Vector correlate(const Vector& z, const CholeskyFactor& factor);

}  // namespace dcqn
