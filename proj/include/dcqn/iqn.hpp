#pragma once

#include "dcqn/backbone.hpp"
#include "dcqn/dataset.hpp"
#include "dcqn/optim.hpp"
#include "dcqn/rng.hpp"

#include <span>
#include <vector>

namespace dcqn {

struct IqnConfig {
    TcnConfig backbone;
    std::size_t downscale_channels = 16;
    std::size_t embed_terms = 16;  // cosine terms cos(pi*i*u), i = 1..n
    std::size_t embed_channels = 16;
    // Independent level vectors drawn per sample and minibatch; the loss
    // averages over them.
    std::size_t quantile_draws = 8;
    std::size_t inversion_grid = 512;
    bool operator==(const IqnConfig&) const = default;
};

// Backbone, 1x1 channel downscale, level embedding and T affine heads.
struct QuantileModel {
    IqnConfig config;
    std::size_t features = 0;
    std::size_t horizon = 0;
    FeatureStats feature_stats;
    ParameterSet params;
};

QuantileModel init_iqn(const IqnConfig& config, std::size_t features, std::size_t horizon, std::uint64_t seed);

// Throws DomainError unless every level is strictly inside (0,1).
void check_levels(const Vector& u);

// Downscaled backbone features (downscale_channels x T), shared by every
// level query on the same x.
Matrix iqn_features(const Matrix& x, const QuantileModel& model, TcnCache* cache = nullptr);

// y^u_t = sigmoid(head_t([features_t, embed(u_t)])). Output t depends on u
// only through u_t.
Vector iqn_head(const Matrix& features, const Vector& u, const QuantileModel& model);

Vector iqn_forward(const Matrix& x, const Vector& u, const QuantileModel& model);

// Quantile values for each row of `levels` (rows x T).
Matrix iqn_forward_many(const Matrix& x, const Matrix& levels, const QuantileModel& model);

double pinball(double y, double quantile, double u);

// Mean pinball loss over samples, level rows and horizon for explicit levels
// (one rows x T matrix per sample). Accumulates the mean gradient into
// `grads` when non-null.
double quantile_divergence_loss(std::span<const ForecastSample> samples, std::span<const Matrix> levels,
                                const QuantileModel& model, ParameterSet* grads);

// Draws `quantile_draws` level vectors per sample, u_t ~ U(0,1) independently
// per time step, and evaluates the loss above.
double quantile_divergence_loss(std::span<const ForecastSample> samples, const QuantileModel& model, SeededRng& rng,
                                ParameterSet* grads = nullptr);

struct IqnTrainResult {
    QuantileModel model;
    TrainResult training;
};

IqnTrainResult train_iqn(const DatasetSplit& split, const IqnConfig& config, const TrainConfig& train,
                         const EpochCallback& on_epoch = {}, const ParameterSet* resume = nullptr);

// Marginal CDF values of the measured power under the model: grid
// evaluation at u = (i + 0.5) / grid_size, monotone rearrangement, linear
// interpolation of the inverse, clamped to [eps, 1 - eps].
Vector invert_marginals(const Matrix& x, const Vector& y, const QuantileModel& model, std::size_t grid_size);

// invert_marginals over a sample sequence at the model's inversion grid.
std::vector<Vector> marginal_cdfs(std::span<const ForecastSample> samples, const QuantileModel& model);

}  // namespace dcqn
