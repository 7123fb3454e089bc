#include "dcqn/iqn.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dcqn {
namespace {

const std::string kTcn = "iqn.tcn.";

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

// (u, cos(pi u), ..., cos(pi n u))
void embed_basis(double u, std::size_t terms, Vector& out) {
    out.resize(static_cast<Eigen::Index>(terms + 1));
    out[0] = u;
    for (std::size_t i = 1; i <= terms; ++i) {
        out[static_cast<Eigen::Index>(i)] = std::cos(std::numbers::pi * static_cast<double>(i) * u);
    }
}

// d pinball / d quantile; the kink takes the left branch.
double pinball_slope(double y, double quantile, double u) { return y >= quantile ? -u : 1.0 - u; }

struct HeadView {
    Eigen::Map<const Matrix> embed_w;
    Eigen::Map<const Vector> embed_b;
    Eigen::Map<const Matrix> head_w;
    Eigen::Map<const Vector> head_b;
    Eigen::Index down;
};

HeadView head_view(const QuantileModel& m) {
    const auto& p = m.params;
    return {as_matrix(p.at("iqn.embed.weight")), as_vector(p.at("iqn.embed.bias")), as_matrix(p.at("iqn.head.weight")),
            as_vector(p.at("iqn.head.bias")), static_cast<Eigen::Index>(m.config.downscale_channels)};
}

// Loss of one sample averaged over level rows and horizon; accumulates the
// gradient of that mean into `grads`.
double sample_loss(const ForecastSample& sample, const Matrix& levels, const QuantileModel& model,
                   ParameterSet* grads) {
    const auto horizon = static_cast<Eigen::Index>(model.horizon);
    if (sample.horizon() != horizon || levels.cols() != horizon) {
        throw DimensionError("IQN sample or level horizon does not match the model");
    }
    TcnCache cache;
    Matrix backbone_out;
    const Matrix& x = sample.x();
    const auto& p = model.params;
    backbone_out = tcn_forward(x, model.config.backbone, p, kTcn, grads ? &cache : nullptr);
    Matrix feats = as_matrix(p.at("iqn.down.weight")) * backbone_out;
    feats.colwise() += as_vector(p.at("iqn.down.bias"));

    const HeadView h = head_view(model);
    const double scale = 1.0 / static_cast<double>(levels.rows() * horizon);
    Matrix grad_feats;
    if (grads) grad_feats = Matrix::Zero(feats.rows(), feats.cols());
    const Eigen::Index emb_ch = h.embed_w.rows();
    Tensor* g_head_w = grads ? &grads->at("iqn.head.weight") : nullptr;
    Tensor* g_head_b = grads ? &grads->at("iqn.head.bias") : nullptr;
    Tensor* g_embed_w = grads ? &grads->at("iqn.embed.weight") : nullptr;
    Tensor* g_embed_b = grads ? &grads->at("iqn.embed.bias") : nullptr;
    Vector basis;
    Vector emb;
    double total = 0.0;
    for (Eigen::Index r = 0; r < levels.rows(); ++r) {
        for (Eigen::Index t = 0; t < horizon; ++t) {
            const double u = levels(r, t);
            embed_basis(u, model.config.embed_terms, basis);
            emb.noalias() = h.embed_w * basis + h.embed_b;
            const auto w = h.head_w.row(t);
            const double logit = w.head(h.down).dot(feats.col(t)) + w.tail(emb_ch).dot(emb) + h.head_b[t];
            const double q = sigmoid(logit);
            const double y = sample.y()[t];
            total += pinball(y, q, u);
            if (!grads) continue;
            const double g = scale * pinball_slope(y, q, u) * q * (1.0 - q);
            auto gw = as_matrix(*g_head_w).row(t);
            gw.head(h.down) += g * feats.col(t).transpose();
            gw.tail(emb_ch) += g * emb.transpose();
            g_head_b->values[static_cast<std::size_t>(t)] += g;
            grad_feats.col(t) += g * w.head(h.down).transpose();
            const Vector grad_emb = g * w.tail(emb_ch).transpose();
            as_matrix(*g_embed_w).noalias() += grad_emb * basis.transpose();
            as_vector(*g_embed_b) += grad_emb;
        }
    }
    if (grads) {
        as_matrix(grads->at("iqn.down.weight")).noalias() += grad_feats * backbone_out.transpose();
        as_vector(grads->at("iqn.down.bias")) += grad_feats.rowwise().sum();
        const Matrix grad_backbone = as_matrix(p.at("iqn.down.weight")).transpose() * grad_feats;
        tcn_backward(cache, model.config.backbone, p, kTcn, grad_backbone, *grads);
    }
    return total * scale;
}

Matrix draw_levels(SeededRng& rng, std::size_t rows, std::size_t horizon) {
    Matrix levels(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(horizon));
    for (Eigen::Index r = 0; r < levels.rows(); ++r) {
        for (Eigen::Index t = 0; t < levels.cols(); ++t) levels(r, t) = rng.uniform_open();
    }
    return levels;
}

}  // namespace

QuantileModel init_iqn(const IqnConfig& config, std::size_t features, std::size_t horizon, std::uint64_t seed) {
    config.backbone.validate();
    if (features == 0 || horizon == 0) throw ParameterError("IQN needs at least one feature and one time step");
    if (config.downscale_channels == 0 || config.embed_channels == 0) {
        throw ParameterError("IQN channel counts must be positive");
    }
    QuantileModel model;
    model.config = config;
    model.features = features;
    model.horizon = horizon;
    model.feature_stats.mean.assign(features, 0.0);
    model.feature_stats.stddev.assign(features, 1.0);

    SeededRng rng(seed, stream_id(Stream::Init));
    auto& p = model.params;
    init_tcn_params(p, kTcn, config.backbone, features, rng);
    const std::size_t c = config.backbone.channels;
    const std::size_t d = config.downscale_channels;
    const std::size_t e = config.embed_channels;
    const std::size_t basis = config.embed_terms + 1;
    auto uniform = [&](Tensor& t, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : t.values) v = bound * (2.0 * rng.uniform() - 1.0);
    };
    uniform(p.add("iqn.down.weight", {d, c}), c);
    p.add("iqn.down.bias", {d});
    uniform(p.add("iqn.embed.weight", {e, basis}), basis);
    p.add("iqn.embed.bias", {e});
    uniform(p.add("iqn.head.weight", {horizon, d + e}), d + e);
    p.add("iqn.head.bias", {horizon});
    return model;
}

void check_levels(const Vector& u) {
    for (Eigen::Index t = 0; t < u.size(); ++t) {
        if (!(u[t] > 0.0 && u[t] < 1.0)) {
            throw DomainError("CDF level u[" + std::to_string(t) + "] = " + std::to_string(u[t]) +
                              " is outside (0,1)");
        }
    }
}

Matrix iqn_features(const Matrix& x, const QuantileModel& model, TcnCache* cache) {
    if (static_cast<std::size_t>(x.rows()) != model.features || static_cast<std::size_t>(x.cols()) != model.horizon) {
        throw DimensionError("covariate matrix shape does not match the IQN");
    }
    const Matrix backbone_out = tcn_forward(x, model.config.backbone, model.params, kTcn, cache);
    Matrix feats = as_matrix(model.params.at("iqn.down.weight")) * backbone_out;
    feats.colwise() += as_vector(model.params.at("iqn.down.bias"));
    return feats;
}

Vector iqn_head(const Matrix& features, const Vector& u, const QuantileModel& model) {
    const auto horizon = static_cast<Eigen::Index>(model.horizon);
    if (u.size() != horizon) throw DimensionError("level vector length does not match the horizon");
    check_levels(u);
    const HeadView h = head_view(model);
    const Eigen::Index emb_ch = h.embed_w.rows();
    Vector out(horizon);
    Vector basis;
    for (Eigen::Index t = 0; t < horizon; ++t) {
        embed_basis(u[t], model.config.embed_terms, basis);
        const Vector emb = h.embed_w * basis + h.embed_b;
        const auto w = h.head_w.row(t);
        out[t] = sigmoid(w.head(h.down).dot(features.col(t)) + w.tail(emb_ch).dot(emb) + h.head_b[t]);
    }
    return out;
}

Vector iqn_forward(const Matrix& x, const Vector& u, const QuantileModel& model) {
    check_levels(u);
    return iqn_head(iqn_features(x, model), u, model);
}

Matrix iqn_forward_many(const Matrix& x, const Matrix& levels, const QuantileModel& model) {
    const Matrix feats = iqn_features(x, model);
    Matrix out(levels.rows(), levels.cols());
    for (Eigen::Index r = 0; r < levels.rows(); ++r) {
        out.row(r) = iqn_head(feats, levels.row(r).transpose(), model).transpose();
    }
    return out;
}

double pinball(double y, double quantile, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("pinball level must be in (0,1)");
    const double diff = y - quantile;
    return diff >= 0.0 ? u * diff : (u - 1.0) * diff;
}

double quantile_divergence_loss(std::span<const ForecastSample> samples, std::span<const Matrix> levels,
                                const QuantileModel& model, ParameterSet* grads) {
    if (samples.empty()) throw InsufficientDataError("quantile divergence loss needs a non-empty batch");
    if (levels.size() != samples.size()) throw DimensionError("one level matrix per sample is required");
    if (!grads) {
        return parallel_mean(samples.size(), [&](std::size_t i) { return sample_loss(samples[i], levels[i], model, nullptr); });
    }
    return parallel_mean_gradient(
        samples.size(), [&](std::size_t i, ParameterSet& g) { return sample_loss(samples[i], levels[i], model, &g); },
        *grads);
}

double quantile_divergence_loss(std::span<const ForecastSample> samples, const QuantileModel& model, SeededRng& rng,
                                ParameterSet* grads) {
    std::vector<Matrix> levels;
    levels.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        levels.push_back(draw_levels(rng, std::max<std::size_t>(1, model.config.quantile_draws), model.horizon));
    }
    return quantile_divergence_loss(samples, levels, model, grads);
}

IqnTrainResult train_iqn(const DatasetSplit& split, const IqnConfig& config, const TrainConfig& train,
                         const EpochCallback& on_epoch, const ParameterSet* resume) {
    if (split.train.empty() || split.validation.empty()) {
        throw InsufficientDataError("IQN training needs non-empty train and validation splits");
    }
    const auto features = static_cast<std::size_t>(split.train.front().features());
    const auto horizon = static_cast<std::size_t>(split.train.front().horizon());
    QuantileModel model = init_iqn(config, features, horizon, train.seed);
    model.feature_stats = split.feature_stats;
    if (resume) {
        if (resume->size() != model.params.size()) throw ParameterError("resume parameters do not match the IQN layout");
        for (const auto& [name, t] : model.params) {
            if (resume->at(name).shape != t.shape) throw ParameterError("resume tensor '" + name + "' has the wrong shape");
        }
        model.params = *resume;
    }

    // Validation levels are drawn once and reused every epoch.
    SeededRng val_rng(train.seed, stream_id(Stream::Validation));
    std::vector<Matrix> val_levels;
    const std::size_t val_draws = std::max<std::size_t>(8, config.quantile_draws);
    for (std::size_t i = 0; i < split.validation.size(); ++i) val_levels.push_back(draw_levels(val_rng, val_draws, horizon));

    SeededRng level_rng(train.seed, stream_id(Stream::QuantileLevels));
    QuantileModel work = model;
    std::vector<ForecastSample> batch;
    auto objective = [&](std::span<const std::size_t> idx, const ParameterSet& params, ParameterSet& grads,
                         std::size_t, std::size_t) {
        work.params = params;
        batch.clear();
        for (auto i : idx) batch.push_back(split.train[i]);
        return quantile_divergence_loss(batch, work, level_rng, &grads);
    };
    auto validation = [&](const ParameterSet& params) {
        work.params = params;
        return quantile_divergence_loss(split.validation, val_levels, work, nullptr);
    };
    TrainResult result = fit(model.params, split.train.size(), objective, validation, train, on_epoch);
    model.params = result.best;
    return {std::move(model), std::move(result)};
}

Vector invert_marginals(const Matrix& x, const Vector& y, const QuantileModel& model, std::size_t grid_size) {
    if (grid_size < 64) throw DomainError("inversion grid needs at least 64 points");
    const auto horizon = static_cast<Eigen::Index>(model.horizon);
    if (y.size() != horizon) throw DimensionError("measured power length does not match the horizon");
    const Matrix feats = iqn_features(x, model);
    const auto g = static_cast<Eigen::Index>(grid_size);
    Vector grid(g);
    for (Eigen::Index i = 0; i < g; ++i) grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(g);

    Matrix curves(g, horizon);
    for (Eigen::Index i = 0; i < g; ++i) {
        curves.row(i) = iqn_head(feats, Vector::Constant(horizon, grid[i]), model).transpose();
    }
    Vector out(horizon);
    std::vector<double> column(static_cast<std::size_t>(g));
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (Eigen::Index i = 0; i < g; ++i) column[static_cast<std::size_t>(i)] = curves(i, t);
        std::sort(column.begin(), column.end());
        const double target = y[t];
        double u = 0.0;
        if (target < column.front()) {
            u = kCdfEpsilon;
        } else if (target > column.back()) {
            u = 1.0 - kCdfEpsilon;
        } else {
            // First grid value >= target.
            const auto hi = static_cast<Eigen::Index>(std::lower_bound(column.begin(), column.end(), target) - column.begin());
            const auto run_end = static_cast<Eigen::Index>(
                std::upper_bound(column.begin(), column.end(), target) - column.begin());
            if (run_end > hi) {
                // Ties: take the centre of the flat run.
                u = 0.5 * (grid[hi] + grid[run_end - 1]);
            } else {
                const double lo_v = column[static_cast<std::size_t>(hi - 1)];
                const double hi_v = column[static_cast<std::size_t>(hi)];
                const double w = (target - lo_v) / (hi_v - lo_v);
                u = grid[hi - 1] + w * (grid[hi] - grid[hi - 1]);
            }
        }
        out[t] = clamp_cdf(u);
    }
    return out;
}

std::vector<Vector> marginal_cdfs(std::span<const ForecastSample> samples, const QuantileModel& model) {
    std::vector<Vector> out(samples.size());
    std::vector<std::exception_ptr> errors(samples.size());
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = invert_marginals(samples[k].x(), samples[k].y(), model, model.config.inversion_grid);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    return out;
}

}  // namespace dcqn
