#include "dcqn/dcn.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace dcqn {
namespace {

const std::string kTcn = "dcn.tcn.";

double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

struct Forward {
    TcnCache tcn;
    Matrix hidden;    // C x T backbone output
    Matrix pre;       // P x T before Softplus
    Matrix features;  // P x T, positive
    Matrix lower;     // normalized factor
    Vector norms;     // row norms before normalization
};

void forward(const Matrix& x, const CorrelationModel& model, bool jitter, bool keep_cache, Forward& f) {
    if (static_cast<std::size_t>(x.rows()) != model.features || static_cast<std::size_t>(x.cols()) != model.horizon) {
        throw DimensionError("covariate matrix shape does not match the DCN");
    }
    const auto& p = model.params;
    f.hidden = tcn_forward(x, model.config.backbone, p, kTcn, keep_cache ? &f.tcn : nullptr);
    f.pre = as_matrix(p.at("dcn.proj.weight")) * f.hidden;
    f.pre.colwise() += as_vector(p.at("dcn.proj.bias"));
    f.features = f.pre.unaryExpr(&softplus);

    Matrix gram = f.features.transpose() * f.features;
    gram.triangularView<Eigen::StrictlyUpper>().setZero();

    auto normalize = [&](const Matrix& masked) {
        f.lower = normalize_lower_rows(masked);
        f.norms = masked.rowwise().norm();
    };
    normalize(gram);
    if (jitter && f.lower.diagonal().minCoeff() < kMinCholeskyDiagonal) {
        gram.diagonal().array() += kCholeskyJitter;
        normalize(gram);
    }
}

// Gradient of sum ln L_tt + 0.5 |v|^2 (L v = z) pushed back to the parameters.
void backward(const Forward& f, const Vector& v, const CorrelationModel& model, ParameterSet& grads) {
    const Eigen::Index horizon = f.lower.rows();
    const auto tri = f.lower.triangularView<Eigen::Lower>();
    const Vector w = tri.transpose().solve(v);

    Matrix grad_lower = -(w * v.transpose());
    grad_lower.triangularView<Eigen::StrictlyUpper>().setZero();
    for (Eigen::Index t = 0; t < horizon; ++t) grad_lower(t, t) += 1.0 / f.lower(t, t);

    // Row normalization L_t = X_t / |X_t|.
    Matrix grad_gram(horizon, horizon);
    for (Eigen::Index t = 0; t < horizon; ++t) {
        const double proj = f.lower.row(t).dot(grad_lower.row(t));
        grad_gram.row(t) = (grad_lower.row(t) - proj * f.lower.row(t)) / f.norms[t];
    }
    grad_gram.triangularView<Eigen::StrictlyUpper>().setZero();

    // X = A^T A
    const Matrix sym = grad_gram + grad_gram.transpose();
    const Matrix grad_features = f.features * sym;
    const Matrix grad_pre = grad_features.cwiseProduct(f.pre.unaryExpr(&sigmoid));

    const auto& p = model.params;
    as_matrix(grads.at("dcn.proj.weight")).noalias() += grad_pre * f.hidden.transpose();
    as_vector(grads.at("dcn.proj.bias")) += grad_pre.rowwise().sum();
    const Matrix grad_hidden = as_matrix(p.at("dcn.proj.weight")).transpose() * grad_pre;
    tcn_backward(f.tcn, model.config.backbone, p, kTcn, grad_hidden, grads);
}

double sample_nll(const Vector& latent, const Matrix& x, const CorrelationModel& model, ParameterSet* grads,
                  bool jitter, std::size_t index) {
    if (latent.size() != static_cast<Eigen::Index>(model.horizon)) {
        throw DimensionError("latent vector length does not match the DCN horizon");
    }
    Forward f;
    forward(x, model, jitter, grads != nullptr, f);
    const double min_diag = f.lower.diagonal().minCoeff();
    if (min_diag <= kMinCholeskyDiagonal) {
        throw ConditioningError("sample " + std::to_string(index) + ": Cholesky diagonal " + std::to_string(min_diag) +
                                " is too small");
    }
    const Vector v = f.lower.triangularView<Eigen::Lower>().solve(latent);
    const double value = f.lower.diagonal().array().log().sum() + 0.5 * v.squaredNorm();
    if (grads) backward(f, v, model, *grads);
    return value;
}

}  // namespace

Matrix normalize_lower_rows(const Matrix& masked) {
    Matrix lower(masked.rows(), masked.cols());
    for (Eigen::Index t = 0; t < masked.rows(); ++t) {
        const double n = masked.row(t).norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw DegenerateFeatureError("DCN row " + std::to_string(t) + " vanished after masking");
        }
        lower.row(t) = masked.row(t) / n;
    }
    return lower;
}

double gaussian_nll_term(const CholeskyFactor& factor, const Vector& latent) {
    if (latent.size() != factor.horizon()) throw DimensionError("latent vector length does not match the factor");
    const Matrix& l = factor.matrix();
    const Vector v = l.triangularView<Eigen::Lower>().solve(latent);
    return l.diagonal().array().log().sum() + 0.5 * v.squaredNorm();
}

CorrelationModel init_dcn(const DcnConfig& config, std::size_t features, std::size_t horizon, std::uint64_t seed) {
    config.backbone.validate();
    if (features == 0 || horizon == 0) throw ParameterError("DCN needs at least one feature and one time step");
    if (config.projection_channels == 0) throw ParameterError("DCN projection channels must be positive");
    CorrelationModel model;
    model.config = config;
    model.features = features;
    model.horizon = horizon;
    model.feature_stats.mean.assign(features, 0.0);
    model.feature_stats.stddev.assign(features, 1.0);
    // Distinct from the IQN init stream so both models can share one seed.
    SeededRng rng(seed, stream_id(Stream::Init) + 0x100);
    init_tcn_params(model.params, kTcn, config.backbone, features, rng);
    const std::size_t c = config.backbone.channels;
    const std::size_t pch = config.projection_channels;
    Tensor& w = model.params.add("dcn.proj.weight", {pch, c});
    const double bound = 1.0 / std::sqrt(static_cast<double>(c));
    for (double& v : w.values) v = bound * (2.0 * rng.uniform() - 1.0);
    model.params.add("dcn.proj.bias", {pch});
    return model;
}

CholeskyFactor build_cholesky(const Matrix& x, const CorrelationModel& model) {
    Forward f;
    forward(x, model, false, false, f);
    return CholeskyFactor(std::move(f.lower));
}

double dcn_nll_latent(std::span<const Vector> latent, std::span<const Matrix> covariates, const CorrelationModel& model,
                      ParameterSet* grads, bool jitter) {
    if (latent.empty()) throw InsufficientDataError("DCN NLL needs a non-empty batch");
    if (latent.size() != covariates.size()) throw DimensionError("one covariate matrix per latent vector is required");
    if (!grads) {
        return parallel_mean(latent.size(), [&](std::size_t i) {
            return sample_nll(latent[i], covariates[i], model, nullptr, jitter, i);
        });
    }
    return parallel_mean_gradient(
        latent.size(),
        [&](std::size_t i, ParameterSet& g) { return sample_nll(latent[i], covariates[i], model, &g, jitter, i); },
        *grads);
}

double dcn_nll(std::span<const Vector> cdf_values, std::span<const Matrix> covariates, const CorrelationModel& model,
               ParameterSet* grads, bool jitter) {
    std::vector<Vector> latent;
    latent.reserve(cdf_values.size());
    for (const auto& u : cdf_values) {
        Vector z(u.size());
        for (Eigen::Index t = 0; t < u.size(); ++t) z[t] = std_normal_quantile(u[t]);
        latent.push_back(std::move(z));
    }
    return dcn_nll_latent(latent, covariates, model, grads, jitter);
}

DcnTrainResult train_dcn(const DatasetSplit& split, const QuantileModel& iqn, const DcnConfig& config,
                         const TrainConfig& train, const EpochCallback& on_epoch, const ParameterSet* resume) {
    if (split.train.empty() || split.validation.empty()) {
        throw InsufficientDataError("DCN training needs non-empty train and validation splits");
    }
    const auto features = static_cast<std::size_t>(split.train.front().features());
    const auto horizon = static_cast<std::size_t>(split.train.front().horizon());
    CorrelationModel model = init_dcn(config, features, horizon, train.seed);
    model.feature_stats = split.feature_stats;
    if (resume) {
        if (resume->size() != model.params.size()) throw ParameterError("resume parameters do not match the DCN layout");
        for (const auto& [name, t] : model.params) {
            if (resume->at(name).shape != t.shape) throw ParameterError("resume tensor '" + name + "' has the wrong shape");
        }
        model.params = *resume;
    }

    auto gaussianize = [&](const std::vector<ForecastSample>& part, std::vector<Vector>& latent,
                           std::vector<Matrix>& xs) {
        latent = marginal_cdfs(part, iqn);
        for (auto& u : latent) {
            for (Eigen::Index t = 0; t < u.size(); ++t) u[t] = std_normal_quantile(u[t]);
        }
        xs.clear();
        for (const auto& s : part) xs.push_back(s.x());
    };
    std::vector<Vector> train_latent;
    std::vector<Matrix> train_x;
    std::vector<Vector> val_latent;
    std::vector<Matrix> val_x;
    gaussianize(split.train, train_latent, train_x);
    gaussianize(split.validation, val_latent, val_x);

    CorrelationModel work = model;
    std::vector<Vector> batch_latent;
    std::vector<Matrix> batch_x;
    auto objective = [&](std::span<const std::size_t> idx, const ParameterSet& params, ParameterSet& grads,
                         std::size_t, std::size_t) {
        work.params = params;
        batch_latent.clear();
        batch_x.clear();
        for (auto i : idx) {
            batch_latent.push_back(train_latent[i]);
            batch_x.push_back(train_x[i]);
        }
        return dcn_nll_latent(batch_latent, batch_x, work, &grads, true);
    };
    auto validation = [&](const ParameterSet& params) {
        work.params = params;
        return dcn_nll_latent(val_latent, val_x, work, nullptr, true);
    };
    TrainResult result = fit(model.params, split.train.size(), objective, validation, train, on_epoch);
    model.params = result.best;
    return {std::move(model), std::move(result)};
}

Vector correlate(const Vector& z, const CholeskyFactor& factor) {
    if (!z.allFinite()) throw DomainError("prior sample must be finite");
    const Vector latent = factor.apply(z);
    Vector u(latent.size());
    for (Eigen::Index t = 0; t < latent.size(); ++t) u[t] = clamp_cdf(std_normal_cdf(latent[t]));
    return u;
}

}  // namespace dcqn
