#include "dcqn/backbone.hpp"

#include "dcqn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dcqn {
namespace {

struct Shift {
    Eigen::Index out_begin;  // first output column receiving this tap
    Eigen::Index in_begin;   // matching input column
    Eigen::Index length;
};

// Tap j reads input column t + j*dilation - left for output column t.
Shift tap_shift(Eigen::Index horizon, std::size_t j, std::size_t dilation, std::size_t kernel_size) {
    const auto total = static_cast<Eigen::Index>((kernel_size - 1) * dilation);
    const Eigen::Index left = (total + 1) / 2;
    const Eigen::Index offset = static_cast<Eigen::Index>(j * dilation) - left;
    const Eigen::Index out_begin = std::max<Eigen::Index>(0, -offset);
    const Eigen::Index out_end = std::min<Eigen::Index>(horizon, horizon - offset);
    return {out_begin, out_begin + offset, std::max<Eigen::Index>(0, out_end - out_begin)};
}

void check_kernel(const Matrix& input, const Tensor& kernel, std::size_t dilation) {
    if (kernel.rank() != 3) throw DimensionError("convolution kernel must have rank 3");
    if (kernel.shape[1] != static_cast<std::size_t>(input.rows())) {
        throw DimensionError("convolution kernel input channels do not match the input");
    }
    if (kernel.shape[2] < 1) throw DimensionError("convolution kernel size must be positive");
    if (dilation < 1) throw DimensionError("dilation must be at least 1");
}

const Tensor& require(const ParameterSet& params, const std::string& name, std::vector<std::size_t> shape) {
    const Tensor& t = params.at(name);
    if (t.shape != shape) throw DimensionError("parameter tensor '" + name + "' has an unexpected shape");
    return t;
}

void fill_uniform(Tensor& t, double bound, SeededRng& rng) {
    for (double& v : t.values) v = bound * (2.0 * rng.uniform() - 1.0);
}

}  // namespace

TcnConfig TcnConfig::with_layers(std::size_t layers, std::size_t channels, std::size_t kernel_size) {
    TcnConfig cfg;
    cfg.layers = layers;
    cfg.channels = channels;
    cfg.kernel_size = kernel_size;
    cfg.dilations.clear();
    for (std::size_t i = 0; i < layers; ++i) cfg.dilations.push_back(std::size_t{1} << i);
    return cfg;
}

void TcnConfig::validate() const {
    if (layers < 1) throw ParameterError("TCN needs at least one layer");
    if (channels < 1) throw ParameterError("TCN needs at least one channel");
    if (kernel_size < 2) throw ParameterError("TCN kernel size must be at least 2");
    if (dilations.size() != layers) throw ParameterError("TCN dilation count must equal the layer count");
    for (auto d : dilations) {
        if (d < 1) throw ParameterError("TCN dilations must be at least 1");
    }
}

Matrix dilated_conv1d(const Matrix& input, const Tensor& kernel, std::size_t dilation) {
    check_kernel(input, kernel, dilation);
    const std::size_t c_out = kernel.shape[0];
    const std::size_t c_in = kernel.shape[1];
    const std::size_t k = kernel.shape[2];
    const Eigen::Index horizon = input.cols();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(c_out), horizon);
    for (std::size_t j = 0; j < k; ++j) {
        const Shift s = tap_shift(horizon, j, dilation, k);
        if (s.length == 0) continue;
        for (std::size_t co = 0; co < c_out; ++co) {
            auto dst = out.row(static_cast<Eigen::Index>(co)).segment(s.out_begin, s.length);
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const double w = kernel.values[(co * c_in + ci) * k + j];
                dst += w * input.row(static_cast<Eigen::Index>(ci)).segment(s.in_begin, s.length);
            }
        }
    }
    return out;
}

void dilated_conv1d_backward(const Matrix& input, const Tensor& kernel, std::size_t dilation, const Matrix& grad_output,
                             Matrix* grad_input, Tensor* grad_kernel) {
    check_kernel(input, kernel, dilation);
    const std::size_t c_out = kernel.shape[0];
    const std::size_t c_in = kernel.shape[1];
    const std::size_t k = kernel.shape[2];
    const Eigen::Index horizon = input.cols();
    if (grad_output.rows() != static_cast<Eigen::Index>(c_out) || grad_output.cols() != horizon) {
        throw DimensionError("convolution output gradient has the wrong shape");
    }
    for (std::size_t j = 0; j < k; ++j) {
        const Shift s = tap_shift(horizon, j, dilation, k);
        if (s.length == 0) continue;
        for (std::size_t co = 0; co < c_out; ++co) {
            const auto g = grad_output.row(static_cast<Eigen::Index>(co)).segment(s.out_begin, s.length);
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                const std::size_t idx = (co * c_in + ci) * k + j;
                const auto in = input.row(static_cast<Eigen::Index>(ci)).segment(s.in_begin, s.length);
                if (grad_kernel) grad_kernel->values[idx] += g.dot(in);
                if (grad_input) {
                    grad_input->row(static_cast<Eigen::Index>(ci)).segment(s.in_begin, s.length) +=
                        kernel.values[idx] * g;
                }
            }
        }
    }
}

void init_tcn_params(ParameterSet& params, const std::string& prefix, const TcnConfig& config,
                     std::size_t features, SeededRng& rng) {
    config.validate();
    const std::size_t c = config.channels;
    const std::size_t k = config.kernel_size;
    fill_uniform(params.add(prefix + "in.weight", {c, features}), 1.0 / std::sqrt(static_cast<double>(features)), rng);
    params.add(prefix + "in.bias", {c});
    for (std::size_t i = 0; i < config.layers; ++i) {
        const std::string id = std::to_string(i);
        fill_uniform(params.add(prefix + "conv" + id + ".weight", {c, c, k}),
                     1.0 / std::sqrt(static_cast<double>(c * k)), rng);
        params.add(prefix + "conv" + id + ".bias", {c});
        fill_uniform(params.add(prefix + "skip" + id + ".weight", {c, c}), 1.0 / std::sqrt(static_cast<double>(c)),
                     rng);
    }
}

Matrix tcn_forward(const Matrix& x, const TcnConfig& config, const ParameterSet& params, const std::string& prefix,
                   TcnCache* cache) {
    const std::size_t c = config.channels;
    const std::size_t k = config.kernel_size;
    const auto features = static_cast<std::size_t>(x.rows());
    const auto w_in = as_matrix(require(params, prefix + "in.weight", {c, features}));
    const auto b_in = as_vector(require(params, prefix + "in.bias", {c}));

    Matrix h = w_in * x;
    h.colwise() += b_in;
    if (cache) {
        cache->input = x;
        cache->projected = h;
        cache->pre.clear();
        cache->hidden.clear();
    }
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(c), x.cols());
    for (std::size_t i = 0; i < config.layers; ++i) {
        const std::string id = std::to_string(i);
        const Tensor& kernel = require(params, prefix + "conv" + id + ".weight", {c, c, k});
        const auto bias = as_vector(require(params, prefix + "conv" + id + ".bias", {c}));
        const auto skip = as_matrix(require(params, prefix + "skip" + id + ".weight", {c, c}));
        Matrix pre = dilated_conv1d(h, kernel, config.dilations[i]);
        pre.colwise() += bias;
        Matrix next = pre.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; }) + h;
        out.noalias() += skip * next;
        if (cache) {
            cache->pre.push_back(std::move(pre));
            cache->hidden.push_back(next);
        }
        h = std::move(next);
    }
    return out;
}

void tcn_backward(const TcnCache& cache, const TcnConfig& config, const ParameterSet& params,
                  const std::string& prefix, const Matrix& grad_output, ParameterSet& grads) {
    const std::size_t layers = config.layers;
    if (cache.hidden.size() != layers) throw ParameterError("TCN cache does not match the configuration");

    Matrix grad_h = Matrix::Zero(grad_output.rows(), grad_output.cols());
    for (std::size_t step = 0; step < layers; ++step) {
        const std::size_t i = layers - 1 - step;
        const std::string id = std::to_string(i);
        const auto skip = as_matrix(params.at(prefix + "skip" + id + ".weight"));
        as_matrix(grads.at(prefix + "skip" + id + ".weight")).noalias() += grad_output * cache.hidden[i].transpose();
        grad_h.noalias() += skip.transpose() * grad_output;

        const Matrix& pre = cache.pre[i];
        const Matrix grad_pre =
            grad_h.cwiseProduct(pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; }));
        as_vector(grads.at(prefix + "conv" + id + ".bias")) += grad_pre.rowwise().sum();
        const Matrix& below = i == 0 ? cache.projected : cache.hidden[i - 1];
        // Residual path passes grad_h through unchanged.
        dilated_conv1d_backward(below, params.at(prefix + "conv" + id + ".weight"), config.dilations[i], grad_pre,
                                &grad_h, &grads.at(prefix + "conv" + id + ".weight"));
    }
    as_matrix(grads.at(prefix + "in.weight")).noalias() += grad_h * cache.input.transpose();
    as_vector(grads.at(prefix + "in.bias")) += grad_h.rowwise().sum();
}

double gradient_check(const LossWithGradient& fn, const ParameterSet& params, double step) {
    ParameterSet analytic = params.zeros_like();
    const double base = fn(params, &analytic);
    if (!std::isfinite(base)) throw NumericError("gradient check: loss is not finite at the base point");

    ParameterSet probe = params;
    double worst = 0.0;
    auto a_it = analytic.begin();
    for (auto it = probe.begin(); it != probe.end(); ++it, ++a_it) {
        auto& values = it->second.values;
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double saved = values[j];
            values[j] = saved + step;
            const double up = fn(probe, nullptr);
            values[j] = saved - step;
            const double down = fn(probe, nullptr);
            values[j] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw NumericError("gradient check: loss is not finite near '" + it->first + "'");
            }
            const double numeric = (up - down) / (2.0 * step);
            const double err = std::abs(a_it->second.values[j] - numeric) / std::max(1.0, std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace dcqn
