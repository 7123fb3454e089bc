#pragma once

#include "dcqn/rng.hpp"
#include "dcqn/tensor.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace dcqn {

struct TcnConfig {
    std::size_t layers = 4;
    std::size_t channels = 32;
    std::size_t kernel_size = 3;
    std::vector<std::size_t> dilations{1, 2, 4, 8};

    // Dilations 1, 2, 4, ..., 2^(layers-1).
    static TcnConfig with_layers(std::size_t layers, std::size_t channels, std::size_t kernel_size = 3);
    void validate() const;
    bool operator==(const TcnConfig&) const = default;
};

inline constexpr double kLeakySlope = 0.01;

// Same-length dilated convolution. Total zero padding (k-1)*dilation, with
// ceil(total/2) on the left. kernel shape: [C_out, C_in, k].
Matrix dilated_conv1d(const Matrix& input, const Tensor& kernel, std::size_t dilation);

// Accumulates d(input) and d(kernel) for the convolution above.
void dilated_conv1d_backward(const Matrix& input, const Tensor& kernel, std::size_t dilation, const Matrix& grad_output,
                             Matrix* grad_input, Tensor* grad_kernel);

// Adds `<prefix>in.weight [C,F]`, `<prefix>in.bias [C]`, and per layer i
// `<prefix>conv<i>.weight [C,C,k]`, `<prefix>conv<i>.bias [C]`,
// `<prefix>skip<i>.weight [C,C]`. Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// biases zero.
void init_tcn_params(ParameterSet& params, const std::string& prefix, const TcnConfig& config,
                     std::size_t features, SeededRng& rng);

// Intermediate activations kept for the backward pass.
struct TcnCache {
    Matrix input;
    Matrix projected;            // h_0
    std::vector<Matrix> pre;     // conv_i(h_{i-1}) + bias
    std::vector<Matrix> hidden;  // h_i
};

// h_0 = W_in x + b_in
// h_i = LeakyReLU(conv_i(h_{i-1})) + h_{i-1}
// out = sum_i skip_i h_i
Matrix tcn_forward(const Matrix& x, const TcnConfig& config, const ParameterSet& params, const std::string& prefix,
                   TcnCache* cache = nullptr);

// Accumulates parameter gradients of a loss whose gradient w.r.t. the TCN
// output is `grad_output`.
void tcn_backward(const TcnCache& cache, const TcnConfig& config, const ParameterSet& params,
                  const std::string& prefix, const Matrix& grad_output, ParameterSet& grads);

// Scalar loss together with its analytic gradient. `grads`, when non-null,
// is zero on entry and receives d(loss)/d(params).
using LossWithGradient = std::function<double(const ParameterSet& params, ParameterSet* grads)>;

// max over every parameter of |analytic - numeric| / max(1, |numeric|) with
// central differences. Throws NumericError if the loss is non-finite.
double gradient_check(const LossWithGradient& fn, const ParameterSet& params, double step = 1e-5);

}  // namespace dcqn
