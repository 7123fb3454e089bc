#include <doctest.h>

#include "dcqn/backbone.hpp"
#include "dcqn/errors.hpp"
#include "support.hpp"

#include <cmath>

using namespace dcqn;

TEST_CASE("dilated conv: zero kernel and identity tap") {
    SeededRng rng(1, 1);
    const Matrix in = test::random_matrix(rng, 3, 10);
    Tensor zero({2, 3, 3});
    CHECK(dilated_conv1d(in, zero, 2).isZero(0.0));

    Matrix row(1, 3);
    row << 1, 2, 3;
    Tensor tap({1, 1, 2});
    tap.values = {0.0, 1.0};
    const Matrix out = dilated_conv1d(row, tap, 1);
    CHECK(out(0, 0) == 1.0);
    CHECK(out(0, 1) == 2.0);
    CHECK(out(0, 2) == 3.0);
}

TEST_CASE("dilated conv: padding split puts the extra column on the left") {
    // k = 2, dilation 3: total padding 3, left 2. Tap 0 reads t - 2, tap 1 reads t + 1.
    Matrix row(1, 6);
    row << 1, 2, 3, 4, 5, 6;
    Tensor first({1, 1, 2});
    first.values = {1.0, 0.0};
    const Matrix a = dilated_conv1d(row, first, 3);
    CHECK(a(0, 0) == 0.0);
    CHECK(a(0, 1) == 0.0);
    CHECK(a(0, 2) == 1.0);
    CHECK(a(0, 5) == 4.0);
    Tensor second({1, 1, 2});
    second.values = {0.0, 1.0};
    const Matrix b = dilated_conv1d(row, second, 3);
    CHECK(b(0, 0) == 2.0);
    CHECK(b(0, 4) == 6.0);
    CHECK(b(0, 5) == 0.0);
}

TEST_CASE("dilated conv is linear in the input") {
    SeededRng rng(2, 1);
    const Matrix in = test::random_matrix(rng, 4, 12);
    Tensor k({3, 4, 3});
    for (auto& v : k.values) v = rng.uniform() - 0.5;
    const Matrix once = dilated_conv1d(in, k, 2);
    const Matrix twice = dilated_conv1d(2.0 * in, k, 2);
    CHECK((twice - 2.0 * once).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dilated conv rejects shape mismatches") {
    Matrix in(3, 5);
    in.setZero();
    CHECK_THROWS_AS(dilated_conv1d(in, Tensor({2, 4, 3}), 1), DimensionError);
    CHECK_THROWS_AS(dilated_conv1d(in, Tensor({2, 3}), 1), DimensionError);
    CHECK_THROWS_AS(dilated_conv1d(in, Tensor({2, 3, 3}), 0), DimensionError);
}

TEST_CASE("tcn with zero kernels and identity skip reduces to the input projection") {
    SeededRng rng(3, 1);
    const TcnConfig cfg = TcnConfig::with_layers(1, 4, 3);
    ParameterSet p;
    init_tcn_params(p, "t.", cfg, 2, rng);
    std::fill(p.at("t.conv0.weight").values.begin(), p.at("t.conv0.weight").values.end(), 0.0);
    as_matrix(p.at("t.skip0.weight")).setIdentity();
    as_vector(p.at("t.in.bias")).setConstant(0.25);
    const Matrix x = test::random_matrix(rng, 2, 7);
    Matrix expected = as_matrix(p.at("t.in.weight")) * x;
    expected.array() += 0.25;
    const Matrix out = tcn_forward(x, cfg, p, "t.");
    CHECK((out - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("tcn residual identity holds per layer for zero kernels") {
    SeededRng rng(4, 1);
    const TcnConfig cfg = TcnConfig::with_layers(3, 5, 2);
    ParameterSet p;
    init_tcn_params(p, "", cfg, 3, rng);
    for (std::size_t i = 0; i < 3; ++i) {
        auto& w = p.at("conv" + std::to_string(i) + ".weight").values;
        std::fill(w.begin(), w.end(), 0.0);
    }
    TcnCache cache;
    const Matrix x = test::random_matrix(rng, 3, 9);
    tcn_forward(x, cfg, p, "", &cache);
    for (const auto& h : cache.hidden) CHECK((h - cache.projected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tcn output shape, determinism and missing tensors") {
    SeededRng rng(5, 1);
    const TcnConfig cfg = TcnConfig::with_layers(2, 6, 3);
    ParameterSet p;
    init_tcn_params(p, "", cfg, 4, rng);
    const Matrix x = test::random_matrix(rng, 4, 11);
    const Matrix a = tcn_forward(x, cfg, p, "");
    CHECK(a.rows() == 6);
    CHECK(a.cols() == 11);
    CHECK(a == tcn_forward(x, cfg, p, ""));
    CHECK_THROWS_AS(tcn_forward(x, cfg, p, "other."), ParameterError);
}

TEST_CASE("tcn config validation") {
    TcnConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.dilations == std::vector<std::size_t>{1, 2, 4, 8});
    cfg.kernel_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = TcnConfig::with_layers(3, 8);
    cfg.dilations.pop_back();
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("gradient check of a quadratic is exact") {
    SeededRng rng(6, 1);
    ParameterSet p;
    for (auto& v : p.add("a", {3, 4}).values) v = rng.uniform() - 0.5;
    for (auto& v : p.add("b", {5}).values) v = rng.uniform() - 0.5;
    LossWithGradient fn = [](const ParameterSet& params, ParameterSet* grads) {
        double s = 0.0;
        for (const auto& [name, t] : params) {
            for (double v : t.values) s += v * v;
        }
        if (grads) {
            auto g = grads->begin();
            for (auto it = params.begin(); it != params.end(); ++it, ++g) {
                for (std::size_t j = 0; j < it->second.size(); ++j) g->second.values[j] = 2.0 * it->second.values[j];
            }
        }
        return s;
    };
    CHECK(gradient_check(fn, p) < 1e-8);

    LossWithGradient bad = [](const ParameterSet&, ParameterSet*) { return std::nan(""); };
    CHECK_THROWS_AS(gradient_check(bad, p), NumericError);
}

TEST_CASE("tcn backward matches central differences") {
    for (std::uint64_t trial = 0; trial < 4; ++trial) {
        SeededRng rng(100 + trial, 1);
        const TcnConfig cfg = TcnConfig::with_layers(1 + trial % 3, 3, 2 + trial % 2);
        ParameterSet p;
        init_tcn_params(p, "t.", cfg, 2, rng);
        for (auto& [name, t] : p) {
            for (auto& v : t.values) v += 0.1 * (rng.uniform() - 0.5);  // non-zero biases too
        }
        const Matrix x = test::random_matrix(rng, 2, 6);
        const Matrix weights = test::random_matrix(rng, 3, 6);
        LossWithGradient fn = [&](const ParameterSet& params, ParameterSet* grads) {
            TcnCache cache;
            const Matrix out = tcn_forward(x, cfg, params, "t.", grads ? &cache : nullptr);
            if (grads) tcn_backward(cache, cfg, params, "t.", weights, *grads);
            return out.cwiseProduct(weights).sum();
        };
        CHECK(gradient_check(fn, p, 1e-5) <= 1e-4);
    }
}
