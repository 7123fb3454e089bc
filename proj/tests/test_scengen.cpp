#include <doctest.h>

#include "dcqn/errors.hpp"
#include "dcqn/gaussian.hpp"
#include "dcqn/scengen.hpp"
#include "dcqn/testing_hooks.hpp"
#include "support.hpp"

#include <algorithm>
#include <numeric>

using namespace dcqn;

namespace {

IqnConfig small_iqn() {
    IqnConfig cfg;
    cfg.backbone = TcnConfig::with_layers(2, 4, 3);
    cfg.downscale_channels = 3;
    cfg.embed_terms = 4;
    cfg.embed_channels = 3;
    return cfg;
}

// Inverse of y = sigmoid(slope * u + bias).
double logistic_cdf(double y, double slope, double bias) { return (test::logit(y) - bias) / slope; }

}  // namespace

TEST_CASE("zero prior yields the median curve") {
    const QuantileModel iqn = init_iqn(small_iqn(), 2, 6, 1);
    SeededRng rng(40, 1);
    const Matrix x = test::random_matrix(rng, 2, 6);
    const CholeskyFactor f = test::random_factor(rng, 6);
    const Matrix s = testing::generate_with_zero_prior(x, 1, iqn, f).scenarios;
    CHECK(s.rows() == 1);
    CHECK(s.row(0).transpose() == point_forecast(x, iqn));
    CHECK(point_forecast(x, iqn) == iqn_forward(x, Vector::Constant(6, 0.5), iqn));
}

TEST_CASE("generate shape, range, provenance and determinism") {
    const QuantileModel iqn = init_iqn(small_iqn(), 2, 5, 2);
    SeededRng rng(41, 1);
    const Matrix x = test::random_matrix(rng, 2, 5);
    const CholeskyFactor f = test::random_factor(rng, 5);
    ScenarioProvenance prov;
    prov.model_id = "dcqn";
    prov.issue_date = test::day(3);
    const ScenarioSet a = generate(x, 40, iqn, f, 99, prov);
    CHECK(a.scenarios.rows() == 40);
    CHECK(a.scenarios.cols() == 5);
    CHECK(a.scenarios.minCoeff() > 0.0);
    CHECK(a.scenarios.maxCoeff() < 1.0);
    CHECK(a.provenance.seed == 99);
    CHECK(a.provenance.count == 40);
    CHECK(a.provenance.model_id == "dcqn");
    CHECK(a.provenance.issue_date == test::day(3));
    const ScenarioSet b = generate(x, 40, iqn, f, a.provenance.seed, a.provenance);
    CHECK(a.scenarios == b.scenarios);
    // Scenario m does not depend on how many are requested.
    const ScenarioSet c = generate(x, 10, iqn, f, 99, prov);
    CHECK(c.scenarios == a.scenarios.topRows(10));
    CHECK(generate(x, 10, iqn, f, 100, prov).scenarios != c.scenarios);
    CHECK_THROWS_AS(generate(x, 0, iqn, f, 1), DomainError);
    CHECK_THROWS_AS(generate(x, 1, iqn, CholeskyFactor::identity(4), 1), DimensionError);
}

TEST_CASE("point forecast ignores the correlation model") {
    const QuantileModel iqn = init_iqn(small_iqn(), 2, 4, 3);
    SeededRng rng(42, 1);
    const Matrix x = test::random_matrix(rng, 2, 4);
    const Vector p = point_forecast(x, iqn);
    CHECK(testing::generate_with_zero_prior(x, 1, iqn, CholeskyFactor::identity(4)).scenarios.row(0).transpose() == p);
    CHECK(testing::generate_with_zero_prior(x, 1, iqn, test::random_factor(rng, 4)).scenarios.row(0).transpose() == p);
    CHECK(p.minCoeff() > 0.0);
    CHECK(p.maxCoeff() < 1.0);
}

TEST_CASE("identity copula over a logistic quantile map gives uniform ranks") {
    const double slope = 3.0;
    Vector bias(3);
    bias << -1.0, 0.0, 0.5;
    const QuantileModel iqn = test::logistic_iqn(1, bias, slope);
    const ScenarioSet set = generate(Matrix::Zero(1, 3), 10000, iqn, CholeskyFactor::identity(3), 5);
    for (Eigen::Index t = 0; t < 3; ++t) {
        std::vector<double> u;
        for (Eigen::Index m = 0; m < set.scenarios.rows(); ++m) {
            u.push_back(logistic_cdf(set.scenarios(m, t), slope, bias[t]));
        }
        CHECK(test::ks_uniform(u) < 0.02);
    }
}

TEST_CASE("scenario ranks follow the latent ranks") {
    const QuantileModel iqn = test::logistic_iqn(1, Vector::Constant(4, 0.2), 2.5);
    SeededRng rng(43, 1);
    const CholeskyFactor f = test::random_factor(rng, 4);
    Matrix priors(50, 4);
    for (Eigen::Index m = 0; m < 50; ++m) priors.row(m) = sample_standard_normal(rng, 4).transpose();
    const Matrix s = detail::compose_scenarios(Matrix::Zero(1, 4), priors, iqn, f);
    for (Eigen::Index t = 0; t < 4; ++t) {
        std::vector<Eigen::Index> by_s(50), by_u(50);
        std::iota(by_s.begin(), by_s.end(), 0);
        std::iota(by_u.begin(), by_u.end(), 0);
        std::vector<double> latent(50);
        for (Eigen::Index m = 0; m < 50; ++m) latent[static_cast<std::size_t>(m)] = f.apply(priors.row(m).transpose())[t];
        std::sort(by_s.begin(), by_s.end(), [&](auto a, auto b) { return s(a, t) < s(b, t); });
        std::sort(by_u.begin(), by_u.end(), [&](auto a, auto b) {
            return latent[static_cast<std::size_t>(a)] < latent[static_cast<std::size_t>(b)];
        });
        CHECK(by_s == by_u);
    }
}

TEST_CASE("marginal quantile curves") {
    const QuantileModel iqn = init_iqn(small_iqn(), 2, 6, 4);
    SeededRng rng(44, 1);
    const Matrix x = test::random_matrix(rng, 2, 6);
    const Matrix median = marginal_quantile_curves(x, iqn, {0.5});
    CHECK(median.row(0).transpose() == point_forecast(x, iqn));
    const Matrix curves = marginal_quantile_curves(x, iqn, evaluation_levels());
    CHECK(curves.rows() == 19);
    for (Eigen::Index t = 0; t < 6; ++t) {
        for (Eigen::Index k = 1; k < 19; ++k) CHECK(curves(k, t) >= curves(k - 1, t));
    }
    CHECK_THROWS_AS(marginal_quantile_curves(x, iqn, {0.6, 0.4}), DomainError);
    CHECK_THROWS_AS(marginal_quantile_curves(x, iqn, {0.0, 0.4}), DomainError);
}

TEST_CASE("level grids") {
    const auto e = evaluation_levels();
    CHECK(e.size() == 19);
    CHECK(e.front() == doctest::Approx(0.05));
    CHECK(e.back() == doctest::Approx(0.95));
    const auto f = fan_levels();
    CHECK(f.size() == 9);
    CHECK(std::is_sorted(f.begin(), f.end()));
}

TEST_CASE("90 percent band covers the model's own scenarios") {
    SeededRng rng(45, 1);
    QuantileModel iqn = test::logistic_iqn(2, test::random_vector(rng, 5, -1.0, 1.0), 3.0);
    as_matrix(iqn.params.at("iqn.head.weight")).leftCols(3) = test::random_matrix(rng, 5, 3, 0.5);
    const Matrix x = test::random_matrix(rng, 2, 5);
    const ScenarioSet set = generate(x, 4000, iqn, test::random_factor(rng, 5), 8);
    const Matrix band = marginal_quantile_curves(x, iqn, {0.05, 0.95});
    for (Eigen::Index t = 0; t < 5; ++t) {
        int inside = 0;
        for (Eigen::Index m = 0; m < set.scenarios.rows(); ++m) {
            inside += set.scenarios(m, t) >= band(0, t) && set.scenarios(m, t) <= band(1, t);
        }
        CHECK(std::abs(inside / 4000.0 - 0.9) <= 0.05);
    }
}
