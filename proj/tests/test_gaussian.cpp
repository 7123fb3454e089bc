#include <doctest.h>

#include "dcqn/errors.hpp"
#include "dcqn/gaussian.hpp"

#include <cmath>
#include <vector>

using namespace dcqn;

TEST_CASE("normal cdf matches high-precision reference values") {
    // Reference values computed with 40-digit arithmetic.
    const std::vector<std::pair<double, double>> ref = {
        {-8.0, 6.220960574271784e-16}, {-5.0, 2.866515718791939e-07}, {-3.3, 4.834241423837775e-04},
        {-1.5, 0.06680720126885807},   {-0.25, 0.4012936743170763},   {0.4, 0.6554217416103242},
        {1.959964, 0.9750000009035576}, {2.7, 0.9965330261969593},    {6.0, 0.9999999990134124},
    };
    for (auto [x, p] : ref) CHECK(std::abs(std_normal_cdf(x) - p) <= 1e-10);
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std::abs(std_normal_cdf(1.959964) - 0.975) <= 1e-6);
}

TEST_CASE("normal cdf symmetry") {
    SeededRng rng(7, 1);
    for (int i = 0; i < 1000; ++i) {
        const double x = 8.0 * (rng.uniform() - 0.5);
        CHECK(std::abs(std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))) <= 1e-12);
    }
}

TEST_CASE("normal quantile reference values and round trip") {
    const std::vector<std::pair<double, double>> ref = {
        {1e-10, -6.361340902404056}, {1e-6, -4.753424308822899}, {0.01, -2.326347874040841},
        {0.3, -0.5244005127080408},  {0.975, 1.959963984540054}, {0.999999, 4.753424308817088},
    };
    for (auto [u, z] : ref) CHECK(std::abs(std_normal_quantile(u) - z) <= 1e-8 * std::max(1.0, std::abs(z)));
    CHECK(std_normal_quantile(0.5) == 0.0);
    CHECK(std::abs(std_normal_quantile(0.975) - 1.959964) <= 1e-5);

    // Log-spaced grid over [1e-10, 1 - 1e-10], both tails.
    for (double e = -10.0; e <= -0.30103; e += 0.05) {
        const double u = std::pow(10.0, e);
        CHECK(std::abs(std_normal_cdf(std_normal_quantile(u)) - u) <= 1e-9);
        CHECK(std::abs(std_normal_cdf(std_normal_quantile(1.0 - u)) - (1.0 - u)) <= 1e-9);
    }
}

TEST_CASE("normal quantile rejects the closed boundary") {
    CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(-0.1), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(std::nan("")), DomainError);
}

TEST_CASE("seeded normal sampling") {
    SeededRng a(42, 9);
    SeededRng b(42, 9);
    CHECK(sample_standard_normal(a, 64) == sample_standard_normal(b, 64));

    SeededRng c(42, 10);
    SeededRng d(42, 11);
    CHECK(sample_standard_normal(c, 1)[0] != sample_standard_normal(d, 1)[0]);

    SeededRng big(2024, 3);
    const Vector draws = sample_standard_normal(big, 1'000'000);
    const double mean = draws.mean();
    const double var = (draws.array() - mean).square().mean();
    CHECK(std::abs(mean) <= 0.005);
    CHECK(std::abs(var - 1.0) <= 0.01);

    CHECK_THROWS_AS(sample_standard_normal(big, 0), DomainError);
}

TEST_CASE("rng streams are reproducible and uniform_open avoids endpoints") {
    SeededRng a(1, 2);
    SeededRng b(1, 2);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    SeededRng c(1, 3);
    for (int i = 0; i < 10000; ++i) {
        const double u = c.uniform_open();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(c.below(7) < 7);
    }
}

TEST_CASE("static copula on independent uniforms") {
    SeededRng rng(5, 1);
    std::vector<Vector> u(10000, Vector(4));
    for (auto& v : u) {
        for (Eigen::Index t = 0; t < 4; ++t) v[t] = rng.uniform_open();
    }
    const StaticCopula cop = fit_static_copula(u);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(cop.correlation(i, i) == 1.0);
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (i != j) CHECK(std::abs(cop.correlation(i, j)) <= 0.05);
        }
    }
    CHECK((cop.factor.covariance() - cop.correlation).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((cop.correlation - cop.correlation.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("static copula on comonotone columns engages jitter") {
    SeededRng rng(6, 1);
    std::vector<Vector> u(200, Vector(2));
    for (auto& v : u) {
        v[0] = rng.uniform_open();
        v[1] = v[0];
    }
    const StaticCopula cop = fit_static_copula(u);
    CHECK(cop.jitter > 0.0);
    CHECK(std::abs(cop.correlation(0, 1) - 1.0) <= 1e-6);
    CHECK(cop.correlation(0, 0) == 1.0);
    CHECK(cop.correlation(1, 1) == 1.0);
    CHECK((cop.factor.covariance() - cop.correlation).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("static copula needs more than T samples") {
    std::vector<Vector> u(4, Vector::Constant(4, 0.3));
    CHECK_THROWS_AS(fit_static_copula(u), InsufficientDataError);
}
