#pragma once

// Naive loop implementations of the scoring rules, written directly from the
// textbook definitions and used as references for the library estimators.

#include "dcqn/tensor.hpp"

#include <cmath>
#include <vector>

namespace dcqn::oracle {

inline double mae(const Vector& y, const Vector& f) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) s += std::fabs(y(t) - f(t));
    return s / static_cast<double>(y.size());
}

inline double rmse(const Vector& y, const Vector& f) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) s += (y(t) - f(t)) * (y(t) - f(t));
    return std::sqrt(s / static_cast<double>(y.size()));
}

inline double pinball(double y, double q, double u) {
    const double d = y - q;
    return d >= 0.0 ? u * d : (u - 1.0) * d;
}

inline double pinball_score(const Vector& y, const Matrix& curves, const std::vector<double>& levels) {
    double s = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        for (Eigen::Index t = 0; t < y.size(); ++t) {
            s += pinball(y(t), curves(static_cast<Eigen::Index>(k), t), levels[k]);
            ++n;
        }
    }
    return s / n;
}

inline double crps(const Vector& y, const Matrix& s) {
    const Eigen::Index m = s.rows();
    double total = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        double first = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) first += std::fabs(s(i, t) - y(t));
        double second = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) second += std::fabs(s(i, t) - s(j, t));
        }
        total += first / m - second / (2.0 * m * m);
    }
    return total / static_cast<double>(y.size());
}

inline double euclid(const Matrix& s, Eigen::Index i, const Vector& y) {
    double d = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) d += (s(i, t) - y(t)) * (s(i, t) - y(t));
    return std::sqrt(d);
}

inline double energy(const Vector& y, const Matrix& s) {
    const Eigen::Index m = s.rows();
    double first = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) first += euclid(s, i, y);
    double second = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) second += euclid(s, i, s.row(j).transpose());
    }
    return first / m - second / (2.0 * m * m);
}

inline double variogram(const Vector& y, const Matrix& s, double p) {
    const Eigen::Index m = s.rows();
    double total = 0.0;
    for (Eigen::Index a = 0; a < y.size(); ++a) {
        for (Eigen::Index b = 0; b < y.size(); ++b) {
            double mean = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) mean += std::pow(std::fabs(s(i, a) - s(i, b)), p);
            mean /= m;
            const double d = std::pow(std::fabs(y(a) - y(b)), p) - mean;
            total += d * d;
        }
    }
    return total;
}

}  // namespace dcqn::oracle
