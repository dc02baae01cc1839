#pragma once

// Shared helpers for the test binaries.

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "elltest/rng.hpp"

namespace elltest::test {

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            x(i, j) = normal(rng);
        }
    }
    return x;
}

inline Eigen::MatrixXd random_symmetric(Eigen::Index p, Rng& rng) {
    const Eigen::MatrixXd a = gaussian_matrix(p, p, rng);
    return 0.5 * (a + a.transpose());
}

/// Sample kurtosis m4 / m2^2 of a centered column (population mean 0) with
/// its delta-method standard error.
struct KurtosisEstimate {
    double value = 0.0;
    double se = 0.0;
};

inline KurtosisEstimate column_kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double n = static_cast<double>(x.size());
    const Eigen::ArrayXd x2 = x.array().square();
    const double m2 = x2.mean();
    const double m4 = x2.square().mean();
    const double m6 = (x2 * x2 * x2).mean();
    const double m8 = x2.square().square().mean();
    const double k = m4 / (m2 * m2);
    // Gradient of f(a, b) = b / a^2 at (m2, m4), covariance of (x^2, x^4).
    const double ga = -2.0 * m4 / (m2 * m2 * m2);
    const double gb = 1.0 / (m2 * m2);
    const double v22 = m4 - m2 * m2;
    const double v44 = m8 - m4 * m4;
    const double v24 = m6 - m2 * m4;
    const double var = (ga * ga * v22 + 2.0 * ga * gb * v24 + gb * gb * v44) / n;
    return {k, std::sqrt(var)};
}

}  // namespace elltest::test
