#include <doctest.h>

#include <cmath>

#include "elltest/error.hpp"
#include "elltest/numkit.hpp"
#include "oracle/oracle.hpp"
#include "test_support.hpp"

using namespace elltest;

TEST_CASE("trace_powers of identity and diagonal matrices") {
    const auto nu = trace_powers(SymMatrix::identity(3));
    CHECK(nu.nu1 == 3.0);
    CHECK(nu.nu2 == 3.0);
    CHECK(nu.nu3 == 3.0);
    CHECK(nu.nu4 == 3.0);
    CHECK(nu.frob4 == 3.0);

    // diag(1, 2): 1 + 2, 1 + 4, 1 + 8, 1 + 16.
    const auto d = trace_powers(SymMatrix::diagonal(Eigen::Vector2d(1.0, 2.0)));
    CHECK(d.nu1 == 3.0);
    CHECK(d.nu2 == 5.0);
    CHECK(d.nu3 == 9.0);
    CHECK(d.nu4 == 17.0);
}

TEST_CASE("Gram path matches the direct path") {
    Rng rng(11);
    for (auto [m, p] : {std::pair{3, 5}, std::pair{7, 40}, std::pair{40, 7}, std::pair{12, 12}}) {
        const DataMatrix x = test::gaussian_matrix(m, p, rng);
        const SymMatrix s = SymMatrix::from_gram(x);
        const auto direct = trace_powers(s);
        const auto gram = trace_powers(s, x);
        const auto factor = factor_trace_powers(x);
        CHECK(test::rel_diff(direct.nu1, gram.nu1) <= 1e-10);
        CHECK(test::rel_diff(direct.nu2, gram.nu2) <= 1e-10);
        CHECK(test::rel_diff(direct.nu3, gram.nu3) <= 1e-10);
        CHECK(test::rel_diff(direct.nu4, gram.nu4) <= 1e-10);
        CHECK(test::rel_diff(direct.nu4, factor.nu4) <= 1e-10);
        CHECK(direct.frob4 == gram.frob4);
    }
}

TEST_CASE("spectral summary invariants on random PSD matrices") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const DataMatrix x = test::gaussian_matrix(6, 4, rng);
        const auto nu = trace_powers(SymMatrix::from_gram(x));
        CHECK(nu.nu2 >= nu.nu1 * nu.nu1 / 4.0 * (1.0 - 1e-12));
        CHECK(nu.nu4 >= 0.0);
        CHECK(nu.frob4 >= 0.0);
    }
}

TEST_CASE("SymMatrix rejects asymmetric or non-square input") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.5, 0.4, 1.0;
    CHECK_THROWS_AS(SymMatrix{a}, ValidationError);
    CHECK_THROWS_AS(SymMatrix{Eigen::MatrixXd(2, 3)}, ValidationError);
    Eigen::MatrixXd nan_entry = Eigen::MatrixXd::Identity(2, 2);
    nan_entry(0, 0) = std::nan("");
    CHECK_THROWS_AS(SymMatrix{nan_entry}, ValidationError);
}

TEST_CASE("entrywise_norm_pow") {
    CHECK(entrywise_norm_pow(SymMatrix::identity(7), 4) == 7.0);
    CHECK(entrywise_norm_pow(SymMatrix(Eigen::MatrixXd::Ones(2, 2)), 2) == 4.0);
    Eigen::Matrix2d r;
    r << 1.0, 0.5, 0.5, 1.0;
    CHECK(entrywise_norm_pow(SymMatrix(r), 4) == doctest::Approx(2.125).epsilon(1e-15));
    CHECK_THROWS_AS((void)entrywise_norm_pow(SymMatrix::identity(2), 3), ValidationError);
}

TEST_CASE("correlation_matrix") {
    const SymMatrix r1 = correlation_matrix(SymMatrix::diagonal(Eigen::Vector2d(4.0, 9.0)));
    CHECK(r1.matrix().isApprox(Eigen::Matrix2d::Identity()));

    Eigen::Matrix2d s;
    s << 4.0, 2.0, 2.0, 1.0;
    const SymMatrix r2 = correlation_matrix(SymMatrix(s));
    CHECK(r2.matrix().isApprox(Eigen::Matrix2d::Ones()));

    Rng rng(3);
    const SymMatrix cov = SymMatrix::from_gram(test::gaussian_matrix(10, 5, rng) * 3.0);
    const SymMatrix r = correlation_matrix(cov);
    CHECK((r.matrix().diagonal().array() == 1.0).all());
    CHECK(r.matrix().cwiseAbs().maxCoeff() <= 1.0);
    CHECK((correlation_matrix(r).matrix() - r.matrix()).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK_THROWS_AS((void)correlation_matrix(SymMatrix::diagonal(Eigen::Vector2d(1.0, 0.0))),
                    DegenerateCovariateError);
}

TEST_CASE("g_k closed forms") {
    const SymMatrix i2 = SymMatrix::identity(2);
    CHECK(g_k(i2, 2) == 8.0);
    // E((chi^2_2)^3) = 2 * 4 * 6.
    CHECK(g_k(i2, 3) == 48.0);
    // E((chi^2_2)^4) = 2 * 4 * 6 * 8.
    CHECK(g_k(i2, 4) == 384.0);
    CHECK_THROWS_AS((void)g_k(i2, 5), ValidationError);
}

TEST_CASE("g_k agrees with the Isserlis expansion") {
    Rng rng(2024);
    for (int p = 1; p <= 3; ++p) {
        for (int rep = 0; rep < 3; ++rep) {
            const Eigen::MatrixXd s = test::random_symmetric(p, rng);
            for (int k = 2; k <= 4; ++k) {
                const double expected = oracle::quadratic_form_moment(s, k);
                CHECK(test::rel_diff(g_k(SymMatrix(s), k), expected) <= 1e-9);
            }
        }
    }
}

TEST_CASE("threshold") {
    CHECK(threshold(-5.0, 2.0) == -2.0);
    CHECK(threshold(0.5, 2.0) == 0.5);
    CHECK(threshold(3.0, 1.0) == 1.0);
    CHECK(threshold(0.0, 1.0) == 0.0);
    for (double x : {-3.0, -0.2, 0.7, 9.0}) {
        for (double t : {0.1, 1.0, 5.0}) {
            CHECK(threshold(-x, t) == -threshold(x, t));
            CHECK(std::abs(threshold(x, t)) <= t);
        }
    }
    CHECK_THROWS_AS((void)threshold(1.0, -1.0), ValidationError);
}

TEST_CASE("sym_sqrt") {
    CHECK(sym_sqrt(SymMatrix::identity(4)).matrix().isApprox(Eigen::MatrixXd::Identity(4, 4)));
    const SymMatrix d = sym_sqrt(SymMatrix::diagonal(Eigen::Vector2d(4.0, 9.0)));
    CHECK(d(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(d(0, 1)) <= 1e-14);

    Rng rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        // Rank-deficient PSD: 3 rows in 6 dimensions.
        const SymMatrix s = SymMatrix::from_gram(test::gaussian_matrix(3, 6, rng));
        const SymMatrix a = sym_sqrt(s);
        const Eigen::MatrixXd a2 = a.matrix() * a.matrix();
        CHECK((a2 - s.matrix()).norm() / s.matrix().norm() <= 1e-8);
    }

    Eigen::Matrix2d indefinite;
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS((void)sym_sqrt(SymMatrix(indefinite)), NotPsdError);
}

TEST_CASE("haar_orthogonal") {
    Rng rng(99);
    const Eigen::MatrixXd q1 = haar_orthogonal(1, rng);
    CHECK(std::abs(q1(0, 0)) == 1.0);

    const Eigen::MatrixXd q = haar_orthogonal(30, rng);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-10);

    // Q_11 of a Haar 3x3 matrix has mean 0 (and variance 1/3).
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        sum += haar_orthogonal(3, rng)(0, 0);
    }
    CHECK(std::abs(sum / draws) <= 0.05);
}

TEST_CASE("normal cdf and quantile") {
    CHECK(normal_cdf(0.0) == 0.5);
    // Reference value 1.959963984540054 (Phi^{-1}(0.975)).
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == 0.0);
    for (double z : {0.1, 0.7, 1.5, 2.3, 4.0, 7.5}) {
        CHECK(std::abs(normal_cdf(-z) + normal_cdf(z) - 1.0) <= 1e-15);
        CHECK(normal_sf(z) == doctest::Approx(normal_cdf(-z)).epsilon(1e-15));
    }
    for (double u : {1e-300, 1e-20, 1e-8, 0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999999, 1.0 - 1e-12}) {
        CHECK(std::abs(normal_cdf(normal_quantile(u)) - u) <= 1e-12);
    }
    CHECK_THROWS_AS((void)normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS((void)normal_quantile(1.0), DomainError);
}

TEST_CASE("normal_cdf against its Taylor series") {
    // Phi(z) = 1/2 + phi-series: (1/sqrt(2pi)) sum_k (-1)^k z^{2k+1} / (2^k k! (2k+1)).
    for (double z : {-1.5, -0.3, 0.0, 0.4, 1.0, 1.959963984540054, 2.5}) {
        double term = z;
        double sum = 0.0;
        for (int k = 0; k < 80; ++k) {
            sum += term / (2 * k + 1);
            term *= -z * z / (2.0 * (k + 1));
        }
        const double series = 0.5 + sum / std::sqrt(2.0 * M_PI);
        CHECK(std::abs(normal_cdf(z) - series) <= 1e-10);
    }
}
