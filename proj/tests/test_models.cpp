#include <doctest.h>

#include <cmath>
#include <vector>

#include "elltest/error.hpp"
#include "elltest/models.hpp"
#include "test_support.hpp"

using namespace elltest;

namespace {

std::vector<MixingDistribution> all_families(long p) {
    return {MixingDistribution::chi_squared(p),         MixingDistribution::poisson(p),
            MixingDistribution::negative_binomial(p, 0.3), MixingDistribution::beta_scaled(p, 2.0),
            MixingDistribution::gamma_shape_rate(p, 5.0), MixingDistribution::beta_prime(p, 3.0),
            MixingDistribution::log_normal(p, 2.0),        MixingDistribution::gamma_squared_scaled(p)};
}

// Mean and standard error of f over draws.
template <class F>
std::pair<double, double> mc_mean(long draws, F&& f) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (long i = 0; i < draws; ++i) {
        const double v = f();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(draws);
    const double var = sum2 / static_cast<double>(draws) - mean * mean;
    return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(draws))};
}

}  // namespace

TEST_CASE("every mixing law has E(xi^2) = p") {
    for (long p : {1L, 7L, 50L}) {
        for (const auto& mix : all_families(p)) {
            CAPTURE(to_string(mix.family));
            CHECK(xi2_moment(mix, 1) == doctest::Approx(static_cast<double>(p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("standardized xi^2 variances") {
    const long p = 40;
    const double pd = static_cast<double>(p);
    CHECK(standardized_xi2_variance(MixingDistribution::chi_squared(p)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(standardized_xi2_variance(MixingDistribution::poisson(p)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(standardized_xi2_variance(MixingDistribution::negative_binomial(p, 0.3)) ==
          doctest::Approx(0.3).epsilon(1e-10));
    CHECK(standardized_xi2_variance(MixingDistribution::gamma_shape_rate(p, 5.0)) ==
          doctest::Approx(5.0).epsilon(1e-12));
    CHECK(standardized_xi2_variance(MixingDistribution::beta_prime(p, 3.0)) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(standardized_xi2_variance(MixingDistribution::log_normal(p, 2.0)) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(standardized_xi2_variance(MixingDistribution::beta_scaled(p, 2.0)) ==
          doctest::Approx(8.0 / (pd + 6.0)).epsilon(1e-12));
    CHECK(standardized_xi2_variance(MixingDistribution::gamma_squared_scaled(p)) ==
          doctest::Approx((4.0 * pd + 6.0) / (pd + 1.0)).epsilon(1e-12));
}

TEST_CASE("r_k closed forms") {
    const long p = 12;
    const double pd = static_cast<double>(p);
    for (int k = 1; k <= 8; ++k) {
        CHECK(compute_rk(MixingDistribution::chi_squared(p), k) == 1.0);
    }
    const double tau = 5.0;
    const auto gamma = MixingDistribution::gamma_shape_rate(p, tau);
    CHECK(compute_rk(gamma, 2) == doctest::Approx((pd + tau) / (pd + 2.0)).epsilon(1e-12));
    CHECK(compute_rk(gamma, 3) ==
          doctest::Approx((pd + tau) * (pd + 2.0 * tau) / ((pd + 2.0) * (pd + 4.0))).epsilon(1e-12));
    CHECK(compute_rk(MixingDistribution::poisson(p), 2) == doctest::Approx((pd + 1.0) / (pd + 2.0)).epsilon(1e-12));
    // chi^2_p moments through the generic families: Gamma with tau = 2 is chi^2_p.
    CHECK(compute_rk(MixingDistribution::gamma_shape_rate(p, 2.0), 4) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)compute_rk(gamma, 0), ValidationError);
    CHECK_THROWS_AS((void)compute_rk(gamma, 9), ValidationError);
    // BetaPrime second shape (1 + p + 2 tau) / tau is below 8 for tau = 3, p = 2.
    CHECK_THROWS_AS((void)xi2_moment(MixingDistribution::beta_prime(2, 3.0), 8), UnsupportedError);
}

TEST_CASE("xi^2 sampler moments match the exact moments") {
    const long p = 10;
    Rng rng(2718);
    for (const auto& mix : all_families(p)) {
        CAPTURE(to_string(mix.family));
        const long draws = 200000;
        const auto [m1, se1] = mc_mean(draws, [&] { return sample_xi2(mix, rng); });
        CHECK(std::abs(m1 - xi2_moment(mix, 1)) <= 4.0 * se1);
        const auto [m2, se2] = mc_mean(draws, [&] {
            const double v = sample_xi2(mix, rng);
            return v * v;
        });
        CHECK(std::abs(m2 - xi2_moment(mix, 2)) <= 4.0 * se2);
    }
}

TEST_CASE("mixing parameter validation and names") {
    CHECK_THROWS_AS(MixingDistribution::negative_binomial(5, 1.0).validate(), ValidationError);
    CHECK_THROWS_AS(MixingDistribution::gamma_shape_rate(5, 0.0).validate(), ValidationError);
    CHECK_THROWS_AS(MixingDistribution::chi_squared(0).validate(), ValidationError);
    for (const auto& mix : all_families(3)) {
        CHECK(parse_mixing_family(to_string(mix.family)) == mix.family);
    }
    CHECK_THROWS_AS((void)parse_mixing_family("cauchy"), ValidationError);
    CHECK(parse_shock_family("laplace") == ShockFamily::LaplaceStd);
    CHECK(parse_shock_family("b") == ShockFamily::BetaStd);
    CHECK_THROWS_AS((void)parse_shock_family("t"), ValidationError);
}

TEST_CASE("covariance models") {
    Rng rng(1);
    const SymMatrix t = build_covariance(CovarianceModel::numbered(2, 3), rng);
    Eigen::Matrix3d expected;
    expected << 1.0, 0.1, 0.01, 0.1, 1.0, 0.1, 0.01, 0.1, 1.0;
    CHECK((t.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-15);

    CHECK(build_covariance(CovarianceModel::numbered(4, 6), rng).is_identity());

    const auto spiked = build_covariance_design(CovarianceModel::numbered(1, 10), rng);
    const auto nu = trace_powers(spiked.sigma);
    CHECK(nu.nu1 == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(nu.nu2 == doctest::Approx(5.0 * 25.0 + 5.0).epsilon(1e-12));
    const Eigen::MatrixXd r2 = spiked.root.matrix() * spiked.root.matrix();
    CHECK((r2 - spiked.sigma.matrix()).cwiseAbs().maxCoeff() <= 1e-10);

    const auto decay = build_covariance_design(CovarianceModel::numbered(3, 8), rng);
    double expected_nu1 = 0.0;
    double expected_nu2 = 0.0;
    for (int j = 1; j <= 8; ++j) {
        expected_nu1 += std::pow(j, -0.25);
        expected_nu2 += std::pow(j, -0.5);
    }
    const auto dnu = trace_powers(decay.sigma);
    CHECK(dnu.nu1 == doctest::Approx(expected_nu1).epsilon(1e-12));
    CHECK(dnu.nu2 == doctest::Approx(expected_nu2).epsilon(1e-12));

    CHECK_THROWS_AS((void)CovarianceModel::numbered(5, 10), ValidationError);
}

TEST_CASE("elliptical sampler draw order and radius") {
    // Per row: p normals, then xi^2; x = xi z / ||z|| when Sigma = I.
    const long p = 5;
    const auto mix = MixingDistribution::gamma_shape_rate(p, 5.0);
    Rng rng_a(42);
    const DataMatrix x = elliptical_sample(3, SymMatrix::identity(p), mix, rng_a);
    Rng rng_b(42);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < 3; ++i) {
        Eigen::VectorXd z(p);
        for (long j = 0; j < p; ++j) {
            z(j) = normal(rng_b);
        }
        const double xi2 = sample_xi2(mix, rng_b);
        const Eigen::VectorXd row = std::sqrt(xi2) * z / z.norm();
        CHECK((x.row(i).transpose() - row).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(x.row(i).squaredNorm() == doctest::Approx(xi2).epsilon(1e-12));
    }
}

TEST_CASE("elliptical sampler is equivariant in the root") {
    Rng design(3);
    const auto root = build_covariance_design(CovarianceModel::numbered(2, 6), design).root;
    const auto mix = MixingDistribution::beta_scaled(6, 2.0);
    Rng a(9);
    Rng b(9);
    const DataMatrix x = elliptical_sample(20, root, mix, a);
    const DataMatrix y = elliptical_sample(20, root.scaled(2.5), mix, b);
    CHECK((y - 2.5 * x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("elliptical marginals share the kurtosis 3 r_2") {
    const long p = 4;
    const auto mix = MixingDistribution::gamma_shape_rate(p, 5.0);
    Rng rng(55);
    const DataMatrix x = elliptical_sample(200000, SymMatrix::identity(p), mix, rng);
    const double expected = 3.0 * compute_rk(mix, 2);
    for (long j = 0; j < p; ++j) {
        const auto k = test::column_kurtosis(x.col(j));
        CHECK(std::abs(k.value - expected) <= 4.0 * k.se);
    }
}

TEST_CASE("standardized shocks") {
    Rng rng(8);
    for (auto shock : {ShockFamily::LaplaceStd, ShockFamily::BetaStd}) {
        CAPTURE(to_string(shock));
        const long draws = 400000;
        Eigen::VectorXd v(draws);
        for (long i = 0; i < draws; ++i) {
            v(i) = sample_shock(shock, rng);
        }
        const double mean = v.mean();
        const double var = (v.array() - mean).square().mean();
        CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / draws));
        CHECK(var == doctest::Approx(1.0).epsilon(0.01));
    }
    // Laplace kurtosis is 6.
    Rng r2(10);
    Eigen::VectorXd lap(400000);
    for (Eigen::Index i = 0; i < lap.size(); ++i) {
        lap(i) = sample_shock(ShockFamily::LaplaceStd, r2);
    }
    const auto k = test::column_kurtosis(lap);
    CHECK(std::abs(k.value - 6.0) <= 4.0 * k.se);
}

TEST_CASE("alternative sampler endpoints") {
    const long p = 3;
    Rng rng(12);
    AlternativeModel gauss{SymMatrix::identity(p), 0.0, ShockFamily::LaplaceStd};
    const DataMatrix x0 = alternative_sample(200000, gauss, rng);
    for (long j = 0; j < p; ++j) {
        const auto k = test::column_kurtosis(x0.col(j));
        CHECK(std::abs(k.value - 3.0) <= 4.0 * k.se);
    }
    AlternativeModel laplace{SymMatrix::identity(p), 1.0, ShockFamily::LaplaceStd};
    const DataMatrix x1 = alternative_sample(200000, laplace, rng);
    const auto k1 = test::column_kurtosis(x1.col(0));
    CHECK(std::abs(k1.value - 6.0) <= 4.0 * k1.se);

    AlternativeModel bad{SymMatrix::identity(p), 1.5, ShockFamily::LaplaceStd};
    CHECK_THROWS_AS((void)alternative_sample(10, bad, rng), ValidationError);
}
