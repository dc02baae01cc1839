#include "elltest/estimators.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "elltest/error.hpp"

namespace elltest {

namespace {

// nu1 and nu2 of X^T X / m through whichever Gram matrix is smaller.
std::pair<double, double> trace12(const DataView& x) {
    const double scale = 1.0 / static_cast<double>(x.rows());
    const double nu1 = x.squaredNorm() * scale;
    Eigen::MatrixXd g;
    if (x.cols() > x.rows()) {
        g = Eigen::MatrixXd::Zero(x.rows(), x.rows());
        g.selfadjointView<Eigen::Lower>().rankUpdate(x, scale);
    } else {
        g = Eigen::MatrixXd::Zero(x.cols(), x.cols());
        g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), scale);
    }
    // Only the lower triangle is filled: off-diagonal entries count twice.
    const double diag = g.diagonal().squaredNorm();
    const double lower = g.triangularView<Eigen::StrictlyLower>().toDenseMatrix().squaredNorm();
    return {nu1, diag + 2.0 * lower};
}

void require_rows(const DataView& x, Eigen::Index min_rows, const char* op) {
    if (x.rows() < min_rows || x.cols() < 1) {
        throw ValidationError(std::string(op) + ": need at least " + std::to_string(min_rows) +
                              " rows and one column, got " + std::to_string(x.rows()) + "x" +
                              std::to_string(x.cols()));
    }
}

}  // namespace

double guarded_ratio(double num, double den) noexcept {
    return den == 0.0 ? 1.0 : num / den;
}

double kappa_tilde(const DataView& x_half) {
    require_rows(x_half, 1, "kappa_tilde");
    const double m = static_cast<double>(x_half.rows());
    double sum = 0.0;
    for (Eigen::Index j = 0; j < x_half.cols(); ++j) {
        const auto sq = x_half.col(j).array().square();
        const double m2 = sq.sum() / m;
        const double m4 = sq.square().sum() / m;
        sum += guarded_ratio(m4, m2 * m2);
    }
    return sum / static_cast<double>(x_half.cols());
}

double varsigma_check(std::span<const double> q) {
    if (q.size() < 2) {
        throw ValidationError("varsigma_check: need at least two values");
    }
    const Eigen::Map<const Eigen::VectorXd> v(q.data(), static_cast<Eigen::Index>(q.size()));
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(q.size() - 1);
}

double kappa_check(const DataView& x_half, long n) {
    require_rows(x_half, 2, "kappa_check");
    if (n != 2 * x_half.rows()) {
        throw ValidationError("kappa_check: half-sample has " + std::to_string(x_half.rows()) +
                              " rows but n = " + std::to_string(n));
    }
    const auto [nu1, nu2] = trace12(x_half);
    const Eigen::VectorXd q = x_half.rowwise().squaredNorm();
    const double vs = varsigma_check(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
    const double nu1_sq = nu1 * nu1;
    return guarded_ratio(3.0 * (vs + nu1_sq), nu1_sq + 2.0 * (nu2 - (2.0 / static_cast<double>(n)) * nu1_sq));
}

double t_statistic(double kappa_tilde, double kappa_check, long n, long p) {
    if (n < 1 || p < 1) {
        throw ValidationError("t_statistic: n and p must be positive");
    }
    const double nd = static_cast<double>(n);
    return std::sqrt(static_cast<double>(p) * nd / 2.0) * ((kappa_tilde - kappa_check) / 3.0 + 4.0 / nd);
}

SampleMoments sample_moments(const DataView& x) {
    require_rows(x, 1, "sample_moments");
    SampleMoments m;
    m.n = static_cast<long>(x.rows());
    m.p = static_cast<long>(x.cols());

    const SymMatrix sigma_hat = SymMatrix::from_gram(x);
    m.nu = trace_powers(sigma_hat, x);
    for (Eigen::Index j = 0; j < sigma_hat.dim(); ++j) {
        if (!(sigma_hat(j, j) > 0.0)) {
            m.degenerate = true;
            m.degenerate_column = static_cast<long>(j);
            break;
        }
    }
    if (!m.degenerate) {
        const SymMatrix r = correlation_matrix(sigma_hat);
        m.corr_frob2 = entrywise_norm_pow(r, 2);
        m.corr_frob4 = entrywise_norm_pow(r, 4);
    }

    const Eigen::ArrayXd q = x.rowwise().squaredNorm().array();
    m.mean_norm6 = q.cube().mean();
    m.mean_norm8 = q.square().square().mean();
    if (q.size() >= 2) {
        m.varsigma_hat = varsigma_check(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
    }
    return m;
}

double beta_hat(const SampleMoments& m) {
    const double n = static_cast<double>(m.n);
    const double nu1 = m.nu.nu1;
    const double nu1_4 = nu1 * nu1 * nu1 * nu1;
    const double den = g_k(m.nu, 4) - (12.0 / n) * (nu1_4 + 2.0 * nu1 * nu1 * m.nu.nu2 - nu1_4 / n);
    return 1.0 - guarded_ratio(m.mean_norm8, den);
}

double gamma_hat(const SampleMoments& m) {
    const double n = static_cast<double>(m.n);
    const double nu1 = m.nu.nu1;
    const double nu2_corrected = m.nu.nu2 - nu1 * nu1 / n;
    const double second = guarded_ratio(m.varsigma_hat - 2.0 * nu2_corrected, g_k(m.nu, 2) - 2.0 * nu1 * nu1 / n);
    const double third = guarded_ratio(m.mean_norm6, 0.5 * g_k(m.nu, 3) - 3.0 * nu1 * nu1 * nu1 / n);
    return 1.0 + second - third;
}

double beta_hat(const DataView& x) {
    return beta_hat(sample_moments(x));
}

double gamma_hat(const DataView& x) {
    return gamma_hat(sample_moments(x));
}

double correction_threshold(long p) {
    if (p < 1) {
        throw ValidationError("correction_threshold: p must be positive");
    }
    const double pd = static_cast<double>(p);
    return std::pow(pd, -0.75) * std::log(pd);
}

Sigma1Estimate sigma1_sq_hat(const SampleMoments& m) {
    if (m.n < 2) {
        throw ValidationError("sigma1_sq_hat: need n >= 2");
    }
    if (m.degenerate) {
        throw DegenerateCovariateError(
            "covariate " + std::to_string(m.degenerate_column) + " is identically zero", m.degenerate_column);
    }
    Sigma1Estimate out;
    out.beta_hat = beta_hat(m);
    out.gamma_hat = gamma_hat(m);
    out.t_p = correction_threshold(m.p);
    out.c_hat = out.beta_hat * m.corr_frob4 -
                3.0 * threshold(1.0 - out.beta_hat + out.gamma_hat, out.t_p) * m.corr_frob2;
    out.sigma1_sq = 8.0 / (3.0 * static_cast<double>(m.p)) * (m.corr_frob4 - out.c_hat);
    return out;
}

Sigma1Estimate sigma1_sq_hat(const DataView& x) {
    require_rows(x, 2, "sigma1_sq_hat");
    return sigma1_sq_hat(sample_moments(x));
}

double sigma2_sq_hat(const SampleMoments& m) {
    const double n = static_cast<double>(m.n);
    const double nu1_sq = m.nu.nu1 * m.nu.nu1;
    const double nu2_corrected = m.nu.nu2 - nu1_sq / n;
    const double den = nu1_sq + 2.0 * nu2_corrected;
    return guarded_ratio(8.0 * static_cast<double>(m.p) * (2.0 * m.nu.nu4 + nu2_corrected * nu2_corrected),
                         den * den);
}

double sigma2_sq_hat(const DataView& x) {
    return sigma2_sq_hat(sample_moments(x));
}

VarianceEstimate variance_estimate(const SampleMoments& m) {
    const Sigma1Estimate s1 = sigma1_sq_hat(m);
    VarianceEstimate v;
    v.sigma1_sq = s1.sigma1_sq;
    v.sigma2_sq = sigma2_sq_hat(m);
    v.c_hat = s1.c_hat;
    v.beta_hat = s1.beta_hat;
    v.gamma_hat = s1.gamma_hat;
    v.t_p = s1.t_p;
    return v;
}

VarianceEstimate variance_estimate(const DataView& x) {
    require_rows(x, 2, "variance_estimate");
    return variance_estimate(sample_moments(x));
}

PopulationVariance sigma_sq_population(const SymMatrix& sigma) {
    if (sigma.dim() < 1) {
        throw ValidationError("sigma_sq_population: empty matrix");
    }
    const double p = static_cast<double>(sigma.dim());
    const SymMatrix r = correlation_matrix(sigma);
    const SpectralSummary nu = trace_powers(sigma);
    const double den = nu.nu1 * nu.nu1 + 2.0 * nu.nu2;
    PopulationVariance out;
    out.sigma1_sq = 8.0 * entrywise_norm_pow(r, 4) / (3.0 * p);
    out.sigma2_sq = guarded_ratio(8.0 * p * (2.0 * nu.nu4 + nu.nu2 * nu.nu2), den * den);
    return out;
}

double population_kappa(const SymMatrix& sigma, double varsigma_sq) {
    if (!(varsigma_sq >= 0.0)) {
        throw ValidationError("population_kappa: variance of ||x||^2 must be nonnegative");
    }
    const double nu1 = sigma.matrix().trace();
    const double nu2 = sigma.matrix().squaredNorm();
    return guarded_ratio(3.0 * (varsigma_sq + nu1 * nu1), nu1 * nu1 + 2.0 * nu2);
}

}  // namespace elltest
