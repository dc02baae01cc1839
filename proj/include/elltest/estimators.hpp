#pragma once

#include <span>

#include "elltest/numkit.hpp"

namespace elltest {

using DataView = Eigen::Ref<const DataMatrix>;

/// num / den, or 1 when den == 0. Every ratio in the test statistic and its
/// variance estimate goes through this.
[[nodiscard]] double guarded_ratio(double num, double den) noexcept;

/// Average over columns of mean(x^4) / mean(x^2)^2, evaluated on the rows given.
[[nodiscard]] double kappa_tilde(const DataView& x_half);

/// Unbiased sample variance of q (denominator m - 1). Algebraically equal to
/// the pairwise U-statistic sum_{i<i'} (q_i - q_i')^2 / (2 C(m, 2)).
[[nodiscard]] double varsigma_check(std::span<const double> q);

/// Coordinate-free kurtosis estimate from the rows of the second half-sample.
/// n is the full sample size (x_half has n / 2 rows).
[[nodiscard]] double kappa_check(const DataView& x_half, long n);

/// sqrt(pn/2) ((kappa_tilde - kappa_check) / 3 + 4/n).
[[nodiscard]] double t_statistic(double kappa_tilde, double kappa_check, long n, long p);

/// Full-sample quantities shared by the variance estimators: trace powers of
/// Sigma_hat = X^T X / n, the correlation norms, and moments of ||x_i||^2.
struct SampleMoments {
    long n = 0;
    long p = 0;
    SpectralSummary nu;           ///< trace powers of Sigma_hat
    double corr_frob2 = 0.0;      ///< ||R_hat||_2^2
    double corr_frob4 = 0.0;      ///< ||R_hat||_4^4
    bool degenerate = false;      ///< some Sigma_hat_jj == 0; correlation norms unset
    long degenerate_column = -1;
    double mean_norm6 = 0.0;      ///< mean ||x_i||^6
    double mean_norm8 = 0.0;      ///< mean ||x_i||^8
    double varsigma_hat = 0.0;    ///< unbiased variance of ||x_i||^2
};

[[nodiscard]] SampleMoments sample_moments(const DataView& x);

[[nodiscard]] double beta_hat(const SampleMoments& m);
[[nodiscard]] double gamma_hat(const SampleMoments& m);
[[nodiscard]] double beta_hat(const DataView& x);
[[nodiscard]] double gamma_hat(const DataView& x);

struct Sigma1Estimate {
    double sigma1_sq = 0.0;
    double c_hat = 0.0;
    double beta_hat = 0.0;
    double gamma_hat = 0.0;
    double t_p = 0.0;
};

/// t_p = p^{-3/4} log p.
[[nodiscard]] double correction_threshold(long p);

/// Throws DegenerateCovariateError if a column of X is identically zero.
[[nodiscard]] Sigma1Estimate sigma1_sq_hat(const SampleMoments& m);
[[nodiscard]] Sigma1Estimate sigma1_sq_hat(const DataView& x);

[[nodiscard]] double sigma2_sq_hat(const SampleMoments& m);
[[nodiscard]] double sigma2_sq_hat(const DataView& x);

struct VarianceEstimate {
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
    double c_hat = 0.0;
    double beta_hat = 0.0;
    double gamma_hat = 0.0;
    double t_p = 0.0;

    [[nodiscard]] double total() const noexcept { return sigma1_sq + sigma2_sq; }
};

[[nodiscard]] VarianceEstimate variance_estimate(const SampleMoments& m);
[[nodiscard]] VarianceEstimate variance_estimate(const DataView& x);

struct PopulationVariance {
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
};

/// sigma1^2 = 8 ||R||_4^4 / (3p), sigma2^2 = 8p(2 nu4 + nu2^2) / (nu1^2 + 2 nu2)^2.
[[nodiscard]] PopulationVariance sigma_sq_population(const SymMatrix& sigma);

/// 3(varsigma^2 + nu1^2) / (nu1^2 + 2 nu2) for var(||x||^2) = varsigma^2.
[[nodiscard]] double population_kappa(const SymMatrix& sigma, double varsigma_sq);

}  // namespace elltest
