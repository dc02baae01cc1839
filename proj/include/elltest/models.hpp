#pragma once

#include <string>
#include <string_view>

#include "elltest/numkit.hpp"
#include "elltest/rng.hpp"

namespace elltest {

enum class MixingFamily {
    ChiSquared,
    Poisson,
    NegativeBinomialScaled,
    BetaScaled,
    GammaShapeRate,
    BetaPrime,
    LogNormal,
    GammaSquaredScaled,
};

/**
 * Law of the squared radius xi^2 of an elliptical vector, parameterized so
 * that E(xi^2) = p for every family:
 *
 *   ChiSquared              chi^2_p
 *   Poisson                 Poisson(p)
 *   NegativeBinomialScaled  (1 - tau) * (trials until the p-th success, success prob 1 - tau)
 *   BetaScaled              (p + 2b) * Beta(p/2, b)
 *   GammaShapeRate          Gamma(shape p/tau, rate 1/tau)
 *   BetaPrime               BetaPrime(p(1+p+tau)/tau, (1+p+2tau)/tau)
 *   LogNormal               exp(N(log p - v/2, v)), v = log(1 + tau/p)
 *   GammaSquaredScaled      Gamma(p, 1)^2 / (p + 1)
 */
struct MixingDistribution {
    MixingFamily family = MixingFamily::ChiSquared;
    double tau = 0.0;
    double b = 0.0;
    long p = 1;

    static MixingDistribution chi_squared(long p);
    static MixingDistribution poisson(long p);
    static MixingDistribution negative_binomial(long p, double tau);
    static MixingDistribution beta_scaled(long p, double b);
    static MixingDistribution gamma_shape_rate(long p, double tau);
    static MixingDistribution beta_prime(long p, double tau);
    static MixingDistribution log_normal(long p, double tau);
    static MixingDistribution gamma_squared_scaled(long p);

    /// Throws ValidationError if the parameters are outside the family's range.
    void validate() const;
};

[[nodiscard]] std::string_view to_string(MixingFamily family);
[[nodiscard]] MixingFamily parse_mixing_family(std::string_view name);

/// One draw of xi^2.
[[nodiscard]] double sample_xi2(const MixingDistribution& mix, Rng& rng);

/// Exact raw moment E(xi^{2k}), k = 1..8. Throws UnsupportedError when the
/// moment does not exist (BetaPrime with too light a second shape).
[[nodiscard]] double xi2_moment(const MixingDistribution& mix, int k);

/// r_k = E(xi^{2k}) / E(||z||^{2k}) with E(||z||^{2k}) = prod_{l<k} (p + 2l).
[[nodiscard]] double compute_rk(const MixingDistribution& mix, int k);

/// Exact var((xi^2 - p) / sqrt(p)) at the law's own p.
[[nodiscard]] double standardized_xi2_variance(const MixingDistribution& mix);

enum class CovarianceKind { SpikedGeneric, Toeplitz, DecayGeneric, Identity };

struct CovarianceModel {
    CovarianceKind kind = CovarianceKind::Identity;
    long p = 1;
    double rho = 0.1;
    long spike_count = 5;
    double spike_value = 5.0;
    double decay_exponent = 0.25;

    /// Numbered covariance models: 1 spiked, 2 Toeplitz, 3 decaying, 4 identity.
    static CovarianceModel numbered(int model, long p);

    void validate() const;
};

/// Sigma and its symmetric square root, built from the same eigenbasis.
struct CovarianceDesign {
    SymMatrix sigma;
    SymMatrix root;
};

/// Builds Sigma (and Sigma^{1/2}). Spiked and decaying models draw a Haar
/// eigenbasis from rng; the others consume no randomness.
[[nodiscard]] CovarianceDesign build_covariance_design(const CovarianceModel& model, Rng& rng);
[[nodiscard]] SymMatrix build_covariance(const CovarianceModel& model, Rng& rng);

/// n rows of xi * Sigma^{1/2} z / ||z||_2. Per row the draws are p normals
/// (z) followed by one xi^2; a zero z is redrawn.
[[nodiscard]] DataMatrix elliptical_sample(long n, const SymMatrix& sigma_root,
                                           const MixingDistribution& mix, Rng& rng);

enum class ShockFamily {
    LaplaceStd,  ///< Laplace(0, 1) / sqrt(2)
    BetaStd,     ///< (Beta(2, 3/2) - 4/7) / sqrt(8/147)
};

[[nodiscard]] std::string_view to_string(ShockFamily shock);
[[nodiscard]] ShockFamily parse_shock_family(std::string_view name);

/// Standardized (mean 0, variance 1) shock draw.
[[nodiscard]] double sample_shock(ShockFamily shock, Rng& rng);

struct AlternativeModel {
    SymMatrix sigma_root;
    double h = 0.0;
    ShockFamily shock = ShockFamily::LaplaceStd;
};

/// n rows of Sigma^{1/2} s with s_j = sqrt(1-h) z_j + sqrt(h) y_j. Per row the
/// draws are p normals followed by p shocks. h = 0 gives N(0, Sigma).
[[nodiscard]] DataMatrix alternative_sample(long n, const AlternativeModel& alt, Rng& rng);

}  // namespace elltest
