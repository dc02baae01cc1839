#include "elltest/models.hpp"

#include <array>
#include <cmath>
#include <string>

#include "elltest/error.hpp"

namespace elltest {

namespace {

constexpr int kMaxMomentOrder = 8;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double gamma_draw(double shape, Rng& rng) {
    return std::gamma_distribution<double>(shape, 1.0)(rng);
}

// Stirling numbers of the second kind S(k, j), 0 <= j <= k <= 8.
const std::array<std::array<double, kMaxMomentOrder + 1>, kMaxMomentOrder + 1>& stirling2() {
    static const auto table = [] {
        std::array<std::array<double, kMaxMomentOrder + 1>, kMaxMomentOrder + 1> s{};
        s[0][0] = 1.0;
        for (int k = 1; k <= kMaxMomentOrder; ++k) {
            for (int j = 1; j <= k; ++j) {
                s[k][j] = j * s[k - 1][j] + s[k - 1][j - 1];
            }
        }
        return s;
    }();
    return table;
}

// Raw moment from factorial moments: E(Y^k) = sum_j S(k, j) E(Y^{(j)}).
template <typename FactorialMoment>
double raw_from_factorial(int k, FactorialMoment&& factorial_moment) {
    const auto& s = stirling2();
    double sum = 0.0;
    for (int j = 1; j <= k; ++j) {
        sum += s[k][j] * factorial_moment(j);
    }
    return k == 0 ? 1.0 : sum;
}

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

double sphere_moment(long p, int k) {
    double m = 1.0;
    for (int l = 0; l < k; ++l) {
        m *= static_cast<double>(p) + 2.0 * l;
    }
    return m;
}

}  // namespace

MixingDistribution MixingDistribution::chi_squared(long p) {
    return {MixingFamily::ChiSquared, 2.0, 0.0, p};
}

MixingDistribution MixingDistribution::poisson(long p) {
    return {MixingFamily::Poisson, 1.0, 0.0, p};
}

MixingDistribution MixingDistribution::negative_binomial(long p, double tau) {
    return {MixingFamily::NegativeBinomialScaled, tau, 0.0, p};
}

MixingDistribution MixingDistribution::beta_scaled(long p, double b) {
    return {MixingFamily::BetaScaled, 0.0, b, p};
}

MixingDistribution MixingDistribution::gamma_shape_rate(long p, double tau) {
    return {MixingFamily::GammaShapeRate, tau, 0.0, p};
}

MixingDistribution MixingDistribution::beta_prime(long p, double tau) {
    return {MixingFamily::BetaPrime, tau, 0.0, p};
}

MixingDistribution MixingDistribution::log_normal(long p, double tau) {
    return {MixingFamily::LogNormal, tau, 0.0, p};
}

MixingDistribution MixingDistribution::gamma_squared_scaled(long p) {
    return {MixingFamily::GammaSquaredScaled, 0.0, 0.0, p};
}

void MixingDistribution::validate() const {
    if (p < 1) {
        throw ValidationError("mixing distribution: p must be positive");
    }
    switch (family) {
        case MixingFamily::ChiSquared:
        case MixingFamily::Poisson:
        case MixingFamily::GammaSquaredScaled:
            return;
        case MixingFamily::NegativeBinomialScaled:
            if (!(tau > 0.0 && tau < 1.0)) {
                throw ValidationError("NegativeBinomialScaled: tau must lie in (0, 1)");
            }
            return;
        case MixingFamily::BetaScaled:
            if (!(b > 0.0)) {
                throw ValidationError("BetaScaled: b must be positive");
            }
            return;
        case MixingFamily::GammaShapeRate:
        case MixingFamily::BetaPrime:
        case MixingFamily::LogNormal:
            if (!(tau > 0.0) || !std::isfinite(tau)) {
                throw ValidationError(std::string(to_string(family)) + ": tau must be positive");
            }
            return;
    }
}

std::string_view to_string(MixingFamily family) {
    switch (family) {
        case MixingFamily::ChiSquared: return "chisq";
        case MixingFamily::Poisson: return "poisson";
        case MixingFamily::NegativeBinomialScaled: return "negbin";
        case MixingFamily::BetaScaled: return "beta";
        case MixingFamily::GammaShapeRate: return "gamma";
        case MixingFamily::BetaPrime: return "betaprime";
        case MixingFamily::LogNormal: return "lognormal";
        case MixingFamily::GammaSquaredScaled: return "gamma2";
    }
    return "?";
}

MixingFamily parse_mixing_family(std::string_view name) {
    for (auto f : {MixingFamily::ChiSquared, MixingFamily::Poisson, MixingFamily::NegativeBinomialScaled,
                   MixingFamily::BetaScaled, MixingFamily::GammaShapeRate, MixingFamily::BetaPrime,
                   MixingFamily::LogNormal, MixingFamily::GammaSquaredScaled}) {
        if (name == to_string(f)) {
            return f;
        }
    }
    throw ValidationError("unknown mixing family '" + std::string(name) + "'");
}

double sample_xi2(const MixingDistribution& mix, Rng& rng) {
    const double p = static_cast<double>(mix.p);
    switch (mix.family) {
        case MixingFamily::ChiSquared:
            return 2.0 * gamma_draw(0.5 * p, rng);
        case MixingFamily::Poisson:
            return static_cast<double>(std::poisson_distribution<long long>(p)(rng));
        case MixingFamily::NegativeBinomialScaled: {
            if (!(mix.tau > 0.0 && mix.tau < 1.0)) {
                throw ValidationError("NegativeBinomialScaled: tau must lie in (0, 1)");
            }
            // std:: counts failures before the p-th success; add p for total trials.
            const auto failures =
                std::negative_binomial_distribution<long long>(mix.p, 1.0 - mix.tau)(rng);
            return (1.0 - mix.tau) * (static_cast<double>(failures) + p);
        }
        case MixingFamily::BetaScaled: {
            if (!(mix.b > 0.0)) {
                throw ValidationError("BetaScaled: b must be positive");
            }
            const double g1 = gamma_draw(0.5 * p, rng);
            const double g2 = gamma_draw(mix.b, rng);
            return (p + 2.0 * mix.b) * g1 / (g1 + g2);
        }
        case MixingFamily::GammaShapeRate:
            mix.validate();
            return mix.tau * gamma_draw(p / mix.tau, rng);
        case MixingFamily::BetaPrime: {
            mix.validate();
            const double a = p * (1.0 + p + mix.tau) / mix.tau;
            const double b = (1.0 + p + 2.0 * mix.tau) / mix.tau;
            const double g1 = gamma_draw(a, rng);
            const double g2 = gamma_draw(b, rng);
            return g1 / g2;
        }
        case MixingFamily::LogNormal: {
            mix.validate();
            const double v = std::log1p(mix.tau / p);
            return std::lognormal_distribution<double>(std::log(p) - 0.5 * v, std::sqrt(v))(rng);
        }
        case MixingFamily::GammaSquaredScaled: {
            const double g = gamma_draw(p, rng);
            return g * g / (p + 1.0);
        }
    }
    throw ValidationError("sample_xi2: unknown family");
}

double xi2_moment(const MixingDistribution& mix, int k) {
    mix.validate();
    if (k < 1 || k > kMaxMomentOrder) {
        throw ValidationError("xi2_moment: k must lie in 1..8, got " + std::to_string(k));
    }
    const double p = static_cast<double>(mix.p);
    switch (mix.family) {
        case MixingFamily::ChiSquared:
            return sphere_moment(mix.p, k);
        case MixingFamily::Poisson:
            return raw_from_factorial(k, [p](int j) { return std::pow(p, j); });
        case MixingFamily::NegativeBinomialScaled: {
            // xi^2 = (1 - tau)(p + F), F failures before the p-th success:
            // E(F^{(j)}) = p(p+1)...(p+j-1) (tau / (1 - tau))^j.
            const double odds = mix.tau / (1.0 - mix.tau);
            auto failure_raw = [&](int i) {
                return raw_from_factorial(i, [&](int j) {
                    double rising = 1.0;
                    for (int l = 0; l < j; ++l) {
                        rising *= p + l;
                    }
                    return rising * std::pow(odds, j);
                });
            };
            double total = 0.0;
            for (int i = 0; i <= k; ++i) {
                total += binomial(k, i) * std::pow(p, k - i) * failure_raw(i);
            }
            return std::pow(1.0 - mix.tau, k) * total;
        }
        case MixingFamily::BetaScaled: {
            const double a = 0.5 * p;
            double m = std::pow(p + 2.0 * mix.b, k);
            for (int l = 0; l < k; ++l) {
                m *= (a + l) / (a + mix.b + l);
            }
            return m;
        }
        case MixingFamily::GammaShapeRate: {
            double m = 1.0;
            for (int l = 0; l < k; ++l) {
                m *= p + l * mix.tau;
            }
            return m;
        }
        case MixingFamily::BetaPrime: {
            const double a = p * (1.0 + p + mix.tau) / mix.tau;
            const double b = (1.0 + p + 2.0 * mix.tau) / mix.tau;
            if (!(b > k)) {
                throw UnsupportedError("BetaPrime: moment of order " + std::to_string(k) +
                                       " does not exist for these parameters");
            }
            double m = 1.0;
            for (int l = 1; l <= k; ++l) {
                m *= (a + l - 1.0) / (b - l);
            }
            return m;
        }
        case MixingFamily::LogNormal: {
            const double v = std::log1p(mix.tau / p);
            const double mu = std::log(p) - 0.5 * v;
            return std::exp(k * mu + 0.5 * k * k * v);
        }
        case MixingFamily::GammaSquaredScaled: {
            double m = 1.0;
            for (int l = 0; l < 2 * k; ++l) {
                m *= p + l;
            }
            return m / std::pow(p + 1.0, k);
        }
    }
    throw UnsupportedError("xi2_moment: unsupported family");
}

double compute_rk(const MixingDistribution& mix, int k) {
    if (mix.family == MixingFamily::ChiSquared) {
        if (k < 1 || k > kMaxMomentOrder) {
            throw ValidationError("compute_rk: k must lie in 1..8, got " + std::to_string(k));
        }
        return 1.0;
    }
    return xi2_moment(mix, k) / sphere_moment(mix.p, k);
}

double standardized_xi2_variance(const MixingDistribution& mix) {
    const double p = static_cast<double>(mix.p);
    return (xi2_moment(mix, 2) - p * p) / p;
}

CovarianceModel CovarianceModel::numbered(int model, long p) {
    CovarianceModel m;
    m.p = p;
    switch (model) {
        case 1: m.kind = CovarianceKind::SpikedGeneric; break;
        case 2: m.kind = CovarianceKind::Toeplitz; break;
        case 3: m.kind = CovarianceKind::DecayGeneric; break;
        case 4: m.kind = CovarianceKind::Identity; break;
        default:
            throw ValidationError("covariance model must be 1..4, got " + std::to_string(model));
    }
    return m;
}

void CovarianceModel::validate() const {
    if (p < 1) {
        throw ValidationError("covariance model: p must be positive");
    }
    if (kind == CovarianceKind::Toeplitz && !(std::abs(rho) < 1.0)) {
        throw ValidationError("Toeplitz covariance: |rho| must be below 1");
    }
    if (kind == CovarianceKind::SpikedGeneric && (spike_count < 0 || !(spike_value > 0.0))) {
        throw ValidationError("spiked covariance: need spike_count >= 0 and spike_value > 0");
    }
}

CovarianceDesign build_covariance_design(const CovarianceModel& model, Rng& rng) {
    model.validate();
    const Eigen::Index p = model.p;
    switch (model.kind) {
        case CovarianceKind::Identity:
            return {SymMatrix::identity(p), SymMatrix::identity(p)};
        case CovarianceKind::Toeplitz: {
            Eigen::MatrixXd s(p, p);
            for (Eigen::Index i = 0; i < p; ++i) {
                for (Eigen::Index j = 0; j < p; ++j) {
                    s(i, j) = std::pow(model.rho, static_cast<double>(std::abs(i - j)));
                }
            }
            SymMatrix sigma(std::move(s));
            SymMatrix root = sym_sqrt(sigma);
            return {std::move(sigma), std::move(root)};
        }
        case CovarianceKind::SpikedGeneric:
        case CovarianceKind::DecayGeneric: {
            Eigen::VectorXd lambda(p);
            for (Eigen::Index j = 0; j < p; ++j) {
                if (model.kind == CovarianceKind::SpikedGeneric) {
                    lambda(j) = j < model.spike_count ? model.spike_value : 1.0;
                } else {
                    lambda(j) = std::pow(static_cast<double>(j + 1), -model.decay_exponent);
                }
            }
            const Eigen::MatrixXd q = haar_orthogonal(p, rng);
            Eigen::MatrixXd s = q * lambda.asDiagonal() * q.transpose();
            Eigen::MatrixXd a = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
            s = 0.5 * (s + s.transpose()).eval();
            a = 0.5 * (a + a.transpose()).eval();
            return {SymMatrix(std::move(s)), SymMatrix(std::move(a))};
        }
    }
    throw ValidationError("build_covariance: unknown kind");
}

SymMatrix build_covariance(const CovarianceModel& model, Rng& rng) {
    return build_covariance_design(model, rng).sigma;
}

DataMatrix elliptical_sample(long n, const SymMatrix& sigma_root, const MixingDistribution& mix,
                             Rng& rng) {
    if (n < 1) {
        throw ValidationError("elliptical_sample: n must be positive");
    }
    mix.validate();
    if (mix.p != sigma_root.dim()) {
        throw ValidationError("elliptical_sample: mixing law is for p = " + std::to_string(mix.p) +
                              " but Sigma^{1/2} is " + std::to_string(sigma_root.dim()) + "-dimensional");
    }
    const Eigen::Index p = sigma_root.dim();
    RowMajorMatrix z(n, p);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < n; ++i) {
        double norm2 = 0.0;
        do {
            for (Eigen::Index j = 0; j < p; ++j) {
                z(i, j) = normal(rng);
            }
            norm2 = z.row(i).squaredNorm();
        } while (norm2 == 0.0);
        const double xi = std::sqrt(sample_xi2(mix, rng));
        z.row(i) *= xi / std::sqrt(norm2);
    }
    if (sigma_root.is_identity()) {
        return DataMatrix(z);
    }
    return z * sigma_root.matrix();
}

std::string_view to_string(ShockFamily shock) {
    switch (shock) {
        case ShockFamily::LaplaceStd: return "laplace";
        case ShockFamily::BetaStd: return "beta";
    }
    return "?";
}

ShockFamily parse_shock_family(std::string_view name) {
    if (name == "laplace" || name == "a") {
        return ShockFamily::LaplaceStd;
    }
    if (name == "beta" || name == "b") {
        return ShockFamily::BetaStd;
    }
    throw ValidationError("unknown shock family '" + std::string(name) + "'");
}

double sample_shock(ShockFamily shock, Rng& rng) {
    switch (shock) {
        case ShockFamily::LaplaceStd: {
            // Inverse CDF of Laplace(0, 1), then scale to unit variance.
            const double u = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
            const double mag = -std::log1p(-2.0 * std::abs(u));
            return (u < 0.0 ? -mag : mag) / std::sqrt(2.0);
        }
        case ShockFamily::BetaStd: {
            const double g1 = gamma_draw(2.0, rng);
            const double g2 = gamma_draw(1.5, rng);
            return (g1 / (g1 + g2) - 4.0 / 7.0) / std::sqrt(8.0 / 147.0);
        }
    }
    throw ValidationError("sample_shock: unknown family");
}

DataMatrix alternative_sample(long n, const AlternativeModel& alt, Rng& rng) {
    if (n < 1) {
        throw ValidationError("alternative_sample: n must be positive");
    }
    if (!(alt.h >= 0.0 && alt.h <= 1.0)) {
        throw ValidationError("alternative_sample: h must lie in [0, 1]");
    }
    const Eigen::Index p = alt.sigma_root.dim();
    const double wz = std::sqrt(1.0 - alt.h);
    const double wy = std::sqrt(alt.h);
    RowMajorMatrix s(n, p);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            s(i, j) = normal(rng);
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            const double y = sample_shock(alt.shock, rng);
            s(i, j) = wz * s(i, j) + wy * y;
        }
    }
    if (alt.sigma_root.is_identity()) {
        return DataMatrix(s);
    }
    return s * alt.sigma_root.matrix();
}

}  // namespace elltest
