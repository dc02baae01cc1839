#pragma once

#include <Eigen/Dense>

#include "elltest/rng.hpp"

namespace elltest {

/// n x p observation matrix; rows are observations.
using DataMatrix = Eigen::MatrixXd;

/**
 * Dense symmetric p x p matrix.
 *
 * Construction from an arbitrary matrix validates squareness, finiteness and
 * symmetry (max |A - A^T| <= 1e-12 * max |A|). Use from_gram() for matrices
 * built as X^T X / m, which are symmetric by construction.
 */
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Eigen::MatrixXd entries);

    static SymMatrix identity(Eigen::Index p);
    static SymMatrix diagonal(const Eigen::VectorXd& d);
    /// X^T X / m for the m rows of X, exactly symmetric.
    static SymMatrix from_gram(const Eigen::Ref<const DataMatrix>& x);

    [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return m_; }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    [[nodiscard]] bool is_identity() const;

    [[nodiscard]] SymMatrix scaled(double c) const;

private:
    struct Trusted {};
    SymMatrix(Eigen::MatrixXd entries, Trusted) : m_(std::move(entries)) {}

    Eigen::MatrixXd m_;
};

/// Trace powers nu_k = tr(S^k), k = 1..4, plus entrywise norms of S.
struct SpectralSummary {
    double nu1 = 0.0;
    double nu2 = 0.0;
    double nu3 = 0.0;
    double nu4 = 0.0;
    double frob2 = 0.0;  ///< sum_ij S_ij^2
    double frob4 = 0.0;  ///< sum_ij S_ij^4
};

/// Exact trace powers via two symmetric products; no eigendecomposition.
[[nodiscard]] SpectralSummary trace_powers(const SymMatrix& s);

/// Same as above for S = X^T X / m. When p > m the powers are taken from the
/// m x m Gram matrix X X^T / m, which shares the nonzero spectrum.
[[nodiscard]] SpectralSummary trace_powers(const SymMatrix& s,
                                           const Eigen::Ref<const DataMatrix>& factor);

/// Trace powers only, from the factor alone (frob2/frob4 left at zero).
/// Picks the smaller of X^T X / m and X X^T / m.
[[nodiscard]] SpectralSummary factor_trace_powers(const Eigen::Ref<const DataMatrix>& factor);

/// sum_ij |M_ij|^q for q in {2, 4}.
[[nodiscard]] double entrywise_norm_pow(const SymMatrix& m, int q);

/// R_ij = S_ij / sqrt(S_ii S_jj). Throws DegenerateCovariateError on a
/// non-positive diagonal entry.
[[nodiscard]] SymMatrix correlation_matrix(const SymMatrix& s);

/// E((z^T S z)^k) for standard normal z, k in {2, 3, 4}, from trace powers.
[[nodiscard]] double g_k(const SpectralSummary& nu, int k);
[[nodiscard]] double g_k(const SymMatrix& s, int k);

/// sgn(x) * min(|x|, t).
[[nodiscard]] double threshold(double x, double t);

/// Symmetric PSD square root. Eigenvalues below 1e-12 * lambda_max are
/// clamped to zero; anything below -1e-8 * lambda_max throws NotPsdError.
[[nodiscard]] SymMatrix sym_sqrt(const SymMatrix& s);

/// Haar-distributed p x p orthogonal matrix (QR of a Gaussian matrix with
/// the signs of diag(R) folded into Q).
[[nodiscard]] Eigen::MatrixXd haar_orthogonal(Eigen::Index p, Rng& rng);

[[nodiscard]] double normal_cdf(double z);
/// Upper tail 1 - Phi(z), computed without cancellation.
[[nodiscard]] double normal_sf(double z);
/// Inverse of normal_cdf on (0, 1); DomainError outside.
[[nodiscard]] double normal_quantile(double u);

}  // namespace elltest
