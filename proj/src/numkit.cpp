#include "elltest/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "elltest/error.hpp"

namespace elltest {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdClamp = 1e-12;
constexpr double kPsdReject = 1e-8;

Eigen::MatrixXd gram_of_rows(const Eigen::Ref<const DataMatrix>& x, double scale) {
    // scale * X^T X, filled from the lower triangle so the result is exactly symmetric.
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
    s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), scale);
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
    return s;
}

Eigen::MatrixXd gram_of_cols(const Eigen::Ref<const DataMatrix>& x, double scale) {
    const Eigen::Index m = x.rows();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    g.selfadjointView<Eigen::Lower>().rankUpdate(x, scale);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

void fill_powers(const Eigen::MatrixXd& s, SpectralSummary& out) {
    const Eigen::MatrixXd s2 = s.selfadjointView<Eigen::Lower>() * s;
    out.nu1 = s.trace();
    out.nu2 = s.squaredNorm();
    out.nu3 = s2.cwiseProduct(s).sum();
    out.nu4 = s2.squaredNorm();
}

void fill_norms(const Eigen::MatrixXd& s, SpectralSummary& out) {
    out.frob2 = s.squaredNorm();
    out.frob4 = s.array().square().square().sum();
}

}  // namespace

SymMatrix::SymMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) {
        throw ValidationError("SymMatrix: matrix is " + std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()) + ", expected square");
    }
    if (!m_.allFinite()) {
        throw ValidationError("SymMatrix: non-finite entry");
    }
    const double scale = m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff();
    const double asym = m_.size() == 0 ? 0.0 : (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * scale) {
        throw ValidationError("SymMatrix: matrix is not symmetric (max asymmetry " +
                              std::to_string(asym) + ")");
    }
}

SymMatrix SymMatrix::identity(Eigen::Index p) {
    return SymMatrix(Eigen::MatrixXd::Identity(p, p), Trusted{});
}

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& d) {
    return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

SymMatrix SymMatrix::from_gram(const Eigen::Ref<const DataMatrix>& x) {
    if (x.rows() < 1) {
        throw ValidationError("from_gram: need at least one row");
    }
    return SymMatrix(gram_of_rows(x, 1.0 / static_cast<double>(x.rows())), Trusted{});
}

bool SymMatrix::is_identity() const {
    return m_.isIdentity(0.0);
}

SymMatrix SymMatrix::scaled(double c) const {
    return SymMatrix(c * m_, Trusted{});
}

SpectralSummary trace_powers(const SymMatrix& s) {
    SpectralSummary out;
    fill_powers(s.matrix(), out);
    fill_norms(s.matrix(), out);
    return out;
}

SpectralSummary trace_powers(const SymMatrix& s, const Eigen::Ref<const DataMatrix>& factor) {
    if (factor.cols() != s.dim()) {
        throw ValidationError("trace_powers: factor has " + std::to_string(factor.cols()) +
                              " columns, matrix dimension is " + std::to_string(s.dim()));
    }
    SpectralSummary out;
    if (factor.rows() >= 1 && s.dim() > factor.rows()) {
        fill_powers(gram_of_cols(factor, 1.0 / static_cast<double>(factor.rows())), out);
    } else {
        fill_powers(s.matrix(), out);
    }
    fill_norms(s.matrix(), out);
    return out;
}

SpectralSummary factor_trace_powers(const Eigen::Ref<const DataMatrix>& factor) {
    if (factor.rows() < 1) {
        throw ValidationError("factor_trace_powers: need at least one row");
    }
    const double scale = 1.0 / static_cast<double>(factor.rows());
    SpectralSummary out;
    if (factor.cols() > factor.rows()) {
        fill_powers(gram_of_cols(factor, scale), out);
    } else {
        fill_powers(gram_of_rows(factor, scale), out);
    }
    return out;
}

double entrywise_norm_pow(const SymMatrix& m, int q) {
    switch (q) {
        case 2:
            return m.matrix().squaredNorm();
        case 4:
            return m.matrix().array().square().square().sum();
        default:
            throw ValidationError("entrywise_norm_pow: q must be 2 or 4, got " + std::to_string(q));
    }
}

SymMatrix correlation_matrix(const SymMatrix& s) {
    const Eigen::Index p = s.dim();
    Eigen::VectorXd inv_sd(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double d = s(j, j);
        if (!(d > 0.0)) {
            throw DegenerateCovariateError(
                "covariate " + std::to_string(j) + " has non-positive variance", static_cast<long>(j));
        }
        inv_sd(j) = 1.0 / std::sqrt(d);
    }
    Eigen::MatrixXd r = inv_sd.asDiagonal() * s.matrix() * inv_sd.asDiagonal();
    r.diagonal().setOnes();
    r = r.cwiseMax(-1.0).cwiseMin(1.0);
    r.triangularView<Eigen::StrictlyUpper>() = r.transpose();
    return SymMatrix(std::move(r));
}

double g_k(const SpectralSummary& nu, int k) {
    const double t1 = nu.nu1;
    const double t2 = nu.nu2;
    switch (k) {
        case 2:
            return 2.0 * t2 + t1 * t1;
        case 3:
            return 8.0 * nu.nu3 + 6.0 * t2 * t1 + t1 * t1 * t1;
        case 4:
            return 48.0 * nu.nu4 + 32.0 * nu.nu3 * t1 + 12.0 * t2 * t2 + 12.0 * t2 * t1 * t1 +
                   t1 * t1 * t1 * t1;
        default:
            throw ValidationError("g_k: k must be 2, 3 or 4, got " + std::to_string(k));
    }
}

double g_k(const SymMatrix& s, int k) {
    return g_k(trace_powers(s), k);
}

double threshold(double x, double t) {
    if (!(t >= 0.0)) {
        throw ValidationError("threshold: t must be nonnegative");
    }
    const double mag = std::min(std::abs(x), t);
    return x < 0.0 ? -mag : (x > 0.0 ? mag : 0.0);
}

SymMatrix sym_sqrt(const SymMatrix& s) {
    const Eigen::Index p = s.dim();
    if (p == 0) {
        return s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.matrix());
    if (eig.info() != Eigen::Success) {
        throw NotPsdError("sym_sqrt: eigendecomposition failed");
    }
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double lambda_max = lambda.cwiseAbs().maxCoeff();
    if (lambda_max == 0.0) {
        return SymMatrix(Eigen::MatrixXd::Zero(p, p));
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        if (lambda(j) < -kPsdReject * lambda_max) {
            throw NotPsdError("sym_sqrt: eigenvalue " + std::to_string(lambda(j)) +
                              " is negative beyond tolerance");
        }
        lambda(j) = lambda(j) < kPsdClamp * lambda_max ? 0.0 : std::sqrt(lambda(j));
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::MatrixXd a = v * lambda.asDiagonal() * v.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    return SymMatrix(std::move(a));
}

Eigen::MatrixXd haar_orthogonal(Eigen::Index p, Rng& rng) {
    if (p < 1) {
        throw ValidationError("haar_orthogonal: p must be positive");
    }
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            g(i, j) = normal(rng);
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
    const auto r_diag = qr.matrixQR().diagonal();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (r_diag(j) < 0.0) {
            q.col(j) *= -1.0;
        }
    }
    return q;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// Wichura's AS 241 (PPND16), accurate to about 1e-16.
double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("normal_quantile: argument must lie in (0, 1)");
    }
    const double q = u - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                 45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
              133.14166789178437745) * r + 3.387132872796366608);
        const double den =
            (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                 21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
              42.313330701600911252) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double val = 0.0;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r + 4.6303378461565452959) * r +
               1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r + 2.05319162663775882187) * r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r + 5.4637849111641143699) * r +
               6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

}  // namespace elltest
