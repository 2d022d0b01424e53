#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nepv/linalg/linalg.hpp"

namespace nepv {

/// Default tolerances of the eigenpair checks.
struct Tolerances {
    double real = 1e-8;  ///< |Im λ| ≤ real·(1 + |Re λ|)
    double res = 1e-8;   ///< residual_nepv threshold for genuine solutions
    double rank = 1e-8;  ///< numerical null space of M(λ, μ)
    double dedup = 1e-6; ///< duplicate-solution radius
};

/// Av = λBv + (vᴴPv / vᴴQv)·Cv with A, C, P Hermitian and B, Q Hermitian
/// positive definite.
class NepvProblem {
public:
    NepvProblem() = default;

    NepvProblem(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& P, const Matrix& Q)
    {
        const Index n = A.rows();
        for (const Matrix* m : {&A, &B, &C, &P, &Q}) {
            if (m->rows() != n || m->cols() != n) {
                throw DimensionMismatch("all five coefficient matrices must be square of the same order");
            }
            if (!m->allFinite()) {
                throw InvalidArgument("coefficient matrix has non-finite entries");
            }
        }
        if (n < 2) {
            throw DimensionMismatch("problem order must be at least 2");
        }
        A_ = HermitianMatrix(A, "A");
        B_ = HermitianMatrix(B, "B");
        C_ = HermitianMatrix(C, "C");
        P_ = HermitianMatrix(P, "P");
        Q_ = HermitianMatrix(Q, "Q");
        cholesky(B_, "B");
        cholesky(Q_, "Q");
        norm_a_ = spectral_norm(A_);
        norm_b_ = spectral_norm(B_);
        norm_c_ = spectral_norm(C_);
        norm_p_ = spectral_norm(P_);
        norm_q_ = spectral_norm(Q_);
    }

    [[nodiscard]] Index n() const { return A_.order(); }
    [[nodiscard]] const Matrix& A() const { return A_.value(); }
    [[nodiscard]] const Matrix& B() const { return B_.value(); }
    [[nodiscard]] const Matrix& C() const { return C_.value(); }
    [[nodiscard]] const Matrix& P() const { return P_.value(); }
    [[nodiscard]] const Matrix& Q() const { return Q_.value(); }

    /// Spectral norms.
    [[nodiscard]] double norm_A() const { return norm_a_; }
    [[nodiscard]] double norm_B() const { return norm_b_; }
    [[nodiscard]] double norm_C() const { return norm_c_; }
    [[nodiscard]] double norm_P() const { return norm_p_; }
    [[nodiscard]] double norm_Q() const { return norm_q_; }

    /// ‖A‖ + |λ|‖B‖ + |μ|‖C‖
    [[nodiscard]] double scale(cplx lambda, cplx mu) const
    {
        return norm_a_ + std::abs(lambda) * norm_b_ + std::abs(mu) * norm_c_;
    }

    /// M(λ, μ) = A − λB − μC
    [[nodiscard]] Matrix M(cplx lambda, cplx mu) const { return A() - lambda * B() - mu * C(); }
    /// S(μ) = P − μQ
    [[nodiscard]] Matrix S(cplx mu) const { return P() - mu * Q(); }

private:
    static double spectral_norm(const HermitianMatrix& h)
    {
        return Eigen::SelfAdjointEigenSolver<Matrix>(h.value(), Eigen::EigenvaluesOnly)
            .eigenvalues()
            .cwiseAbs()
            .maxCoeff();
    }

    HermitianMatrix A_, B_, C_, P_, Q_;
    double norm_a_ = 0.0, norm_b_ = 0.0, norm_c_ = 0.0, norm_p_ = 0.0, norm_q_ = 0.0;
};

/// Validates raw coefficient matrices; throws on the first violated contract.
inline void validate(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& P, const Matrix& Q)
{
    (void)NepvProblem(A, B, C, P, Q);
}

/// μ(v) = vᴴPv / vᴴQv
inline double mu_of(const NepvProblem& pb, const Vector& v)
{
    if (v.size() != pb.n()) {
        throw DimensionMismatch("mu_of: vector length must equal n");
    }
    if (v.norm() == 0.0) {
        throw ZeroVector("mu_of: v = 0");
    }
    const cplx num = v.dot(pb.P() * v);
    const cplx den = v.dot(pb.Q() * v);
    const cplx mu = num / den;
    if (std::abs(mu.imag()) > 1e-12 * std::abs(mu) + 1e-15) {
        throw InvalidArgument("mu_of: Rayleigh quotient is not real");
    }
    return mu.real();
}

struct Residuals {
    double nepv = 0.0;
    double mu = 0.0;
};

/// Backward-error style residuals of (λ, μ, v); μ supplied by the caller.
inline Residuals nepv_residual(const NepvProblem& pb, cplx lambda, cplx mu, const Vector& v)
{
    if (v.size() != pb.n()) {
        throw DimensionMismatch("nepv_residual: vector length must equal n");
    }
    const double nv = v.norm();
    if (nv == 0.0) {
        throw ZeroVector("nepv_residual: v = 0");
    }
    Residuals r;
    const Vector mv = pb.A() * v - lambda * (pb.B() * v) - mu * (pb.C() * v);
    r.nepv = mv.norm() / (pb.scale(lambda, mu) * nv);
    const cplx sv = v.dot(pb.P() * v) - mu * v.dot(pb.Q() * v);
    r.mu = std::abs(sv) / ((pb.norm_P() + std::abs(mu) * pb.norm_Q()) * nv * nv);
    return r;
}

/// Residuals with μ = μ(v).
inline Residuals nepv_residual(const NepvProblem& pb, cplx lambda, const Vector& v)
{
    return nepv_residual(pb, lambda, cplx(mu_of(pb, v)), v);
}

/// Adjugate of a square matrix; stable near rank deficiency.
inline Matrix adjugate(const Matrix& m)
{
    const Index n = m.rows();
    if (n == 1) {
        return Matrix::Identity(1, 1);
    }
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    if (s(n - 1) > 1e-8 * s(0)) {
        Eigen::PartialPivLU<Matrix> lu(m);
        return lu.determinant() * lu.inverse();
    }
    // adj(UΣVᴴ) = det(U)·conj(det V)·V·adj(Σ)·Uᴴ
    const cplx phase = Eigen::PartialPivLU<Matrix>(svd.matrixU()).determinant() *
                       std::conj(Eigen::PartialPivLU<Matrix>(svd.matrixV()).determinant());
    RealVector cof(n);
    for (Index i = 0; i < n; ++i) {
        double prod = 1.0;
        for (Index j = 0; j < n; ++j) {
            if (j != i) {
                prod *= s(j);
            }
        }
        cof(i) = prod;
    }
    return phase * (svd.matrixV() * cof.asDiagonal() * svd.matrixU().adjoint());
}

struct PolynomialValues {
    cplx f; ///< det M
    cplx g; ///< trace(S adj M)
};

/// Values of det M and trace(S·adj M) for given M, S.
inline PolynomialValues polynomial_values(const Matrix& M, const Matrix& S)
{
    if (M.rows() != M.cols() || S.rows() != M.rows() || S.cols() != M.cols()) {
        throw DimensionMismatch("polynomial_values: M and S must be square of equal order");
    }
    PolynomialValues out;
    out.f = Eigen::PartialPivLU<Matrix>(M).determinant();
    out.g = (S * adjugate(M)).trace();
    return out;
}

inline PolynomialValues eval_polynomials(const NepvProblem& pb, cplx lambda, cplx mu)
{
    return polynomial_values(pb.M(lambda, mu), pb.S(mu));
}

struct FilterOutcome {
    bool accepted = false;
    Index null_dim = 0;
    RealVector s_hat_eigenvalues; ///< spectrum of VᴴSV
};

/// Definiteness test on the null space of M(λ, μ) for real (λ, μ). The point
/// is an eigenvalue iff VᴴS(μ)V is neither positive nor negative definite.
inline FilterOutcome definiteness_filter(const NepvProblem& pb, double lambda, double mu, double tol_rank = 1e-8)
{
    const Matrix M = pb.M(lambda, mu);
    const Index n = pb.n();
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullV);
    // Relative to the problem scale rather than σ_max: M itself may vanish.
    const double thresh = tol_rank * pb.scale(lambda, mu);
    Index k = 0;
    for (Index i = 0; i < n; ++i) {
        k += svd.singularValues()(i) <= thresh ? 1 : 0;
    }
    if (k == 0) {
        throw EmptyNullSpace("definiteness_filter: M(λ, μ) has trivial null space");
    }
    FilterOutcome out;
    out.null_dim = k;
    const Matrix V = svd.matrixV().rightCols(k);
    const Matrix sh = V.adjoint() * pb.S(mu) * V;
    out.s_hat_eigenvalues =
        Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (sh + sh.adjoint()), Eigen::EigenvaluesOnly).eigenvalues();
    if (k == 1) {
        out.accepted = true;
        return out;
    }
    const double zero = tol_rank * (pb.norm_P() + std::abs(mu) * pb.norm_Q());
    const double lo = out.s_hat_eigenvalues.minCoeff();
    const double hi = out.s_hat_eigenvalues.maxCoeff();
    out.accepted = (lo < -zero && hi > zero) || std::abs(lo) <= zero || std::abs(hi) <= zero;
    return out;
}

/// Upper bound on the number of eigenvalues for a given rank of C.
inline long long solution_count_bound(long long n, long long rank_c)
{
    if (rank_c < 0 || rank_c > n) {
        throw InvalidArgument("solution_count_bound: need 0 ≤ rank(C) ≤ n");
    }
    return std::min(n * n, n * (2 * rank_c + 1) - rank_c * (rank_c + 1));
}

enum class Classification {
    genuine,
    spurious_right_rmep,
    spurious_left_rmep,
    spurious_complex,
    rejected_definiteness,
    unverified,
};

inline const char* to_string(Classification c)
{
    switch (c) {
    case Classification::genuine: return "genuine";
    case Classification::spurious_right_rmep: return "spurious_right_rmep";
    case Classification::spurious_left_rmep: return "spurious_left_rmep";
    case Classification::spurious_complex: return "spurious_complex";
    case Classification::rejected_definiteness: return "rejected_definiteness";
    case Classification::unverified: return "unverified";
    }
    return "unverified";
}

inline Classification classification_from_string(const std::string& s)
{
    for (auto c : {Classification::genuine, Classification::spurious_right_rmep, Classification::spurious_left_rmep,
                   Classification::spurious_complex, Classification::rejected_definiteness,
                   Classification::unverified}) {
        if (s == to_string(c)) {
            return c;
        }
    }
    throw InvalidArgument("unknown classification '" + s + "'");
}

struct CandidateSolution {
    cplx lambda;
    cplx mu;
    Vector v; ///< vᴴBv = 1, canonical phase
    double residual_nepv = 0.0;
    double residual_mu = 0.0;
    Classification classification = Classification::unverified;
};

/// Scales v to unit B-norm with its largest entry real positive.
inline void normalize_b(const NepvProblem& pb, Vector& v)
{
    const double bn = std::sqrt(std::abs(v.dot(pb.B() * v)));
    if (bn == 0.0) {
        throw ZeroVector("normalize_b: v = 0");
    }
    v /= bn;
    canonicalize_phase(v);
}

inline bool same_solution(const CandidateSolution& a, const CandidateSolution& b, double tol = 1e-6)
{
    return std::abs(a.lambda - b.lambda) <= tol * (1.0 + std::abs(a.lambda)) &&
           std::abs(a.mu - b.mu) <= tol * (1.0 + std::abs(a.mu));
}

/// Checks an approximate eigenpair (λ, v) and fills a candidate. Genuine iff
/// λ and μ are real within tolerance and the residual is small.
inline CandidateSolution verify_candidate(const NepvProblem& pb, cplx lambda, Vector v, const Tolerances& tol = {})
{
    normalize_b(pb, v);
    CandidateSolution c;
    c.v = std::move(v);
    const cplx num = c.v.dot(pb.P() * c.v);
    const cplx den = c.v.dot(pb.Q() * c.v);
    c.mu = cplx((num / den).real(), 0.0);
    const bool real_lambda = std::abs(lambda.imag()) <= tol.real * (1.0 + std::abs(lambda.real()));
    c.lambda = real_lambda ? cplx(lambda.real(), 0.0) : lambda;
    const Residuals r = nepv_residual(pb, c.lambda, c.mu, c.v);
    c.residual_nepv = r.nepv;
    c.residual_mu = r.mu;
    if (!real_lambda) {
        c.classification = Classification::spurious_complex;
    } else if (r.nepv <= tol.res) {
        c.classification = Classification::genuine;
    } else {
        c.classification = Classification::unverified;
    }
    return c;
}

} // namespace nepv
