#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nepv/linalg/dense.hpp"
#include "nepv/linalg/qz.hpp"

namespace nepv {

enum class EigenKind {
    finite,
    infinite,      ///< beta ≈ 0, alpha ≠ 0
    indeterminate, ///< alpha ≈ beta ≈ 0 (singular pencil)
};

struct GepPair {
    cplx alpha;
    cplx beta;
    EigenKind kind = EigenKind::finite;
    cplx lambda;  ///< alpha / beta; meaningful only for finite pairs
    Vector x;     ///< right eigenvector, unit 2-norm
};

struct GepOptions {
    bool allow_singular = false;
    double zero_tol = 1e-12; ///< relative to ‖A‖_F, ‖B‖_F
};

namespace detail {

/// Right eigenvector of the triangular pair (S, T) for diagonal position k.
inline Vector triangular_eigenvector(const Matrix& S, const Matrix& T, Index k)
{
    const cplx a = S(k, k);
    const cplx b = T(k, k);
    const double small = kEps * (std::abs(b) * S.norm() + std::abs(a) * T.norm()) + 1e-300;
    Vector y = Vector::Zero(S.rows());
    y(k) = 1.0;
    for (Index i = k - 1; i >= 0; --i) {
        cplx s = 0.0;
        for (Index j = i + 1; j <= k; ++j) {
            s += (b * S(i, j) - a * T(i, j)) * y(j);
        }
        cplx piv = b * S(i, i) - a * T(i, i);
        if (std::abs(piv) < small) {
            piv = small;
        }
        y(i) = -s / piv;
    }
    return y;
}

} // namespace detail

/// Eigenpairs of the square pencil (A, B), in the Schur ordering.
inline std::vector<GepPair> dense_gep_eig(const Matrix& A, const Matrix& B, const GepOptions& opt = {})
{
    SchurPair sp = generalized_schur(A, B);
    const Index n = sp.order();
    const double na = A.norm();
    const double nb = B.norm();

    Index zero_pairs = 0;
    for (Index i = 0; i < n; ++i) {
        if (std::abs(sp.S(i, i)) <= opt.zero_tol * na && std::abs(sp.T(i, i)) <= opt.zero_tol * nb) {
            ++zero_pairs;
        }
    }
    if (!opt.allow_singular && 10 * zero_pairs > n) {
        throw SingularPencil("dense_gep_eig: " + std::to_string(zero_pairs) + " of " + std::to_string(n) +
                             " eigenvalue pairs are 0/0");
    }

    std::vector<GepPair> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        GepPair p;
        p.alpha = sp.S(k, k);
        p.beta = sp.T(k, k);
        const bool a0 = std::abs(p.alpha) <= opt.zero_tol * na;
        const bool b0 = std::abs(p.beta) <= opt.zero_tol * nb;
        if (a0 && b0) {
            p.kind = EigenKind::indeterminate;
        } else if (b0) {
            p.kind = EigenKind::infinite;
        } else {
            p.kind = EigenKind::finite;
            p.lambda = p.alpha / p.beta;
        }
        p.x = sp.Zf * detail::triangular_eigenvector(sp.S, sp.T, k);
        p.x.normalize();
        out.push_back(std::move(p));
    }
    return out;
}

/// Eigenpairs of a Hermitian-definite pencil (A, B), ascending, B-orthonormal.
struct HermitianEig {
    RealVector values;
    Matrix vectors;
};

inline HermitianEig hermitian_definite_eig(const HermitianMatrix& A, const HermitianMatrix& B)
{
    if (A.order() != B.order()) {
        throw DimensionMismatch("hermitian_definite_eig: order mismatch");
    }
    const Matrix L = cholesky(B, "B");
    const auto tri = L.triangularView<Eigen::Lower>();
    // L⁻¹ A L⁻ᴴ
    Matrix W = tri.solve(A.value());
    W = tri.solve(W.adjoint().eval()).adjoint().eval();
    W = 0.5 * (W + W.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(W);
    if (es.info() != Eigen::Success) {
        throw NoConvergence("hermitian_definite_eig: eigensolver failed");
    }
    HermitianEig out;
    out.values = es.eigenvalues();
    out.vectors = L.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
    return out;
}

/// Pencil (H1, H0) compressed onto the complement of the common left and
/// right null spaces of its two matrices.
struct DeflatedPencil {
    Matrix H1;
    Matrix H0;
    Matrix right; ///< k×m orthonormal basis of the kept right directions
    Matrix left;  ///< k×m orthonormal basis of the kept left directions
    Index removed = 0;
};

inline DeflatedPencil deflate_common_nullspace(const Matrix& H1, const Matrix& H0, double tol)
{
    const Index k = H1.rows();
    if (H1.cols() != k || H0.rows() != k || H0.cols() != k) {
        throw DimensionMismatch("deflate_common_nullspace: square pencil of equal order expected");
    }
    Matrix stacked(2 * k, k);
    stacked << H1, H0;
    Matrix side(k, 2 * k);
    side << H1, H0;

    Eigen::BDCSVD<Matrix> rs(stacked, Eigen::ComputeFullV);
    Eigen::BDCSVD<Matrix> ls(side, Eigen::ComputeFullU);
    const double smax = std::max(rs.singularValues()(0), 1e-300);
    Index rr = 0;
    for (Index i = 0; i < rs.singularValues().size(); ++i) {
        rr += rs.singularValues()(i) > tol * smax ? 1 : 0;
    }
    Index lr = 0;
    for (Index i = 0; i < ls.singularValues().size(); ++i) {
        lr += ls.singularValues()(i) > tol * smax ? 1 : 0;
    }
    const Index m = std::min(rr, lr);

    DeflatedPencil out;
    out.right = rs.matrixV().leftCols(m);
    out.left = ls.matrixU().leftCols(m);
    out.H1 = out.left.adjoint() * H1 * out.right;
    out.H0 = out.left.adjoint() * H0 * out.right;
    out.removed = k - m;
    return out;
}

} // namespace nepv
