#pragma once

#include <cmath>
#include <string>

#include "nepv/linalg/types.hpp"

namespace nepv {

/// Lower Cholesky factor L with H = L Lᴴ and a positive real diagonal.
inline Matrix cholesky(const HermitianMatrix& h, const std::string& which = "matrix")
{
    const Matrix& a = h.value();
    const Index n = a.rows();
    const double scale = a.norm();
    Matrix l = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        cplx d = a(j, j);
        for (Index k = 0; k < j; ++k) {
            d -= l(j, k) * std::conj(l(j, k));
        }
        if (!(d.real() > 0.0) || std::abs(d.imag()) > 1e-12 * scale) {
            throw NotPositiveDefinite(which);
        }
        const double ljj = std::sqrt(d.real());
        l(j, j) = ljj;
        for (Index i = j + 1; i < n; ++i) {
            cplx s = a(i, j);
            for (Index k = 0; k < j; ++k) {
                s -= l(i, k) * std::conj(l(j, k));
            }
            l(i, j) = s / ljj;
        }
    }
    return l;
}

/// Number of singular values above tol·σ_max. Zero matrix has rank 0.
inline Index rank_estimate(const Matrix& m, double tol)
{
    if (!(tol > 0.0 && tol < 1.0)) {
        throw InvalidArgument("rank_estimate: tol must lie in (0, 1)");
    }
    if (m.size() == 0) {
        return 0;
    }
    const RealVector sv = Eigen::BDCSVD<Matrix>(m).singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) {
        return 0;
    }
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol * sv(0)) {
            ++r;
        }
    }
    return r;
}

} // namespace nepv
