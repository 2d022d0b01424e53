#pragma once

// Complex generalized Schur decomposition (QZ).
//
// A = Qf S Zfᴴ, B = Qf T Zfᴴ with S, T upper triangular and Qf, Zf unitary.
// Hessenberg-triangular reduction by Givens rotations followed by the
// single-shift implicit QZ iteration. No balancing.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nepv/linalg/rotation.hpp"
#include "nepv/linalg/types.hpp"

namespace nepv {

enum class SchurOrdering {
    by_modulus, ///< ascending |alpha/beta|, then argument; infinite last
    none,       ///< whatever order the iteration deflates in
};

struct SchurPair {
    Matrix S;
    Matrix T;
    Matrix Qf;
    Matrix Zf;
    std::vector<cplx> alphas;
    std::vector<cplx> betas; ///< real and nonnegative

    [[nodiscard]] Index order() const { return S.rows(); }

    void refresh_eigenvalues()
    {
        const Index n = order();
        alphas.resize(static_cast<std::size_t>(n));
        betas.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            alphas[static_cast<std::size_t>(i)] = S(i, i);
            betas[static_cast<std::size_t>(i)] = T(i, i);
        }
    }
};

namespace detail {

inline double abs1(cplx z) { return std::abs(z.real()) + std::abs(z.imag()); }

inline void hessenberg_triangular(Matrix& H, Matrix& T, Matrix& Q, Matrix& Z)
{
    const Index n = H.rows();
    cplx r;
    for (Index jcol = 0; jcol + 2 < n; ++jcol) {
        for (Index jrow = n - 1; jrow >= jcol + 2; --jrow) {
            const Rotation g = make_rotation(H(jrow - 1, jcol), H(jrow, jcol), r);
            H(jrow - 1, jcol) = r;
            H(jrow, jcol) = 0.0;
            rotate_rows(H, jrow - 1, jrow, jcol + 1, n - 1, g);
            rotate_rows(T, jrow - 1, jrow, jrow - 1, n - 1, g);
            accumulate_left(Q, jrow - 1, jrow, g);

            const Rotation h = make_rotation(T(jrow, jrow), T(jrow, jrow - 1), r);
            T(jrow, jrow) = r;
            T(jrow, jrow - 1) = 0.0;
            rotate_cols(H, jrow, jrow - 1, 0, n - 1, h);
            rotate_cols(T, jrow, jrow - 1, 0, jrow - 1, h);
            rotate_cols(Z, jrow, jrow - 1, 0, n - 1, h);
        }
    }
}

/// Shift from the trailing 2x2 pencil: the eigenvalue closer to H(l,l)/T(l,l).
inline cplx wilkinson_shift(const Matrix& H, const Matrix& T, Index l)
{
    const cplx u12 = T(l - 1, l) / T(l, l);
    const cplx ad11 = H(l - 1, l - 1) / T(l - 1, l - 1);
    const cplx ad21 = H(l, l - 1) / T(l - 1, l - 1);
    const cplx ad12 = H(l - 1, l) / T(l, l);
    const cplx ad22 = H(l, l) / T(l, l);
    const cplx abi22 = ad22 - u12 * ad21;
    const cplx abi12 = ad12 - u12 * ad11;

    cplx shift = abi22;
    const cplx ctemp = std::sqrt(abi12) * std::sqrt(ad21);
    if (ctemp != cplx(0.0)) {
        const cplx x = 0.5 * (ad11 - shift);
        const double temp2 = abs1(x);
        const double temp = std::max(abs1(ctemp), temp2);
        cplx y = temp * std::sqrt((x / temp) * (x / temp) + (ctemp / temp) * (ctemp / temp));
        if (temp2 > 0.0) {
            const cplx xn = x / temp2;
            if (xn.real() * y.real() + xn.imag() * y.imag() < 0.0) {
                y = -y;
            }
        }
        shift -= ctemp * (ctemp / (x + y));
    }
    return shift;
}

inline void qz_iterate(Matrix& H, Matrix& T, Matrix& Q, Matrix& Z)
{
    const Index n = H.rows();
    const double ulp = kEps;
    const double safmin = std::numeric_limits<double>::min();
    const double atol = std::max(safmin, ulp * H.norm());
    const double btol = std::max(safmin, ulp * T.norm());
    const Index max_sweeps = 30 * n;

    auto negligible_subdiag = [&](Index j) {
        return abs1(H(j, j - 1)) <= std::max(atol, ulp * (abs1(H(j, j)) + abs1(H(j - 1, j - 1))));
    };

    Index ilast = n - 1;
    Index iiter = 0;
    Index sweeps = 0;
    cplx eshift = 0.0;
    cplx r;

    while (ilast > 0) {
        bool deflate = false;
        bool t_zero_at_last = false;
        Index ifirst = -1;

        if (negligible_subdiag(ilast)) {
            H(ilast, ilast - 1) = 0.0;
            deflate = true;
        } else if (std::abs(T(ilast, ilast)) <= btol) {
            T(ilast, ilast) = 0.0;
            t_zero_at_last = true;
        } else {
            for (Index j = ilast - 1; j >= 0; --j) {
                bool ilazro = (j == 0);
                if (!ilazro && negligible_subdiag(j)) {
                    H(j, j - 1) = 0.0;
                    ilazro = true;
                }
                if (std::abs(T(j, j)) < btol) {
                    T(j, j) = 0.0;
                    bool ilazr2 = false;
                    if (!ilazro) {
                        ilazr2 = abs1(H(j, j - 1)) * abs1(H(j + 1, j)) <= abs1(H(j, j)) * atol;
                    }
                    if (ilazro || ilazr2) {
                        // Zero sits where a split is possible: peel it off with
                        // row rotations that clear the subdiagonal of H.
                        bool resumed = false;
                        for (Index jch = j; jch < ilast; ++jch) {
                            const Rotation g = make_rotation(H(jch, jch), H(jch + 1, jch), r);
                            H(jch, jch) = r;
                            H(jch + 1, jch) = 0.0;
                            rotate_rows(H, jch, jch + 1, jch + 1, n - 1, g);
                            rotate_rows(T, jch, jch + 1, jch + 1, n - 1, g);
                            accumulate_left(Q, jch, jch + 1, g);
                            if (ilazr2) {
                                H(jch, jch - 1) *= g.c;
                            }
                            ilazr2 = false;
                            if (abs1(T(jch + 1, jch + 1)) >= btol) {
                                if (jch + 1 >= ilast) {
                                    deflate = true;
                                } else {
                                    ifirst = jch + 1;
                                }
                                resumed = true;
                                break;
                            }
                            T(jch + 1, jch + 1) = 0.0;
                        }
                        if (!resumed) {
                            t_zero_at_last = true;
                        }
                    } else {
                        // Chase the zero of T down to T(ilast, ilast).
                        for (Index jch = j; jch < ilast; ++jch) {
                            const Rotation g = make_rotation(T(jch, jch + 1), T(jch + 1, jch + 1), r);
                            T(jch, jch + 1) = r;
                            T(jch + 1, jch + 1) = 0.0;
                            rotate_rows(T, jch, jch + 1, jch + 2, n - 1, g);
                            rotate_rows(H, jch, jch + 1, jch - 1, n - 1, g);
                            accumulate_left(Q, jch, jch + 1, g);

                            const Rotation h = make_rotation(H(jch + 1, jch), H(jch + 1, jch - 1), r);
                            H(jch + 1, jch) = r;
                            H(jch + 1, jch - 1) = 0.0;
                            rotate_cols(H, jch, jch - 1, 0, jch, h);
                            rotate_cols(T, jch, jch - 1, 0, jch - 1, h);
                            rotate_cols(Z, jch, jch - 1, 0, n - 1, h);
                        }
                        t_zero_at_last = true;
                    }
                    break;
                }
                if (ilazro) {
                    ifirst = j;
                    break;
                }
            }
        }

        if (t_zero_at_last) {
            // Infinite eigenvalue at the bottom: clear H(ilast, ilast-1).
            const Rotation h = make_rotation(H(ilast, ilast), H(ilast, ilast - 1), r);
            H(ilast, ilast) = r;
            H(ilast, ilast - 1) = 0.0;
            rotate_cols(H, ilast, ilast - 1, 0, ilast - 1, h);
            rotate_cols(T, ilast, ilast - 1, 0, ilast - 1, h);
            rotate_cols(Z, ilast, ilast - 1, 0, n - 1, h);
            deflate = true;
        }
        if (deflate) {
            --ilast;
            iiter = 0;
            eshift = 0.0;
            continue;
        }

        ++iiter;
        if (++sweeps > max_sweeps) {
            throw NoConvergence("QZ iteration exceeded " + std::to_string(max_sweeps) + " sweeps");
        }

        cplx shift;
        if (iiter % 10 != 0) {
            shift = wilkinson_shift(H, T, ilast);
        } else {
            eshift += H(ilast, ilast - 1) / T(ilast - 1, ilast - 1);
            shift = eshift;
        }

        const Index istart = ifirst;
        Rotation g = make_rotation(H(istart, istart) - shift * T(istart, istart), H(istart + 1, istart), r);
        for (Index j = istart; j < ilast; ++j) {
            if (j > istart) {
                g = make_rotation(H(j, j - 1), H(j + 1, j - 1), r);
                H(j, j - 1) = r;
                H(j + 1, j - 1) = 0.0;
            }
            rotate_rows(H, j, j + 1, j, n - 1, g);
            rotate_rows(T, j, j + 1, j, n - 1, g);
            accumulate_left(Q, j, j + 1, g);

            const Rotation h = make_rotation(T(j + 1, j + 1), T(j + 1, j), r);
            T(j + 1, j + 1) = r;
            T(j + 1, j) = 0.0;
            rotate_cols(H, j + 1, j, 0, std::min(j + 2, ilast), h);
            rotate_cols(T, j + 1, j, 0, j, h);
            rotate_cols(Z, j + 1, j, 0, n - 1, h);
        }
    }
}

/// Scales column j so that T(j, j) is real nonnegative (or S(j, j) when
/// T(j, j) vanishes).
inline void normalize_column_phase(SchurPair& sp, Index j)
{
    const double safmin = std::numeric_limits<double>::min();
    cplx phase = 1.0;
    const double at = std::abs(sp.T(j, j));
    if (at > safmin) {
        phase = std::conj(sp.T(j, j)) / at;
    } else {
        const double as = std::abs(sp.S(j, j));
        if (as > safmin) {
            phase = std::conj(sp.S(j, j)) / as;
        }
    }
    if (phase == cplx(1.0)) {
        return;
    }
    sp.S.col(j).head(j + 1) *= phase;
    sp.T.col(j).head(j + 1) *= phase;
    sp.Zf.col(j) *= phase;
    sp.T(j, j) = cplx(sp.T(j, j).real(), 0.0);
}

struct EigenKey {
    double modulus;
    double argument;
    cplx value;
    bool finite;
};

inline EigenKey eigen_key(cplx alpha, cplx beta)
{
    const double aa = std::abs(alpha);
    const double ab = std::abs(beta);
    if (ab <= 1e3 * kEps * aa || (ab == 0.0 && aa == 0.0)) {
        return {std::numeric_limits<double>::infinity(), 0.0, cplx(0.0), false};
    }
    const cplx lam = alpha / beta;
    return {std::abs(lam), std::arg(lam), lam, true};
}

/// Strict ordering used for sorting; nearly equal eigenvalues compare equal.
inline bool key_less(const EigenKey& a, const EigenKey& b)
{
    if (!a.finite || !b.finite) {
        return a.finite && !b.finite;
    }
    const double tol = 1e-10 * std::max({a.modulus, b.modulus, 1e-300});
    if (std::abs(a.value - b.value) <= tol) {
        return false;
    }
    if (std::abs(a.modulus - b.modulus) > tol) {
        return a.modulus < b.modulus;
    }
    return a.argument < b.argument - 1e-10;
}

} // namespace detail

/// Swaps the adjacent diagonal entries k and k+1 of a triangular Schur pair
/// by a unitary equivalence. Returns false when the two eigenvalues coincide
/// (nothing to swap).
inline bool swap_adjacent(SchurPair& sp, Index k)
{
    using detail::Rotation;
    Matrix& S = sp.S;
    Matrix& T = sp.T;
    const Index n = S.rows();

    const cplx a11 = S(k, k), a12 = S(k, k + 1), a22 = S(k + 1, k + 1);
    const cplx b11 = T(k, k), b12 = T(k, k + 1), b22 = T(k + 1, k + 1);
    const cplx m11 = b22 * a11 - a22 * b11;
    const cplx m12 = b22 * a12 - a22 * b12;
    const double ns = std::abs(a11) + std::abs(a12) + std::abs(a22);
    const double nt = std::abs(b11) + std::abs(b12) + std::abs(b22);
    if (std::abs(m11) + std::abs(m12) <= 4.0 * kEps * ns * nt) {
        return false;
    }

    // First new column spans the eigenvector of the trailing eigenvalue.
    const cplx x1 = -m12;
    const cplx x2 = m11;
    const double nx = std::hypot(std::abs(x1), std::abs(x2));
    Rotation col;
    if (std::abs(x1) > 0.0) {
        col.c = std::abs(x1) / nx;
        col.s = x2 * std::conj(x1) / (std::abs(x1) * nx);
    } else {
        col.c = 0.0;
        col.s = x2 / std::abs(x2);
    }
    detail::rotate_cols(S, k, k + 1, 0, k + 1, col);
    detail::rotate_cols(T, k, k + 1, 0, k + 1, col);
    detail::rotate_cols(sp.Zf, k, k + 1, 0, n - 1, col);

    const double ws = std::hypot(std::abs(S(k, k)), std::abs(S(k + 1, k))) / std::max(ns, 1e-300);
    const double wt = std::hypot(std::abs(T(k, k)), std::abs(T(k + 1, k))) / std::max(nt, 1e-300);
    cplx r;
    const Rotation row = ws >= wt ? detail::make_rotation(S(k, k), S(k + 1, k), r)
                                  : detail::make_rotation(T(k, k), T(k + 1, k), r);
    detail::rotate_rows(S, k, k + 1, k, n - 1, row);
    detail::rotate_rows(T, k, k + 1, k, n - 1, row);
    detail::accumulate_left(sp.Qf, k, k + 1, row);
    S(k + 1, k) = 0.0;
    T(k + 1, k) = 0.0;

    detail::normalize_column_phase(sp, k);
    detail::normalize_column_phase(sp, k + 1);
    return true;
}

/// Moves the eigenvalues flagged in `select` to the leading positions,
/// preserving the relative order within both groups.
inline void reorder_selected_first(SchurPair& sp, std::vector<bool> select)
{
    const Index n = sp.order();
    Index slot = 0;
    for (Index k = 0; k < n; ++k) {
        if (!select[static_cast<std::size_t>(k)]) {
            continue;
        }
        for (Index j = k; j > slot; --j) {
            swap_adjacent(sp, j - 1);
            std::swap(select[static_cast<std::size_t>(j - 1)], select[static_cast<std::size_t>(j)]);
        }
        ++slot;
    }
    sp.refresh_eigenvalues();
}

/// Sorts the Schur pair by ascending eigenvalue modulus, then argument.
inline void sort_by_modulus(SchurPair& sp)
{
    const Index n = sp.order();
    for (Index i = 0; i < n; ++i) {
        Index best = i;
        auto best_key = detail::eigen_key(sp.S(i, i), sp.T(i, i));
        for (Index j = i + 1; j < n; ++j) {
            const auto key = detail::eigen_key(sp.S(j, j), sp.T(j, j));
            if (detail::key_less(key, best_key)) {
                best = j;
                best_key = key;
            }
        }
        for (Index j = best; j > i; --j) {
            swap_adjacent(sp, j - 1);
        }
    }
    sp.refresh_eigenvalues();
}

/// Generalized Schur decomposition of the square pencil (A, B).
inline SchurPair generalized_schur(const Matrix& A, const Matrix& B,
                                   SchurOrdering ordering = SchurOrdering::by_modulus)
{
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
        throw DimensionMismatch("generalized_schur: A and B must be square of the same order");
    }
    const Index n = A.rows();
    if (n < 1) {
        throw DimensionMismatch("generalized_schur: empty pencil");
    }
    if (!A.allFinite() || !B.allFinite()) {
        throw InvalidArgument("generalized_schur: non-finite entries");
    }

    SchurPair sp;
    Eigen::HouseholderQR<Matrix> qr(B);
    sp.Qf = qr.householderQ();
    sp.T = qr.matrixQR().triangularView<Eigen::Upper>();
    sp.S = sp.Qf.adjoint() * A;
    sp.Zf = Matrix::Identity(n, n);

    detail::hessenberg_triangular(sp.S, sp.T, sp.Qf, sp.Zf);
    detail::qz_iterate(sp.S, sp.T, sp.Qf, sp.Zf);

    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            sp.S(i, j) = 0.0;
            sp.T(i, j) = 0.0;
        }
    }
    for (Index j = 0; j < n; ++j) {
        detail::normalize_column_phase(sp, j);
    }
    if (ordering == SchurOrdering::by_modulus) {
        sort_by_modulus(sp);
    } else {
        sp.refresh_eigenvalues();
    }
    return sp;
}

} // namespace nepv
