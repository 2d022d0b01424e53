#pragma once

// Generalized Sylvester equation A·X·Bᵀ − C·X·Dᵀ = E by Bartels–Stewart on
// the generalized Schur forms of (A, C) and (D, B).

#include <algorithm>
#include <cmath>
#include <vector>

#include "nepv/linalg/qz.hpp"

namespace nepv {

enum class SylvesterMode {
    regular,
    consistent_underdetermined, ///< singular operator, E in its range
};

struct SylvesterSolution {
    Matrix X;
    SylvesterMode mode = SylvesterMode::regular;
};

/// Factors the coefficient pencils once; `solve` may be called for many E.
class GeneralizedSylvester {
public:
    GeneralizedSylvester(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D)
        : A_(A), B_(B), C_(C), D_(D)
    {
        const Index p = A.rows();
        const Index q = B.rows();
        if (A.cols() != p || C.rows() != p || C.cols() != p || B.cols() != q || D.rows() != q ||
            D.cols() != q) {
            throw DimensionMismatch("generalized Sylvester: A, C must be p×p and B, D q×q");
        }
        left_ = generalized_schur(A, C, SchurOrdering::none);
        right_ = generalized_schur(D, B, SchurOrdering::none);
        pivot_scale_ = right_.S.norm() * left_.T.norm() + right_.T.norm() * left_.S.norm();
        op_norm_ = A.norm() * B.norm() + C.norm() * D.norm();

        // Eigenvalues shared by both pencils make the operator singular. They
        // seed a cluster that also absorbs eigenvalues within a small chordal
        // distance of a member (split Jordan blocks). The cluster goes to the
        // leading positions and its unknowns are solved as one dense block.
        std::vector<bool> sel_left(static_cast<std::size_t>(p), false);
        std::vector<bool> sel_right(static_cast<std::size_t>(q), false);
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < q; ++j) {
                if (std::abs(pivot(i, j)) <= 1e-12 * pivot_scale_) {
                    sel_left[static_cast<std::size_t>(i)] = true;
                    sel_right[static_cast<std::size_t>(j)] = true;
                }
            }
        }
        grow_cluster(sel_left, sel_right);
        s1_ = static_cast<Index>(std::count(sel_left.begin(), sel_left.end(), true));
        s2_ = static_cast<Index>(std::count(sel_right.begin(), sel_right.end(), true));
        if (s1_ > 0) {
            reorder_selected_first(left_, sel_left);
            reorder_selected_first(right_, sel_right);
            factor_block();
        }
    }

    [[nodiscard]] bool singular() const { return singular_; }
    [[nodiscard]] Index rows() const { return A_.rows(); }
    [[nodiscard]] Index cols() const { return B_.rows(); }

    [[nodiscard]] SylvesterSolution solve(const Matrix& E) const
    {
        const Index p = rows();
        const Index q = cols();
        if (E.rows() != p || E.cols() != q) {
            throw DimensionMismatch("generalized Sylvester: E must be p×q");
        }
        const Matrix& S1 = left_.S;
        const Matrix& T1 = left_.T;
        const Matrix& S2 = right_.S;
        const Matrix& T2 = right_.T;

        // Rows of Y are solved bottom-up against the small right factors.
        // U and V keep T2·yᵢ and S2·yᵢ for each solved row, so that coupling
        // to rows further up is applied blockwise by matrix products.
        const Matrix Ft = (left_.Qf.adjoint() * E * right_.Qf.conjugate()).transpose();
        Matrix Yt(q, p);
        Matrix U(q, p);
        Matrix V(q, p);
        Matrix R;
        Vector r(q);
        Vector r0(q);
        Matrix G(s1_, s2_);
        constexpr Index kBlock = 32;
        for (Index e = p; e > 0;) {
            const Index s = std::max<Index>(0, e - kBlock);
            const Index bs = e - s;
            R = Ft.middleCols(s, bs);
            if (e < p) {
                R.noalias() -= U.rightCols(p - e) * S1.block(s, e, bs, p - e).transpose();
                R.noalias() += V.rightCols(p - e) * T1.block(s, e, bs, p - e).transpose();
            }
            for (Index i = e - 1; i >= s; --i) {
                r = R.col(i - s);
                const Index w = e - 1 - i;
                if (w > 0) {
                    r.noalias() -= U.middleCols(i + 1, w) * S1.row(i).segment(i + 1, w).transpose();
                    r.noalias() += V.middleCols(i + 1, w) * T1.row(i).segment(i + 1, w).transpose();
                }
                const cplx a = S1(i, i);
                const cplx b = T1(i, i);
                r0 = r;
                // Columns of the shared block wait for the dense block solve.
                const Index stop = i < s1_ ? s2_ : 0;
                for (Index j = q - 1; j >= stop; --j) {
                    const cplx yj = r(j) / (a * T2(j, j) - b * S2(j, j));
                    Yt(j, i) = yj;
                    if (j > 0) {
                        r.head(j) -= (yj * a) * T2.col(j).head(j) - (yj * b) * S2.col(j).head(j);
                    }
                }
                if (stop > 0) {
                    Yt.col(i).head(stop).setZero();
                    G.row(i) = r.head(stop).transpose();
                }
                if (i == 0) {
                    continue;
                }
                // a·T2y − b·S2y = r0 gives one product from the other; divide
                // by the larger of |a|, |b|.
                if (stop > 0) {
                    U.col(i).noalias() = T2.triangularView<Eigen::Upper>() * Yt.col(i);
                    V.col(i).noalias() = S2.triangularView<Eigen::Upper>() * Yt.col(i);
                } else if (std::abs(b) >= std::abs(a)) {
                    U.col(i).noalias() = T2.triangularView<Eigen::Upper>() * Yt.col(i);
                    V.col(i) = (a * U.col(i) - r0) / b;
                } else {
                    V.col(i).noalias() = S2.triangularView<Eigen::Upper>() * Yt.col(i);
                    U.col(i) = (r0 + b * V.col(i)) / a;
                }
            }
            e = s;
        }
        Matrix Y = Yt.transpose();

        SylvesterSolution out;
        if (s1_ > 0) {
            const Vector g = Eigen::Map<const Vector>(G.data(), G.size());
            const Vector yb = block_svd_.solve(g);
            Y.topLeftCorner(s1_, s2_) = Eigen::Map<const Matrix>(yb.data(), s1_, s2_);
        }
        out.X = left_.Zf * Y * right_.Zf.transpose();
        if (singular_) {
            const double res = residual(out.X, E);
            if (res > 1e-8 * (E.norm() + op_norm_ * out.X.norm())) {
                throw SingularOperator("generalized Sylvester operator is singular and the system is inconsistent");
            }
            out.mode = SylvesterMode::consistent_underdetermined;
        }
        return out;
    }

    /// ‖A X Bᵀ − C X Dᵀ − E‖_F
    [[nodiscard]] double residual(const Matrix& X, const Matrix& E) const
    {
        return (A_ * X * B_.transpose() - C_ * X * D_.transpose() - E).norm();
    }

private:
    static constexpr double kClusterTol = 1e-6;

    static double chordal(cplx a1, cplx b1, cplx a2, cplx b2)
    {
        const double n1 = std::hypot(std::abs(a1), std::abs(b1));
        const double n2 = std::hypot(std::abs(a2), std::abs(b2));
        if (n1 == 0.0 || n2 == 0.0) {
            return 0.0; // 0/0 pair: shared with everything
        }
        return std::abs(a1 * b2 - a2 * b1) / (n1 * n2);
    }

    [[nodiscard]] cplx pivot(Index i, Index j) const
    {
        return right_.T(j, j) * left_.S(i, i) - right_.S(j, j) * left_.T(i, i);
    }

    void grow_cluster(std::vector<bool>& sel_left, std::vector<bool>& sel_right) const
    {
        struct Ev {
            cplx a, b;
            bool left;
            std::size_t k;
        };
        std::vector<Ev> all;
        for (std::size_t i = 0; i < sel_left.size(); ++i) {
            all.push_back({left_.alphas[i], left_.betas[i], true, i});
        }
        for (std::size_t j = 0; j < sel_right.size(); ++j) {
            all.push_back({right_.alphas[j], right_.betas[j], false, j});
        }
        auto selected = [&](const Ev& e) { return e.left ? sel_left[e.k] : sel_right[e.k]; };
        bool changed = true;
        while (changed) {
            changed = false;
            for (const Ev& m : all) {
                if (!selected(m)) {
                    continue;
                }
                for (const Ev& e : all) {
                    if (!selected(e) && chordal(m.a, m.b, e.a, e.b) <= kClusterTol) {
                        (e.left ? sel_left[e.k] : sel_right[e.k]) = true;
                        changed = true;
                    }
                }
            }
        }
    }

    /// Minimum-norm solver for S1b·Y·T2bᵀ − T1b·Y·S2bᵀ = G on the shared block.
    void factor_block()
    {
        const Matrix S1 = left_.S.topLeftCorner(s1_, s1_).triangularView<Eigen::Upper>();
        const Matrix T1 = left_.T.topLeftCorner(s1_, s1_).triangularView<Eigen::Upper>();
        const Matrix S2 = right_.S.topLeftCorner(s2_, s2_).triangularView<Eigen::Upper>();
        const Matrix T2 = right_.T.topLeftCorner(s2_, s2_).triangularView<Eigen::Upper>();
        const Index m = s1_ * s2_;
        Matrix K(m, m);
        for (Index l = 0; l < s2_; ++l) {
            for (Index j = 0; j < s2_; ++j) {
                K.block(j * s1_, l * s1_, s1_, s1_) = T2(j, l) * S1 - S2(j, l) * T1;
            }
        }
        block_svd_.compute(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
        block_svd_.setThreshold(std::max(1e-12 * pivot_scale_ / std::max(K.norm(), 1e-300), kEps));
        singular_ = block_svd_.rank() < m;
    }

    Matrix A_, B_, C_, D_;
    SchurPair left_;
    SchurPair right_;
    double pivot_scale_ = 0.0;
    double op_norm_ = 0.0;
    bool singular_ = false;
    Index s1_ = 0;
    Index s2_ = 0;
    Eigen::BDCSVD<Matrix> block_svd_;
};

inline SylvesterSolution solve_generalized_sylvester(const Matrix& A, const Matrix& B, const Matrix& C,
                                                     const Matrix& D, const Matrix& E)
{
    return GeneralizedSylvester(A, B, C, D).solve(E);
}

} // namespace nepv
