#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>

#include "nepv/problem.hpp"
#include "nepv/random.hpp"

namespace nepv {

/// How the n×(n−1) matrix R is chosen.
struct RSpec {
    enum class Kind { random, identity_plus_random_row, explicit_matrix };
    Kind kind = Kind::random;
    std::uint64_t seed = 0;
    Matrix R;

    static RSpec random(std::uint64_t seed) { return {Kind::random, seed, {}}; }
    static RSpec identity_plus_random_row(std::uint64_t seed) { return {Kind::identity_plus_random_row, seed, {}}; }
    static RSpec explicit_matrix(Matrix r) { return {Kind::explicit_matrix, 0, std::move(r)}; }
};

enum class DeltaKind { Delta0, Delta1, Delta2 };

/// Views of z = vec([W; V]) with W of size (n−1)×n and V of size n×n.
inline Eigen::Map<const Matrix> as_block_matrix(const Vector& z, Index n)
{
    if (z.size() != (2 * n - 1) * n) {
        throw DimensionMismatch("vector length must equal 2n²−n");
    }
    return {z.data(), 2 * n - 1, n};
}

inline Matrix v_block(const Vector& z, Index n) { return as_block_matrix(z, n).bottomRows(n); }
inline Matrix w_block(const Vector& z, Index n) { return as_block_matrix(z, n).topRows(n - 1); }

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

/// Replaces V by (V + Vᵀ)/2.
inline Vector project_onto_Z(const Vector& z, Index n)
{
    Vector out = z;
    Eigen::Map<Matrix> Z(out.data(), 2 * n - 1, n);
    if (z.size() != Z.size()) {
        throw DimensionMismatch("project_onto_Z: vector length must equal 2n²−n");
    }
    Matrix V = Z.bottomRows(n);
    Z.bottomRows(n) = 0.5 * (V + V.transpose());
    return out;
}

inline double v_asymmetry(const Vector& z, Index n)
{
    const Matrix V = v_block(z, n);
    const double nv = V.norm();
    return nv == 0.0 ? 0.0 : (V - V.transpose()).norm() / nv;
}

/// Distance to 𝒵 relative to ‖z‖, so that vectors with V = 0 pass despite
/// rounding noise in V.
inline bool in_Z(const Vector& z, Index n, double tol = 1e-10)
{
    const Matrix V = v_block(z, n);
    return (V - V.transpose()).norm() <= tol * z.norm();
}

/// Compact linearization of a NEPv: R, the bordered matrices Â, B̂, Ĉ of
/// order 2n−1 and matrix-free access to the operator determinants
///   Δ₀ = B⊗Ĉ − C⊗B̂,  Δ₁ = A⊗Ĉ − C⊗Â,  Δ₂ = B⊗Â − A⊗B̂.
class CompactLinearization {
public:
    CompactLinearization(NepvProblem problem, const RSpec& spec) : pb_(std::move(problem)), seed_(spec.seed)
    {
        const Index n = pb_.n();
        switch (spec.kind) {
        case RSpec::Kind::random: {
            Rng rng(spec.seed);
            R_ = rng.matrix(n, n - 1);
            break;
        }
        case RSpec::Kind::identity_plus_random_row: {
            Rng rng(spec.seed);
            R_ = Matrix::Zero(n, n - 1);
            R_.topRows(n - 1).setIdentity();
            for (Index j = 0; j < n - 1; ++j) {
                R_(n - 1, j) = rng.complex_normal();
            }
            break;
        }
        case RSpec::Kind::explicit_matrix:
            if (spec.R.rows() != n || spec.R.cols() != n - 1) {
                throw DimensionMismatch("R must be n×(n−1)");
            }
            R_ = spec.R;
            break;
        }
        if (rank_estimate(R_, 1e-12) != n - 1) {
            throw RankDeficientR("R does not have full column rank");
        }
        ra_ = pb_.A() * R_;
        rb_ = pb_.B() * R_;
        rc_ = pb_.C() * R_;
        Ahat_ = assemble(ra_, pb_.P());
        Bhat_ = assemble(rb_, Matrix::Zero(n, n));
        Chat_ = assemble(rc_, pb_.Q());
        auto hnorm = [](const Matrix& m) {
            return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
        };
        nAhat_ = hnorm(Ahat_);
        nBhat_ = hnorm(Bhat_);
        nChat_ = hnorm(Chat_);
    }

    [[nodiscard]] const NepvProblem& problem() const { return pb_; }
    [[nodiscard]] Index n() const { return pb_.n(); }
    /// Length of the big vectors, 2n² − n.
    [[nodiscard]] Index size() const { return (2 * n() - 1) * n(); }
    [[nodiscard]] const Matrix& R() const { return R_; }
    [[nodiscard]] const Matrix& Ahat() const { return Ahat_; }
    [[nodiscard]] const Matrix& Bhat() const { return Bhat_; }
    [[nodiscard]] const Matrix& Chat() const { return Chat_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    /// Upper bound on the spectral norm of Δ.
    [[nodiscard]] double norm_bound(DeltaKind k) const
    {
        switch (k) {
        case DeltaKind::Delta0: return pb_.norm_B() * nChat_ + pb_.norm_C() * nBhat_;
        case DeltaKind::Delta1: return pb_.norm_A() * nChat_ + pb_.norm_C() * nAhat_;
        case DeltaKind::Delta2: return pb_.norm_B() * nAhat_ + pb_.norm_A() * nBhat_;
        }
        return 0.0;
    }

    [[nodiscard]] Vector apply(DeltaKind k, const Vector& z) const
    {
        const Index n = this->n();
        const auto Z = as_block_matrix(z, n);
        Matrix Y;
        switch (k) {
        case DeltaKind::Delta0:
            Y = hat_mul(rc_, &pb_.Q(), Z) * pb_.B().transpose() - hat_mul(rb_, nullptr, Z) * pb_.C().transpose();
            break;
        case DeltaKind::Delta1:
            Y = hat_mul(rc_, &pb_.Q(), Z) * pb_.A().transpose() - hat_mul(ra_, &pb_.P(), Z) * pb_.C().transpose();
            break;
        case DeltaKind::Delta2:
            Y = hat_mul(ra_, &pb_.P(), Z) * pb_.B().transpose() - hat_mul(rb_, nullptr, Z) * pb_.A().transpose();
            break;
        }
        return vec(Y);
    }

    /// (Δ₀z, Δ₁z), sharing the product with Ĉ.
    [[nodiscard]] std::pair<Vector, Vector> apply_pair(const Vector& z) const
    {
        const Index n = this->n();
        const auto Z = as_block_matrix(z, n);
        const Matrix cz = hat_mul(rc_, &pb_.Q(), Z);
        const Matrix cT = pb_.C().transpose();
        Matrix Y0 = cz * pb_.B().transpose();
        Y0.noalias() -= hat_mul(rb_, nullptr, Z) * cT;
        Matrix Y1 = cz * pb_.A().transpose();
        Y1.noalias() -= hat_mul(ra_, &pb_.P(), Z) * cT;
        return {vec(Y0), vec(Y1)};
    }

    /// ‖V‖ ≤ tol‖z‖ and RW symmetric.
    [[nodiscard]] bool in_W(const Vector& z, double tol = 1e-10) const
    {
        const Index n = this->n();
        const double nz = z.norm();
        if (v_block(z, n).norm() > tol * nz) {
            return false;
        }
        const Matrix rw = R_ * w_block(z, n);
        return (rw - rw.transpose()).norm() <= tol * rw.norm();
    }

private:
    Matrix assemble(const Matrix& mr, const Matrix& corner) const
    {
        const Index n = this->n();
        Matrix h = Matrix::Zero(2 * n - 1, 2 * n - 1);
        h.block(0, n - 1, n - 1, n) = mr.adjoint();
        h.block(n - 1, 0, n, n - 1) = mr;
        h.block(n - 1, n - 1, n, n) = corner;
        return h;
    }

    /// [[0, (MR)ᴴ], [MR, corner]]·Z without forming the bordered matrix.
    Matrix hat_mul(const Matrix& mr, const Matrix* corner, const Eigen::Map<const Matrix>& Z) const
    {
        const Index n = this->n();
        Matrix out(2 * n - 1, n);
        out.topRows(n - 1).noalias() = mr.adjoint() * Z.bottomRows(n);
        out.bottomRows(n).noalias() = mr * Z.topRows(n - 1);
        if (corner != nullptr) {
            out.bottomRows(n).noalias() += *corner * Z.bottomRows(n);
        }
        return out;
    }

    NepvProblem pb_;
    std::uint64_t seed_ = 0;
    Matrix R_;
    Matrix ra_, rb_, rc_; // A·R, B·R, C·R
    Matrix Ahat_, Bhat_, Chat_;
    double nAhat_ = 0.0, nBhat_ = 0.0, nChat_ = 0.0;
};

inline CompactLinearization build_linearization(const NepvProblem& pb, const RSpec& spec)
{
    return {pb, spec};
}

inline Vector delta_apply(const CompactLinearization& lin, DeltaKind k, const Vector& z) { return lin.apply(k, z); }

struct ExplicitDeltas {
    HermitianMatrix D0, D1, D2;
};

namespace detail {
inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return k;
}
} // namespace detail

/// Dense Δ₀, Δ₁, Δ₂ (only for n ≤ 12).
inline ExplicitDeltas explicit_deltas(const CompactLinearization& lin)
{
    if (lin.n() > 12) {
        throw TooLarge("explicit_deltas: n > 12");
    }
    const NepvProblem& pb = lin.problem();
    using detail::kron;
    return {HermitianMatrix(kron(pb.B(), lin.Chat()) - kron(pb.C(), lin.Bhat()), "Delta0"),
            HermitianMatrix(kron(pb.A(), lin.Chat()) - kron(pb.C(), lin.Ahat()), "Delta1"),
            HermitianMatrix(kron(pb.B(), lin.Ahat()) - kron(pb.A(), lin.Bhat()), "Delta2")};
}

/// Solves (Δ₁ − σΔ₀)z = rhs through the Sylvester form
///   Ĉ·Z·Γᵀ − Γ̂·Z·Cᵀ = unvec(rhs),  Γ = A − σB,  Γ̂ = Â − σB̂.
/// The factorization is done once per shift.
class ShiftedSolver {
public:
    ShiftedSolver(const CompactLinearization& lin, cplx sigma)
        : n_(lin.n()),
          sigma_(sigma),
          solver_(lin.Chat(), lin.problem().A() - sigma * lin.problem().B(), lin.Ahat() - sigma * lin.Bhat(),
                  lin.problem().C())
    {
    }

    [[nodiscard]] cplx sigma() const { return sigma_; }
    [[nodiscard]] bool singular() const { return solver_.singular(); }

    [[nodiscard]] Vector solve(const Vector& rhs, SylvesterMode* mode = nullptr) const
    {
        const auto E = as_block_matrix(rhs, n_);
        try {
            SylvesterSolution s = solver_.solve(E);
            if (mode != nullptr) {
                *mode = s.mode;
            }
            return vec(s.X);
        } catch (const SingularOperator&) {
            throw ShiftIsEigenvalue("shift is an eigenvalue of the singular pencil; choose another shift");
        }
    }

private:
    Index n_;
    cplx sigma_;
    GeneralizedSylvester solver_;
};

inline Vector shifted_solve(const CompactLinearization& lin, cplx sigma, const Vector& rhs)
{
    return ShiftedSolver(lin, sigma).solve(rhs);
}

struct Delta0Probe {
    enum class Kind { regular, singular_low_rank_C, singular_R_alignment };
    Kind kind = Kind::regular;
    Index rank_C = 0;
    std::optional<cplx> alignment_value; ///< λ with CRx = λBRx, if found
};

inline const char* to_string(Delta0Probe::Kind k)
{
    switch (k) {
    case Delta0Probe::Kind::regular: return "regular";
    case Delta0Probe::Kind::singular_low_rank_C: return "singular_low_rank_C";
    case Delta0Probe::Kind::singular_R_alignment: return "singular_R_alignment";
    }
    return "regular";
}

/// Detects the two known sources of a singular Δ₀: rank(C) < n−1, and an
/// eigenvalue of the rectangular pencil (CR, BR). The second test compresses
/// the pencil with a fixed random left factor and checks each candidate
/// eigenpair on the full rectangular pencil; a `regular` verdict is generic,
/// not certified.
inline Delta0Probe delta0_probe(const CompactLinearization& lin, double tol = 1e-10)
{
    const NepvProblem& pb = lin.problem();
    const Index n = pb.n();
    Delta0Probe out;
    out.rank_C = rank_estimate(pb.C(), tol);
    if (out.rank_C < n - 1) {
        out.kind = Delta0Probe::Kind::singular_low_rank_C;
        return out;
    }
    const Matrix cr = pb.C() * lin.R();
    const Matrix br = pb.B() * lin.R();
    Rng rng(0x5eed);
    const Matrix G = rng.orthonormal(n, n - 1).adjoint();
    const double scale_c = cr.norm();
    const double scale_b = br.norm();
    for (const GepPair& p : dense_gep_eig(G * cr, G * br, GepOptions{true})) {
        if (p.kind != EigenKind::finite) {
            continue;
        }
        // The compressed eigenvector is the only candidate null vector of
        // the rectangular pencil at a simple eigenvalue.
        const double res = (cr * p.x - p.lambda * (br * p.x)).norm();
        if (res <= tol * (scale_c + std::abs(p.lambda) * scale_b) * p.x.norm()) {
            out.kind = Delta0Probe::Kind::singular_R_alignment;
            out.alignment_value = p.lambda;
            return out;
        }
    }
    return out;
}

/// Least-squares μ from Δ₂z ≈ μΔ₀z.
inline cplx mu_from_deltas(const CompactLinearization& lin, const Vector& z)
{
    const Vector d0 = lin.apply(DeltaKind::Delta0, z);
    const double den = d0.squaredNorm();
    if (den == 0.0) {
        return {0.0, 0.0};
    }
    return d0.dot(lin.apply(DeltaKind::Delta2, z)) / den;
}

/// Reads an eigenvector z of (Δ₁, Δ₀) and decides what it represents.
inline CandidateSolution classify_eigvec(const CompactLinearization& lin, cplx lambda, const Vector& z,
                                         const Tolerances& tol = {})
{
    const NepvProblem& pb = lin.problem();
    const Index n = pb.n();
    const double nz = z.norm();
    if (nz == 0.0) {
        throw ZeroVector("classify_eigvec: z = 0");
    }
    const auto Z = as_block_matrix(z, n);
    const Matrix V = Z.bottomRows(n);
    const double nv = V.norm();

    auto spurious = [&](Classification c) {
        // Representative vector: the dominant row direction of Z (Z = y·vᵀ).
        Eigen::BDCSVD<Matrix> svd(Matrix(Z), Eigen::ComputeThinV);
        Vector v = svd.matrixV().col(0).conjugate();
        CandidateSolution s;
        s.lambda = lambda;
        s.mu = mu_from_deltas(lin, z);
        normalize_b(pb, v);
        s.v = v;
        const Residuals r = nepv_residual(pb, lambda, s.mu, v);
        s.residual_nepv = r.nepv;
        s.residual_mu = r.mu;
        s.classification = c;
        return s;
    };

    if (nv <= 1e-8 * nz) {
        return spurious(Classification::spurious_right_rmep);
    }
    if ((V - V.transpose()).norm() > 1e-6 * nv) {
        // A repeated eigenvalue can yield Z = y·vᵀ with y ≠ v (C = 0 is the
        // extreme case). The NEPv residual of v decides.
        CandidateSolution c = spurious(Classification::spurious_left_rmep);
        if (std::abs(lambda.imag()) <= tol.real * (1.0 + std::abs(lambda.real()))) {
            CandidateSolution g = verify_candidate(pb, cplx(lambda.real(), 0.0), c.v, tol);
            if (g.classification == Classification::genuine) {
                return g;
            }
        }
        return c;
    }
    if (std::abs(lambda.imag()) > tol.real * (1.0 + std::abs(lambda.real()))) {
        return spurious(Classification::spurious_complex);
    }
    const Matrix Vs = 0.5 * (V + V.transpose());
    Eigen::BDCSVD<Matrix> svd(Vs, Eigen::ComputeThinU);
    const RealVector& s = svd.singularValues();
    Vector v = svd.matrixU().col(0);
    CandidateSolution c = verify_candidate(pb, lambda, v, tol);
    if (s.size() > 1 && s(1) > 1e-6 * s(0)) {
        c.classification = Classification::unverified;
    }
    return c;
}

/// Dense 𝐀 − σ𝐁 of order n(n−1)/2 whose nonsingularity makes 𝒵 invariant
/// under the shift-invert operator.
inline Matrix lemma41_pencil(const CompactLinearization& lin, cplx sigma)
{
    const NepvProblem& pb = lin.problem();
    const Index n = pb.n();
    if (n > 12) {
        throw TooLarge("lemma41_pencil: n > 12");
    }
    const Index ell = n * (n - 1) / 2;
    const Matrix gamma = pb.A() - sigma * pb.B();
    const Matrix& C = pb.C();
    const Matrix& R = lin.R();
    Matrix out(ell, ell);
    Index col = 0;
    // Columns: X = e_i e_jᵀ − e_j e_iᵀ for i < j. Rows: entries (i, j), i ≤ j,
    // of Rᴴ(C X Γᵀ − Γ X Cᵀ)R̄.
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < j; ++i) {
            Matrix X = Matrix::Zero(n, n);
            X(i, j) = 1.0;
            X(j, i) = -1.0;
            const Matrix Y = R.adjoint() * (C * X * gamma.transpose() - gamma * X * C.transpose()) * R.conjugate();
            Index row = 0;
            for (Index jj = 0; jj < n - 1; ++jj) {
                for (Index ii = 0; ii <= jj; ++ii) {
                    out(row++, col) = Y(ii, jj);
                }
            }
            ++col;
        }
    }
    return out;
}

} // namespace nepv
