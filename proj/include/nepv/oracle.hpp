#pragma once

// Ground truth for small problems: the full spectrum of the explicit Δ pencil
// and a multistart self-consistent field iteration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "nepv/linearization.hpp"

namespace nepv {

struct ReferenceEntry {
    cplx lambda;
    cplx mu;                 ///< least-squares μ from Δ₂z ≈ μΔ₀z
    Vector z;                ///< unit 2-norm
    double delta_residual;   ///< ‖Δ₁z − λΔ₀z‖ / ((‖Δ₁‖ + |λ|‖Δ₀‖)‖z‖)
    CandidateSolution candidate;
};

struct ReferenceSpectrum {
    std::vector<ReferenceEntry> entries;
    bool singular = false;
    Index deflated = 0; ///< dimension of the removed common null space

    [[nodiscard]] std::vector<CandidateSolution> genuine(double dedup = 1e-6) const
    {
        std::vector<CandidateSolution> out;
        for (const auto& e : entries) {
            if (e.candidate.classification != Classification::genuine) {
                continue;
            }
            const bool dup = std::any_of(out.begin(), out.end(), [&](const CandidateSolution& c) {
                return same_solution(c, e.candidate, dedup);
            });
            if (!dup) {
                out.push_back(e.candidate);
            }
        }
        std::sort(out.begin(), out.end(),
                  [](const CandidateSolution& a, const CandidateSolution& b) { return a.lambda.real() < b.lambda.real(); });
        return out;
    }
};

namespace detail {

/// Orthonormal basis of 𝒵 (W free, V symmetric) in vec coordinates.
inline Matrix z_basis(Index n)
{
    const Index rows = 2 * n - 1;
    const Index dim = (n - 1) * n + n * (n + 1) / 2;
    Matrix out = Matrix::Zero(rows * n, dim);
    Index c = 0;
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n - 1; ++i) {
            out(j * rows + i, c++) = 1.0;
        }
    }
    const double h = std::sqrt(0.5);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j; i < n; ++i) {
            if (i == j) {
                out(j * rows + n - 1 + i, c) = 1.0;
            } else {
                out(j * rows + n - 1 + i, c) = h;
                out(i * rows + n - 1 + j, c) = h;
            }
            ++c;
        }
    }
    return out;
}

} // namespace detail

/// Dense QZ on (Δ₁, Δ₀). A singular pencil is first compressed onto the
/// complement of the common null space of Δ₀ and Δ₁.
inline ReferenceSpectrum dense_reference_solve(const CompactLinearization& lin, const Tolerances& tol = {})
{
    if (lin.n() > 8) {
        throw TooLarge("dense_reference_solve: n > 8");
    }
    const ExplicitDeltas D = explicit_deltas(lin);
    const Matrix& D0 = D.D0.value();
    const Matrix& D1 = D.D1.value();
    const Index N = lin.size();

    ReferenceSpectrum out;
    std::vector<GepPair> pairs;
    Matrix basis = Matrix::Identity(N, N);
    const DeflatedPencil d = deflate_common_nullspace(D1, D0, 1e-10);
    if (d.removed > 0) {
        out.singular = true;
        out.deflated = d.removed;
        basis = d.right;
        pairs = dense_gep_eig(d.H1, d.H0, GepOptions{true});
    } else {
        try {
            pairs = dense_gep_eig(D1, D0);
        } catch (const SingularPencil&) {
            out.singular = true;
            pairs = dense_gep_eig(D1, D0, GepOptions{true});
        }
    }
    const Matrix zb = detail::z_basis(lin.n());

    const double n0 = lin.norm_bound(DeltaKind::Delta0);
    const double n1 = lin.norm_bound(DeltaKind::Delta1);
    for (const GepPair& p : pairs) {
        if (p.kind != EigenKind::finite) {
            continue;
        }
        ReferenceEntry e;
        e.lambda = p.lambda;
        e.z = (basis * p.x).normalized();
        e.mu = mu_from_deltas(lin, e.z);
        e.delta_residual = (D1 * e.z - p.lambda * (D0 * e.z)).norm() / (n1 + std::abs(p.lambda) * n0);
        e.candidate = classify_eigvec(lin, p.lambda, e.z, tol);
        // A repeated eigenvalue leaves QZ free to return any vector of the
        // eigenspace. Retry with the null vector of the pencil restricted to 𝒵.
        if (e.candidate.classification != Classification::genuine &&
            std::abs(p.lambda.imag()) <= tol.real * (1.0 + std::abs(p.lambda))) {
            const Matrix M = (D1 - p.lambda.real() * D0) * zb;
            Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinV);
            const Vector zz = (zb * svd.matrixV().col(M.cols() - 1)).normalized();
            CandidateSolution c = classify_eigvec(lin, p.lambda, zz, tol);
            if (c.classification == Classification::genuine) {
                e.z = zz;
                e.mu = mu_from_deltas(lin, e.z);
                e.delta_residual =
                    (D1 * e.z - p.lambda * (D0 * e.z)).norm() / (n1 + std::abs(p.lambda) * n0);
                e.candidate = std::move(c);
            }
        }
        out.entries.push_back(std::move(e));
    }
    return out;
}

struct ScfConfig {
    Index max_outer = 500;
    double damping = 1.0;
    double min_damping = 0.125;
    std::optional<Index> branch; ///< follow only this eigenpair index (ascending order); all when empty
    double tol_fix = 1e-12;
    double keep_residual = 1e-10;
};

struct ScfResult {
    std::vector<CandidateSolution> solutions;
    Index attempts = 0;
    Index dropped = 0; ///< runs that did not reach the residual threshold
};

/// Multistart SCF: v ← (1−d)v + d·(j-th eigenvector of (A − μ(v)C, B)).
inline ScfResult scf_multistart(const NepvProblem& pb, Index trials, const ScfConfig& cfg = {},
                                std::uint64_t seed = 1)
{
    if (trials < 1) {
        throw InvalidArgument("scf_multistart: trials must be at least 1");
    }
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0) || !(cfg.tol_fix > 0.0)) {
        throw InvalidArgument("scf_multistart: damping in (0, 1] and tol_fix > 0 required");
    }
    const Index n = pb.n();
    const HermitianMatrix Bh(pb.B(), "B");
    Rng rng(seed);
    ScfResult out;

    std::vector<Index> branches;
    if (cfg.branch) {
        branches.push_back(*cfg.branch);
    } else {
        for (Index j = 0; j < n; ++j) {
            branches.push_back(j);
        }
    }

    for (Index t = 0; t < trials; ++t) {
        const Vector v0 = rng.vector(n);
        for (Index j : branches) {
            ++out.attempts;
            Vector v = v0;
            normalize_b(pb, v);
            double d = cfg.damping;
            double prev_step = -1.0;
            Vector prev_v = v;
            for (Index k = 0; k < cfg.max_outer; ++k) {
                const double mu = mu_of(pb, v);
                const HermitianEig eig = hermitian_definite_eig(HermitianMatrix(pb.A() - mu * pb.C(), "A-muC"), Bh);
                Vector u = eig.vectors.col(j);
                const cplx s = u.dot(pb.B() * v);
                if (std::abs(s) > 0.0) {
                    u *= s / std::abs(s);
                }
                Vector next = (1.0 - d) * v + d * u;
                next /= std::sqrt(std::abs(next.dot(pb.B() * next)));
                const double step = (next - v).norm();
                // Two-cycle: the iterate returns close to where it was two steps ago.
                if (prev_step > 0.0 && (next - prev_v).norm() < prev_step / 10.0 && step > cfg.tol_fix &&
                    d > cfg.min_damping) {
                    d = std::max(cfg.min_damping, d / 2.0);
                }
                prev_v = v;
                prev_step = step;
                v = next;
                if (step <= cfg.tol_fix) {
                    break;
                }
            }
            const double mu = mu_of(pb, v);
            const cplx lambda = v.dot((pb.A() - mu * pb.C()) * v) / v.dot(pb.B() * v);
            CandidateSolution c = verify_candidate(pb, cplx(lambda.real(), 0.0), v);
            if (c.residual_nepv > cfg.keep_residual) {
                ++out.dropped;
                continue;
            }
            c.classification = Classification::genuine;
            const bool dup = std::any_of(out.solutions.begin(), out.solutions.end(),
                                         [&](const CandidateSolution& o) { return same_solution(o, c); });
            if (!dup) {
                out.solutions.push_back(std::move(c));
            }
        }
    }
    std::sort(out.solutions.begin(), out.solutions.end(),
              [](const CandidateSolution& a, const CandidateSolution& b) { return a.lambda.real() < b.lambda.real(); });
    return out;
}

struct CrossValidation {
    Index matched = 0;
    Index missing = 0;
    Index extra = 0;
    std::vector<std::pair<Index, Index>> pairs; ///< (found index, reference index)
    std::vector<Index> missing_indices;         ///< into reference
    std::vector<Index> extra_indices;           ///< into found
};

inline CrossValidation cross_validate(const std::vector<CandidateSolution>& found,
                                      const std::vector<CandidateSolution>& reference, double tol = 1e-6)
{
    CrossValidation r;
    std::vector<bool> used(found.size(), false);
    for (std::size_t i = 0; i < reference.size(); ++i) {
        std::optional<std::size_t> hit;
        double best = 0.0;
        for (std::size_t j = 0; j < found.size(); ++j) {
            if (used[j] || !same_solution(reference[i], found[j], tol)) {
                continue;
            }
            const double d = std::abs(reference[i].lambda - found[j].lambda);
            if (!hit || d < best) {
                hit = j;
                best = d;
            }
        }
        if (hit) {
            used[*hit] = true;
            r.pairs.emplace_back(static_cast<Index>(*hit), static_cast<Index>(i));
            ++r.matched;
        } else {
            r.missing_indices.push_back(static_cast<Index>(i));
            ++r.missing;
        }
    }
    for (std::size_t j = 0; j < found.size(); ++j) {
        if (!used[j]) {
            r.extra_indices.push_back(static_cast<Index>(j));
            ++r.extra;
        }
    }
    return r;
}

} // namespace nepv
