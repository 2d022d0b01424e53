#pragma once

// Shift-invert Arnoldi on the pencil (Δ₁, Δ₀): the filtering variant keeps
// every basis vector in 𝒵, the standard variant does not. Ritz values come
// from the Hessenberg matrix or from the two-sided projection (ZᴴΔ₁Z, ZᴴΔ₀Z).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "nepv/linearization.hpp"

namespace nepv {

/// Random unit vector of 𝒵: Gaussian W, symmetrized Gaussian V.
inline Vector random_start_in_Z(Index n, std::uint64_t seed)
{
    Rng rng(seed);
    Matrix Z(2 * n - 1, n);
    Z.topRows(n - 1) = rng.matrix(n - 1, n);
    const Matrix G = rng.matrix(n, n);
    Z.bottomRows(n) = 0.5 * (G + G.transpose());
    Vector z = vec(Z);
    return z / z.norm();
}

/// Random unit vector with no structure.
inline Vector random_start(Index n, std::uint64_t seed)
{
    Rng rng(seed);
    Vector z = rng.vector((2 * n - 1) * n);
    return z / z.norm();
}

struct RitzValue {
    cplx theta;                ///< eigenvalue of the projected operator
    cplx lambda;               ///< approximation of an eigenvalue of (Δ₁, Δ₀)
    double residual_estimate;  ///< NaN when not available
    Index history_id = -1;
    Vector y;                  ///< coordinates of the Ritz vector in the basis
};

struct RitzSet {
    Index iteration = 0;
    std::vector<RitzValue> values;
    bool singular = false;        ///< two-sided pencil judged singular
    double sigma_min_ratio = 1.0; ///< two-sided singularity probe
    Index deflated = 0;
};

struct KrylovState {
    Matrix basis;      ///< N×m, orthonormal columns
    Matrix H;          ///< m×(m−1) extended Hessenberg, or m×m after breakdown
    cplx sigma;
    Index iteration = 0;
    bool invariant = false; ///< breakdown: the basis spans an invariant subspace
    double beta = 0.0;      ///< last subdiagonal entry

    /// Square part of H used for Ritz values.
    [[nodiscard]] Matrix square_h() const { return H.topLeftCorner(iteration, iteration); }
};

struct ArnoldiOptions {
    bool project = true;          ///< filtering: project every new vector onto 𝒵
    bool two_sided = false;       ///< accumulate ZᴴΔ₁Z and ZᴴΔ₀Z
    bool check_solves = false;    ///< measure ‖(Δ₁ − σΔ₀)ẑ − Δ₀z‖ each step
    double breakdown_tol = 1e-14; ///< relative to ‖ẑ‖ before orthogonalization
};

/// Incremental Arnoldi process; one call of `step` is one shift-invert
/// iteration with two modified Gram–Schmidt passes.
class ArnoldiProcess {
public:
    ArnoldiProcess(const CompactLinearization& lin, cplx sigma, const Vector& z0, Index k_max,
                   const ArnoldiOptions& opt = {})
        : lin_(lin), solver_(lin, sigma), opt_(opt), k_max_(k_max)
    {
        if (k_max < 1) {
            throw InvalidArgument("Arnoldi: k_max must be at least 1");
        }
        if (z0.size() != lin.size()) {
            throw DimensionMismatch("Arnoldi: start vector has the wrong length");
        }
        const double nz = z0.norm();
        if (nz == 0.0) {
            throw ZeroVector("Arnoldi: start vector is zero");
        }
        if (opt_.project && !in_Z(z0, lin.n())) {
            throw InvalidArgument("Arnoldi: start vector must lie in Z when projecting");
        }
        state_.sigma = sigma;
        state_.basis = Matrix::Zero(lin.size(), k_max + 1);
        state_.H = Matrix::Zero(k_max + 1, k_max);
        state_.basis.col(0) = z0 / nz;
        if (opt_.two_sided) {
            H0_ = Matrix::Zero(k_max + 1, k_max + 1);
            H1_ = Matrix::Zero(k_max + 1, k_max + 1);
        }
        append_projections(0);
    }

    [[nodiscard]] Index iteration() const { return state_.iteration; }
    [[nodiscard]] Index basis_size() const { return state_.invariant ? state_.iteration : state_.iteration + 1; }
    [[nodiscard]] bool invariant() const { return state_.invariant; }
    [[nodiscard]] bool done() const { return state_.invariant || state_.iteration >= k_max_; }
    [[nodiscard]] double last_v_asymmetry() const { return last_asym_; }
    [[nodiscard]] double last_solve_residual() const { return last_solve_res_; }

    /// Returns false on breakdown (no new vector appended).
    bool step()
    {
        if (done()) {
            return false;
        }
        const Index k = state_.iteration; // new vector gets index k + 1
        Vector w = solver_.solve(d0_);
        if (opt_.check_solves) {
            const auto D = lin_.apply_pair(w);
            const Vector lhs = D.second - state_.sigma * D.first;
            const double scale = (lin_.norm_bound(DeltaKind::Delta1) +
                                  std::abs(state_.sigma) * lin_.norm_bound(DeltaKind::Delta0)) *
                                 w.norm();
            last_solve_res_ = (lhs - d0_).norm() / scale;
        }
        last_asym_ = v_asymmetry(w, lin_.n());

        const double wnorm = w.norm();
        auto Z = state_.basis.leftCols(k + 1);
        Vector h = Vector::Zero(k + 1);
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i <= k; ++i) {
                const cplx c = Z.col(i).dot(w);
                w -= c * Z.col(i);
                h(i) += c;
            }
        }
        const double beta = w.norm();
        state_.H.col(k).head(k + 1) = h;
        state_.beta = beta;
        if (beta <= opt_.breakdown_tol * wnorm) {
            state_.invariant = true;
            state_.iteration = k + 1;
            state_.H(k + 1, k) = 0.0;
            return false;
        }
        state_.H(k + 1, k) = beta;
        w /= beta;
        if (opt_.project) {
            w = project_onto_Z(w, lin_.n());
        }
        state_.basis.col(k + 1) = w;
        state_.iteration = k + 1;
        append_projections(k + 1);
        return true;
    }

    /// Snapshot with the basis and H trimmed to the current size.
    [[nodiscard]] KrylovState state() const
    {
        KrylovState s;
        const Index m = basis_size();
        const Index k = state_.iteration;
        s.basis = state_.basis.leftCols(m);
        s.H = state_.H.topLeftCorner(state_.invariant ? k : k + 1, k);
        s.sigma = state_.sigma;
        s.iteration = k;
        s.invariant = state_.invariant;
        s.beta = state_.beta;
        return s;
    }

    [[nodiscard]] Eigen::Ref<const Matrix> basis() const { return state_.basis.leftCols(basis_size()); }
    [[nodiscard]] Matrix hessenberg_square() const
    {
        return state_.H.topLeftCorner(state_.iteration, state_.iteration);
    }
    [[nodiscard]] double beta() const { return state_.beta; }
    [[nodiscard]] Matrix H0() const { return H0_.topLeftCorner(basis_size(), basis_size()); }
    [[nodiscard]] Matrix H1() const { return H1_.topLeftCorner(basis_size(), basis_size()); }
    [[nodiscard]] const CompactLinearization& linearization() const { return lin_; }

private:
    void append_projections(Index j)
    {
        const auto z = state_.basis.col(j);
        if (!opt_.two_sided) {
            d0_ = lin_.apply(DeltaKind::Delta0, z);
            return;
        }
        auto D = lin_.apply_pair(z);
        d0_ = std::move(D.first);
        const Vector& d1 = D.second;
        Matrix DD(d0_.size(), 2);
        DD.col(0) = d0_;
        DD.col(1) = d1;
        const Matrix a = state_.basis.leftCols(j + 1).adjoint() * DD;
        // Δ₀, Δ₁ Hermitian: the new row is the conjugate of the new column.
        H0_.col(j).head(j + 1) = a.col(0);
        H1_.col(j).head(j + 1) = a.col(1);
        H0_.row(j).head(j + 1) = a.col(0).adjoint();
        H1_.row(j).head(j + 1) = a.col(1).adjoint();
        H0_(j, j) = H0_(j, j).real();
        H1_(j, j) = H1_(j, j).real();
    }

    const CompactLinearization& lin_;
    ShiftedSolver solver_;
    ArnoldiOptions opt_;
    Index k_max_;
    KrylovState state_;
    Vector d0_;
    Matrix H0_, H1_;
    double last_asym_ = 0.0;
    double last_solve_res_ = std::numeric_limits<double>::quiet_NaN();
};

/// Ritz values of the shift-inverted operator: λ = σ + 1/θ.
inline RitzSet ritz_values(const Matrix& H_square, double beta, cplx sigma, Index iteration = 0)
{
    RitzSet rs;
    rs.iteration = iteration;
    const Index k = H_square.rows();
    if (k == 0) {
        return rs;
    }
    for (const GepPair& p : dense_gep_eig(H_square, Matrix::Identity(k, k), GepOptions{true})) {
        if (p.kind != EigenKind::finite) {
            continue;
        }
        const cplx theta = p.lambda;
        if (std::abs(theta) <= 1e-14) {
            continue;
        }
        RitzValue r;
        r.theta = theta;
        r.lambda = sigma + 1.0 / theta;
        r.y = p.x;
        r.residual_estimate = std::abs(beta * p.x(k - 1)) / std::norm(theta);
        rs.values.push_back(std::move(r));
    }
    return rs;
}

inline RitzSet ritz_values(const KrylovState& state)
{
    return ritz_values(state.square_h(), state.invariant ? 0.0 : state.beta, state.sigma, state.iteration);
}

struct TwoSidedOptions {
    bool allow_deflation = true;  ///< otherwise a singular pencil raises ProjectedPencilSingular
    double singular_ratio = 1e-12;
    double zero_pair_tol = 1e-10;
    std::uint64_t probe_seed = 0x7a11;
};

/// Eigenvalues of the projected pencil (H₁, H₀). A numerically singular
/// pencil is compressed onto the complement of its common null space.
inline RitzSet two_sided_from_projections(const Matrix& H1, const Matrix& H0, double rho_scale,
                                          const TwoSidedOptions& opt = {}, Index iteration = 0)
{
    RitzSet rs;
    rs.iteration = iteration;
    const Index k = H1.rows();
    if (k == 0) {
        return rs;
    }
    Rng rng(opt.probe_seed);
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    const cplx rho = std::polar(rho_scale, phase);
    const RealVector sv = Eigen::BDCSVD<Matrix>(H0 + rho * H1).singularValues();
    rs.sigma_min_ratio = sv(0) > 0.0 ? sv(k - 1) / sv(0) : 0.0;
    rs.singular = rs.sigma_min_ratio < opt.singular_ratio;

    Matrix A = H1;
    Matrix B = H0;
    Matrix right = Matrix::Identity(k, k);
    if (rs.singular) {
        if (!opt.allow_deflation) {
            throw ProjectedPencilSingular("two-sided projected pencil is singular");
        }
        const DeflatedPencil d = deflate_common_nullspace(H1, H0, 1e-10);
        A = d.H1;
        B = d.H0;
        right = d.right;
        rs.deflated = d.removed;
    }
    if (A.rows() == 0) {
        return rs;
    }
    GepOptions gopt;
    gopt.allow_singular = true;
    gopt.zero_tol = opt.zero_pair_tol;
    for (const GepPair& p : dense_gep_eig(A, B, gopt)) {
        if (p.kind != EigenKind::finite) {
            continue;
        }
        RitzValue r;
        r.theta = p.lambda;
        r.lambda = p.lambda;
        r.residual_estimate = std::numeric_limits<double>::quiet_NaN();
        r.y = right * p.x;
        rs.values.push_back(std::move(r));
    }
    return rs;
}

/// Two-sided Ritz values for a basis with columns in 𝒵.
inline RitzSet two_sided_ritz(const CompactLinearization& lin, const KrylovState& state,
                              const TwoSidedOptions& opt = {})
{
    const Matrix& Z = state.basis;
    const Index m = Z.cols();
    Matrix D0(Z.rows(), m), D1(Z.rows(), m);
    for (Index j = 0; j < m; ++j) {
        auto D = lin.apply_pair(Z.col(j));
        D0.col(j) = D.first;
        D1.col(j) = D.second;
    }
    Matrix H0 = Z.adjoint() * D0;
    Matrix H1 = Z.adjoint() * D1;
    const double s0 = std::max(H0.norm(), 1e-300);
    const double s1 = std::max(H1.norm(), 1e-300);
    if ((H0 - H0.adjoint()).norm() > 1e-12 * s0 || (H1 - H1.adjoint()).norm() > 1e-12 * s1) {
        throw InvalidArgument("two_sided_ritz: projected matrices are not Hermitian");
    }
    H0 = 0.5 * (H0 + H0.adjoint()).eval();
    H1 = 0.5 * (H1 + H1.adjoint()).eval();
    const double rho_scale = lin.norm_bound(DeltaKind::Delta0) / lin.norm_bound(DeltaKind::Delta1);
    return two_sided_from_projections(H1, H0, rho_scale, opt, state.iteration);
}

struct LogRecord {
    Index iteration;
    Index track_id;
    cplx lambda;
    double residual_estimate;
    double abs_error_vs_final = std::numeric_limits<double>::quiet_NaN();
};

/// Iteration-indexed Ritz histories.
class ConvergenceLog {
public:
    void append(const LogRecord& r) { records_.push_back(r); }

    /// Fills abs_error_vs_final with the distance to each track's last value.
    void finalize()
    {
        std::map<Index, cplx> last;
        for (const auto& r : records_) {
            last[r.track_id] = r.lambda;
        }
        for (auto& r : records_) {
            r.abs_error_vs_final = std::abs(r.lambda - last[r.track_id]);
        }
    }

    [[nodiscard]] const std::vector<LogRecord>& records() const { return records_; }

private:
    std::vector<LogRecord> records_;
};

/// Matches Ritz values across iterations and detects stabilized tracks.
class RitzTracker {
public:
    struct Track {
        Index id = 0;
        cplx lambda;
        Index stable = 0;
        Index last_seen = -1;
        std::optional<Index> converged_at;
        std::size_t current_index = 0; ///< position in the latest RitzSet
    };

    explicit RitzTracker(double tol_conv = 1e-8, Index stable_needed = 3)
        : tol_(tol_conv), needed_(stable_needed)
    {
    }

    void update(RitzSet& set, ConvergenceLog* log = nullptr)
    {
        const Index it = set.iteration;
        std::vector<std::size_t> alive;
        for (std::size_t t = 0; t < tracks_.size(); ++t) {
            if (tracks_[t].last_seen == last_iteration_ && last_iteration_ >= 0) {
                alive.push_back(t);
            }
        }
        // Capture radius: half the distance to the nearest other live track.
        std::vector<double> cap(alive.size(), std::numeric_limits<double>::infinity());
        for (std::size_t a = 0; a < alive.size(); ++a) {
            for (std::size_t b = 0; b < alive.size(); ++b) {
                if (a != b) {
                    cap[a] = std::min(cap[a], 0.5 * std::abs(tracks_[alive[a]].lambda - tracks_[alive[b]].lambda));
                }
            }
        }
        struct Cand {
            double d;
            std::size_t cur;
            std::size_t a;
        };
        std::vector<Cand> cands;
        for (std::size_t i = 0; i < set.values.size(); ++i) {
            for (std::size_t a = 0; a < alive.size(); ++a) {
                const double d = std::abs(set.values[i].lambda - tracks_[alive[a]].lambda);
                if (d <= cap[a]) {
                    cands.push_back({d, i, a});
                }
            }
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.d < y.d; });
        std::vector<bool> cur_used(set.values.size(), false);
        std::vector<bool> track_used(alive.size(), false);
        for (const Cand& c : cands) {
            if (cur_used[c.cur] || track_used[c.a]) {
                continue;
            }
            cur_used[c.cur] = true;
            track_used[c.a] = true;
            Track& t = tracks_[alive[c.a]];
            const cplx lam = set.values[c.cur].lambda;
            if (std::abs(lam - t.lambda) <= tol_ * (1.0 + std::abs(lam))) {
                ++t.stable;
            } else {
                t.stable = 0;
            }
            if (t.stable >= needed_ && !t.converged_at) {
                t.converged_at = it;
            }
            t.lambda = lam;
            t.last_seen = it;
            t.current_index = c.cur;
            set.values[c.cur].history_id = t.id;
        }
        for (std::size_t i = 0; i < set.values.size(); ++i) {
            if (cur_used[i]) {
                continue;
            }
            Track t;
            t.id = static_cast<Index>(tracks_.size());
            t.lambda = set.values[i].lambda;
            t.last_seen = it;
            t.current_index = i;
            set.values[i].history_id = t.id;
            tracks_.push_back(t);
        }
        last_iteration_ = it;
        if (log != nullptr) {
            for (const auto& v : set.values) {
                log->append({it, v.history_id, v.lambda, v.residual_estimate});
            }
        }
    }

    /// All live tracks count as converged (exact invariant subspace).
    void mark_all_converged()
    {
        for (auto& t : tracks_) {
            if (t.last_seen == last_iteration_ && !t.converged_at) {
                t.converged_at = last_iteration_;
            }
        }
    }

    [[nodiscard]] const std::vector<Track>& tracks() const { return tracks_; }
    [[nodiscard]] Index last_iteration() const { return last_iteration_; }

    [[nodiscard]] bool is_live_converged(const Track& t) const
    {
        return t.last_seen == last_iteration_ && t.converged_at.has_value();
    }

private:
    double tol_;
    Index needed_;
    Index last_iteration_ = -1;
    std::vector<Track> tracks_;
};

enum class Algorithm { filtering, two_sided, standard };

inline const char* to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::filtering: return "filtering";
    case Algorithm::two_sided: return "two-sided";
    case Algorithm::standard: return "standard";
    }
    return "filtering";
}

inline Algorithm algorithm_from_string(const std::string& s)
{
    if (s == "filtering") {
        return Algorithm::filtering;
    }
    if (s == "two-sided" || s == "two_sided") {
        return Algorithm::two_sided;
    }
    if (s == "standard") {
        return Algorithm::standard;
    }
    throw InvalidArgument("unknown algorithm '" + s + "'");
}

/// What to do once the two-sided pencil turns singular.
enum class SingularPolicy {
    stop,    ///< keep the Ritz values of the last regular iteration
    deflate, ///< compress out the common null space and continue
};

/// Per-iteration data handed to observers.
struct IterationInfo {
    Index iteration = 0;
    double v_asymmetry = 0.0;
    double solve_residual = std::numeric_limits<double>::quiet_NaN();
    const RitzSet* ritz = nullptr;
    const ArnoldiProcess* process = nullptr;
};

using Observer = std::function<void(const IterationInfo&)>;

struct SolverConfig {
    Algorithm algorithm = Algorithm::filtering;
    cplx shift = 0.0;
    Index max_iter = 150;
    double tol_conv = 1e-8;
    Tolerances tol;
    std::uint64_t seed = 1; ///< start vector
    RSpec r_spec = RSpec::random(1);
    SingularPolicy singular_policy = SingularPolicy::deflate;
    bool check_solves = false;
    Index nev = 0; ///< stop once this many genuine solutions converged; 0 runs to max_iter
    Observer observer;
};

struct TrackSummary {
    Index track_id;
    cplx lambda;
    std::optional<Index> converged_at;
};

struct SolverResult {
    std::vector<CandidateSolution> solutions; ///< classified, deduplicated, sorted by |λ − σ|
    std::vector<Index> solution_tracks;       ///< track id per solution
    std::vector<std::optional<Index>> solution_converged_at;
    std::vector<double> delta_residuals; ///< ‖(Δ₁ − λΔ₀)z‖ / ((‖Δ₁‖ + |λ|‖Δ₀‖)‖z‖) per solution
    ConvergenceLog log;
    Delta0Probe probe;
    Index iterations = 0;
    bool invariant = false;
    std::optional<Index> singular_at; ///< two-sided: first singular iteration
    std::vector<double> sigma_min_history;
    RitzSet final_ritz;
    Algorithm algorithm = Algorithm::filtering;
    cplx shift;
};

namespace detail {

/// Ritz vectors Z·y for the given values, formed in one pass over the basis.
inline Matrix ritz_vectors(const Eigen::Ref<const Matrix>& basis, const std::vector<const RitzValue*>& values)
{
    Index m = 0;
    for (const RitzValue* v : values) {
        m = std::max(m, v->y.size());
    }
    Matrix Y = Matrix::Zero(m, static_cast<Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) {
        Y.col(static_cast<Index>(j)).head(values[j]->y.size()) = values[j]->y;
    }
    return basis.leftCols(m) * Y;
}

/// V blocks of the Ritz vectors Z·y, one vec(V) per column. Only the n²
/// rows of the basis that hold V are read.
inline Matrix ritz_v_blocks(const Eigen::Ref<const Matrix>& basis, const std::vector<const RitzValue*>& values,
                            Index n)
{
    Index m = 0;
    for (const RitzValue* v : values) {
        m = std::max(m, v->y.size());
    }
    Matrix Y = Matrix::Zero(m, static_cast<Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) {
        Y.col(static_cast<Index>(j)).head(values[j]->y.size()) = values[j]->y;
    }
    const Index rows = 2 * n - 1;
    Matrix out(n * n, Y.cols());
    for (Index c = 0; c < n; ++c) {
        out.middleRows(c * n, n).noalias() = basis.block(c * rows + n - 1, 0, n, m) * Y;
    }
    return out;
}

/// Smallest NEPv residual over the dominant directions of sym(V) and of the
/// rows of V, found by power iteration. A cheap stand-in for classify_eigvec
/// used to skip hopeless candidates; the final verdict always comes from
/// classify_eigvec.
inline double screen_residual(const NepvProblem& pb, cplx lambda, const Matrix& V, const Tolerances& tol)
{
    auto dominant = [&](const Matrix& L, const Matrix& Rt) {
        Index start = 0;
        Rt.colwise().squaredNorm().maxCoeff(&start);
        Vector u = L * Rt.col(start);
        for (int it = 0; it < 8 && u.norm() > 0.0; ++it) {
            u = L * (Rt * u);
            u.normalize();
        }
        if (u.norm() == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return verify_candidate(pb, cplx(lambda.real(), 0.0), u, tol).residual_nepv;
    };
    const Matrix Vs = 0.5 * (V + V.transpose());
    return std::min(dominant(Vs, Vs.adjoint()), dominant(V.transpose(), V.conjugate()));
}

inline void collect_candidates(const CompactLinearization& lin, const RitzTracker& tracker, const RitzSet& set,
                               const Eigen::Ref<const Matrix>& basis, const SolverConfig& cfg, SolverResult& out)
{
    struct Item {
        CandidateSolution c;
        Index track;
        std::optional<Index> at;
        double delta_res;
    };
    std::vector<Item> items;
    std::vector<const RitzTracker::Track*> live;
    std::vector<const RitzValue*> values;
    for (const auto& t : tracker.tracks()) {
        if (tracker.is_live_converged(t)) {
            live.push_back(&t);
            values.push_back(&set.values[t.current_index]);
        }
    }
    const Matrix Zs = ritz_vectors(basis, values);
    for (std::size_t i = 0; i < live.size(); ++i) {
        const RitzTracker::Track& t = *live[i];
        const RitzValue& rv = *values[i];
        const Vector z = Zs.col(static_cast<Index>(i));
        if (z.norm() == 0.0) {
            continue;
        }
        CandidateSolution c = classify_eigvec(lin, rv.lambda, z, cfg.tol);
        const bool dup = std::any_of(items.begin(), items.end(), [&](const Item& o) {
            return o.c.classification == c.classification && same_solution(o.c, c, cfg.tol.dedup);
        });
        if (!dup) {
            const auto D = lin.apply_pair(z);
            const double scale = (lin.norm_bound(DeltaKind::Delta1) +
                                  std::abs(rv.lambda) * lin.norm_bound(DeltaKind::Delta0)) *
                                 z.norm();
            const double dres = (D.second - rv.lambda * D.first).norm() / scale;
            items.push_back({std::move(c), t.id, t.converged_at, dres});
        }
    }
    const cplx s = cfg.shift;
    std::stable_sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
        return std::abs(a.c.lambda - s) < std::abs(b.c.lambda - s);
    });
    for (auto& it : items) {
        out.solutions.push_back(std::move(it.c));
        out.solution_tracks.push_back(it.track);
        out.solution_converged_at.push_back(it.at);
        out.delta_residuals.push_back(it.delta_res);
    }
}

} // namespace detail

/// Runs the configured Arnoldi variant on an existing linearization.
inline SolverResult run_solver(const CompactLinearization& lin, const SolverConfig& cfg)
{
    if (cfg.max_iter < 1 || !(cfg.tol_conv > 0.0) || !(cfg.tol.res > 0.0)) {
        throw InvalidArgument("run_solver: max_iter ≥ 1 and positive tolerances required");
    }
    SolverResult out;
    out.algorithm = cfg.algorithm;
    out.shift = cfg.shift;
    out.probe = delta0_probe(lin);
    const Index n = lin.n();

    ArnoldiOptions aopt;
    aopt.project = cfg.algorithm != Algorithm::standard;
    aopt.two_sided = cfg.algorithm == Algorithm::two_sided;
    aopt.check_solves = cfg.check_solves;
    const Vector z0 = cfg.algorithm == Algorithm::standard ? random_start(n, cfg.seed) : random_start_in_Z(n, cfg.seed);

    ArnoldiProcess proc(lin, cfg.shift, z0, cfg.max_iter, aopt);
    RitzTracker tracker(cfg.tol_conv);
    const double rho_scale = lin.norm_bound(DeltaKind::Delta0) / lin.norm_bound(DeltaKind::Delta1);
    TwoSidedOptions topt;

    RitzSet current;
    Index genuine_found = 0;
    std::map<Index, bool> verified;
    while (!proc.done()) {
        const bool grew = proc.step();
        RitzSet set;
        if (cfg.algorithm == Algorithm::two_sided) {
            set = two_sided_from_projections(proc.H1(), proc.H0(), rho_scale, topt, proc.iteration());
            out.sigma_min_history.push_back(set.sigma_min_ratio);
            if (set.singular && !out.singular_at) {
                out.singular_at = proc.iteration();
                if (cfg.singular_policy == SingularPolicy::stop) {
                    break;
                }
            }
        } else {
            set = ritz_values(proc.hessenberg_square(), proc.invariant() ? 0.0 : proc.beta(), cfg.shift,
                              proc.iteration());
        }
        tracker.update(set, &out.log);
        if (cfg.observer) {
            IterationInfo info;
            info.iteration = proc.iteration();
            info.v_asymmetry = proc.last_v_asymmetry();
            info.solve_residual = proc.last_solve_residual();
            info.ritz = &set;
            info.process = &proc;
            cfg.observer(info);
        }
        current = std::move(set);
        if (!grew) {
            tracker.mark_all_converged();
            break;
        }
        if (cfg.nev > 0) {
            // Converged tracks are re-checked every iteration: a stable
            // eigenvalue can precede an accurate eigenvector.
            genuine_found = 0;
            std::vector<Index> pending;
            std::vector<const RitzValue*> values;
            for (const auto& t : tracker.tracks()) {
                if (!tracker.is_live_converged(t)) {
                    continue;
                }
                const RitzValue& rv = current.values[t.current_index];
                if (std::abs(rv.lambda.imag()) > cfg.tol.real * (1.0 + std::abs(rv.lambda))) {
                    continue; // cannot be genuine
                }
                if (verified[t.id]) {
                    ++genuine_found;
                } else {
                    pending.push_back(t.id);
                    values.push_back(&rv);
                }
            }
            if (!pending.empty() && genuine_found < cfg.nev) {
                const Index n = lin.n();
                const Matrix Vs = detail::ritz_v_blocks(proc.basis(), values, n);
                for (std::size_t i = 0; i < pending.size(); ++i) {
                    const cplx lam = values[i]->lambda;
                    const Matrix V = Eigen::Map<const Matrix>(Vs.col(static_cast<Index>(i)).data(), n, n);
                    if (detail::screen_residual(lin.problem(), lam, V, cfg.tol) > 2.0 * cfg.tol.res) {
                        continue;
                    }
                    const Vector z = proc.basis().leftCols(values[i]->y.size()) * values[i]->y;
                    if (classify_eigvec(lin, lam, z, cfg.tol).classification == Classification::genuine) {
                        verified[pending[i]] = true;
                        ++genuine_found;
                    }
                }
            }
            if (genuine_found >= cfg.nev) {
                break;
            }
        }
    }
    out.iterations = proc.iteration();
    out.invariant = proc.invariant();
    out.log.finalize();
    detail::collect_candidates(lin, tracker, current, proc.basis(), cfg, out);
    out.final_ritz = std::move(current);
    return out;
}

/// Builds the linearization from the configured R and runs the solver.
inline SolverResult run_solver(const NepvProblem& pb, const SolverConfig& cfg)
{
    const CompactLinearization lin(pb, cfg.r_spec);
    return run_solver(lin, cfg);
}

/// Arnoldi with projection onto 𝒵 after every step; Hessenberg Ritz values.
inline std::pair<KrylovState, ConvergenceLog> filtering_arnoldi(const CompactLinearization& lin, cplx sigma,
                                                                const Vector& z0, Index k_max,
                                                                const ArnoldiOptions& opt = {},
                                                                const Observer& observer = {},
                                                                double tol_conv = 1e-8)
{
    ArnoldiOptions o = opt;
    o.project = true;
    ArnoldiProcess proc(lin, sigma, z0, k_max, o);
    RitzTracker tracker(tol_conv);
    ConvergenceLog log;
    while (!proc.done()) {
        const bool grew = proc.step();
        RitzSet set = ritz_values(proc.hessenberg_square(), proc.invariant() ? 0.0 : proc.beta(), sigma,
                                  proc.iteration());
        tracker.update(set, &log);
        if (observer) {
            IterationInfo info{proc.iteration(), proc.last_v_asymmetry(), proc.last_solve_residual(), &set, &proc};
            observer(info);
        }
        if (!grew) {
            break;
        }
    }
    log.finalize();
    return {proc.state(), std::move(log)};
}

/// Arnoldi without the 𝒵 projection, for the singular pencil.
inline std::pair<KrylovState, ConvergenceLog> standard_arnoldi_singular(const CompactLinearization& lin, cplx sigma,
                                                                        const Vector& z0, Index k_max,
                                                                        const ArnoldiOptions& opt = {},
                                                                        const Observer& observer = {},
                                                                        double tol_conv = 1e-8)
{
    ArnoldiOptions o = opt;
    o.project = false;
    ArnoldiProcess proc(lin, sigma, z0, k_max, o);
    RitzTracker tracker(tol_conv);
    ConvergenceLog log;
    while (!proc.done()) {
        const bool grew = proc.step();
        RitzSet set = ritz_values(proc.hessenberg_square(), proc.invariant() ? 0.0 : proc.beta(), sigma,
                                  proc.iteration());
        tracker.update(set, &log);
        if (observer) {
            IterationInfo info{proc.iteration(), proc.last_v_asymmetry(), proc.last_solve_residual(), &set, &proc};
            observer(info);
        }
        if (!grew) {
            break;
        }
    }
    log.finalize();
    return {proc.state(), std::move(log)};
}

} // namespace nepv
