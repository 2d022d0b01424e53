#include <gtest/gtest.h>

#include <algorithm>

#include "nepv/generators.hpp"
#include "nepv/oracle.hpp"

using namespace nepv;

namespace {

struct TableRow {
    double lambda, mu;
};

// Four solutions of the 2×2 example, as tabulated.
constexpr TableRow kTable[] = {{-0.0684, 0.0207}, {0.1906, -1.4229}, {0.2612, -0.3510}, {11.936, 4.0164}};

bool in_table(const CandidateSolution& c, double tol)
{
    return std::any_of(std::begin(kTable), std::end(kTable), [&](const TableRow& r) {
        return std::abs(c.lambda.real() - r.lambda) <= tol && std::abs(c.mu.real() - r.mu) <= tol;
    });
}

Index count_v_zero(const ReferenceSpectrum& ref, Index n)
{
    return static_cast<Index>(std::count_if(ref.entries.begin(), ref.entries.end(), [&](const ReferenceEntry& e) {
        return v_block(e.z, n).norm() <= 1e-8 * e.z.norm();
    }));
}

} // namespace

TEST(Oracle, FourSolutionSpectrum)
{
    const CompactLinearization lin(example_four_solutions(), RSpec::random(1));
    const ReferenceSpectrum ref = dense_reference_solve(lin);
    EXPECT_FALSE(ref.singular);
    ASSERT_EQ(ref.entries.size(), 6u);
    const auto genuine = ref.genuine();
    ASSERT_EQ(genuine.size(), 4u);
    for (const auto& c : genuine) {
        EXPECT_TRUE(in_table(c, 5e-4)) << c.lambda << " " << c.mu;
        EXPECT_LE(c.residual_nepv, 1e-8);
    }
    for (const auto& e : ref.entries) {
        EXPECT_LE(e.delta_residual, 1e-8);
    }
}

TEST(Oracle, EntriesVerifiedAndGenuineReal)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const CompactLinearization lin(gen_example1(3, seed), RSpec::random(seed));
        const ReferenceSpectrum ref = dense_reference_solve(lin);
        ASSERT_EQ(ref.entries.size(), 15u);
        for (const auto& e : ref.entries) {
            EXPECT_LE(e.delta_residual, 1e-8);
            if (e.candidate.classification == Classification::genuine) {
                EXPECT_LE(std::abs(e.lambda.imag()), 1e-8 * (1.0 + std::abs(e.lambda)));
                EXPECT_LE(std::abs(e.mu.imag()), 1e-8 * (1.0 + std::abs(e.mu)));
                EXPECT_NEAR(e.mu.real(), mu_of(lin.problem(), e.candidate.v), 1e-7 * (1.0 + std::abs(e.mu)));
            }
        }
        EXPECT_LE(static_cast<long long>(ref.genuine().size()), solution_count_bound(3, 3));
    }
}

TEST(Oracle, RightRmepCountEqualsEll)
{
    for (std::uint64_t seed = 11; seed <= 20; ++seed) {
        const CompactLinearization lin(gen_example1(3, seed), RSpec::random(seed));
        EXPECT_EQ(count_v_zero(dense_reference_solve(lin), 3), 3) << "seed " << seed;
    }
}

TEST(Oracle, EqualPAndQ)
{
    const NepvProblem base = example_four_solutions();
    const NepvProblem pb(base.A(), base.B(), base.C(), base.Q(), base.Q());
    const HermitianEig lin_eig = hermitian_definite_eig(HermitianMatrix(pb.A() - pb.C(), "A-C"), HermitianMatrix(pb.B(), "B"));
    const ReferenceSpectrum ref = dense_reference_solve(CompactLinearization(pb, RSpec::random(2)));
    const auto genuine = ref.genuine();
    ASSERT_EQ(genuine.size(), 2u);
    for (Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(genuine[static_cast<std::size_t>(i)].lambda.real(), lin_eig.values(i), 1e-8);
        EXPECT_NEAR(genuine[static_cast<std::size_t>(i)].mu.real(), 1.0, 1e-8);
    }
    const ScfResult scf = scf_multistart(pb, 4);
    ASSERT_EQ(scf.solutions.size(), 2u);
    for (Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(scf.solutions[static_cast<std::size_t>(i)].lambda.real(), lin_eig.values(i), 1e-10);
    }
}

TEST(Oracle, ScfFindsTableSubset)
{
    const ScfResult scf = scf_multistart(example_four_solutions(), 64);
    EXPECT_GE(scf.solutions.size(), 2u);
    const ReferenceSpectrum ref = dense_reference_solve(CompactLinearization(example_four_solutions(), RSpec::random(1)));
    const CrossValidation cv = cross_validate(scf.solutions, ref.genuine(), 1e-6);
    EXPECT_EQ(cv.extra, 0);
    for (const auto& c : scf.solutions) {
        EXPECT_TRUE(in_table(c, 5e-4));
        EXPECT_LE(c.residual_nepv, 1e-10);
    }
}

TEST(Oracle, ScfRejectsBadConfig)
{
    ScfConfig cfg;
    EXPECT_THROW(scf_multistart(example_four_solutions(), 0), InvalidArgument);
    cfg.damping = 0.0;
    EXPECT_THROW(scf_multistart(example_four_solutions(), 1, cfg), InvalidArgument);
    cfg.damping = 1.0;
    cfg.tol_fix = 0.0;
    EXPECT_THROW(scf_multistart(example_four_solutions(), 1, cfg), InvalidArgument);
}

TEST(Oracle, DenseSolveSizeGuard)
{
    EXPECT_THROW(dense_reference_solve(CompactLinearization(gen_example1(9, 1), RSpec::random(1))), TooLarge);
}

TEST(Oracle, ScfSubsetOfDenseReference)
{
    Index violations = 0;
    Index checked = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const NepvProblem pb = gen_example1(3, 200 + seed);
        const ReferenceSpectrum ref = dense_reference_solve(CompactLinearization(pb, RSpec::random(seed)));
        const auto genuine = ref.genuine();
        for (const auto& s : scf_multistart(pb, 8, {}, seed).solutions) {
            ++checked;
            const bool hit = std::any_of(genuine.begin(), genuine.end(), [&](const CandidateSolution& g) {
                return std::abs(g.lambda - s.lambda) <= 1e-7 * (1.0 + std::abs(s.lambda));
            });
            violations += hit ? 0 : 1;
        }
    }
    EXPECT_GT(checked, 0);
    EXPECT_EQ(violations, 0);
}

TEST(Oracle, CountsRespectBoundsWithLowRankC)
{
    for (const auto& [n, r] : {std::pair<Index, Index>{3, 0}, {3, 1}, {4, 1}, {4, 2}, {5, 2}}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const NepvProblem pb = gen_example3(n, r, seed);
            const ReferenceSpectrum ref = dense_reference_solve(CompactLinearization(pb, RSpec::random(seed)));
            EXPECT_TRUE(ref.singular);
            const auto bound = std::min<long long>(n * n, solution_count_bound(n, r));
            EXPECT_LE(static_cast<long long>(ref.genuine().size()), bound) << n << "," << r;
        }
    }
}

TEST(Oracle, ZeroCGivesLinearEigenvalues)
{
    const NepvProblem pb = gen_example3(3, 0, 5);
    const HermitianEig eig = hermitian_definite_eig(HermitianMatrix(pb.A(), "A"), HermitianMatrix(pb.B(), "B"));
    const auto genuine = dense_reference_solve(CompactLinearization(pb, RSpec::random(1))).genuine();
    ASSERT_EQ(genuine.size(), 3u);
    for (Index i = 0; i < 3; ++i) {
        EXPECT_NEAR(genuine[static_cast<std::size_t>(i)].lambda.real(), eig.values(i), 1e-8);
    }
}

TEST(Oracle, CrossValidate)
{
    const auto ref = dense_reference_solve(CompactLinearization(example_four_solutions(), RSpec::random(1))).genuine();
    const CrossValidation same = cross_validate(ref, ref);
    EXPECT_EQ(same.matched, 4);
    EXPECT_EQ(same.missing, 0);
    EXPECT_EQ(same.extra, 0);
    std::vector<CandidateSolution> fewer(ref.begin(), ref.end() - 1);
    const CrossValidation miss = cross_validate(fewer, ref);
    EXPECT_EQ(miss.matched, 3);
    EXPECT_EQ(miss.missing, 1);
    EXPECT_EQ(miss.missing_indices, std::vector<Index>{3});
    const CrossValidation extra = cross_validate(ref, fewer);
    EXPECT_EQ(extra.extra, 1);
    EXPECT_EQ(cross_validate({}, {}).matched, 0);
}

TEST(Oracle, Deterministic)
{
    const NepvProblem pb = gen_example1(3, 9);
    const auto a = scf_multistart(pb, 4, {}, 3).solutions;
    const auto b = scf_multistart(pb, 4, {}, 3).solutions;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].lambda, b[i].lambda);
        EXPECT_EQ(a[i].v, b[i].v);
    }
}
