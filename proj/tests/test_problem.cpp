#include <gtest/gtest.h>

#include <cmath>

#include "nepv/generators.hpp"
#include "nepv/problem.hpp"
#include "oracles.hpp"

using namespace nepv;

namespace {

// Real roots of det M = 0, tr(S adj M) = 0 for the four-solution problem,
// from an exact resultant computation.
struct Pair {
    double lambda, mu;
};
constexpr Pair kFour[] = {
    {-0.068382037901193224, 0.020686515030442412},
    {0.19055970040129416, -1.4229368642339546},
    {0.26123663639814404, -0.35098305689457293},
    {11.936265580619645, 4.0164202395070721},
};

Vector null_vector(const Matrix& M)
{
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullV);
    return svd.matrixV().col(M.cols() - 1);
}

} // namespace

TEST(Problem, RejectsBadInput)
{
    const Matrix I = Matrix::Identity(3, 3);
    Matrix nh = I;
    nh(0, 1) = 1.0;
    Matrix indef = I;
    indef(2, 2) = -1.0;
    EXPECT_THROW(NepvProblem(I, I, I, I, Matrix::Identity(2, 2)), DimensionMismatch);
    EXPECT_THROW(NepvProblem(nh, I, I, I, I), NotHermitian);
    EXPECT_THROW(NepvProblem(I, indef, I, I, I), NotPositiveDefinite);
    EXPECT_THROW(NepvProblem(I, I, I, I, indef), NotPositiveDefinite);
    const Matrix one = Matrix::Identity(1, 1);
    EXPECT_THROW(NepvProblem(one, one, one, one, one), DimensionMismatch);
    Matrix nan = I;
    nan(1, 1) = std::nan("");
    EXPECT_THROW(NepvProblem(nan, I, I, I, I), InvalidArgument);
    EXPECT_NO_THROW(validate(I, I, I, I, I));
}

TEST(Problem, MuOf)
{
    const NepvProblem pb = example_four_solutions();
    Vector e1 = Vector::Zero(2);
    e1(0) = 1.0;
    EXPECT_NEAR(mu_of(pb, e1), 1.0, 1e-15); // P₁₁ / Q₁₁ = 6 / 6
    EXPECT_NEAR(mu_of(pb, cplx(0.0, 3.0) * e1), 1.0, 1e-15);
    EXPECT_THROW(mu_of(pb, Vector::Zero(2)), ZeroVector);
    EXPECT_THROW(mu_of(pb, Vector::Zero(3)), DimensionMismatch);
}

TEST(Problem, FourSolutionsMatchTable)
{
    const NepvProblem pb = example_four_solutions();
    struct Row {
        double lambda, mu;
        cplx v1, v2;
    };
    const Row table[] = {
        {11.936, 4.0164, {0.0438, 0.4424}, {0.7073, -0.5497}},
        {-0.0684, 0.0207, {0.5209, -0.0291}, {-0.7875, 0.3282}},
        {0.1906, -1.4229, {0.7836, 0.3013}, {0.1508, 0.5220}},
        {0.2612, -0.3510, {0.3963, -0.7437}, {0.4312, -0.3225}},
    };
    for (const Row& r : table) {
        const Pair* exact = nullptr;
        for (const Pair& p : kFour) {
            if (std::abs(p.lambda - r.lambda) < 5e-4) {
                exact = &p;
            }
        }
        ASSERT_NE(exact, nullptr);
        EXPECT_NEAR(exact->mu, r.mu, 5e-4);
        Vector v = null_vector(pb.M(exact->lambda, exact->mu));
        const Residuals res = nepv_residual(pb, exact->lambda, v);
        EXPECT_LE(res.nepv, 1e-12);
        EXPECT_NEAR(mu_of(pb, v), exact->mu, 1e-10);
        Vector t(2);
        t << r.v1, r.v2;
        EXPECT_LE(distance_up_to_phase(v / v.norm(), t), 5e-3);

        const CandidateSolution c = verify_candidate(pb, exact->lambda, v);
        EXPECT_EQ(c.classification, Classification::genuine);
        EXPECT_NEAR(std::real(c.v.dot(pb.B() * c.v)), 1.0, 1e-12);
    }
}

TEST(Problem, PolynomialsVanishAtSolutions)
{
    const NepvProblem pb = example_four_solutions();
    for (const Pair& p : kFour) {
        const PolynomialValues pv = eval_polynomials(pb, p.lambda, p.mu);
        const double s = pb.scale(p.lambda, p.mu);
        EXPECT_LE(std::abs(pv.f), 1e-12 * s * s);
        EXPECT_LE(std::abs(pv.g), 1e-12 * s * (pb.norm_P() + std::abs(p.mu) * pb.norm_Q()));
        EXPECT_TRUE(definiteness_filter(pb, p.lambda, p.mu).accepted);
    }
}

TEST(Problem, PolynomialRootRejected)
{
    const NepvProblem pb = example_polynomial_root();
    const PolynomialValues pv = eval_polynomials(pb, 1.0, -2.0);
    const double s = pb.scale(1.0, -2.0);
    EXPECT_LE(std::abs(pv.f), 1e-10 * s);
    EXPECT_LE(std::abs(pv.g), 1e-10 * s);
    const FilterOutcome out = definiteness_filter(pb, 1.0, -2.0);
    EXPECT_FALSE(out.accepted);
    EXPECT_EQ(out.null_dim, 2);
    // M(1, −2) = 0 here, so VᴴSV = S(−2), which is definite.
    EXPECT_TRUE((out.s_hat_eigenvalues.array() > 0).all() || (out.s_hat_eigenvalues.array() < 0).all());
}

TEST(Problem, PolynomialRootOtherSolutionsAccepted)
{
    const NepvProblem pb = example_polynomial_root();
    const Pair roots[] = {{-8.326471227921985, 7.6020316681899356}, {1.7763934332550677, -1.260389774752936}};
    for (const Pair& p : roots) {
        EXPECT_TRUE(definiteness_filter(pb, p.lambda, p.mu).accepted);
        const Vector v = null_vector(pb.M(p.lambda, p.mu));
        EXPECT_EQ(verify_candidate(pb, p.lambda, v).classification, Classification::genuine);
    }
}

TEST(Problem, FilterNeedsNullSpace)
{
    const NepvProblem pb = example_four_solutions();
    EXPECT_THROW(definiteness_filter(pb, 100.0, 0.0), EmptyNullSpace);
}

TEST(Problem, AdjugateMatchesCofactors)
{
    Rng rng(11);
    for (Index n = 2; n <= 5; ++n) {
        const Matrix M = rng.matrix(n, n);
        const Matrix adj = adjugate(M);
        // adj(M)ᵢⱼ = (−1)^{i+j} det(M without row j, column i)
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                Matrix minor(n - 1, n - 1);
                for (Index r = 0, rr = 0; r < n; ++r) {
                    if (r == j) {
                        continue;
                    }
                    for (Index c = 0, cc = 0; c < n; ++c) {
                        if (c == i) {
                            continue;
                        }
                        minor(rr, cc++) = M(r, c);
                    }
                    ++rr;
                }
                const cplx expect = ((i + j) % 2 == 0 ? 1.0 : -1.0) * oracle::cofactor_det(minor);
                EXPECT_LE(std::abs(adj(i, j) - expect), 1e-10 * (1.0 + std::abs(expect)));
            }
        }
    }
}

TEST(Problem, AdjugateOfRankDeficient)
{
    Rng rng(12);
    const Index n = 4;
    const Matrix G = rng.matrix(n, n - 1);
    const Matrix M = G * rng.matrix(n - 1, n); // rank n − 1
    const Matrix adj = adjugate(M);
    EXPECT_GT(adj.norm(), 1e-6);
    EXPECT_LE((M * adj).norm(), 1e-10 * M.norm() * adj.norm());
    EXPECT_LE((adj * M).norm(), 1e-10 * M.norm() * adj.norm());
    const Matrix Z = Matrix::Zero(3, 3);
    EXPECT_EQ(adjugate(Z).norm(), 0.0);
}

TEST(Problem, SolutionCountBound)
{
    EXPECT_EQ(solution_count_bound(5, 2), 19);
    EXPECT_EQ(solution_count_bound(5, 0), 5);
    EXPECT_EQ(solution_count_bound(3, 3), 9);
    EXPECT_EQ(solution_count_bound(2, 2), 4);
    EXPECT_EQ(solution_count_bound(10, 9), 100);
    for (long long n = 2; n <= 12; ++n) {
        for (long long r = 0; r <= n; ++r) {
            EXPECT_LE(solution_count_bound(n, r), n * n);
        }
    }
    EXPECT_THROW(solution_count_bound(3, 4), InvalidArgument);
}

TEST(Problem, ResidualIsScaleInvariant)
{
    const NepvProblem pb = gen_example1(4, 3);
    Rng rng(5);
    const Vector v = rng.vector(4);
    const Residuals a = nepv_residual(pb, 0.3, v);
    const Residuals b = nepv_residual(pb, 0.3, cplx(2.0, -1.0) * v);
    EXPECT_NEAR(a.nepv, b.nepv, 1e-14);
    EXPECT_NEAR(a.mu, b.mu, 1e-14);
}

TEST(Problem, EqualPAndQReduceToLinearPencil)
{
    Rng rng(21);
    const Index n = 4;
    const Matrix A = detail::random_hermitian(rng, n);
    const Matrix B = detail::random_hermitian_pd(rng, n);
    const Matrix C = detail::random_hermitian(rng, n);
    const Matrix Q = detail::random_hermitian_pd(rng, n);
    const NepvProblem pb(A, B, C, Q, Q);
    const HermitianEig eig = hermitian_definite_eig(HermitianMatrix(A - C), HermitianMatrix(B));
    for (Index i = 0; i < n; ++i) {
        const CandidateSolution c = verify_candidate(pb, eig.values(i), eig.vectors.col(i));
        EXPECT_EQ(c.classification, Classification::genuine);
        EXPECT_NEAR(c.mu.real(), 1.0, 1e-12);
    }
}

TEST(Problem, VerifyCandidateFlagsComplexLambda)
{
    const NepvProblem pb = example_four_solutions();
    Vector v(2);
    v << 1.0, 0.5;
    EXPECT_NE(verify_candidate(pb, cplx(0.2, 0.3), v).classification, Classification::genuine);
    EXPECT_NE(verify_candidate(pb, 0.2, v).classification, Classification::genuine);
}

TEST(Problem, SameSolution)
{
    CandidateSolution a, b;
    a.lambda = 1.0;
    a.mu = 2.0;
    b = a;
    b.lambda += 1e-9;
    EXPECT_TRUE(same_solution(a, b));
    b.mu += 1e-3;
    EXPECT_FALSE(same_solution(a, b));
}

TEST(Generators, Deterministic)
{
    const NepvProblem a = gen_example1(5, 42);
    const NepvProblem b = gen_example1(5, 42);
    const NepvProblem c = gen_example1(5, 43);
    EXPECT_EQ(a.A(), b.A());
    EXPECT_EQ(a.Q(), b.Q());
    EXPECT_NE(a.A(), c.A());
}

TEST(Generators, GrossPitaevskii)
{
    const NepvProblem pb = gen_example2(2.0, 256);
    const double h = 2.0 / 257.0;
    EXPECT_NEAR(pb.A()(0, 0).real(), 33024.5, 1e-9);
    EXPECT_NEAR(pb.A()(0, 1).real(), -1.0 / (h * h), 1e-9);
    EXPECT_EQ(pb.A()(0, 2), cplx(0.0));
    EXPECT_EQ(pb.B(), Matrix::Identity(256, 256));
    EXPECT_EQ(pb.Q(), Matrix::Identity(256, 256));
    // C = −diag(c(xᵢ)), c(x) = 1 − exp(−(10x − 1)²/10), xᵢ = −1 + i·h
    auto c = [](double x) { return 1.0 - std::exp(-(10.0 * x - 1.0) * (10.0 * x - 1.0) / 10.0); };
    auto p = [](double x) { return 5.0 * std::cos(std::numbers::pi * x / 2.0); };
    for (Index i : {0, 100, 255}) {
        const double x = -1.0 + static_cast<double>(i + 1) * h;
        EXPECT_NEAR(pb.C()(i, i).real(), -c(x), 1e-14);
    }
    // Pᵢᵢ = (p(xᵢ₋₁) + p(xᵢ₊₁)) / 4h², Pᵢ,ᵢ₊₂ = −p(xᵢ₊₁) / 4h², 1-based.
    for (Index i : {1, 57, 254}) {
        const double xm = -1.0 + static_cast<double>(i - 1) * h;
        const double xp = -1.0 + static_cast<double>(i + 1) * h;
        EXPECT_NEAR(pb.P()(i - 1, i - 1).real(), (p(xm) + p(xp)) / (4 * h * h), 1e-8);
        EXPECT_NEAR(pb.P()(i - 1, i + 1).real(), -p(xp) / (4 * h * h), 1e-8);
    }
    EXPECT_EQ(pb.P()(0, 1), cplx(0.0));
    EXPECT_THROW(gen_example2(2.0, 3), InvalidArgument);
    EXPECT_THROW(gen_example2(0.0, 8), InvalidArgument);
}

TEST(Generators, LowRankC)
{
    const NepvProblem pb = gen_example3(5, 2, 7);
    EXPECT_EQ(rank_estimate(pb.C(), 1e-10), 2);
    EXPECT_EQ(gen_example3(5, 0, 7).C().norm(), 0.0);
    EXPECT_THROW(gen_example3(5, 4, 7), InvalidArgument);
}
