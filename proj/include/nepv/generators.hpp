#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "nepv/problem.hpp"
#include "nepv/random.hpp"

namespace nepv {

namespace detail {

inline Matrix random_hermitian(Rng& rng, Index n)
{
    const Matrix g = rng.matrix(n, n);
    return 0.5 * (g + g.adjoint());
}

/// Hermitian positive square root of G·Gᴴ.
inline Matrix random_hermitian_pd(Rng& rng, Index n)
{
    const Matrix g = rng.matrix(n, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g * g.adjoint());
    const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (s + s.adjoint());
}

} // namespace detail

/// Dense random problem: A, C, P Hermitian Gaussian, B and Q = sqrt(G·Gᴴ).
inline NepvProblem gen_example1(Index n, std::uint64_t seed)
{
    if (n < 2) {
        throw InvalidArgument("gen_example1: n must be at least 2");
    }
    Rng rng(seed);
    const Matrix A = detail::random_hermitian(rng, n);
    const Matrix B = detail::random_hermitian_pd(rng, n);
    const Matrix C = detail::random_hermitian(rng, n);
    const Matrix P = detail::random_hermitian(rng, n);
    const Matrix Q = detail::random_hermitian_pd(rng, n);
    return {A, B, C, P, Q};
}

/// Finite-difference Gross–Pitaevskii-type problem on [−L/2, L/2] with n
/// interior nodes; B = Q = I.
inline NepvProblem gen_example2(double L, Index n)
{
    if (n < 4 || !(L > 0.0)) {
        throw InvalidArgument("gen_example2: need n ≥ 4 and L > 0");
    }
    const double h = L / static_cast<double>(n + 1);
    const double h2 = h * h;
    auto x = [&](Index k) { return -L / 2.0 + static_cast<double>(k) * h; };
    auto c = [](double t) { return 1.0 - std::exp(-(10.0 * t - 1.0) * (10.0 * t - 1.0) / 10.0); };
    auto p = [&](double t) { return 5.0 * std::cos(std::numbers::pi * t / L); };

    Matrix A = Matrix::Zero(n, n);
    Matrix C = Matrix::Zero(n, n);
    Matrix P = Matrix::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
        const Index i = a + 1; // node index, x_0 and x_{n+1} are the boundary
        A(a, a) = 2.0 / h2;
        if (a + 1 < n) {
            A(a, a + 1) = -1.0 / h2;
            A(a + 1, a) = -1.0 / h2;
        }
        C(a, a) = -c(x(i));
        P(a, a) = (p(x(i - 1)) + p(x(i + 1))) / (4.0 * h2);
        if (a + 2 < n) {
            P(a, a + 2) = -p(x(i + 1)) / (4.0 * h2);
            P(a + 2, a) = P(a, a + 2);
        }
    }
    const Matrix I = Matrix::Identity(n, n);
    return {A, I, C, P, I};
}

/// Random problem with C of rank r: C = G·diag(d)·Gᴴ, G orthonormal.
inline NepvProblem gen_example3(Index n, Index r, std::uint64_t seed)
{
    if (n < 2 || r < 0 || r >= n - 1) {
        throw InvalidArgument("gen_example3: need 0 ≤ r < n − 1");
    }
    Rng rng(seed);
    const Matrix A = detail::random_hermitian(rng, n);
    const Matrix B = detail::random_hermitian_pd(rng, n);
    Matrix C = Matrix::Zero(n, n);
    if (r > 0) {
        const Matrix G = rng.orthonormal(n, r);
        const RealVector d = rng.real_vector(r);
        C = G * d.cast<cplx>().asDiagonal() * G.adjoint();
        C = 0.5 * (C + C.adjoint()).eval();
    }
    const Matrix P = detail::random_hermitian(rng, n);
    const Matrix Q = detail::random_hermitian_pd(rng, n);
    return {A, B, C, P, Q};
}

/// n = 2 problem whose polynomial system has the spurious real root (1, −2).
inline NepvProblem example_polynomial_root()
{
    using namespace std::complex_literals;
    Matrix A(2, 2), B(2, 2), C(2, 2), P(2, 2), Q(2, 2);
    A << 8.0, -9.0 - 6.0i, -9.0 + 6.0i, -4.0;
    B << 8.0, 3.0 + 2.0i, 3.0 - 2.0i, 8.0;
    C << 0.0, 6.0 + 4.0i, 6.0 - 4.0i, 6.0;
    P << -4.0, 6.0 + 6.0i, 6.0 - 6.0i, 0.0;
    Q << 6.0, -3.0 - 2.0i, -3.0 + 2.0i, 3.0;
    return {A, B, C, P, Q};
}

/// n = 2 problem with the maximal number (four) of eigenvalues.
inline NepvProblem example_four_solutions()
{
    using namespace std::complex_literals;
    Matrix A(2, 2), B(2, 2), C(2, 2), P(2, 2), Q(2, 2);
    A << 4.0, 3.0 + 1.0i, 3.0 - 1.0i, 1.0;
    B << 16.0, 2.0 - 2.0i, 2.0 + 2.0i, 9.0;
    C << -8.0, 5.0 - 10.0i, 5.0 + 10.0i, -17.0;
    P << 6.0, -1.0 + 18.0i, -1.0 - 18.0i, 4.0;
    Q << 6.0, 2.0 + 1.0i, 2.0 - 1.0i, 4.0;
    return {A, B, C, P, Q};
}

} // namespace nepv
