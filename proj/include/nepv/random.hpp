#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "nepv/linalg/types.hpp"

namespace nepv {

/// Seeded generator with a portable normal transform, so identical seeds give
/// identical streams across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1).
    double uniform()
    {
        // 53 random bits, shifted off zero.
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    cplx complex_normal()
    {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    Matrix matrix(Index rows, Index cols)
    {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                m(i, j) = complex_normal();
            }
        }
        return m;
    }

    Vector vector(Index n) { return matrix(n, 1).col(0); }

    RealVector real_vector(Index n)
    {
        RealVector v(n);
        for (Index i = 0; i < n; ++i) {
            v(i) = normal();
        }
        return v;
    }

    Matrix hermitian(Index n)
    {
        const Matrix g = matrix(n, n);
        return 0.5 * (g + g.adjoint());
    }

    /// G Gᴴ + n I
    Matrix hermitian_pd(Index n)
    {
        const Matrix g = matrix(n, n);
        return g * g.adjoint() + static_cast<double>(n) * Matrix::Identity(n, n);
    }

    /// n×k matrix with orthonormal columns.
    Matrix orthonormal(Index n, Index k)
    {
        Eigen::HouseholderQR<Matrix> qr(matrix(n, k));
        return qr.householderQ() * Matrix::Identity(n, k);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace nepv
