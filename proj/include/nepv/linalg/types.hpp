#pragma once

#include <complex>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "nepv/errors.hpp"

namespace nepv {

using cplx = std::complex<double>;
using Index = Eigen::Index;

/// Dense complex matrix, column-major.
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Complex Hermitian matrix. Construction checks conjugate symmetry to a
/// relative tolerance and then stores the exact Hermitian part, so
/// `value() == value().adjoint()` bit-for-bit.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(const Matrix& m, const std::string& which = "matrix", double rel_tol = 1e-12)
    {
        if (m.rows() != m.cols()) {
            throw DimensionMismatch(which + " is not square");
        }
        const double scale = m.norm();
        const double skew = (m - m.adjoint()).norm();
        if (skew > rel_tol * scale) {
            throw NotHermitian(which);
        }
        data_ = 0.5 * (m + m.adjoint());
        // Diagonal must be exactly real after symmetrization.
        for (Index i = 0; i < data_.rows(); ++i) {
            data_(i, i) = cplx(data_(i, i).real(), 0.0);
        }
    }

    [[nodiscard]] Index order() const { return data_.rows(); }
    [[nodiscard]] const Matrix& value() const { return data_; }
    operator const Matrix&() const { return data_; } // NOLINT(google-explicit-constructor)

private:
    Matrix data_;
};

/// Phase-invariant distance between two vectors: min over |c| = 1 of ‖a·c − b‖.
inline double distance_up_to_phase(const Vector& a, const Vector& b)
{
    const cplx inner = a.dot(b); // aᴴ b
    const cplx phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cplx(1.0);
    return (a * phase - b).norm();
}

/// Scales `v` so that its largest-magnitude entry is real and positive. Ties
/// resolve to the lowest index.
inline void canonicalize_phase(Vector& v)
{
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best_abs * (1.0 + 1e-12)) {
            best_abs = a;
            best = i;
        }
    }
    if (best_abs > 0.0) {
        v *= std::conj(v(best)) / best_abs;
        v(best) = cplx(v(best).real(), 0.0);
    }
}

} // namespace nepv
