#pragma once

#include <cmath>

#include "nepv/linalg/types.hpp"

namespace nepv::detail {

/// Plane rotation [c s; -conj(s) c] with real c.
struct Rotation {
    double c = 1.0;
    cplx s = 0.0;
};

/// Computes the rotation mapping (f, g) to (r, 0); returns r.
inline Rotation make_rotation(cplx f, cplx g, cplx& r)
{
    if (g == cplx(0.0)) {
        r = f;
        return {1.0, 0.0};
    }
    if (f == cplx(0.0)) {
        const double ag = std::abs(g);
        r = ag;
        return {0.0, std::conj(g) / ag};
    }
    const double af = std::abs(f);
    const double ag = std::abs(g);
    const double d = std::hypot(af, ag);
    const cplx phase = f / af;
    r = phase * d;
    return {af / d, phase * std::conj(g) / d};
}

/// x <- c x + s y ; y <- c y - conj(s) x, elementwise over `len` entries.
inline void rotate(cplx* x, Index incx, cplx* y, Index incy, Index len, const Rotation& g)
{
    const cplx sc = std::conj(g.s);
    for (Index k = 0; k < len; ++k) {
        const cplx xv = x[k * incx];
        const cplx yv = y[k * incy];
        x[k * incx] = g.c * xv + g.s * yv;
        y[k * incy] = g.c * yv - sc * xv;
    }
}

/// Rotates rows (i1, i2) of `m` over columns [c0, c1].
inline void rotate_rows(Matrix& m, Index i1, Index i2, Index c0, Index c1, const Rotation& g)
{
    if (c1 < c0) {
        return;
    }
    const Index ld = m.rows();
    rotate(&m(i1, c0), ld, &m(i2, c0), ld, c1 - c0 + 1, g);
}

/// Rotates columns (j1, j2) of `m` over rows [r0, r1].
inline void rotate_cols(Matrix& m, Index j1, Index j2, Index r0, Index r1, const Rotation& g)
{
    if (r1 < r0) {
        return;
    }
    rotate(&m(r0, j1), 1, &m(r0, j2), 1, r1 - r0 + 1, g);
}

/// Accumulates a row rotation applied to the left factor: Q <- Q Gᴴ.
inline void accumulate_left(Matrix& q, Index i1, Index i2, const Rotation& g)
{
    rotate(&q(0, i1), 1, &q(0, i2), 1, q.rows(), Rotation{g.c, std::conj(g.s)});
}

} // namespace nepv::detail
