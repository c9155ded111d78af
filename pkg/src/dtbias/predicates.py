"""Exact-sign planar predicates.

The orientation and incircle tests are evaluated with a static floating-point
filter: the determinant is computed in double precision together with a
certified bound on its rounding error, and only when the computed value falls
inside that bound do we re-evaluate the determinant in exact rational
arithmetic.  Perturbations in this package are tiny (0.1% of the minimum
pairwise distance), which puts many inputs close to the degenerate surface,
so the exact fallback is essential for correctness while the filter keeps the
common case fast.

Error-bound constants follow Shewchuk's analysis of the corresponding
determinant formulas ("Adaptive Precision Floating-Point Arithmetic and Fast
Robust Geometric Predicates", 1997); we only use his stage-A bounds because
the fallback goes straight to rational arithmetic.
"""

from __future__ import annotations

import math
from enum import IntEnum
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

_EPS = 2.0 ** -53
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class Point2(NamedTuple):
    x: float
    y: float


class DegeneracyError(RuntimeError):
    """An exact zero (cocircular or collinear) was met where a strict sign
    is needed; the caller is expected to discard and resample."""


def _check_finite(*points) -> None:
    for p in points:
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            raise ValueError(f"non-finite coordinate in point {p!r}")


def orient2d(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> Sign:
    """Sign of the signed area of triangle (a, b, c).

    POSITIVE iff the triple is counter-clockwise, ZERO iff collinear.  The
    sign is exact: a filtered double evaluation backed by rational arithmetic.
    """
    _check_finite(a, b, c)
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > _CCW_BOUND * detsum:
        return Sign.POSITIVE if det > 0.0 else Sign.NEGATIVE
    return _orient2d_exact(a, b, c)


def _orient2d_exact(a, b, c) -> Sign:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    cx, cy = Fraction(c[0]), Fraction(c[1])
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    if det > 0:
        return Sign.POSITIVE
    if det < 0:
        return Sign.NEGATIVE
    return Sign.ZERO


def incircle(
    a: Sequence[float],
    b: Sequence[float],
    c: Sequence[float],
    d: Sequence[float],
) -> Sign:
    """Sign of the incircle determinant for CCW triangle (a, b, c) and query d.

    POSITIVE iff d lies strictly inside the circumcircle of (a, b, c),
    NEGATIVE iff strictly outside, ZERO iff the four points are cocircular.
    Requires orient2d(a, b, c) == POSITIVE.
    """
    _check_finite(a, b, c, d)
    if orient2d(a, b, c) is not Sign.POSITIVE:
        raise ValueError("incircle requires a CCW-oriented, non-degenerate triangle")
    return _incircle_sign_filtered(a, b, c, d)


def _incircle_sign_filtered(a, b, c, d) -> Sign:
    adx = a[0] - d[0]
    ady = a[1] - d[1]
    bdx = b[0] - d[0]
    bdy = b[1] - d[1]
    cdx = c[0] - d[0]
    cdy = c[1] - d[1]

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (
        alift * (bdxcdy - cdxbdy)
        + blift * (cdxady - adxcdy)
        + clift * (adxbdy - bdxady)
    )
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    if abs(det) > _ICC_BOUND * permanent:
        return Sign.POSITIVE if det > 0.0 else Sign.NEGATIVE
    return _incircle_exact(a, b, c, d)


def _incircle_exact(a, b, c, d) -> Sign:
    dx, dy = Fraction(d[0]), Fraction(d[1])
    adx = Fraction(a[0]) - dx
    ady = Fraction(a[1]) - dy
    bdx = Fraction(b[0]) - dx
    bdy = Fraction(b[1]) - dy
    cdx = Fraction(c[0]) - dx
    cdy = Fraction(c[1]) - dy
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    if det > 0:
        return Sign.POSITIVE
    if det < 0:
        return Sign.NEGATIVE
    return Sign.ZERO


def triangle_area(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> float:
    """Unsigned area of triangle (a, b, c); zero iff collinear."""
    _check_finite(a, b, c)
    return 0.5 * abs(
        (a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0])
    )


# ---------------------------------------------------------------------------
# Batched variants.
#
# The simulation loops evaluate millions of predicates on array data.  The
# kernels below compute the determinants and the filter bound vectorized, and
# fall back to the exact scalar path only for the (rare) entries the filter
# cannot decide.  They return int8 sign arrays with the same semantics as the
# scalar predicates.
# ---------------------------------------------------------------------------


def _flat_points(v: np.ndarray, shape: tuple) -> np.ndarray:
    return np.broadcast_to(v, shape + (2,)).reshape(-1, 2)


def orient2d_signs(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorized orient2d over leading axes; inputs end in an (x, y) axis."""
    detleft = (a[..., 0] - c[..., 0]) * (b[..., 1] - c[..., 1])
    detright = (a[..., 1] - c[..., 1]) * (b[..., 0] - c[..., 0])
    det = detleft - detright
    bound = _CCW_BOUND * (np.abs(detleft) + np.abs(detright))
    signs = np.sign(det).astype(np.int8)
    unsure = np.abs(det) <= bound
    if np.any(unsure):
        af, bf, cf = (_flat_points(v, det.shape) for v in (a, b, c))
        sflat = signs.reshape(-1)
        for k in np.flatnonzero(unsure.reshape(-1)):
            sflat[k] = int(_orient2d_exact(af[k], bf[k], cf[k]))
    return signs


def incircle_signs(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray
) -> np.ndarray:
    """Vectorized incircle determinant sign; callers check orientation."""
    adx = a[..., 0] - d[..., 0]
    ady = a[..., 1] - d[..., 1]
    bdx = b[..., 0] - d[..., 0]
    bdy = b[..., 1] - d[..., 1]
    cdx = c[..., 0] - d[..., 0]
    cdy = c[..., 1] - d[..., 1]

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady
    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (
        alift * (bdxcdy - cdxbdy)
        + blift * (cdxady - adxcdy)
        + clift * (adxbdy - bdxady)
    )
    permanent = (
        (np.abs(bdxcdy) + np.abs(cdxbdy)) * alift
        + (np.abs(cdxady) + np.abs(adxcdy)) * blift
        + (np.abs(adxbdy) + np.abs(bdxady)) * clift
    )
    signs = np.sign(det).astype(np.int8)
    unsure = np.abs(det) <= _ICC_BOUND * permanent
    if np.any(unsure):
        af, bf, cf, df = (_flat_points(v, det.shape) for v in (a, b, c, d))
        sflat = signs.reshape(-1)
        for k in np.flatnonzero(unsure.reshape(-1)):
            sflat[k] = int(_incircle_exact(af[k], bf[k], cf[k], df[k]))
    return signs
