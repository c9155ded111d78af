import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtbias.predicates import (
    Sign,
    incircle,
    incircle_signs,
    orient2d,
    orient2d_signs,
    triangle_area,
)

from conftest import incircle_det_oracle, orient_det_oracle, sign_of


def test_orient2d_examples():
    assert orient2d((0, 0), (1, 0), (0, 1)) is Sign.POSITIVE
    assert orient2d((0, 0), (1, 1), (2, 2)) is Sign.ZERO
    assert orient2d((0, 0), (0, 1), (1, 0)) is Sign.NEGATIVE


def test_incircle_examples():
    # four corners of a square are cocircular
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) is Sign.ZERO
    # signs checked against the exact 4x4 determinant oracle
    assert sign_of(incircle_det_oracle((0, 0), (1, 0), (1, 1), (0.5, 0.5))) == 1
    assert incircle((0, 0), (1, 0), (1, 1), (0.5, 0.5)) is Sign.POSITIVE
    assert sign_of(incircle_det_oracle((0, 0), (1, 0), (1, 1), (-2, -2))) == -1
    assert incircle((0, 0), (1, 0), (1, 1), (-2, -2)) is Sign.NEGATIVE


def test_triangle_area_examples():
    assert triangle_area((0, 0), (1, 0), (0, 1)) == 0.5
    assert triangle_area((0, 0), (1, 1), (2, 2)) == 0.0
    # shoelace by hand: 0.5 * |1*1 - 0 + ... | = 1
    assert triangle_area((1, 0), (0, 1), (-1, 0)) == 1.0


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        orient2d((0, 0), (float("nan"), 1), (1, 0))
    with pytest.raises(ValueError):
        incircle((0, 0), (1, 0), (1, float("inf")), (0, 1))
    with pytest.raises(ValueError):
        triangle_area((0, 0), (1, 0), (float("-inf"), 1))


def test_incircle_requires_ccw():
    with pytest.raises(ValueError):
        incircle((0, 0), (0, 1), (1, 0), (0.2, 0.2))  # clockwise
    with pytest.raises(ValueError):
        incircle((0, 0), (1, 1), (2, 2), (0, 1))  # collinear


def test_incircle_cyclic_invariance(rng):
    for _ in range(200):
        pts = rng.uniform(-2, 2, (4, 2))
        a, b, c, d = (tuple(p) for p in pts)
        if orient2d(a, b, c) is not Sign.POSITIVE:
            a, b = b, a
        if orient2d(a, b, c) is not Sign.POSITIVE:
            continue
        s = incircle(a, b, c, d)
        assert incircle(b, c, a, d) is s
        assert incircle(c, a, b, d) is s


def test_inside_point_reflected_far_outside(rng):
    for _ in range(100):
        pts = rng.uniform(-1, 1, (3, 2))
        a, b, c = (tuple(p) for p in pts)
        if orient2d(a, b, c) is not Sign.POSITIVE:
            a, b = b, a
        if orient2d(a, b, c) is not Sign.POSITIVE:
            continue
        # circumcenter from the perpendicular-bisector equations
        ax, ay = a
        bx, by = b
        cx, cy = c
        dmat = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        ux = (
            (ax * ax + ay * ay) * (by - cy)
            + (bx * bx + by * by) * (cy - ay)
            + (cx * cx + cy * cy) * (ay - by)
        ) / dmat
        uy = (
            (ax * ax + ay * ay) * (cx - bx)
            + (bx * bx + by * by) * (ax - cx)
            + (cx * cx + cy * cy) * (bx - ax)
        ) / dmat
        r = math.hypot(ax - ux, ay - uy)
        inside = (ux + 0.1 * r, uy)
        far = (ux + 10 * r, uy)
        assert incircle(a, b, c, inside) is Sign.POSITIVE
        assert incircle(a, b, c, far) is Sign.NEGATIVE


def _adversarial_quadruples(rng, count):
    """Cocircular / collinear configurations nudged by magnitudes down to
    ulp level; the predicate's danger zone."""
    quads = []
    scales = [1e-3, 1e-6, 1e-9, 1e-12, 1e-15, 0.0]
    for _ in range(count):
        kind = rng.integers(0, 3)
        eps = scales[rng.integers(0, len(scales))]
        if kind == 0:
            # perturbed unit square corners (exactly cocircular at eps=0)
            base = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
        elif kind == 1:
            # random cocircular-ish quadruple on a representable circle
            ang = np.sort(rng.uniform(0, 2 * np.pi, 4))
            base = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        else:
            # near-degenerate cocircular pattern with tiny grid offsets
            base = np.array([(0, 0), (2, 0), (2, 2), (0, 2)], dtype=float)
        pts = base + eps * rng.standard_normal((4, 2))
        quads.append([tuple(p) for p in pts])
    return quads


def test_signs_match_rational_oracle_near_degeneracies(rng):
    checked = 0
    for a, b, c, d in _adversarial_quadruples(rng, 2000):
        s_or = orient2d(a, b, c)
        assert int(s_or) == sign_of(orient_det_oracle(a, b, c))
        if s_or is not Sign.POSITIVE:
            continue
        assert int(incircle(a, b, c, d)) == sign_of(incircle_det_oracle(a, b, c, d))
        checked += 1
    assert checked > 500


def test_batched_kernels_match_scalar(rng):
    quads = _adversarial_quadruples(rng, 500)
    arr = np.array(quads)  # (B, 4, 2)
    a, b, c, d = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    osign = orient2d_signs(a, b, c)
    for row, q in zip(osign, quads):
        assert int(row) == int(orient2d(q[0], q[1], q[2]))
    isign = incircle_signs(a, b, c, d)
    for row, q in zip(isign, quads):
        assert int(row) == sign_of(incircle_det_oracle(*q))


@given(
    st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=3)
)
def test_orient2d_antisymmetry_on_integers(pts):
    a, b, c = [(float(x), float(y)) for x, y in pts]
    assert int(orient2d(a, b, c)) == -int(orient2d(a, c, b))
    assert int(orient2d(a, b, c)) == int(orient2d(b, c, a))
