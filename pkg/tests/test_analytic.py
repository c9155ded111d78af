import math
from fractions import Fraction

import numpy as np
import pytest

from dtbias.analytic import (
    BudgetExceededError,
    HalfspaceSystem,
    build_tree,
    gram_angles,
    grid2_halfspaces,
    incircle_gradient,
    orthant_prob,
    polygon_distribution,
    polygon_halfspaces,
    spherical_triangle_prob,
    triangle_halfspaces,
)
from dtbias.baselines import catalan
from dtbias.pointsets import PerturbationParams, SeedSpec, make_grid, make_polygon, perturb
from dtbias.predicates import Sign, incircle
from dtbias.triangulate import (
    GridCode,
    all_grid_codes,
    canonical_class,
    convex_polygon_dt,
    enumerate_polygon_codes,
)


def test_gradient_matches_linearized_system_cell_I():
    # cell I tested as Incircle(1, 2, 5, 4): coefficients of the first-order
    # expansion are (-1,-1), (-1,+1), (+1,+1), (+1,-1) on points 1, 2, 5, 4
    g2 = make_grid(2)
    grad = incircle_gradient(g2.label(1), g2.label(2), g2.label(5), g2.label(4))
    assert np.allclose(grad, [-1, -1, -1, 1, 1, 1, 1, -1], atol=1e-12)


def test_gradient_matches_linearized_system_cell_II():
    g2 = make_grid(2)
    grad = incircle_gradient(g2.label(2), g2.label(3), g2.label(6), g2.label(5))
    # -x2 - y2 - x3 + y3 + x5 - y5 + x6 + y6, in (2, 3, 6, 5) slot order
    assert np.allclose(grad, [-1, -1, -1, 1, 1, 1, 1, -1], atol=1e-12)


def test_gradient_translation_invariance(rng):
    for _ in range(50):
        pts = rng.uniform(-2, 2, (4, 2))
        shift = rng.uniform(-5, 5, 2)
        g0 = incircle_gradient(*(tuple(p) for p in pts))
        g1 = incircle_gradient(*(tuple(p + shift) for p in pts))
        assert np.allclose(g0, g1, atol=1e-9 * max(1.0, np.abs(g0).max()))


def test_gradient_rejects_repeated_points():
    with pytest.raises(ValueError):
        incircle_gradient((0, 0), (0, 0), (1, 1), (2, 0))


def test_grid2_halfspaces_structure():
    codes = list(all_grid_codes(2))
    base = grid2_halfspaces(codes[0])  # all-zeros code
    assert base.dim == 18 and base.k == 4
    assert np.linalg.matrix_rank(base.normals) == 4
    # flipping one cell's bit flips exactly that normal
    one = grid2_halfspaces(GridCode.from_bits(2, [[1, 0], [0, 0]]))
    flipped = np.isclose(one.normals, -base.normals).all(axis=1)
    assert flipped.sum() == 1
    # the all-ones code negates the whole system
    allones = grid2_halfspaces(GridCode.from_bits(2, [[1, 1], [1, 1]]))
    assert np.allclose(allones.normals, -base.normals)


def test_build_tree_counts_and_fan_path():
    for code in enumerate_polygon_codes(4):
        tree = build_tree(code)
        assert len(tree.nodes) == 2 and len(tree.edges) == 1
    fan7 = enumerate_polygon_codes(7)[0]
    assert fan7.diagonals == ((1, 3), (1, 4), (1, 5), (1, 6))
    tree = build_tree(fan7)
    assert len(tree.edges) == 4
    # fan adjacency is a path: each triangle meets at most 2 others
    degree = {}
    for u, v in tree.edges:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    assert max(degree.values()) <= 2
    for n in (5, 6, 7, 8):
        for code in enumerate_polygon_codes(n):
            assert len(build_tree(code).edges) == n - 3


def test_polygon_halfspace_counts():
    assert polygon_halfspaces(enumerate_polygon_codes(6)[0]).k == 3
    assert polygon_halfspaces(enumerate_polygon_codes(7)[0]).k == 4


def test_linearized_constraints_match_exact_signs():
    # dot-product signs vs exact incircle signs at the default scale
    n = 6
    code = enumerate_polygon_codes(n)[2]
    system = polygon_halfspaces(code)
    tree = build_tree(code)
    base = make_polygon(n)
    params = PerturbationParams.for_point_set(base)
    agree = total = 0
    for it in range(100_000):
        shifts = SeedSpec(5150, it).stream().standard_normal((n, 2)) * params.sigma
        dots = system.normals @ shifts.reshape(-1)
        pts = base.coords() + shifts
        for (u, v), dot in zip(tree.edges, dots):
            apex = next(w for w in v if w not in u)
            s = incircle(pts[u[0] - 1], pts[u[1] - 1], pts[u[2] - 1], pts[apex - 1])
            total += 1
            # constraint satisfied (dot > 0) should mean apex outside (s < 0)
            agree += (dot > 0) == (s is Sign.NEGATIVE)
    assert agree / total >= 0.999


def test_all_constraints_positive_iff_dt(rng):
    n = 7
    code = enumerate_polygon_codes(n)[0]
    system = polygon_halfspaces(code)
    base = make_polygon(n)
    params = PerturbationParams.for_point_set(base)
    agree = 0
    trials = 100_000
    for it in range(trials):
        shifts = SeedSpec(846, it).stream().standard_normal((n, 2)) * params.sigma
        predicted = bool(np.all(system.normals @ shifts.reshape(-1) > 0))
        ps = perturb(base, params, SeedSpec(846, it))
        got_code, _ = convex_polygon_dt(ps)
        agree += predicted == (got_code == code)
    assert agree / trials >= 0.999


def test_triangle_halfspaces():
    assert triangle_halfspaces(6, 1, 2, 3).k == 3
    assert triangle_halfspaces(7, 1, 2, 3).k == 4
    with pytest.raises(ValueError):
        triangle_halfspaces(6, 2, 1, 3)
    h = triangle_halfspaces(4, 1, 2, 3)
    assert h.k == 1
    r = orthant_prob(h, 1e-3, seed=2)
    assert abs(r.probability - 0.5) < 3e-3


def test_pentagon_triangle_probabilities_sum_to_faces():
    from itertools import combinations

    total = 0.0
    for i, j, k in combinations(range(1, 6), 3):
        h = triangle_halfspaces(5, i, j, k)
        assert h.k == 2
        total += orthant_prob(h, 2e-4, seed=4).probability
    assert abs(total - 3.0) < 5e-3


def test_gram_angles():
    # orthogonal normals meet at a right angle
    h = HalfspaceSystem(4, np.eye(4)[:2])
    ang = gram_angles(h)
    assert math.isclose(ang[0, 1], math.pi / 2)
    assert np.allclose(ang, ang.T)
    # nearly antipodal normals give an angle near 0 (pi - arccos(-1))
    c = 1e-6
    almost = np.array([[1.0, 0, 0, 0], [-math.sqrt(1 - c * c), c, 0, 0]])
    ang2 = gram_angles(HalfspaceSystem(4, almost))
    assert ang2[0, 1] < 1e-5
    # grid m=2 system: symmetric with angles strictly inside (0, pi)
    g = gram_angles(grid2_halfspaces(GridCode(2, ("10", "01"))))
    off = g[~np.eye(4, dtype=bool)]
    assert np.allclose(g, g.T) and np.all(off > 0) and np.all(off < math.pi)


def test_girard_orthogonal_octant():
    h = HalfspaceSystem(5, np.eye(5)[:3])
    r = spherical_triangle_prob(h)
    assert r.method == "Girard" and r.standard_error == 0.0
    assert math.isclose(r.probability, 1 / 8, rel_tol=1e-12)
    with pytest.raises(ValueError):
        spherical_triangle_prob(HalfspaceSystem(5, np.eye(5)[:2]))


def test_hexagon_girard_sums_to_one_and_matches_qmc():
    dist = polygon_distribution(6)
    total = sum(r.probability for _, r in dist)
    assert abs(total - 1.0) < 1e-6
    code, girard = dist[0]
    q = orthant_prob(polygon_halfspaces(code), 1e-4, seed=9)
    assert abs(q.probability - girard.probability) <= 3 * q.standard_error


def test_orthant_trivial_cases():
    one = HalfspaceSystem(3, np.eye(3)[:1])
    r = orthant_prob(one, 1e-3, seed=0)
    assert abs(r.probability - 0.5) < 3e-3 and r.method == "QuasiMonteCarlo"
    four = HalfspaceSystem(6, np.eye(6)[:4])
    r = orthant_prob(four, 2e-4, seed=0)
    assert abs(r.probability - 1 / 16) < max(1e-3, 3 * r.standard_error)


def test_orthant_matches_closed_form_for_paired_correlations(rng):
    # two independent pairs with correlations rho1, rho2:
    # P = prod (1/4 + asin(rho)/2pi); an independent oracle for the QMC path
    for rho1, rho2 in [(0.25, 0.25), (-0.25, -0.25), (0.25, -0.25), (0.6, -0.4)]:
        normals = np.zeros((4, 6))
        normals[0, 0] = 1.0
        normals[1, 0], normals[1, 1] = rho1, math.sqrt(1 - rho1 * rho1)
        normals[2, 2] = 1.0
        normals[3, 2], normals[3, 3] = rho2, math.sqrt(1 - rho2 * rho2)
        h = HalfspaceSystem(6, normals)
        expect = (0.25 + math.asin(rho1) / (2 * math.pi)) * (
            0.25 + math.asin(rho2) / (2 * math.pi)
        )
        r = orthant_prob(h, 1e-4, seed=6)
        assert abs(r.probability - expect) < max(1e-3, 4 * r.standard_error)


def test_orthant_column_alternating_grid_code_matches_paper_value():
    code = GridCode(2, ("10", "10"))
    r = orthant_prob(grid2_halfspaces(code), 1e-4, seed=0)
    assert abs(r.probability - 0.08422) < 1e-3


def test_orthant_weakly_decreases_with_added_halfspace():
    sys4 = grid2_halfspaces(GridCode(2, ("10", "10")))
    sys3 = HalfspaceSystem(18, sys4.normals[:3])
    p4 = orthant_prob(sys4, 1e-4, seed=3)
    p3 = orthant_prob(sys3, 1e-4, seed=3)
    tol = 3 * math.hypot(p3.standard_error, p4.standard_error)
    assert p4.probability <= p3.probability + tol


def test_dimension_reduction_identity():
    # reduced-space and full-ambient-space sampling agree
    h = grid2_halfspaces(GridCode(2, ("10", "01")))
    red = orthant_prob(h, 2e-4, seed=8)
    amb = orthant_prob(h, 2e-3, seed=9, reduce=False, max_log2=15)
    tol = 3 * math.hypot(red.standard_error, amb.standard_error)
    assert abs(red.probability - amb.probability) <= tol
    h7 = polygon_halfspaces(enumerate_polygon_codes(7)[0])
    red = orthant_prob(h7, 2e-4, seed=8)
    amb = orthant_prob(h7, 2e-3, seed=9, reduce=False, max_log2=15)
    tol = 3 * math.hypot(red.standard_error, amb.standard_error)
    assert abs(red.probability - amb.probability) <= tol


def test_budget_exceeded_carries_best_estimate():
    h = grid2_halfspaces(GridCode(2, ("10", "01")))
    with pytest.raises(BudgetExceededError) as exc_info:
        orthant_prob(h, 1e-9, seed=1, start_log2=10, max_log2=11)
    best = exc_info.value.result
    assert 0.0 < best.probability < 1.0 and best.standard_error > 1e-9


def test_polygon_distribution_exact_small_cases():
    for n, expect in ((3, 1.0), (4, 0.5), (5, 0.2)):
        dist = polygon_distribution(n)
        assert len(dist) == catalan(n - 2)
        for _, r in dist:
            assert r.probability == expect and r.method == "Exact"
    assert Fraction(1, catalan(4)) == Fraction(1, 14)


def test_grid2_distribution_sum_and_group_patterns():
    from dtbias.analytic import grid2_distribution

    target_se = 2e-4
    dist = grid2_distribution(target_se, seed=14)
    total = sum(r.probability for _, r in dist)
    assert abs(total - 1.0) <= 4 * target_se * math.sqrt(16)
    ranked = sorted(dist, key=lambda cr: -cr[1].probability)
    top = {code.key() for code, _ in ranked[:4]}
    bottom = {code.key() for code, _ in ranked[-4:]}
    # most likely: identical diagonals within each column (or row),
    # alternating between adjacent ones
    assert top == {"10/10", "01/01", "11/00", "00/11"}
    # least likely: identical diagonals along the grid diagonals
    assert bottom == {"00/00", "11/11", "01/10", "10/01"}


def test_heptagon_distribution_classes_and_sum():
    dist = polygon_distribution(7, target_se=2e-4, seed=5)
    assert len(dist) == 42
    total = sum(r.probability for _, r in dist)
    assert abs(total - 1.0) < 5e-3
    by_class = {}
    for code, r in dist:
        by_class.setdefault(canonical_class(code).diagonals, []).append(r)
    assert len(by_class) == 4
    for members in by_class.values():
        for a in members:
            for b in members:
                tol = 2 * math.hypot(a.standard_error, b.standard_error)
                assert abs(a.probability - b.probability) <= tol


def test_tree_constraints_characterize_dt():
    # exact tree constraints hold iff the triangulation is the DT
    n = 7
    base = make_polygon(n)
    params = PerturbationParams.for_point_set(base)
    target = enumerate_polygon_codes(n)[0]
    target_tree = build_tree(target)
    hits = 0
    for it in range(10_000):
        ps = perturb(base, params, SeedSpec(31337, it))
        code, _ = convex_polygon_dt(ps)
        tree = build_tree(code) if code != target else target_tree
        # forward: the DT's own tree constraints hold exactly
        for u, v in tree.edges:
            apex = next(w for w in v if w not in u)
            s = incircle(*(ps.points[w - 1] for w in u), ps.points[apex - 1])
            assert s is Sign.NEGATIVE
        # reverse: target constraints all holding forces DT == target
        ok = True
        for u, v in target_tree.edges:
            apex = next(w for w in v if w not in u)
            s = incircle(*(ps.points[w - 1] for w in u), ps.points[apex - 1])
            if s is not Sign.NEGATIVE:
                ok = False
                break
        if ok:
            hits += 1
            assert code == target
    assert hits > 50  # the target appears often enough for the test to bite
