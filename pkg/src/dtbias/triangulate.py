"""Delaunay triangulations of perturbed grids and polygons, and their codes.

A perturbed grid's DT keeps every unit-cell edge, so it is fully described by
one bit per cell: 1 means the cell is split by the positive-slope diagonal
'/' joining the cell's bottom-left and top-right corners, 0 means the
negative-slope diagonal '\\'.  The cell bit is decided by the sign of the
incircle test on the four perturbed corners taken CCW from the bottom-left:
Incircle(bl, br, tr, tl) < 0 exactly when the top-left corner is outside the
circumcircle of the other three, i.e. when '/' is the Delaunay diagonal.
This mapping is frozen after validation against the brute-force oracle.

A perturbed regular polygon stays in convex position, so its DT is a polygon
triangulation, encoded by its sorted set of n-3 diagonals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pointsets import GRID, PointSet
from .predicates import (
    DegeneracyError,
    Sign,
    _incircle_sign_filtered,
    incircle,
    incircle_signs,
    orient2d,
    orient2d_signs,
)


@dataclass(frozen=True)
class GridCode:
    """m x m cell-diagonal matrix; rows listed top-to-bottom as printed."""

    m: int
    rows: tuple[str, ...]

    def __post_init__(self):
        if len(self.rows) != self.m or any(len(r) != self.m for r in self.rows):
            raise ValueError("rows must form an m x m matrix")
        if any(ch not in "01" for r in self.rows for ch in r):
            raise ValueError("rows must contain only 0/1")

    def bit(self, i: int, j: int) -> int:
        """Diagonal bit of the cell whose bottom-left corner is grid point (i, j)."""
        return int(self.rows[self.m - 1 - j][i])

    @classmethod
    def from_bits(cls, m: int, bits) -> "GridCode":
        """bits[j][i] indexed bottom-up (j is the cell row from the bottom)."""
        arr = np.asarray(bits)
        rows = tuple(
            "".join("1" if b else "0" for b in arr[j]) for j in range(m - 1, -1, -1)
        )
        return cls(m, rows)

    def key(self) -> str:
        return "/".join(self.rows)


@dataclass(frozen=True)
class PolygonCode:
    """Sorted, non-crossing set of n-3 diagonals of a convex n-gon."""

    n: int
    diagonals: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = self.n
        diags = self.diagonals
        if len(diags) != n - 3:
            raise ValueError(f"expected {n - 3} diagonals, got {len(diags)}")
        if tuple(sorted(diags)) != diags:
            raise ValueError("diagonals must be sorted")
        for i, j in diags:
            if not (1 <= i < j <= n):
                raise ValueError(f"bad diagonal ({i}, {j})")
            if j - i in (1, n - 1):
                raise ValueError(f"({i}, {j}) is a polygon side, not a diagonal")
        for (i, j), (k, l) in itertools.combinations(diags, 2):
            if (i < k < j < l) or (k < i < l < j):
                raise ValueError(f"diagonals ({i},{j}) and ({k},{l}) cross")

    def key(self) -> str:
        return ";".join(f"{i}-{j}" for i, j in self.diagonals)


@dataclass(frozen=True)
class Triangulation:
    """Triangles as sorted label triples, listed in lexicographic order."""

    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if tuple(sorted(self.triangles)) != self.triangles:
            raise ValueError("triangles must be lexicographically sorted")


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def grid_cell_signs(coords: np.ndarray) -> np.ndarray:
    """Incircle signs of every cell of one or many perturbed grids.

    coords has shape (..., m+1, m+1, 2) with axis order (row j, column i);
    returns int8 signs of Incircle(bl, br, tr, tl) with shape (..., m, m).
    Raises if some cell's (bl, br, tr) triple is not CCW, which means the
    perturbation was far too large for the grid model.
    """
    bl = coords[..., :-1, :-1, :]
    br = coords[..., :-1, 1:, :]
    tr = coords[..., 1:, 1:, :]
    tl = coords[..., 1:, :-1, :]
    if np.any(orient2d_signs(bl, br, tr) != 1):
        raise ValueError("grid cell corners lost CCW orientation; shifts too large")
    return incircle_signs(bl, br, tr, tl)


def grid_dt(ps: PointSet) -> GridCode:
    """Cell-diagonal code of the Delaunay triangulation of a perturbed grid."""
    if ps.kind != GRID or ps.param is None:
        raise ValueError("grid_dt expects a grid point set")
    m = ps.param
    coords = ps.coords().reshape(m + 1, m + 1, 2)
    signs = grid_cell_signs(coords)
    if np.any(signs == 0):
        raise DegeneracyError("cocircular cell corners after perturbation")
    return GridCode.from_bits(m, signs < 0)


def grid_triangles(code: GridCode) -> Triangulation:
    """Materialize the 2*m^2 triangles of a grid code (labels, sorted)."""
    m = code.m
    lab = lambda i, j: 1 + i + j * (m + 1)
    tris = []
    for j in range(m):
        for i in range(m):
            bl, br = lab(i, j), lab(i + 1, j)
            tl, tr = lab(i, j + 1), lab(i + 1, j + 1)
            if code.bit(i, j):  # '/' diagonal bl-tr
                tris.append(tuple(sorted((bl, br, tr))))
                tris.append(tuple(sorted((bl, tr, tl))))
            else:  # '\' diagonal tl-br
                tris.append(tuple(sorted((bl, br, tl))))
                tris.append(tuple(sorted((br, tr, tl))))
    return Triangulation(tuple(sorted(tris)))


def grid_code_of(tri: Triangulation, m: int) -> GridCode:
    """Per-cell diagonal pattern of a triangulation of the (m+1)^2 grid.

    Ignores any hull triangles outside the unit cells; every cell must be
    split by exactly one of its two diagonals.
    """
    have = set(tri.triangles)
    lab = lambda i, j: 1 + i + j * (m + 1)
    bits = np.zeros((m, m), dtype=int)
    for j in range(m):
        for i in range(m):
            bl, br = lab(i, j), lab(i + 1, j)
            tl, tr = lab(i, j + 1), lab(i + 1, j + 1)
            pos = (
                tuple(sorted((bl, br, tr))) in have
                and tuple(sorted((bl, tr, tl))) in have
            )
            neg = (
                tuple(sorted((bl, br, tl))) in have
                and tuple(sorted((br, tr, tl))) in have
            )
            if pos == neg:
                raise ValueError(f"cell ({i},{j}) is not split by one diagonal")
            bits[j, i] = 1 if pos else 0
    return GridCode.from_bits(m, bits)


def all_grid_codes(m: int):
    """All 2^(m*m) grid codes (small m only)."""
    cells = m * m
    for word in range(1 << cells):
        bits = [[(word >> (j * m + i)) & 1 for i in range(m)] for j in range(m)]
        yield GridCode.from_bits(m, bits)


# ---------------------------------------------------------------------------
# Convex polygons
# ---------------------------------------------------------------------------


def _tri_edges(t):
    a, b, c = t
    return ((a, b), (a, c), (b, c))


def convex_polygon_dt(ps: PointSet) -> tuple[PolygonCode, Triangulation]:
    """Delaunay triangulation of points in convex position with CCW labels.

    Starts from a balanced recursive-bisection triangulation (already close
    to the DT of a near-regular polygon, so few flips are needed) and applies
    Lawson flips until every internal edge is locally Delaunay.  On
    convex-position input this terminates well inside the O(n^2) flip budget;
    exceeding the budget indicates a predicate inconsistency and raises
    RuntimeError.
    """
    n = len(ps)
    if n < 3:
        raise ValueError("need at least 3 points")
    pts = ps.points
    if n == 3:
        return PolygonCode(3, ()), Triangulation(((1, 2, 3),))

    tris = set()
    edge_tris: dict[tuple[int, int], list] = {}

    def add_tri(t):
        tris.add(t)
        for e in _tri_edges(t):
            edge_tris.setdefault(e, []).append(t)

    def remove_tri(t):
        tris.remove(t)
        for e in _tri_edges(t):
            adj = edge_tris[e]
            adj.remove(t)
            if not adj:
                del edge_tris[e]

    spans = [(1, n)]
    while spans:
        lo, hi = spans.pop()
        if hi - lo < 2:
            continue
        mid = (lo + hi) // 2
        add_tri((lo, mid, hi))
        spans.append((lo, mid))
        spans.append((mid, hi))

    stack = [e for e, adj in edge_tris.items() if len(adj) == 2]
    budget = 4 * n * n
    flips = 0
    while stack:
        e = stack.pop()
        adj = edge_tris.get(e)
        if adj is None or len(adj) != 2:
            continue  # edge gone or on the hull
        t1, t2 = adj
        a, b = e
        c = next(v for v in t1 if v != a and v != b)
        d = next(v for v in t2 if v != a and v != b)
        # sorted label triples are CCW for convex-position CCW-labeled input
        s = _incircle_sign_filtered(pts[t1[0] - 1], pts[t1[1] - 1], pts[t1[2] - 1], pts[d - 1])
        if s is Sign.ZERO:
            raise DegeneracyError(f"cocircular quadruple {t1} + {d}")
        if s is Sign.NEGATIVE:
            continue  # locally Delaunay
        flips += 1
        if flips > budget:
            raise RuntimeError("flip budget exceeded (predicate inconsistency?)")
        remove_tri(t1)
        remove_tri(t2)
        add_tri(tuple(sorted((a, c, d))))
        add_tri(tuple(sorted((b, c, d))))
        for quad_edge in (
            (min(a, c), max(a, c)),
            (min(b, c), max(b, c)),
            (min(a, d), max(a, d)),
            (min(b, d), max(b, d)),
        ):
            stack.append(quad_edge)

    diagonals = tuple(sorted(e for e, adj in edge_tris.items() if len(adj) == 2))
    code = PolygonCode(n, diagonals)
    return code, Triangulation(tuple(sorted(tris)))


def brute_force_dt(ps: PointSet) -> Triangulation:
    """Exhaustive-search oracle: every triple whose circumcircle is empty.

    Only meant for small sets (|P| <= 16; enough for the m=3 grid).  Raises
    DegeneracyError when an exact cocircularity is met.

    Note that for a perturbed grid this returns more than the 2*m^2 cell
    triangles: boundary points that bend outward create thin hull triangles
    outside the unit cells.  Use grid_code_of to compare the per-cell
    diagonal pattern.
    """
    n = len(ps)
    if n > 16:
        raise ValueError("brute_force_dt is limited to 16 points")
    pts = ps.points
    found = []
    for tri in itertools.combinations(range(1, n + 1), 3):
        a, b, c = (pts[v - 1] for v in tri)
        s = orient2d(a, b, c)
        if s is Sign.ZERO:
            continue  # collinear triple cannot be a triangle
        if s is Sign.NEGATIVE:
            a, b = b, a
        empty = True
        for q in range(1, n + 1):
            if q in tri:
                continue
            sq = incircle(a, b, c, pts[q - 1])
            if sq is Sign.ZERO:
                raise DegeneracyError(f"cocircular quadruple {tri} + {q}")
            if sq is Sign.POSITIVE:
                empty = False
                break
        if empty:
            found.append(tri)
    return Triangulation(tuple(sorted(found)))


def polygon_code_of(tri: Triangulation, n: int) -> PolygonCode:
    """Extract the diagonal set of a convex-polygon triangulation."""
    edges = set()
    for t in tri.triangles:
        edges.update(_tri_edges(t))
    diags = tuple(sorted(e for e in edges if e[1] - e[0] not in (1, n - 1)))
    return PolygonCode(n, diags)


def triangulation_from_code(code: PolygonCode) -> Triangulation:
    """Rebuild the triangle list of a polygon code by repeated ear clipping."""
    n = code.n
    edges = {tuple(sorted(e)) for e in code.diagonals}
    for k in range(1, n):
        edges.add((k, k + 1))
    edges.add((1, n))
    cycle = list(range(1, n + 1))
    tris = []
    while len(cycle) > 3:
        for idx in range(len(cycle)):
            prev = cycle[idx - 1]
            cur = cycle[idx]
            nxt = cycle[(idx + 1) % len(cycle)]
            if (min(prev, nxt), max(prev, nxt)) in edges:
                tris.append(tuple(sorted((prev, cur, nxt))))
                cycle.pop(idx)
                break
        else:
            raise ValueError("inconsistent polygon code")
    tris.append(tuple(sorted(cycle)))
    return Triangulation(tuple(sorted(tris)))


def _map_vertex(v: int, rot: int, reflect: bool, n: int) -> int:
    v0 = v - 1
    if reflect:
        v0 = (-v0) % n
    return (v0 + rot) % n + 1


def canonical_class(code: PolygonCode) -> PolygonCode:
    """Lexicographically smallest code over the 2n dihedral relabelings."""
    n = code.n
    best = None
    for reflect in (False, True):
        for rot in range(n):
            mapped = []
            for i, j in code.diagonals:
                a = _map_vertex(i, rot, reflect, n)
                b = _map_vertex(j, rot, reflect, n)
                mapped.append((a, b) if a < b else (b, a))
            key = tuple(sorted(mapped))
            if best is None or key < best:
                best = key
    return PolygonCode(n, best)


@lru_cache(maxsize=None)
def enumerate_polygon_codes(n: int) -> tuple[PolygonCode, ...]:
    """All C_{n-2} triangulation codes of the convex n-gon, sorted."""
    if n < 3:
        raise ValueError("n must be >= 3")

    def maybe_diag(u: int, v: int):
        lo, hi = (u, v) if u < v else (v, u)
        return () if hi - lo in (1, n - 1) else ((lo, hi),)

    def rec(chain: tuple[int, ...]):
        # Triangulations of the sub-polygon spanned by a contiguous vertex
        # chain, decomposed over the apex of the triangle on edge
        # (chain[0], chain[-1]).  Each triangulation is produced exactly once.
        if len(chain) < 3:
            yield ()
            return
        first, last = chain[0], chain[-1]
        for k in range(1, len(chain) - 1):
            apex = chain[k]
            base = maybe_diag(first, apex) + maybe_diag(apex, last)
            for left in rec(chain[: k + 1]):
                for right in rec(chain[k:]):
                    yield base + left + right

    codes = sorted({tuple(sorted(d)) for d in rec(tuple(range(1, n + 1)))})
    return tuple(PolygonCode(n, d) for d in codes)
