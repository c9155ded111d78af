"""Component and cycle-length statistics of large perturbed grids.

Two graphs are derived from a grid triangulation T.  The diagonal subgraph
keeps all grid vertices but only the m^2 cell diagonals as edges; its
component count measures how diagonals cluster.  The triangle graph G(T) has
one node per triangle and joins triangles that share a horizontal or vertical
(grid) edge; every node has degree at most 2, so G(T) is a disjoint union of
simple paths (ending on the boundary) and cycles, and the component counts
satisfy CC(diagonal graph) = CC(G(T)) + 1.

A cycle through the central cell is traversed as a walk: a particle inside a
triangle leaves through the triangle's grid edge it did not enter by (the
exit is unique because degrees are at most 2), so the whole trajectory is
determined by the diagonals.  For the uniform model the diagonals are
revealed lazily by fair coins on first visit, which keeps a capped walk at
O(cap) work; for the Delaunay model each walk reads a fresh perturbed-grid
triangulation.  Cell (i, j) means the unit cell whose bottom-left grid point
is (i, j); a cell's triangle 0 owns its bottom edge and triangle 1 its top
edge.
"""

from __future__ import annotations

import multiprocessing as mp
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .pointsets import IterationStreams, PerturbationParams, make_grid
from .triangulate import GridCode, grid_cell_signs

DT_PERTURBED = "DTPerturbed"
UNIFORM_DIAGONALS = "UniformDiagonals"
_MAX_ATTEMPTS = 64


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.components = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb
            self.components -= 1


def _code_bits(code: GridCode) -> np.ndarray:
    """(m, m) 0/1 array indexed [j, i] with j the cell row from the bottom."""
    m = code.m
    return np.array(
        [[int(code.rows[m - 1 - j][i]) for i in range(m)] for j in range(m)],
        dtype=np.int8,
    )


def _components_hat_bits(bits: np.ndarray) -> int:
    m = bits.shape[0]
    side = m + 1
    dsu = _DisjointSet(side * side)
    for j in range(m):
        row = bits[j]
        for i in range(m):
            if row[i]:  # '/' joins (i, j) and (i+1, j+1)
                dsu.union(j * side + i, (j + 1) * side + i + 1)
            else:  # '\' joins (i, j+1) and (i+1, j)
                dsu.union((j + 1) * side + i, j * side + i + 1)
    return dsu.components


def _components_g_bits(bits: np.ndarray) -> int:
    # node id of (cell i, j, triangle t) is (j*m + i)*2 + t
    m = bits.shape[0]
    dsu = _DisjointSet(2 * m * m)
    for j in range(m):
        for i in range(m):
            node = (j * m + i) * 2
            if j > 0:
                # bottom edge: triangle 0 here, top-owner (triangle 1) below
                dsu.union(node, ((j - 1) * m + i) * 2 + 1)
            if i > 0:
                # left edge meets the right-owner of the west neighbor
                left_owner = node + (0 if bits[j, i] == 0 else 1)
                west = (j * m + i - 1) * 2
                right_owner = west + (1 if bits[j, i - 1] == 0 else 0)
                dsu.union(left_owner, right_owner)
    return dsu.components


def count_components_hat(code: GridCode) -> int:
    """Components of the diagonal subgraph, isolated grid vertices included."""
    return _components_hat_bits(_code_bits(code))


def count_components_g(code: GridCode) -> int:
    """Components of the triangle graph G(T)."""
    return _components_g_bits(_code_bits(code))


# ---------------------------------------------------------------------------
# Diagonal sources for walks
# ---------------------------------------------------------------------------


class ArrayDiagonals:
    """Diagonal bits stored as a (m, m) array indexed [j, i] bottom-up."""

    def __init__(self, bits: np.ndarray):
        self.bits = np.asarray(bits)
        self.m = self.bits.shape[0]

    def bit(self, i: int, j: int) -> int:
        return int(self.bits[j, i])


class LazyUniformDiagonals:
    """Fair-coin diagonals revealed on first visit (the uniform model)."""

    def __init__(self, m: int, rng: np.random.Generator):
        self.m = m
        self._rng = rng
        self.revealed: dict[tuple[int, int], int] = {}

    def bit(self, i: int, j: int) -> int:
        key = (i, j)
        got = self.revealed.get(key)
        if got is None:
            got = int(self._rng.integers(0, 2))
            self.revealed[key] = got
        return got


class FrozenDiagonals:
    """Replay a previously revealed assignment; missing cells are an error."""

    def __init__(self, m: int, assignment: dict[tuple[int, int], int]):
        self.m = m
        self.assignment = dict(assignment)

    def bit(self, i: int, j: int) -> int:
        return self.assignment[(i, j)]


class WalkOutcome(NamedTuple):
    status: str  # "returned" | "overflow" | "boundary"
    steps: int


# edge crossing tables: exit edge -> (di, dj), and the edge seen from the
# neighbor's side
_MOVE = {"B": (0, -1), "L": (-1, 0), "T": (0, 1), "R": (1, 0)}
_OPPOSITE = {"B": "T", "T": "B", "L": "R", "R": "L"}
# owned grid edges per (diagonal bit, triangle)
_OWNED = {
    (1, 0): ("B", "R"),  # '/' lower-right triangle
    (1, 1): ("L", "T"),  # '/' upper-left triangle
    (0, 0): ("B", "L"),  # '\' lower-left triangle
    (0, 1): ("T", "R"),  # '\' upper-right triangle
}
# triangle owning a given edge per diagonal bit
_OWNER = {
    1: {"B": 0, "R": 0, "L": 1, "T": 1},
    0: {"B": 0, "L": 0, "T": 1, "R": 1},
}


def cycle_walk(
    source,
    start_cell: tuple[int, int] | None = None,
    start_triangle: int = 0,
    cap: int = 40,
) -> WalkOutcome:
    """Traverse the G(T) component of the start triangle until first return.

    `source` provides .m and .bit(i, j); diagonals may be lazy.  Returns the
    number of steps of the cycle through the start triangle, or an overflow
    past `cap`, or a boundary escape if the component is a path and the grid
    is too small to absorb `cap` steps.
    """
    m = source.m
    if start_cell is None:
        start_cell = (m // 2, m // 2)
    i, j = start_cell
    t = start_triangle
    start = (i, j, t)
    entry = None
    steps = 0
    while True:
        owned = _OWNED[(source.bit(i, j), t)]
        exit_edge = owned[0] if entry is None else (
            owned[1] if owned[0] == entry else owned[0]
        )
        di, dj = _MOVE[exit_edge]
        i, j = i + di, j + dj
        if not (0 <= i < m and 0 <= j < m):
            return WalkOutcome("boundary", steps)
        entry = _OPPOSITE[exit_edge]
        t = _OWNER[source.bit(i, j)][entry]
        steps += 1
        if (i, j, t) == start:
            return WalkOutcome("returned", steps)
        if steps >= cap:
            return WalkOutcome("overflow", steps)


# ---------------------------------------------------------------------------
# Aggregates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkStats:
    model: str
    m: int
    cap: int
    walks: int
    histogram: dict[int, int]  # cycle length -> count, returned walks only
    overflow_count: int
    boundary_count: int
    discards: int
    mean_capped: float  # mean of min(length, cap) over returned + overflow

    def to_dict(self) -> dict:
        return {
            "type": "walk",
            "model": self.model,
            "m": self.m,
            "cap": self.cap,
            "walks": self.walks,
            "overflow": self.overflow_count,
            "boundary": self.boundary_count,
            "discards": self.discards,
            "mean_capped": self.mean_capped,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }

    def capped_sample_moments(self) -> tuple[float, float, int]:
        """(mean, variance, n) of min(length, cap); for significance tests."""
        total = self.overflow_count
        s = self.cap * self.overflow_count
        ss = self.cap * self.cap * self.overflow_count
        for length, cnt in self.histogram.items():
            total += cnt
            s += length * cnt
            ss += length * length * cnt
        mean = s / total
        var = (ss - total * mean * mean) / (total - 1)
        return mean, var, total


@dataclass(frozen=True)
class CensusReport:
    model: str
    m: int
    iterations: int
    discards: int
    cc_values: tuple[int, ...]  # CC of the diagonal subgraph per instance
    mean_cc_hat: float
    mean_component_size: float  # mean over instances of (m+1)^2 / CC

    def to_dict(self) -> dict:
        return {
            "type": "census",
            "model": self.model,
            "m": self.m,
            "iterations": self.iterations,
            "discards": self.discards,
            "mean_cc_hat": self.mean_cc_hat,
            "mean_component_size": self.mean_component_size,
            "component_size_definition": "grid vertex count / CC, isolated vertices included",
            "cc_values": list(self.cc_values),
        }


def _dt_bits(m, base, sigma, streams, index):
    """Cell bits of one perturbed-grid DT; returns (bits, discards)."""
    discards = 0
    for attempt in range(_MAX_ATTEMPTS + 1):
        rng = streams.reseat(index, attempt)
        coords = base + sigma * rng.standard_normal(base.shape)
        signs = grid_cell_signs(coords.reshape(m + 1, m + 1, 2))
        if not np.any(signs == 0):
            return (signs < 0).astype(np.int8), discards
        discards += 1
    raise RuntimeError("persistent degeneracy")


def _census_worker(lo, hi, m, model, master_seed, sigma):
    base = make_grid(m).coords()
    streams = IterationStreams(master_seed)
    ccs = []
    discards = 0
    for index in range(lo, hi):
        if model == DT_PERTURBED:
            bits, extra = _dt_bits(m, base, sigma, streams, index)
            discards += extra
        else:
            rng = streams.reseat(index)
            bits = rng.integers(0, 2, size=(m, m)).astype(np.int8)
        ccs.append(_components_hat_bits(bits))
    return ccs, discards


def component_census(
    m: int,
    iterations: int,
    model: str,
    master_seed: int,
    *,
    scale_factor: float = 0.001,
    workers: int = 1,
) -> CensusReport:
    """Mean component count and size of the diagonal subgraph under a model."""
    if model not in (DT_PERTURBED, UNIFORM_DIAGONALS):
        raise ValueError(f"unknown model {model!r}")
    sigma = PerturbationParams.for_point_set(make_grid(m), scale_factor).sigma
    if workers <= 1:
        ccs, discards = _census_worker(0, iterations, m, model, master_seed, sigma)
    else:
        bounds = np.linspace(0, iterations, workers + 1).astype(int)
        jobs = [
            (int(lo), int(hi), m, model, master_seed, sigma)
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        with mp.get_context("fork").Pool(workers) as pool:
            parts = pool.starmap(_census_worker, jobs)
        ccs = [c for part, _ in parts for c in part]
        discards = sum(d for _, d in parts)
    n_vertices = (m + 1) * (m + 1)
    return CensusReport(
        model=model,
        m=m,
        iterations=iterations,
        discards=discards,
        cc_values=tuple(ccs),
        mean_cc_hat=float(np.mean(ccs)),
        mean_component_size=float(np.mean([n_vertices / c for c in ccs])),
    )


def _walk_worker(lo, hi, model, m, cap, master_seed, sigma):
    base = make_grid(m).coords() if model == DT_PERTURBED else None
    streams = IterationStreams(master_seed)
    hist: Counter = Counter()
    overflow = boundary = discards = 0
    for index in range(lo, hi):
        if model == DT_PERTURBED:
            bits, extra = _dt_bits(m, base, sigma, streams, index)
            discards += extra
            source = ArrayDiagonals(bits)
        else:
            source = LazyUniformDiagonals(m, streams.reseat(index))
        out = cycle_walk(source, cap=cap)
        if out.status == "returned":
            hist[out.steps] += 1
        elif out.status == "overflow":
            overflow += 1
        else:
            boundary += 1
    return hist, overflow, boundary, discards


def walk_statistics(
    model: str,
    walks: int,
    cap: int,
    master_seed: int,
    *,
    m: int | None = None,
    scale_factor: float = 0.001,
    workers: int = 1,
) -> WalkStats:
    """Capped first-return lengths of walks through the central cell."""
    if model not in (DT_PERTURBED, UNIFORM_DIAGONALS):
        raise ValueError(f"unknown model {model!r}")
    if cap < 4:
        raise ValueError("cap must be >= 4 (the shortest cycle)")
    if m is None:
        m = cap + 1  # a capped walk cannot reach the boundary
    sigma = PerturbationParams.for_point_set(make_grid(m), scale_factor).sigma
    if workers <= 1:
        parts = [_walk_worker(0, walks, model, m, cap, master_seed, sigma)]
    else:
        bounds = np.linspace(0, walks, workers + 1).astype(int)
        jobs = [
            (int(lo), int(hi), model, m, cap, master_seed, sigma)
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        with mp.get_context("fork").Pool(workers) as pool:
            parts = pool.starmap(_walk_worker, jobs)
    hist: Counter = Counter()
    overflow = boundary = discards = 0
    for h, o, b, d in parts:
        hist.update(h)
        overflow += o
        boundary += b
        discards += d
    capped_sum = sum(k * v for k, v in hist.items()) + cap * overflow
    denom = sum(hist.values()) + overflow
    return WalkStats(
        model=model,
        m=m,
        cap=cap,
        walks=walks,
        histogram=dict(sorted(hist.items())),
        overflow_count=overflow,
        boundary_count=boundary,
        discards=discards,
        mean_capped=capped_sum / denom if denom else float("nan"),
    )
