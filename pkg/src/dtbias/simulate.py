"""Monte Carlo estimation of triangulation distributions.

Every iteration index owns a counter-based random stream derived from
(master_seed, index), so runs are reproducible bit-for-bit no matter how the
index range is partitioned across worker processes.  A draw that produces an
exact degeneracy (or, for very large polygons, a point set that loses convex
position) is discarded and the iteration retries with a fresh derived stream;
the report's `iterations` field counts every draw made, so that tallies sum
to iterations - discards.
"""

from __future__ import annotations

import multiprocessing as mp
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .baselines import uniform_triangle_prob
from .pointsets import (
    IterationStreams,
    PerturbationParams,
    PointSet,
    make_grid,
    make_polygon,
)
from .predicates import DegeneracyError, orient2d_signs
from .triangulate import (
    GridCode,
    PolygonCode,
    canonical_class,
    convex_polygon_dt,
    grid_cell_signs,
)

_CHUNK = 4096
_MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class ReportEntry:
    code: str
    count: int
    frequency: float
    analytic: float | None = None


@dataclass(frozen=True)
class DistributionReport:
    kind: str  # "grid" | "polygon"
    param: int
    iterations: int  # draws made, including discarded ones
    discards: int
    entries: tuple[ReportEntry, ...]
    total_distinct: int
    top_k: int | None = None
    by_class: tuple[ReportEntry, ...] | None = None

    @property
    def successes(self) -> int:
        return self.iterations - self.discards

    def frequency_of(self, code_key: str) -> float:
        for e in self.entries:
            if e.code == code_key:
                return e.frequency
        return 0.0

    def _structured_code(self, key: str):
        # grid codes as row strings of 0/1, polygon codes as [i, j] pairs
        if self.kind == "grid":
            return {"rows": key.split("/")}
        return {"diagonals": decode_polygon_key(key)}

    def to_dict(self) -> dict:
        d = {
            "type": "distribution",
            "kind": self.kind,
            "param": self.param,
            "iterations": self.iterations,
            "discards": self.discards,
            "total_distinct": self.total_distinct,
            "top_k": self.top_k,
            "entries": [
                {
                    "code": e.code,
                    **self._structured_code(e.code),
                    "count": e.count,
                    "frequency": e.frequency,
                    "analytic": e.analytic,
                }
                for e in self.entries
            ],
        }
        if self.by_class is not None:
            d["by_class"] = [
                {"code": e.code, "count": e.count, "frequency": e.frequency}
                for e in self.by_class
            ]
        return d


@dataclass(frozen=True)
class TriangleEntry:
    triangle: tuple[int, int, int]
    count: int
    frequency: float
    uniform: Fraction


@dataclass(frozen=True)
class TriangleReport:
    n: int
    iterations: int
    discards: int
    entries: tuple[TriangleEntry, ...]

    @property
    def successes(self) -> int:
        return self.iterations - self.discards

    def frequency_of(self, tri: tuple[int, int, int]) -> float:
        for e in self.entries:
            if e.triangle == tri:
                return e.frequency
        return 0.0

    def to_dict(self) -> dict:
        return {
            "type": "triangle-frequency",
            "n": self.n,
            "iterations": self.iterations,
            "discards": self.discards,
            "entries": [
                {
                    "triangle": list(e.triangle),
                    "count": e.count,
                    "frequency": e.frequency,
                    "uniform_num": e.uniform.numerator,
                    "uniform_den": e.uniform.denominator,
                    "uniform": float(e.uniform),
                }
                for e in self.entries
            ],
        }


# ---------------------------------------------------------------------------
# Worker-range execution
# ---------------------------------------------------------------------------


def _run_partitioned(worker, iterations: int, workers: int, args: tuple):
    """Split [0, iterations) into contiguous ranges and merge (Counter, int)
    results by addition; the per-index streams make the outcome identical
    for any worker count."""
    if workers <= 1:
        return worker(0, iterations, *args)
    bounds = np.linspace(0, iterations, workers + 1).astype(int)
    jobs = [(int(lo), int(hi), *args) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with mp.get_context("fork").Pool(workers) as pool:
        parts = pool.starmap(worker, jobs)
    total = Counter()
    discards = 0
    for counts, disc in parts:
        total.update(counts)
        discards += disc
    return total, discards


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def _grid_bits_word(bits: np.ndarray) -> int:
    # cell (i, j) occupies bit j*m + i, matching all_grid_codes
    flat = bits.reshape(-1)
    word = 0
    for pos in np.flatnonzero(flat):
        word |= 1 << int(pos)
    return word


def _word_to_code(word: int, m: int) -> GridCode:
    bits = [[(word >> (j * m + i)) & 1 for i in range(m)] for j in range(m)]
    return GridCode.from_bits(m, bits)


def _grid_one(m, base, sigma, streams, index):
    """Resample path for a single iteration; returns (word, extra_discards)."""
    discards = 0
    for attempt in range(1, _MAX_ATTEMPTS + 1):
        rng = streams.reseat(index, attempt)
        coords = base + sigma * rng.standard_normal(base.shape)
        signs = grid_cell_signs(coords.reshape(m + 1, m + 1, 2))
        if not np.any(signs == 0):
            return _grid_bits_word(signs < 0), discards
        discards += 1
    raise RuntimeError("persistent degeneracy; perturbation scale may be zero")


def _grid_worker(lo, hi, m, master_seed, sigma):
    base = make_grid(m).coords()
    streams = IterationStreams(master_seed)
    counts: Counter = Counter()
    discards = 0
    weights = 1 << np.arange(m * m, dtype=np.int64)
    for start in range(lo, hi, _CHUNK):
        stop = min(start + _CHUNK, hi)
        block = stop - start
        shifts = np.empty((block, base.shape[0], 2))
        for t in range(block):
            shifts[t] = streams.reseat(start + t).standard_normal(
                (base.shape[0], 2)
            )
        coords = base[None, :, :] + sigma * shifts
        signs = grid_cell_signs(coords.reshape(block, m + 1, m + 1, 2))
        bad = np.any(signs == 0, axis=(1, 2))
        words = ((signs < 0).reshape(block, -1) @ weights).astype(np.int64)
        for t in range(block):
            if bad[t]:
                discards += 1
                word, extra = _grid_one(m, base, sigma, streams, start + t)
                discards += extra
                counts[word] += 1
            else:
                counts[int(words[t])] += 1
    return counts, discards


def estimate_grid_distribution(
    m: int,
    iterations: int,
    master_seed: int,
    *,
    scale_factor: float = 0.001,
    workers: int = 1,
    top_k: int | None = None,
    analytic: dict[str, float] | None = None,
) -> DistributionReport:
    """Tally of perturb -> grid_dt over `iterations` independent draws."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m * m > 62:
        raise ValueError(
            "code tallying packs cells into a 62-bit word (m <= 7); larger "
            "grids are studied through component/walk statistics instead"
        )
    sigma = PerturbationParams.for_point_set(make_grid(m), scale_factor).sigma
    counts, discards = _run_partitioned(
        _grid_worker, iterations, workers, (m, master_seed, sigma)
    )
    entries = _distribution_entries(
        {_word_to_code(w, m).key(): c for w, c in counts.items()},
        iterations,
        top_k,
        analytic,
    )
    return DistributionReport(
        kind="grid",
        param=m,
        iterations=iterations + discards,
        discards=discards,
        entries=entries,
        total_distinct=len(counts),
        top_k=top_k,
    )


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------


def _convex_and_general(coords: np.ndarray) -> bool:
    """All consecutive hull triples strictly CCW (exact signs)."""
    b = np.roll(coords, -1, axis=0)
    c = np.roll(coords, -2, axis=0)
    return bool(np.all(orient2d_signs(coords, b, c) == 1))


def _poly_iteration(n, base, sigma, streams, index, want_triangles):
    discards = 0
    for attempt in range(_MAX_ATTEMPTS + 1):
        rng = streams.reseat(index, attempt)
        coords = base + sigma * rng.standard_normal(base.shape)
        if not _convex_and_general(coords):
            discards += 1
            continue
        ps = PointSet(tuple(map(tuple, coords)), kind="polygon", param=n, perturbed=True)
        try:
            code, tri = convex_polygon_dt(ps)
        except DegeneracyError:
            discards += 1
            continue
        return (tri.triangles if want_triangles else code.diagonals), discards
    raise RuntimeError("persistent degeneracy; perturbation scale may be zero")


def _poly_worker(lo, hi, n, master_seed, sigma):
    base = make_polygon(n).coords()
    streams = IterationStreams(master_seed)
    counts: Counter = Counter()
    discards = 0
    for index in range(lo, hi):
        key, extra = _poly_iteration(n, base, sigma, streams, index, False)
        counts[key] += 1
        discards += extra
    return counts, discards


def _tri_worker(lo, hi, n, master_seed, sigma):
    base = make_polygon(n).coords()
    streams = IterationStreams(master_seed)
    counts: Counter = Counter()
    discards = 0
    for index in range(lo, hi):
        tris, extra = _poly_iteration(n, base, sigma, streams, index, True)
        counts.update(tris)
        discards += extra
    return counts, discards


def estimate_polygon_distribution(
    n: int,
    iterations: int,
    master_seed: int,
    *,
    scale_factor: float = 0.001,
    workers: int = 1,
    top_k: int | None = None,
    analytic: dict[str, float] | None = None,
) -> DistributionReport:
    """Tally of perturb -> convex_polygon_dt, with a canonical-class rollup."""
    if n < 3:
        raise ValueError("n must be >= 3")
    sigma = PerturbationParams.for_point_set(make_polygon(n), scale_factor).sigma
    counts, discards = _run_partitioned(
        _poly_worker, iterations, workers, (n, master_seed, sigma)
    )
    keyed = {PolygonCode(n, diags).key(): c for diags, c in counts.items()}
    entries = _distribution_entries(keyed, iterations, top_k, analytic)

    class_counts: Counter = Counter()
    for diags, c in counts.items():
        class_counts[canonical_class(PolygonCode(n, diags)).key()] += c
    by_class = _distribution_entries(class_counts, iterations, top_k, None)

    return DistributionReport(
        kind="polygon",
        param=n,
        iterations=iterations + discards,
        discards=discards,
        entries=entries,
        total_distinct=len(counts),
        top_k=top_k,
        by_class=by_class,
    )


def estimate_triangle_frequencies(
    n: int,
    iterations: int,
    master_seed: int,
    *,
    scale_factor: float = 0.001,
    workers: int = 1,
) -> TriangleReport:
    """Appearance counts of every vertex triple as a DT triangle."""
    if n < 3:
        raise ValueError("n must be >= 3")
    sigma = PerturbationParams.for_point_set(make_polygon(n), scale_factor).sigma
    counts, discards = _run_partitioned(
        _tri_worker, iterations, workers, (n, master_seed, sigma)
    )
    entries = tuple(
        TriangleEntry(
            triangle=tri,
            count=counts.get(tri, 0),
            frequency=counts.get(tri, 0) / iterations,
            uniform=uniform_triangle_prob(n, *tri),
        )
        for tri in combinations(range(1, n + 1), 3)
    )
    return TriangleReport(
        n=n,
        iterations=iterations + discards,
        discards=discards,
        entries=entries,
    )


def _distribution_entries(counts: dict, successes: int, top_k, analytic):
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if top_k is not None:
        ordered = ordered[:top_k]
    return tuple(
        ReportEntry(
            code=key,
            count=c,
            frequency=c / successes,
            analytic=None if analytic is None else analytic.get(key),
        )
        for key, c in ordered
    )


def decode_polygon_key(key: str) -> list[list[int]]:
    """Parse a PolygonCode key ("1-3;1-4") into its [i, j] diagonal pairs."""
    if not key:
        return []
    return [[int(a) for a in part.split("-")] for part in key.split(";")]


def total_variation(report: DistributionReport, probs: dict[str, float]) -> float:
    """TV distance between observed frequencies and a full probability table."""
    seen = {e.code: e.frequency for e in report.entries}
    keys = set(seen) | set(probs)
    return 0.5 * sum(abs(seen.get(k, 0.0) - probs.get(k, 0.0)) for k in keys)
