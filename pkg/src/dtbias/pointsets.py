"""Degenerate point-set generators and the random normal perturbation.

Two families are provided: the uniform (m+1) x (m+1) integer grid with unit
cells anchored at (0, 0), and the regular n-gon inscribed in the unit circle
with vertex 1 at (1, 0) and CCW labeling.  Points carry 1-based labels given
by their position in the tuple; grid labels run row-major from the bottom-left
corner.

Perturbation shifts every coordinate independently by a normal deviate with
standard deviation ``scale_factor * d_min``.  Randomness comes from
counter-based Philox streams: iteration i of a run draws from a block derived
from (master_seed, i) alone, so any partition of iterations across workers
produces identical results.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .predicates import Point2

GRID = "grid"
POLYGON = "polygon"
CUSTOM = "custom"


@dataclass(frozen=True)
class PointSet:
    points: tuple[Point2, ...]
    kind: str = CUSTOM
    param: int | None = None
    perturbed: bool = False

    def __len__(self) -> int:
        return len(self.points)

    def label(self, k: int) -> Point2:
        """Point with 1-based label k."""
        if not 1 <= k <= len(self.points):
            raise ValueError(f"label {k} out of range 1..{len(self.points)}")
        return self.points[k - 1]

    def coords(self) -> np.ndarray:
        """(N, 2) float array in label order."""
        return np.asarray(self.points, dtype=float)


def make_grid(m: int) -> PointSet:
    """Uniform (m+1) x (m+1) grid with unit cells; label 1 at (0, 0)."""
    if m < 1:
        raise ValueError("grid parameter m must be >= 1")
    pts = tuple(
        Point2(float(i), float(j)) for j in range(m + 1) for i in range(m + 1)
    )
    return PointSet(pts, kind=GRID, param=m)


def make_polygon(n: int) -> PointSet:
    """Regular n-gon on the unit circle; label k at angle (k-1) * 2*pi/n."""
    if n < 3:
        raise ValueError("polygon size n must be >= 3")
    theta = 2.0 * math.pi / n
    pts = tuple(
        Point2(math.cos((k - 1) * theta), math.sin((k - 1) * theta))
        for k in range(1, n + 1)
    )
    return PointSet(pts, kind=POLYGON, param=n)


def grid_label(m: int, i: int, j: int) -> int:
    """1-based label of the grid point at integer coordinates (i, j)."""
    return 1 + i + j * (m + 1)


def min_pairwise_distance(ps: PointSet) -> float:
    """Exact minimum distance over all point pairs."""
    if len(ps) < 2:
        raise ValueError("need at least two points")
    xy = ps.coords()
    best = math.inf
    # chunked O(N^2); N stays small enough (grids up to ~2000 points)
    step = 512
    for lo in range(0, len(xy), step):
        block = xy[lo : lo + step]
        d2 = (
            (block[:, None, 0] - xy[None, :, 0]) ** 2
            + (block[:, None, 1] - xy[None, :, 1]) ** 2
        )
        rows = np.arange(lo, lo + len(block))
        d2[np.arange(len(block)), rows] = np.inf
        best = min(best, float(np.sqrt(d2.min())))
    return best


@dataclass(frozen=True)
class PerturbationParams:
    scale_factor: float = 0.001
    d_min: float = 1.0

    def __post_init__(self):
        if not self.scale_factor >= 0.0:
            raise ValueError("scale_factor must be non-negative")
        if not self.d_min > 0.0:
            raise ValueError("d_min must be positive")

    @property
    def sigma(self) -> float:
        return self.scale_factor * self.d_min

    @classmethod
    def for_point_set(cls, ps: PointSet, scale_factor: float = 0.001) -> "PerturbationParams":
        return cls(scale_factor=scale_factor, d_min=min_pairwise_distance(ps))


_M64 = (1 << 64) - 1


def _philox_state(master_seed: int, iteration: int, attempt: int) -> dict:
    """Philox state whose 256-bit counter starts the block unique to
    (iteration, attempt): counter = iteration * 2^128 + attempt * 2^64."""
    return {
        "bit_generator": "Philox",
        "state": {
            "counter": np.array(
                [0, attempt & _M64, iteration & _M64, (iteration >> 64) & _M64],
                dtype=np.uint64,
            ),
            "key": np.array(
                [master_seed & _M64, (master_seed >> 64) & _M64], dtype=np.uint64
            ),
        },
        "buffer": np.zeros(4, dtype=np.uint64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one iteration's random stream within a master-seeded run.

    The stream for (master_seed, iteration_index, attempt) is a Philox
    generator whose 256-bit counter starts at a block unique to the triple,
    so streams can be opened in any order without generating predecessors.
    The attempt index supports resampling after a degenerate draw.
    """

    master_seed: int
    iteration_index: int = 0
    attempt: int = 0

    def __post_init__(self):
        if self.iteration_index < 0 or self.attempt < 0:
            raise ValueError("iteration_index and attempt must be non-negative")

    def stream(self) -> np.random.Generator:
        # seed=0 avoids the OS-entropy pull; the state overwrite below makes
        # the stream a pure function of this SeedSpec
        bit = np.random.Philox(seed=0)
        bit.state = _philox_state(self.master_seed, self.iteration_index, self.attempt)
        return np.random.Generator(bit)

    def next_attempt(self) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.iteration_index, self.attempt + 1)


class IterationStreams:
    """One reusable generator for tight loops over iteration indices.

    reseat(i, attempt) points the underlying Philox at the stream SeedSpec
    (master_seed, i, attempt) would give; the returned Generator is only
    valid until the next reseat call.
    """

    def __init__(self, master_seed: int):
        self.master_seed = master_seed
        self._bit = np.random.Philox(seed=0)
        self._gen = np.random.Generator(self._bit)

    def reseat(self, iteration: int, attempt: int = 0) -> np.random.Generator:
        self._bit.state = _philox_state(self.master_seed, iteration, attempt)
        return self._gen


def perturbation_shifts(
    n_points: int, params: PerturbationParams, seed: SeedSpec
) -> np.ndarray:
    """(N, 2) array of the normal shifts for one iteration."""
    rng = seed.stream()
    return rng.standard_normal((n_points, 2)) * params.sigma


def perturb(ps: PointSet, params: PerturbationParams, seed: SeedSpec) -> PointSet:
    """Apply the normal perturbation; deterministic given (ps, params, seed)."""
    shifts = perturbation_shifts(len(ps), params, seed)
    xy = ps.coords() + shifts
    pts = tuple(Point2(float(x), float(y)) for x, y in xy)
    return PointSet(pts, kind=ps.kind, param=ps.param, perturbed=True)


def write_csv(ps: PointSet, path) -> None:
    """Dump as label,x,y rows (debugging aid)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "x", "y"])
        for k, p in enumerate(ps.points, start=1):
            w.writerow([k, repr(p.x), repr(p.y)])


def read_csv(path) -> PointSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    pts = tuple(Point2(float(x), float(y)) for _, x, y in rows[1:])
    return PointSet(pts, kind=CUSTOM)
