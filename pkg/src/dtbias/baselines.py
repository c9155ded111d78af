"""Catalan-number machinery and uniform-random reference models.

All baseline probabilities are exact rationals; they serve as ground truth
for the biased distributions measured elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .pointsets import SeedSpec
from .triangulate import GridCode


def catalan(k: int) -> int:
    """Exact k-th Catalan number."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return math.comb(2 * k, k) // (k + 1)


@dataclass(frozen=True)
class CatalanTable:
    """C_0..C_k built by the convolution recurrence C_{i+1} = sum C_j C_{i-j}."""

    k: int
    values: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        vals = [1]
        for i in range(self.k):
            vals.append(sum(vals[j] * vals[i - j] for j in range(i + 1)))
        object.__setattr__(self, "values", tuple(vals))


def triangle_arcs(n: int, i: int, j: int, k: int) -> tuple[int, int, int]:
    """Arc lengths the triangle (i, j, k) cuts the n-gon boundary into."""
    if not (1 <= i < j < k <= n):
        raise ValueError("need vertex labels 1 <= i < j < k <= n")
    return (j - i, k - j, n - k + i)


def uniform_triangle_prob(n: int, i: int, j: int, k: int) -> Fraction:
    """Probability that triangle (i, j, k) appears in a uniformly random
    triangulation of the convex n-gon: C_{a-1} C_{b-1} C_{c-1} / C_{n-2}
    for the three boundary arcs a + b + c = n."""
    a, b, c = triangle_arcs(n, i, j, k)
    num = catalan(a - 1) * catalan(b - 1) * catalan(c - 1)
    return Fraction(num, catalan(n - 2))


def corner_triangle_prob(n: int) -> Fraction:
    """Uniform-model probability of a corner triangle (arcs 1, 1, n-2);
    tends to 1/4 as n grows."""
    return Fraction(catalan(n - 3), catalan(n - 2))


def sample_uniform_grid(m: int, seed: SeedSpec) -> GridCode:
    """One draw from UT(P): every cell's diagonal is an independent fair coin."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = seed.stream()
    bits = rng.integers(0, 2, size=(m, m))
    return GridCode.from_bits(m, bits)
