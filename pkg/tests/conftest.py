"""Shared test oracles, kept independent of the package's code paths."""

from fractions import Fraction

import numpy as np
import pytest


def det3_frac(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def incircle_det_oracle(a, b, c, d) -> Fraction:
    """Exact 4x4 incircle determinant, Laplace expansion along the last
    column (a different formulation than the package's translated 3x3)."""
    rows = []
    for p in (a, b, c, d):
        x, y = Fraction(p[0]), Fraction(p[1])
        rows.append((x, y, x * x + y * y))
    total = Fraction(0)
    for r in range(4):
        minor = [rows[i] for i in range(4) if i != r]
        cof = (-1) ** (r + 3) * det3_frac(minor)
        total += cof
    return total


def orient_det_oracle(a, b, c) -> Fraction:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    cx, cy = Fraction(c[0]), Fraction(c[1])
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def sign_of(x) -> int:
    return (x > 0) - (x < 0)


def components_by_flood_fill(vertices, edges) -> int:
    """BFS component count, independent of the package's union-find."""
    adj = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = set()
    count = 0
    for v in vertices:
        if v in seen:
            continue
        count += 1
        queue = [v]
        seen.add(v)
        while queue:
            cur = queue.pop()
            for nb in adj[cur]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
    return count


def diagonal_graph_edges(code):
    """Edge list of the diagonal subgraph straight from the definition."""
    m = code.m
    edges = []
    for j in range(m):
        for i in range(m):
            if code.bit(i, j):
                edges.append(((i, j), (i + 1, j + 1)))
            else:
                edges.append(((i, j + 1), (i + 1, j)))
    vertices = [(i, j) for j in range(m + 1) for i in range(m + 1)]
    return vertices, edges


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
