"""Shared corpus generators and independent numerical oracles.

The oracles deliberately avoid the library's own computation paths:
stationary vectors come from an SVD null-space solve instead of power
iteration, and measure values are recomputed with explicit Python loops
over the probability matrix.
"""

from __future__ import annotations

import numpy as np
import pytest

from dircom import DirectedGraph, SamplerSpec, sampled_distribution

SAMPLERS = (
    SamplerSpec("simple"),
    SamplerSpec("pagerank", damping=0.9),
    SamplerSpec("backward", self_weight=0.05, forward_weight=0.85, backward_weight=0.1),
)

# Tight tolerance so property tests at 1e-10 are not eaten by sampler error.
CORPUS_TOL = 1e-12
CORPUS_MAX_ITER = 200_000


def random_digraph(rng: np.random.Generator, n: int) -> DirectedGraph:
    """Random weakly-connected digraph with positive out-degrees everywhere."""
    while True:
        p = rng.uniform(0.08, 0.5)
        adj = rng.random((n, n)) < p
        np.fill_diagonal(adj, rng.random(n) < 0.1)
        for i in range(n):
            if not adj[i].any():
                adj[i, int(rng.integers(n))] = True
        src, dst = np.nonzero(adj)
        if rng.random() < 0.3:
            weight = rng.uniform(0.1, 3.0, size=len(src))
        else:
            weight = np.ones(len(src))
        g = DirectedGraph(n=n, src=src, dst=dst, weight=weight,
                          labels=tuple(str(i) for i in range(n)))
        if g.is_weakly_connected():
            return g


def random_connected_undirected(rng: np.random.Generator, n: int) -> DirectedGraph:
    """Random connected symmetric graph (each undirected edge as two arcs)."""
    while True:
        p = rng.uniform(max(0.1, min(0.8, 2.0 / n)), 0.9)
        upper = np.triu(rng.random((n, n)) < p, 1)
        adj = upper | upper.T
        src, dst = np.nonzero(adj)
        g = DirectedGraph(n=n, src=src, dst=dst, weight=np.ones(len(src)),
                          labels=tuple(str(i) for i in range(n)))
        if len(src) and g.is_weakly_connected():
            return g


def corpus(seed: int, count: int, n_low: int = 3, n_high: int = 30) -> list[DirectedGraph]:
    rng = np.random.default_rng(seed)
    return [random_digraph(rng, int(rng.integers(n_low, n_high + 1))) for _ in range(count)]


def random_nonempty_subset(rng: np.random.Generator, n: int) -> list[int]:
    size = int(rng.integers(1, n))
    return sorted(rng.choice(n, size=size, replace=False).tolist())


def random_partition(rng: np.random.Generator, n: int) -> list[list[int]]:
    k = int(rng.integers(1, n + 1))
    assign = rng.integers(0, k, size=n)
    sets: dict[int, list[int]] = {}
    for node, c in enumerate(assign):
        sets.setdefault(int(c), []).append(node)
    return list(sets.values())


def oracle_stationary(matrix: np.ndarray) -> np.ndarray:
    """Stationary vector via the null space of (P^T - I), not power iteration."""
    n = matrix.shape[0]
    _, s, vt = np.linalg.svd(matrix.T - np.eye(n))
    null = vt[np.abs(s) < 1e-9]
    if len(null) != 1:
        raise ValueError("oracle needs a unique stationary distribution")
    pi = null[0]
    pi = pi / pi.sum()
    if pi.min() < -1e-12:
        raise ValueError("oracle produced a negative stationary entry")
    return np.abs(pi)


def oracle_rc(p: np.ndarray, s1, s2) -> float:
    """Relative centrality by explicit loops over the probability matrix."""
    num = sum(p[v, w] for v in s2 for w in s1)
    den = sum(p[v, w] for v in s2 for w in range(p.shape[0]))
    return num / den


def oracle_strength(p: np.ndarray, s) -> float:
    return oracle_rc(p, s, s) - sum(
        p[v, w] for v in s for w in range(p.shape[0])
    )


def oracle_modularity(p: np.ndarray, sets) -> float:
    n = p.shape[0]
    pv = [sum(p[v, w] for w in range(n)) for v in range(n)]
    pw = [sum(p[v, w] for v in range(n)) for w in range(n)]
    total = 0.0
    for s in sets:
        total += sum(p[v, w] - pv[v] * pw[w] for v in s for w in s)
    return total


@pytest.fixture(scope="session")
def small_corpus() -> list[DirectedGraph]:
    return corpus(seed=1234, count=40)


@pytest.fixture(scope="session")
def small_distributions(small_corpus):
    """(graph, sampler, distribution) triples over the small corpus."""
    out = []
    for gi, g in enumerate(small_corpus):
        spec = SAMPLERS[gi % len(SAMPLERS)]
        out.append((g, spec, sampled_distribution(
            g, spec, tol=CORPUS_TOL, max_iter=CORPUS_MAX_ITER)))
    return out
