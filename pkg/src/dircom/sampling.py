"""Bivariate node-pair distributions sampled from stationary Markov chains.

A graph is "sampled" by running a stationary ergodic random walk on it and
taking the joint law of two successive states: ``p(v, w) = pi_v * P[v, w]``.
Stationarity makes the two marginals of ``p`` equal, which is the property
every downstream measure relies on. Three walks are provided:

* the simple random walk (out-edges weighted by edge weight),
* the damped uniform-jump walk used by PageRank,
* a walk on ``l0*I + l1*A + l2*A^T`` (self loops and reversed edges restore
  ergodicity without adding cross-topology shortcuts).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import ConvergenceError, ValidationError
from .graph import MAX_DENSE_NODES, DirectedGraph

_ROW_SUM_TOL = 1e-12
_MASS_TOL = 1e-12

DEFAULT_TOL = 1e-10
DEFAULT_MARGINAL_TOL = 10 * DEFAULT_TOL


def default_max_iter(n: int) -> int:
    return 100 * n + 1000


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix of a Markov chain on graph nodes."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("transition matrix must be square")
        if np.any(m < 0):
            raise ValidationError("transition probabilities must be nonnegative")
        if m.shape[0] and np.max(np.abs(m.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
            raise ValidationError("every row of a transition matrix must sum to 1")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary probability vector plus the power-iteration diagnostics."""

    pi: np.ndarray
    residual: float
    iterations: int

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > _MASS_TOL:
            raise ValidationError("stationary vector must be a probability distribution")
        object.__setattr__(self, "pi", pi)

    @property
    def n(self) -> int:
        return len(self.pi)


class BivariateDistribution:
    """Probability matrix ``p(v, w)`` over ordered node pairs.

    Total mass must be 1 and the two marginals must agree within
    ``marginal_tol`` (that equality is what stands in for symmetry on
    directed networks). Marginals are cached: ``p_v`` sums over the second
    coordinate, ``p_w`` over the first.
    """

    def __init__(self, p: np.ndarray, marginal_tol: float = DEFAULT_MARGINAL_TOL):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValidationError("bivariate distribution must be a square matrix")
        if p.shape[0] > MAX_DENSE_NODES:
            raise ValidationError(
                f"refusing dense bivariate distribution on {p.shape[0]} nodes "
                f"(limit {MAX_DENSE_NODES})"
            )
        if np.any(p < 0):
            raise ValidationError("bivariate probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > _MASS_TOL:
            raise ValidationError(f"total mass must be 1, got {p.sum()!r}")
        self.p = p
        self.p_v = p.sum(axis=1)
        self.p_w = p.sum(axis=0)
        self.marginal_gap = float(np.max(np.abs(self.p_v - self.p_w))) if p.shape[0] else 0.0
        self.marginal_tol = float(marginal_tol)
        if self.marginal_gap > self.marginal_tol:
            raise ValidationError(
                f"marginals differ by {self.marginal_gap:.3e} "
                f"(tolerance {self.marginal_tol:.3e}); the chain that produced "
                "this distribution was not stationary"
            )

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def save(self, fh: IO[str], comments: Iterable[str] = ()) -> None:
        """Write the sparse text form: comments, a header ``n``, then
        ``v<TAB>w<TAB>p`` triplets for the nonzero entries."""
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(f"{self.n}\n")
        for v, w in zip(*np.nonzero(self.p)):
            fh.write(f"{v}\t{w}\t{float(self.p[v, w])!r}\n")

    @classmethod
    def load(cls, source: str | Iterable[str],
             marginal_tol: float = DEFAULT_MARGINAL_TOL) -> "BivariateDistribution":
        lines = source.splitlines() if isinstance(source, str) else source
        n = None
        p = None
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if n is None:
                try:
                    n = int(line)
                except ValueError:
                    raise ValidationError(f"line {lineno}: expected node count, got {line!r}") from None
                if n < 0 or n > MAX_DENSE_NODES:
                    raise ValidationError(f"line {lineno}: bad node count {n}")
                p = np.zeros((n, n))
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValidationError(f"line {lineno}: expected 'v<TAB>w<TAB>p', got {line!r}")
            try:
                v, w, mass = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ValidationError(f"line {lineno}: bad triplet {line!r}") from None
            if not (0 <= v < n and 0 <= w < n):
                raise ValidationError(f"line {lineno}: index out of range")
            p[v, w] = mass
        if p is None:
            raise ValidationError("missing node-count header")
        return cls(p, marginal_tol=marginal_tol)


def simple_walk_transition(g: DirectedGraph) -> TransitionMatrix:
    """Random walk following out-edges with probability proportional to weight."""
    k = g.out_degrees()
    dangling = np.flatnonzero(k == 0)
    if len(dangling):
        raise ValidationError(
            f"simple random walk undefined: node {g.labels[dangling[0]]!r} has out-degree 0"
        )
    return TransitionMatrix(g.adjacency() / k[:, None])


def pagerank_transition(g: DirectedGraph, damping: float) -> TransitionMatrix:
    """Damped random-surfer walk.

    With probability ``damping`` the walker follows an out-edge (uniform over
    edge weight), otherwise it jumps to a node chosen uniformly among all
    ``n``. Rows of nodes with no out-edges spread their edge-following mass
    uniformly as well, keeping the matrix stochastic.
    """
    if not 0.0 < damping < 1.0:
        raise ValidationError(f"damping must be in (0, 1), got {damping}")
    if g.n == 0:
        raise ValidationError("PageRank walk needs at least one node")
    k = g.out_degrees()
    walk = np.empty((g.n, g.n))
    dangling = k == 0
    safe_k = np.where(dangling, 1.0, k)
    walk[:] = g.adjacency() / safe_k[:, None]
    walk[dangling] = 1.0 / g.n
    return TransitionMatrix((1.0 - damping) / g.n + damping * walk)


def backward_jump_transition(
    g: DirectedGraph, self_weight: float, forward_weight: float, backward_weight: float
) -> TransitionMatrix:
    """Walk on the reweighted adjacency ``l0*I + l1*A + l2*A^T``, row-normalized."""
    for name, lam in (("self_weight", self_weight),
                      ("forward_weight", forward_weight),
                      ("backward_weight", backward_weight)):
        if lam < 0:
            raise ValidationError(f"{name} must be nonnegative, got {lam}")
    if abs(self_weight + forward_weight + backward_weight - 1.0) > 1e-12:
        raise ValidationError("self/forward/backward weights must sum to 1")
    a = g.adjacency()
    a_hat = self_weight * np.eye(g.n) + forward_weight * a + backward_weight * a.T
    rows = a_hat.sum(axis=1)
    dead = np.flatnonzero(rows == 0)
    if len(dead):
        raise ValidationError(
            f"node {g.labels[dead[0]]!r} has no transitions under the chosen weights"
        )
    return TransitionMatrix(a_hat / rows[:, None])


def stationary_distribution(
    P: TransitionMatrix, tol: float = DEFAULT_TOL, max_iter: int | None = None
) -> StationaryDistribution:
    """Power iteration for ``pi = pi P`` from the uniform start.

    Unless every state carries a self-loop (which already rules out
    periodicity), each update averages the current iterate with its one-step
    image so that periodic chains (pure cycles) converge instead of
    oscillating. The residual reported and tested is ``||pi P - pi||_1``
    against the original matrix.
    """
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    n = P.n
    if n == 0:
        raise ValidationError("cannot compute the stationary vector of an empty chain")
    if max_iter is None:
        max_iter = default_max_iter(n)
    x = np.full(n, 1.0 / n)
    m = P.matrix
    plain = bool(np.all(m.diagonal() > 0))
    residual = np.inf
    for it in range(max_iter + 1):
        step = x @ m
        residual = float(np.abs(step - x).sum())
        if residual <= tol:
            return StationaryDistribution(pi=x, residual=residual, iterations=it)
        x = step if plain else 0.5 * (x + step)
        x /= x.sum()
    raise ConvergenceError(
        f"power iteration stalled at residual {residual:.3e} after {max_iter} "
        f"iterations (tolerance {tol:.1e}); the chain may not be ergodic",
        residual=residual,
        iterations=max_iter,
    )


def bivariate_from_chain(
    P: TransitionMatrix,
    stationary: StationaryDistribution,
    marginal_tol: float | None = None,
) -> BivariateDistribution:
    """Joint law of two successive states: ``p(v, w) = pi_v * P[v, w]``.

    ``marginal_tol`` defaults to ten times the iteration residual; a larger
    marginal gap means ``stationary`` does not belong to ``P``.
    """
    if stationary.n != P.n:
        raise ValidationError("stationary vector and transition matrix size mismatch")
    if marginal_tol is None:
        marginal_tol = max(10.0 * stationary.residual, 1e-12)
    return BivariateDistribution(stationary.pi[:, None] * P.matrix, marginal_tol=marginal_tol)


@dataclass(frozen=True)
class SamplerSpec:
    """Named recipe for turning a graph into a sampled distribution."""

    kind: str  # "simple" | "pagerank" | "backward"
    damping: float = 0.9
    self_weight: float = 0.05
    forward_weight: float = 0.85
    backward_weight: float = 0.1

    def __post_init__(self):
        if self.kind not in ("simple", "pagerank", "backward"):
            raise ValidationError(f"unknown sampler kind {self.kind!r}")

    def transition(self, g: DirectedGraph) -> TransitionMatrix:
        if self.kind == "simple":
            return simple_walk_transition(g)
        if self.kind == "pagerank":
            return pagerank_transition(g, self.damping)
        return backward_jump_transition(
            g, self.self_weight, self.forward_weight, self.backward_weight
        )

    def params(self) -> dict:
        if self.kind == "simple":
            return {}
        if self.kind == "pagerank":
            return {"damping": self.damping}
        return {
            "self_weight": self.self_weight,
            "forward_weight": self.forward_weight,
            "backward_weight": self.backward_weight,
        }

    def describe(self) -> str:
        return json.dumps({"kind": self.kind, **self.params()}, sort_keys=True)


def sampled_distribution(
    g: DirectedGraph,
    spec: SamplerSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> BivariateDistribution:
    """Build the sampler's transition matrix, solve for its stationary vector,
    and return the induced bivariate distribution."""
    P = spec.transition(g)
    sd = stationary_distribution(P, tol=tol, max_iter=max_iter)
    return bivariate_from_chain(P, sd)
