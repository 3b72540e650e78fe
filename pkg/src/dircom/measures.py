"""Probabilistic structural measures over a sampled graph.

All measures are plain probabilities of the pair ``(V, W) ~ p``:

* centrality ``C(S) = Pr(V in S)``,
* relative centrality ``RC(S1|S2) = Pr(W in S1 | V in S2)``,
* community strength ``Str(S) = RC(S|S) - C(S)`` (a community has
  ``Str(S) >= 0``),
* modularity ``Q = sum_c C(S_c) * Str(S_c)`` over a partition.

Node sets are value objects: any iterable of indices is normalized to a
sorted unique tuple before use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .sampling import BivariateDistribution

EQUIVALENCE_TOL = 1e-10
_FORM_AGREEMENT_TOL = 1e-10


def as_node_set(indices: Iterable[int], n: int) -> np.ndarray:
    """Sorted unique index array, validated against the node range."""
    s = np.unique(np.asarray(list(indices), dtype=np.int64))
    if len(s) and (s[0] < 0 or s[-1] >= n):
        raise ValidationError(f"node index out of range [0, {n})")
    return s


@dataclass(frozen=True)
class Partition:
    """Disjoint node sets covering all of ``0..n-1``."""

    n: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        norm = tuple(tuple(sorted(set(int(i) for i in s))) for s in self.sets)
        seen: set[int] = set()
        total = 0
        for s in norm:
            if not s:
                raise ValidationError("partition sets must be nonempty")
            total += len(s)
            seen.update(s)
        if seen and (min(seen) < 0 or max(seen) >= self.n):
            raise ValidationError(f"partition index out of range [0, {self.n})")
        if total != len(seen):
            raise ValidationError("partition sets must be disjoint")
        if len(seen) != self.n:
            raise ValidationError("partition must cover every node")
        object.__setattr__(self, "sets", norm)

    @classmethod
    def from_lists(cls, n: int, sets: Sequence[Sequence[int]]) -> "Partition":
        return cls(n=n, sets=tuple(tuple(s) for s in sets))

    def __len__(self) -> int:
        return len(self.sets)


def centrality(p: BivariateDistribution, s: Iterable[int]) -> float:
    """Probability that the first sampled node lies in ``s``."""
    idx = as_node_set(s, p.n)
    return float(p.p_v[idx].sum())


def relative_centrality(p: BivariateDistribution, s1: Iterable[int], s2: Iterable[int]) -> float:
    """Conditional probability that ``W`` lies in ``s1`` given ``V`` in ``s2``."""
    i1 = as_node_set(s1, p.n)
    i2 = as_node_set(s2, p.n)
    denom = float(p.p_v[i2].sum())
    if denom <= 0.0:
        raise ValidationError("relative centrality undefined: conditioning set has zero mass")
    if len(i1) == 0:
        return 0.0
    return float(p.p[np.ix_(i2, i1)].sum()) / denom


def community_strength(p: BivariateDistribution, s: Iterable[int]) -> float:
    """``RC(S|S) - C(S)``; undefined (error) when ``S`` carries no mass."""
    idx = as_node_set(s, p.n)
    c = float(p.p_v[idx].sum())
    if c <= 0.0:
        raise ValidationError("community strength undefined: set has zero mass")
    rc_self = float(p.p[np.ix_(idx, idx)].sum()) / c
    return rc_self - c


_STATEMENTS = (
    "strength(S) >= 0",
    "RC(S|S) >= RC(S|Sc)",
    "RC(Sc|S) <= C(Sc)",
    "RC(S|Sc) <= C(S)",
    "strength(Sc) >= 0",
    "RC(Sc|Sc) >= RC(Sc|S)",
)


@dataclass(frozen=True)
class CommunityCheck:
    """Community predicate plus the six-way equivalence diagnostic.

    ``margins`` holds the signed slack of each statement (nonnegative means
    the statement holds); ``verdicts`` classifies each margin as ``holds``,
    ``fails``, or ``boundary`` when it is within ``tol`` of zero. The six
    statements are mathematically equivalent whenever ``0 < C(S) < 1``; the
    diagnostic is skipped (fields ``None``) outside that range.
    """

    is_community: bool
    strength: float
    margins: tuple[float, ...] | None = None
    verdicts: tuple[str, ...] | None = None

    @property
    def statements(self) -> tuple[str, ...]:
        return _STATEMENTS


def is_community(
    p: BivariateDistribution, s: Iterable[int], tol: float = EQUIVALENCE_TOL
) -> CommunityCheck:
    """Decide ``Str(S) >= 0`` and, when ``0 < C(S) < 1``, cross-check all six
    equivalent characterizations against each other."""
    idx = as_node_set(s, p.n)
    comp = np.setdiff1d(np.arange(p.n), idx, assume_unique=True)
    c_s = float(p.p_v[idx].sum())
    c_sc = float(p.p_v[comp].sum())
    if c_s <= 0.0:
        raise ValidationError("community predicate undefined: set has zero mass")
    strength = community_strength(p, idx)
    if len(comp) == 0 or c_sc <= 0.0:
        # Complement carries no mass: S is the whole support, strength ~ 0.
        return CommunityCheck(is_community=strength >= 0.0, strength=strength)

    rc_s_s = relative_centrality(p, idx, idx)
    rc_s_sc = relative_centrality(p, idx, comp)
    rc_sc_s = relative_centrality(p, comp, idx)
    rc_sc_sc = relative_centrality(p, comp, comp)
    margins = (
        strength,
        rc_s_s - rc_s_sc,
        c_sc - rc_sc_s,
        c_s - rc_s_sc,
        rc_sc_sc - c_sc,
        rc_sc_sc - rc_sc_s,
    )
    verdicts = tuple(
        "boundary" if abs(m) <= tol else ("holds" if m > 0 else "fails") for m in margins
    )
    decided = {v for v in verdicts if v != "boundary"}
    if len(decided) > 1:
        raise ValidationError(
            "six-way community equivalence violated: "
            + ", ".join(f"{s}: {v} ({m:.3e})" for s, v, m in zip(_STATEMENTS, verdicts, margins))
        )
    return CommunityCheck(
        is_community=strength >= 0.0,
        strength=strength,
        margins=margins,
        verdicts=verdicts,
    )


def modularity(p: BivariateDistribution, partition: Partition) -> float:
    """Centrality-weighted average community strength of a partition.

    Computed both as ``sum_c C(S_c) * Str(S_c)`` and as the within-set excess
    mass ``sum_c sum_{v,w in S_c} (p(v,w) - p_V(v) p_W(w))``; the two forms
    must agree, and the latter is returned.
    """
    if partition.n != p.n:
        raise ValidationError("partition size does not match distribution")
    weighted = 0.0
    pairwise = 0.0
    for s in partition.sets:
        idx = np.asarray(s, dtype=np.int64)
        c = float(p.p_v[idx].sum())
        inside = float(p.p[np.ix_(idx, idx)].sum())
        pairwise += inside - float(p.p_v[idx].sum()) * float(p.p_w[idx].sum())
        if c > 0.0:
            weighted += c * (inside / c - c)
    if abs(weighted - pairwise) > _FORM_AGREEMENT_TOL:
        raise ValidationError(
            f"modularity forms disagree: {weighted!r} vs {pairwise!r}"
        )
    return pairwise
