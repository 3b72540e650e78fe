"""Symmetrized distributions and the node/set correlation measures.

An asymmetric sampled distribution ``p`` can be replaced by the symmetric
``(p(v,w) + p(w,v)) / 2`` without changing the modularity of any partition,
so detection only ever needs the symmetric correlation table

    q(v, w) = p~(v, w) - p~_V(v) * p~_V(w),

whose rows sum to zero and whose within-set sums decompose modularity:
``Q = sum_c q(S_c, S_c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .measures import as_node_set
from .sampling import BivariateDistribution

_ROW_ZERO_TOL = 1e-10


def symmetrize(p: BivariateDistribution) -> BivariateDistribution:
    """Average ``p`` with its transpose; marginals and total mass carry over."""
    return BivariateDistribution((p.p + p.p.T) / 2.0, marginal_tol=p.marginal_tol)


@dataclass(frozen=True)
class CorrelationTable:
    """Symmetric matrix of pairwise node correlations (entries may be negative)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValidationError("correlation table must be square")
        if not np.array_equal(q, q.T):
            raise ValidationError("correlation table must be exactly symmetric")
        if q.shape[0] and np.max(np.abs(q.sum(axis=1))) > _ROW_ZERO_TOL:
            raise ValidationError("correlation table rows must sum to zero")
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]


def correlation_table(p: BivariateDistribution) -> CorrelationTable:
    """Pairwise correlation of the symmetrized distribution.

    Built from one marginal vector and mirrored across the diagonal so the
    symmetry invariant holds bit-for-bit.
    """
    sym = (p.p + p.p.T) / 2.0
    marginal = sym.sum(axis=1)
    q = sym - marginal[:, None] * marginal[None, :]
    q = np.triu(q) + np.triu(q, 1).T
    return CorrelationTable(q)


def set_correlation(table: CorrelationTable, s1: Iterable[int], s2: Iterable[int]) -> float:
    """Summed correlation ``q(S1, S2)`` between two node sets."""
    i1 = as_node_set(s1, table.n)
    i2 = as_node_set(s2, table.n)
    return float(table.q[np.ix_(i1, i2)].sum())


def avg_correlation(table: CorrelationTable, s1: Iterable[int], s2: Iterable[int]) -> float:
    """``q(S1, S2)`` normalized by ``|S1| * |S2|``."""
    i1 = as_node_set(s1, table.n)
    i2 = as_node_set(s2, table.n)
    if len(i1) == 0 or len(i2) == 0:
        raise ValidationError("average correlation undefined for empty sets")
    return float(table.q[np.ix_(i1, i2)].sum()) / (len(i1) * len(i2))
