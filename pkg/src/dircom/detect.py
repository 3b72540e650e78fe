"""Hierarchical agglomerative community detection by modularity maximization.

Starting from singletons, repeatedly merge a pair of sets with nonnegative
correlation until none exists (``stop="natural"``) or until a requested set
count is reached (``stop=k``, merging the policy-best pair even when every
correlation is negative). Each merge adds ``2 * q(S_i, S_j)`` to the
modularity, so natural-stop runs have non-decreasing modularity, and under
the greedy policy the merged average correlation never increases.

Pairwise correlations are maintained incrementally:

    q(S_i+S_j, S_i+S_j) = q(S_i,S_i) + 2 q(S_i,S_j) + q(S_j,S_j)
    q(S_i+S_j, S_l)     = q(S_i,S_l) + q(S_j,S_l)

Set ids follow the linkage convention: singletons are ``0..n-1`` and the
merge at step ``t`` creates id ``n + t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlation import CorrelationTable, correlation_table, set_correlation
from .errors import ValidationError, VerificationError
from .measures import Partition, community_strength
from .sampling import BivariateDistribution

GREEDY = "greedy"
FIRST_NONNEGATIVE = "first-nonnegative"

# Score ties within this width are broken by lowest set-id pair, and the
# greedy monotonicity check allows the same slack against rounding noise.
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class MergeRecord:
    """One merge: ids involved, scores at merge time, modularity afterwards."""

    step: int
    set_a: int
    set_b: int
    new_set: int
    pair_correlation: float
    avg_correlation: float
    modularity: float


@dataclass(frozen=True)
class MergeStep:
    """Snapshot passed to ``on_merge``: cluster members and all maintained
    pairwise correlations right after the recorded merge."""

    record: MergeRecord
    clusters: dict[int, tuple[int, ...]]
    pair_correlations: dict[tuple[int, int], float]


@dataclass(frozen=True)
class MergeTrace:
    """Full result of a detection run."""

    n: int
    policy: str
    stop: int | None
    initial_modularity: float
    records: tuple[MergeRecord, ...]
    partition: Partition
    set_ids: tuple[int, ...]
    self_correlation: tuple[float, ...]
    strength: tuple[float | None, ...]
    negative_merges: int

    @property
    def modularity(self) -> float:
        return self.records[-1].modularity if self.records else self.initial_modularity

    def members(self) -> dict[int, tuple[int, ...]]:
        """Node members of every set id that ever existed, replayed from the records."""
        out: dict[int, tuple[int, ...]] = {i: (i,) for i in range(self.n)}
        for rec in self.records:
            out[rec.new_set] = tuple(sorted(out[rec.set_a] + out[rec.set_b]))
        return out


def agglomerative_detect(
    p: BivariateDistribution,
    policy: str = GREEDY,
    stop: int | str | None = "natural",
    on_merge: Callable[[MergeStep], None] | None = None,
) -> MergeTrace:
    """Run the agglomerative algorithm on the correlation table of ``p``.

    ``policy`` chooses the pair to merge: ``"greedy"`` takes the largest
    average correlation, ``"first-nonnegative"`` the lexicographically first
    nonnegative pair (falling back to the greedy choice when forced merges
    run out of nonnegative pairs). ``stop`` is ``"natural"``/``None`` to halt
    when no nonnegative pair remains, or an integer k to merge down to
    exactly k sets.
    """
    if policy not in (GREEDY, FIRST_NONNEGATIVE):
        raise ValidationError(f"unknown policy {policy!r}")
    if stop == "natural":
        stop = None
    if stop is not None and not 1 <= int(stop) <= p.n:
        raise ValidationError(f"stop={stop} outside [1, {p.n}]")
    if p.n < 1:
        raise ValidationError("detection needs at least one node")

    table = correlation_table(p)
    n = p.n
    q = table.q.copy()
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    slot_id = np.arange(n)  # slot -> current public set id
    members: dict[int, tuple[int, ...]] = {i: (i,) for i in range(n)}
    modularity = float(np.trace(table.q))
    records: list[MergeRecord] = []
    negative_merges = 0
    target = 1 if stop is None else int(stop)

    while int(active.sum()) > target:
        idx = np.flatnonzero(active)
        sub = q[np.ix_(idx, idx)]
        upper = np.triu(np.ones((len(idx), len(idx)), dtype=bool), 1)

        if policy == GREEDY:
            scores = sub / np.outer(sizes[idx], sizes[idx])
            best = scores[upper].max()
            if stop is None and best < 0.0:
                break
            mask = upper & (scores >= best - _TIE_TOL)
            if stop is None:
                # the tie window may dip below zero; natural-stop merges
                # must keep the merged pair nonnegative
                mask &= sub >= 0.0
            cand = np.argwhere(mask)
        else:
            nonneg = upper & (sub >= 0.0)
            if nonneg.any():
                cand = np.argwhere(nonneg)
            elif stop is None:
                break
            else:
                scores = sub / np.outer(sizes[idx], sizes[idx])
                best = scores[upper].max()
                cand = np.argwhere(upper & (scores >= best - _TIE_TOL))

        pub = slot_id[idx[cand]]
        lo = pub.min(axis=1)
        hi = pub.max(axis=1)
        pick = int(np.argmin(lo * (2 * n) + hi))
        slot_a, slot_b = int(idx[cand[pick, 0]]), int(idx[cand[pick, 1]])
        id_a, id_b = int(lo[pick]), int(hi[pick])

        q_ab = float(q[slot_a, slot_b])
        size_a, size_b = sizes[slot_a], sizes[slot_b]
        if q_ab < 0.0:
            negative_merges += 1

        new_id = n + len(records)
        q_self = q[slot_a, slot_a] + 2.0 * q_ab + q[slot_b, slot_b]
        row = q[slot_a, :] + q[slot_b, :]
        keep, drop = min(slot_a, slot_b), max(slot_a, slot_b)
        q[keep, :] = row
        q[:, keep] = row
        q[keep, keep] = q_self
        active[drop] = False
        sizes[keep] = size_a + size_b
        slot_id[keep] = new_id
        members[new_id] = tuple(sorted(members[id_a] + members[id_b]))
        modularity += 2.0 * q_ab

        rec = MergeRecord(
            step=len(records),
            set_a=id_a,
            set_b=id_b,
            new_set=new_id,
            pair_correlation=q_ab,
            avg_correlation=float(q_ab / (size_a * size_b)),
            modularity=modularity,
        )
        records.append(rec)
        if on_merge is not None:
            live = np.flatnonzero(active)
            pairs = {}
            for ai in range(len(live)):
                for bi in range(ai + 1, len(live)):
                    sa, sb = int(slot_id[live[ai]]), int(slot_id[live[bi]])
                    pairs[(min(sa, sb), max(sa, sb))] = float(q[live[ai], live[bi]])
            on_merge(MergeStep(
                record=rec,
                clusters={int(slot_id[s]): members[int(slot_id[s])] for s in live},
                pair_correlations=pairs,
            ))

    final_slots = sorted(np.flatnonzero(active), key=lambda s: members[int(slot_id[s])][0])
    set_ids = tuple(int(slot_id[s]) for s in final_slots)
    sets = tuple(members[i] for i in set_ids)
    self_corr = tuple(float(q[s, s]) for s in final_slots)
    strengths: list[float | None] = []
    for s in sets:
        mass = float(p.p_v[list(s)].sum())
        strengths.append(community_strength(p, s) if mass > 0.0 else None)

    return MergeTrace(
        n=n,
        policy=policy,
        stop=None if stop is None else int(stop),
        initial_modularity=float(np.trace(table.q)),
        records=tuple(records),
        partition=Partition(n=n, sets=sets),
        set_ids=set_ids,
        self_correlation=self_corr,
        strength=tuple(strengths),
        negative_merges=negative_merges,
    )


@dataclass(frozen=True)
class VerificationReport:
    """Names of the self-checks that were run and passed."""

    n_sets: int
    n_merges: int
    modularity: float
    checks: tuple[str, ...]


def verify_communities(trace: MergeTrace, table: CorrelationTable) -> VerificationReport:
    """Re-derive every guarantee of the algorithm from the trace.

    For natural-stop traces: every returned set has nonnegative
    self-correlation (strictly positive when more than one set remains),
    remaining cross-correlations are nonpositive, and modularity never
    decreased. For forced traces the modularity check covers only the
    prefix of nonnegative merges. Greedy traces additionally get the
    non-increasing merge-score check. All maintained values are compared
    against from-scratch recomputation on the correlation table.
    """
    if table.n != trace.n:
        raise VerificationError("correlation table does not match trace")
    members = trace.members()
    checks = []

    prev_q = trace.initial_modularity
    natural_prefix = True
    for rec in trace.records:
        scratch = set_correlation(table, members[rec.set_a], members[rec.set_b])
        if abs(scratch - rec.pair_correlation) > 1e-12:
            raise VerificationError(
                f"step {rec.step}: maintained q={rec.pair_correlation!r} but "
                f"recomputation gives {scratch!r}"
            )
        expected = prev_q + 2.0 * rec.pair_correlation
        if rec.modularity != expected:
            raise VerificationError(
                f"step {rec.step}: modularity {rec.modularity!r} != previous + 2q = {expected!r}"
            )
        if rec.pair_correlation < 0.0:
            natural_prefix = False
            if trace.stop is None:
                raise VerificationError(
                    f"step {rec.step}: natural-stop run merged a negative pair"
                )
        if natural_prefix and rec.modularity < prev_q:
            raise VerificationError(f"step {rec.step}: modularity decreased")
        prev_q = rec.modularity
    checks.append("pair-correlations-match-recomputation")
    checks.append("modularity-updates-exact")
    checks.append("modularity-non-decreasing" + ("" if trace.stop is None else "-prefix"))

    if trace.policy == GREEDY and len(trace.records) > 1:
        avgs = [rec.avg_correlation for rec in trace.records]
        for a, b in zip(avgs, avgs[1:]):
            if b > a + _TIE_TOL:
                raise VerificationError(f"greedy merge scores increased: {a!r} -> {b!r}")
        checks.append("greedy-merge-scores-non-increasing")

    for s, maintained in zip(trace.partition.sets, trace.self_correlation):
        scratch = set_correlation(table, s, s)
        if abs(scratch - maintained) > 1e-12:
            raise VerificationError(
                f"set {s}: maintained q(S,S)={maintained!r} but recomputation gives {scratch!r}"
            )
    checks.append("self-correlations-match-recomputation")

    if trace.stop is None:
        ids = trace.set_ids
        many = len(ids) >= 2
        if many:
            cross: dict[int, list[float]] = {i: [] for i in range(len(ids))}
            for i in range(len(ids)):
                for j in range(i + 1, len(ids)):
                    c = set_correlation(table, members[ids[i]], members[ids[j]])
                    if c > 1e-12:
                        raise VerificationError(
                            f"sets {ids[i]} and {ids[j]} still have positive correlation {c!r}"
                        )
                    cross[i].append(c)
                    cross[j].append(c)
            checks.append("cross-correlations-nonpositive")
            for i, (s, maintained) in enumerate(zip(trace.partition.sets,
                                                    trace.self_correlation)):
                # Strict positivity is guaranteed only when every stopping
                # inequality holds with margin; a cross-correlation at an
                # exact tie (true value 0) legitimately leaves q(S,S) at 0.
                at_tie = any(c > -1e-12 for c in cross[i])
                if maintained < -1e-12 or (maintained <= 0.0 and not at_tie):
                    raise VerificationError(
                        f"returned set {s} has q(S,S)={maintained!r}, not a community"
                    )
        elif abs(trace.self_correlation[0]) > 1e-10:
            # a lone set is the whole graph: its self-correlation is the
            # global zero sum, so only rounding noise is acceptable
            raise VerificationError(
                f"whole-graph self-correlation {trace.self_correlation[0]!r} is not ~0"
            )
        checks.append("returned-sets-are-communities")

    return VerificationReport(
        n_sets=len(trace.partition.sets),
        n_merges=len(trace.records),
        modularity=trace.modularity,
        checks=tuple(checks),
    )
