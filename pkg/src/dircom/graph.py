"""Weighted directed graphs with stable external-label mapping.

Nodes are referenced internally by indices ``0..n-1``; the index of a label
is fixed by first appearance in the input, so repeated runs over the same
input produce identical graphs. Parallel edges are merged by summing their
weights at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EdgeListParseError, ValidationError

# Dense n*n arrays are built for sampling and correlation tables; refuse
# sizes where that silently turns into memory thrash.
MAX_DENSE_NODES = 20000


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable weighted directed graph.

    Edges are stored as parallel arrays sorted by (src, dst); duplicates are
    disallowed (merge them before construction, or use :meth:`from_edges`).
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    labels: tuple[str, ...]
    _label_index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        weight = np.asarray(self.weight, dtype=np.float64)
        if not (len(src) == len(dst) == len(weight)):
            raise ValidationError("edge arrays must have equal length")
        if len(self.labels) != self.n:
            raise ValidationError(f"expected {self.n} labels, got {len(self.labels)}")
        if len(set(self.labels)) != self.n:
            raise ValidationError("node labels must be unique")
        if len(src) and (src.min() < 0 or src.max() >= self.n or dst.min() < 0 or dst.max() >= self.n):
            raise ValidationError("edge endpoint out of range")
        if not np.all(np.isfinite(weight)) or np.any(weight < 0):
            raise ValidationError("edge weights must be finite and nonnegative")
        order = np.lexsort((dst, src))
        src, dst, weight = src[order], dst[order], weight[order]
        if len(src) > 1:
            same = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if same.any():
                raise ValidationError("duplicate (src, dst) edges; merge weights first")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "_label_index", {lab: i for i, lab in enumerate(self.labels)})

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        labels: Sequence[str] | None = None,
    ) -> "DirectedGraph":
        """Build a graph, merging duplicate (src, dst) pairs by weight sum."""
        merged: dict[tuple[int, int], float] = {}
        for s, d, w in edges:
            merged[(s, d)] = merged.get((s, d), 0.0) + float(w)
        if labels is None:
            labels = tuple(str(i) for i in range(n))
        keys = sorted(merged)
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        weight = np.array([merged[k] for k in keys], dtype=np.float64)
        return cls(n=n, src=src, dst=dst, weight=weight, labels=tuple(labels))

    @property
    def num_edges(self) -> int:
        return len(self.src)

    def index_of(self, label: str) -> int:
        return self._label_index[label]

    def out_degrees(self) -> np.ndarray:
        """Weighted out-degree of every node (sum of outgoing edge weights)."""
        k = np.zeros(self.n)
        np.add.at(k, self.src, self.weight)
        return k

    def in_degrees(self) -> np.ndarray:
        k = np.zeros(self.n)
        np.add.at(k, self.dst, self.weight)
        return k

    def adjacency(self) -> np.ndarray:
        """Dense weighted adjacency matrix A with A[i, j] = weight(i -> j)."""
        if self.n > MAX_DENSE_NODES:
            raise ValidationError(
                f"refusing to build a dense {self.n}x{self.n} matrix "
                f"(limit {MAX_DENSE_NODES} nodes)"
            )
        a = np.zeros((self.n, self.n))
        a[self.src, self.dst] = self.weight
        return a

    def transpose(self) -> "DirectedGraph":
        """Graph with every edge reversed."""
        return DirectedGraph(
            n=self.n, src=self.dst.copy(), dst=self.src.copy(),
            weight=self.weight.copy(), labels=self.labels,
        )

    def is_weakly_connected(self) -> bool:
        """True iff the undirected version has a single component (n=0 counts)."""
        if self.n == 0:
            return True
        parent = np.arange(self.n)

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for s, d in zip(self.src, self.dst):
            rs, rd = find(int(s)), find(int(d))
            if rs != rd:
                parent[rs] = rd
        roots = {find(i) for i in range(self.n)}
        return len(roots) == 1

    def remove_isolated(self) -> "DirectedGraph":
        """Drop nodes whose weighted in- and out-degrees are both zero.

        Remaining nodes are re-indexed compactly; labels follow them. Edges
        incident only to dropped nodes necessarily carry weight zero and are
        dropped too.
        """
        keep = (self.out_degrees() > 0) | (self.in_degrees() > 0)
        if keep.all():
            return self
        new_index = np.cumsum(keep) - 1
        mask = keep[self.src] & keep[self.dst]
        labels = tuple(lab for lab, k in zip(self.labels, keep) if k)
        return DirectedGraph(
            n=int(keep.sum()),
            src=new_index[self.src[mask]],
            dst=new_index[self.dst[mask]],
            weight=self.weight[mask],
            labels=labels,
        )

    def to_edge_list(self) -> str:
        """Serialize to the tab-separated edge-list format read by ``load_edge_list``."""
        lines = [
            f"{self.labels[s]}\t{self.labels[d]}\t{float(w)!r}"
            for s, d, w in zip(self.src, self.dst, self.weight)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def load_edge_list(source: str | Iterable[str]) -> DirectedGraph:
    """Parse a tab-separated edge list into a graph.

    Each non-blank, non-``#`` line is ``src<TAB>dst[<TAB>weight]`` with
    arbitrary string labels and a default weight of 1. Node indices are
    assigned in first-appearance order; duplicate edges are merged by
    summing weights.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, int, float]] = []

    def node(label: str) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise EdgeListParseError(
                lineno, f"expected 'src<TAB>dst[<TAB>weight]', got {line!r}"
            )
        if not parts[0] or not parts[1]:
            raise EdgeListParseError(lineno, "empty node label")
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise EdgeListParseError(lineno, f"bad weight {parts[2]!r}") from None
            if not np.isfinite(w):
                raise EdgeListParseError(lineno, f"weight {parts[2]!r} is not finite")
            if w < 0:
                raise ValidationError(f"line {lineno}: negative weight {w}")
        else:
            w = 1.0
        edges.append((node(parts[0]), node(parts[1]), w))

    return DirectedGraph.from_edges(n=len(labels), edges=edges, labels=labels)


def load_edge_list_file(path) -> DirectedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_edge_list(fh)
