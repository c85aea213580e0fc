from collections import Counter
from collections.abc import Hashable, Iterable
from dataclasses import dataclass

import numpy as np


class UnionFind:
    """
    Disjoint sets over arbitrary hashable elements, with union by rank and
    path compression.

    Elements are registered lazily by `find`. `union` reports whether two
    distinct classes were actually merged, which the congruence worklist
    uses to decide whether to propagate.

    >>> uf = UnionFind()
    >>> uf.union(1, 2)
    True
    >>> uf.union(2, 1)
    False
    >>> uf.find(2)
    1
    """

    def __init__(self, elements: Iterable[Hashable] = ()):
        self.parent = {}
        self.rank = Counter()
        for x in elements:
            self.parent[x] = x

    def find(self, x):
        root = self.parent.setdefault(x, x)
        while root != self.parent[root]:
            root = self.parent[root]
        # path compression
        while x != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        px = self.find(x)
        py = self.find(y)
        if px == py:
            return False

        if self.rank[px] == self.rank[py]:
            self.parent[py] = px
            self.rank[px] += 1
        elif self.rank[px] > self.rank[py]:
            self.parent[py] = px
        else:
            self.parent[px] = py
        return True

    def connected(self, x, y) -> bool:
        return self.find(x) == self.find(y)

    def groups(self, order: Iterable[Hashable] | None = None) -> list[list]:
        """Classes as lists, in first-occurrence order of `order` (default: insertion order)."""
        blocks = {}
        for x in (self.parent if order is None else order):
            blocks.setdefault(self.find(x), []).append(x)
        return list(blocks.values())

    def class_count(self) -> int:
        return sum(1 for x in self.parent if self.find(x) == x)


# --- Array kernel ---
@dataclass(frozen=True)
class ArrayClosure:
    """
    Result of the numpy closure: `labels[x]` is the least element of x's class.
    `merges` counts the roots absorbed while settling.
    """
    labels: np.ndarray
    initial_classes: int
    final_classes: int
    rounds: int
    merges: int


def _settle(labels: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    """
    Merges the classes of a[i] and b[i] for all i; labels stay minimal roots.
    Returns the labels and the number of roots that stopped being roots.
    """
    merges = 0
    while True:
        ra = labels[a]
        rb = labels[b]
        pending = ra != rb
        if not pending.any():
            return labels, merges
        lo = np.minimum(ra[pending], rb[pending])
        hi = np.maximum(ra[pending], rb[pending])
        np.minimum.at(labels, hi, lo)
        # each distinct hi was a root and now points below itself
        merges += len(np.unique(hi))
        # pointer jumping until every label is a root
        while True:
            jumped = labels[labels]
            if np.array_equal(jumped, labels):
                break
            labels = jumped
        a = a[pending]
        b = b[pending]


def array_congruence_closure(maps: list[np.ndarray], pairs: np.ndarray, size: int | None = None) -> ArrayClosure:
    """
    Least congruence on a one-object E-set with carrier range(size), generated
    by `pairs` (shape (p, 2)), where the morphisms act through the integer
    arrays in `maps`.

    Each round settles the pending edges, then emits (f(x), f(root(x))) only for
    elements whose root moved in that round: an element whose root is
    unchanged already has its images related to its root's images.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    maps = [np.asarray(f, dtype=np.int64) for f in maps]
    if size is None:
        if maps:
            size = len(maps[0])
        else:
            size = int(pairs.max()) + 1 if len(pairs) else 0
    labels = np.arange(size, dtype=np.int64)
    a, b = pairs[:, 0], pairs[:, 1]
    rounds = 0
    merges = 0

    while len(a):
        rounds += 1
        before = labels.copy()
        labels, settled = _settle(labels, a, b)
        merges += settled
        moved = np.nonzero(labels != before)[0]
        if not len(moved):
            break
        roots = labels[moved]
        a = np.concatenate([f[moved] for f in maps]) if maps else moved[:0]
        b = np.concatenate([f[roots] for f in maps]) if maps else moved[:0]
        keep = labels[a] != labels[b]
        a, b = a[keep], b[keep]

    final = int(np.count_nonzero(labels == np.arange(size)))
    return ArrayClosure(labels=labels, initial_classes=size, final_classes=final, rounds=rounds, merges=merges)
