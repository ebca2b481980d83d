"""Dataset-name similarity and agglomerative clustering of a corpus.

Near-duplicate datasets (``House`` and ``House_8L``) must land in the same
cluster so that a cluster-level train/test split never leaks one into the
other side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


def longest_match(a: str, b: str, alo: int, ahi: int, blo: int, bhi: int) -> tuple[int, int, int]:
    """Longest common contiguous block of ``a[alo:ahi]`` and ``b[blo:bhi]``.

    Ties go to the block starting earliest in ``a``, then earliest in ``b``.
    Returns ``(i, j, size)``.
    """
    best_i, best_j, best = alo, blo, 0
    prev = [0] * (bhi - blo + 1)
    for i in range(alo, ahi):
        cur = [0] * (bhi - blo + 1)
        ai = a[i]
        for j in range(blo, bhi):
            if ai == b[j]:
                k = prev[j - blo] + 1
                cur[j - blo + 1] = k
                start_i, start_j = i - k + 1, j - k + 1
                if k > best or (k == best and (start_i, start_j) < (best_i, best_j)):
                    best_i, best_j, best = start_i, start_j, k
        prev = cur
    return best_i, best_j, best


def matching_characters(a: str, b: str) -> int:
    """Total size of the recursively found matching blocks."""
    total = 0
    stack = [(0, len(a), 0, len(b))]
    while stack:
        alo, ahi, blo, bhi = stack.pop()
        i, j, k = longest_match(a, b, alo, ahi, blo, bhi)
        if k:
            total += k
            if alo < i and blo < j:
                stack.append((alo, i, blo, j))
            if i + k < ahi and j + k < bhi:
                stack.append((i + k, ahi, j + k, bhi))
    return total


def name_similarity(a: str, b: str) -> float:
    """Ratcliff/Obershelp ratio ``2 M / (|a| + |b|)`` without junk heuristics.

    The block matcher is order-sensitive on some inputs, so the pair is
    matched in lexicographic order; this makes the similarity symmetric.
    """
    if not a or not b:
        raise ValueError("name_similarity needs non-empty strings")
    if b < a:
        a, b = b, a
    return 2.0 * matching_characters(a, b) / (len(a) + len(b))


def similarity_matrix(names: Sequence[str]) -> np.ndarray:
    n = len(names)
    sim = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            sim[i, j] = sim[j, i] = name_similarity(names[i], names[j])
    return sim


@dataclass(frozen=True)
class NameClusterIndex:
    names: tuple[str, ...]
    similarity: np.ndarray
    labels: np.ndarray  # cluster id per name, numbered by first appearance

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def cluster_of(self, name: str) -> int:
        return int(self.labels[self.names.index(name)])

    def members(self, cluster: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.labels == cluster)]


def average_linkage(distance: np.ndarray, k: int) -> np.ndarray:
    """Average-linkage agglomeration down to ``k`` clusters.

    The closest pair is found by row-major argmin over the upper triangle,
    so ties are broken by the smallest representative indices. Clusters
    are relabelled in order of their smallest member.
    """
    n = distance.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"cannot cut {n} items into {k} clusters")
    D = distance.astype(np.float64).copy()
    np.fill_diagonal(D, np.inf)
    size = np.ones(n)
    owner = np.arange(n)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for _ in range(n - k):
        masked = np.where(upper, D, np.inf)
        flat = int(np.argmin(masked))
        i, j = divmod(flat, n)
        # merge j into i (i < j); Lance-Williams update for average linkage
        merged = (size[i] * D[i] + size[j] * D[j]) / (size[i] + size[j])
        D[i, :] = merged
        D[:, i] = merged
        D[i, i] = np.inf
        D[j, :] = np.inf
        D[:, j] = np.inf
        size[i] += size[j]
        owner[owner == j] = i
    _, labels = np.unique(owner, return_inverse=True)
    return labels.astype(np.int64)


def cluster_datasets(names: Sequence[str], k: int = 100) -> NameClusterIndex:
    names = tuple(names)
    if len(names) < k:
        raise ValueError(f"{len(names)} names cannot form {k} clusters")
    sim = similarity_matrix(names)
    labels = average_linkage(1.0 - sim, k)
    return NameClusterIndex(names, sim, labels)


def default_cluster_count(n_datasets: int) -> int:
    """100 clusters for the 383-dataset scale, scaled down proportionally."""
    return max(2, min(100, n_datasets, round(n_datasets * 100 / 383)))
