"""Enumeration of IO BDAG classes up to party permutation."""

from __future__ import annotations

import csv
import io as _io
import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .dag import IoBdag, chain_witness, level
from .errors import GuardLimitError

MAX_ENUMERATION_PARTIES = 5


@dataclass(frozen=True)
class ClassInfo:
    representative: IoBdag
    level: int
    orbit_size: int
    chain_boring: bool

    def boring_label(self) -> str:
        if self.chain_boring:
            return "boring (chain witness)"
        return "not proven boring"


def _subset_ranks(n: int) -> np.ndarray:
    """rank[mask] = position of the subset in lexicographic order of sorted tuples."""
    subsets = []
    for mask in range(1 << n):
        subsets.append((tuple(j for j in range(n) if mask >> j & 1), mask))
    ranks = np.zeros(1 << n, dtype=np.int64)
    for r, (_, mask) in enumerate(sorted(subsets)):
        ranks[mask] = r
    return ranks


def _all_masks(n: int) -> np.ndarray:
    """Every valid in-set assignment as an (M, n) array of bitmasks."""
    per_party = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        opts = []
        for bits in range(1 << (n - 1)):
            mask = 1 << i
            for k, j in enumerate(others):
                if bits >> k & 1:
                    mask |= 1 << j
            opts.append(mask)
        per_party.append(np.array(opts, dtype=np.int64))
    grids = np.meshgrid(*per_party, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def enumerate_classes(n: int, max_parties: int = MAX_ENUMERATION_PARTIES) -> list[ClassInfo]:
    """One canonical representative per party-permutation orbit.

    Sorted by (level, lexicographic form).  Exhaustive over all
    ``2**(n*(n-1))`` assignments.
    """
    if n < 2:
        raise ValueError("enumeration needs at least two parties")
    if n > max_parties:
        raise GuardLimitError(f"enumeration for {n} parties exceeds the limit of {max_parties}")
    masks = _all_masks(n)
    ranks = _subset_ranks(n)
    radix = 1 << n
    canon = None
    for perm in itertools.permutations(range(n)):
        bitmap = np.zeros(radix, dtype=np.int64)
        for mask in range(radix):
            out = 0
            for j in range(n):
                if mask >> j & 1:
                    out |= 1 << perm[j]
            bitmap[mask] = out
        permuted = np.empty_like(masks)
        for k in range(n):
            permuted[:, perm[k]] = bitmap[masks[:, k]]
        key = np.zeros(len(masks), dtype=np.int64)
        for k in range(n):
            key = key * radix + ranks[permuted[:, k]]
        canon = key if canon is None else np.minimum(canon, key)
    keys, counts = np.unique(canon, return_counts=True)

    inv_rank = np.argsort(ranks)
    out = []
    for key, count in zip(keys.tolist(), counts.tolist()):
        sets = []
        for k in range(n):
            r = (key // radix ** (n - 1 - k)) % radix
            mask = int(inv_rank[r])
            sets.append(frozenset(j for j in range(n) if mask >> j & 1))
        rep = IoBdag(tuple(sets))
        out.append(ClassInfo(rep, level(rep), int(count), chain_witness(rep) is not None))
    out.sort(key=lambda c: (c.level, c.representative.sort_key()))
    return out


def level_histogram(classes: list[ClassInfo]) -> list[int]:
    top = max(c.level for c in classes)
    hist = Counter(c.level for c in classes)
    return [hist.get(l, 0) for l in range(top + 1)]


def _contained_up_to_permutation(small: IoBdag, big: IoBdag) -> bool:
    n = small.num_parties
    return any(big.permute(p).contains(small) for p in itertools.permutations(range(n)))


def hierarchy_edges(classes: list[ClassInfo], transitive_reduction: bool = False) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` of class indices where class ``j`` automatically contains class ``i``.

    That is, some permutation of ``j``'s representative has in-sets pointwise
    containing those of ``i``.
    """
    reps = [c.representative for c in classes]
    lv = [c.level for c in classes]
    edges = []
    for i, j in itertools.permutations(range(len(reps)), 2):
        if lv[i] < lv[j] and _contained_up_to_permutation(reps[i], reps[j]):
            edges.append((i, j))
    if not transitive_reduction:
        return edges
    succ: dict[int, set] = {}
    for i, j in edges:
        succ.setdefault(i, set()).add(j)
    reduced = []
    for i, j in edges:
        if not any(j in succ.get(k, ()) for k in succ.get(i, ()) if k != j):
            reduced.append((i, j))
    return reduced


def classes_csv(classes: list[ClassInfo]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "representative", "orbit_size", "chain_boring"])
    for c in classes:
        w.writerow([c.level, c.representative.format(), c.orbit_size,
                    "yes" if c.chain_boring else "no"])
    return buf.getvalue()


def classes_text(classes: list[ClassInfo]) -> str:
    width = max(len(c.representative.format()) for c in classes)
    lines = [f"{'level':>5}  {'representative':<{width}}  {'orbit':>5}  nonsignaling"]
    for c in classes:
        lines.append(f"{c.level:>5}  {c.representative.format():<{width}}  "
                     f"{c.orbit_size:>5}  {c.boring_label()}")
    hist = level_histogram(classes)
    lines.append(f"classes: {len(classes)}")
    lines.append("per level: " + ",".join(str(h) for h in hist))
    lines.append(f"assignments: {sum(c.orbit_size for c in classes)}")
    return "\n".join(lines) + "\n"


def level_binomials(n: int) -> list[int]:
    e = n * (n - 1)
    return [math.comb(e, l) for l in range(e + 1)]
