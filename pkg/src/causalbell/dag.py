"""Bell DAGs and their input-output canonical form.

Nodes of a :class:`GeneralBdag` are named ``x1..xN`` (inputs), ``a1..aN``
(outputs) and ``L`` (the hidden variable).  An :class:`IoBdag` only records,
for every party, the set of inputs its output depends on.  In-sets are
stored 0-based; the text syntax ``{(1),(1,2),(1,2,3)}`` is 1-based.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Sequence

from .errors import ParseError

LAMBDA = "L"
_NODE_RE = re.compile(r"^([xa])(\d+)$")


def _node(kind: str, party: int) -> str:
    return f"{kind}{party + 1}"


def _parse_node(name: str, n: int) -> tuple[str, int]:
    if name in (LAMBDA, "lambda", "λ"):
        return (LAMBDA, -1)
    m = _NODE_RE.match(name)
    if not m or not 1 <= int(m.group(2)) <= n:
        raise ValueError(f"unknown node {name!r} for {n} parties")
    return (m.group(1), int(m.group(2)) - 1)


@dataclass(frozen=True)
class GeneralBdag:
    """Bell DAG over inputs, outputs and one hidden variable.

    The defining edges ``x_i -> a_i`` and ``L -> a_i`` are always present and
    added automatically.
    """

    num_parties: int
    edges: frozenset

    def __post_init__(self):
        n = int(self.num_parties)
        if n < 1:
            raise ValueError("need at least one party")
        edges = set()
        for u, v in self.edges:
            u = _canonical_name(u, n)
            v = _canonical_name(v, n)
            if u == v:
                raise ValueError(f"self loop on {u}")
            edges.add((u, v))
        for i in range(n):
            edges.add((_node("x", i), _node("a", i)))
            edges.add((LAMBDA, _node("a", i)))
        graph: dict[str, set] = {}
        for u, v in edges:
            graph.setdefault(v, set()).add(u)
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise ValueError(f"Bell DAG is cyclic: {' -> '.join(exc.args[1])}") from None
        object.__setattr__(self, "num_parties", n)
        object.__setattr__(self, "edges", frozenset(edges))

    def parents(self, node: str) -> set[str]:
        return {u for u, v in self.edges if v == node}

    @classmethod
    def parse(cls, text: str) -> "GeneralBdag":
        """Parse ``"N: u->v, u->v"``, e.g. ``"3: L->x1, a1->a2"``."""
        head, sep, body = text.partition(":")
        if not sep:
            raise ParseError("expected 'N: edge, edge, ...'", "column 1")
        try:
            n = int(head.strip())
        except ValueError:
            raise ParseError(f"party count {head.strip()!r} is not an integer", "column 1") from None
        edges = []
        offset = len(head) + 1
        for chunk in body.split(","):
            col = offset + 1
            offset += len(chunk) + 1
            chunk = chunk.strip()
            if not chunk:
                continue
            u, arrow, v = chunk.partition("->")
            if not arrow:
                raise ParseError(f"edge {chunk!r} lacks '->'", f"column {col}")
            edges.append((u.strip(), v.strip()))
        try:
            return cls(n, frozenset(edges))
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    def format(self) -> str:
        implicit = {(_node("x", i), _node("a", i)) for i in range(self.num_parties)}
        implicit |= {(LAMBDA, _node("a", i)) for i in range(self.num_parties)}
        extra = sorted(self.edges - implicit)
        return f"{self.num_parties}: " + ", ".join(f"{u}->{v}" for u, v in extra)


def _canonical_name(name: str, n: int) -> str:
    kind, party = _parse_node(str(name).strip(), n)
    return LAMBDA if kind == LAMBDA else _node(kind, party)


@dataclass(frozen=True)
class IoBdag:
    """Input-output Bell DAG: ``in_sets[i]`` are the inputs read by output ``i``."""

    in_sets: tuple[frozenset, ...]

    def __post_init__(self):
        sets = tuple(frozenset(int(j) for j in s) for s in self.in_sets)
        n = len(sets)
        if n < 1:
            raise ValueError("need at least one party")
        for i, s in enumerate(sets):
            if i not in s:
                raise ValueError(f"party {i + 1} must read its own input")
            if any(j < 0 or j >= n for j in s):
                raise ValueError(f"in-set of party {i + 1} refers to a missing party")
        object.__setattr__(self, "in_sets", sets)

    @classmethod
    def from_lists(cls, sets: Iterable[Iterable[int]], one_based: bool = True) -> "IoBdag":
        shift = 1 if one_based else 0
        return cls(tuple(frozenset(j - shift for j in s) for s in sets))

    @classmethod
    def lhv(cls, n: int) -> "IoBdag":
        return cls(tuple(frozenset([i]) for i in range(n)))

    @classmethod
    def parse(cls, text: str) -> "IoBdag":
        """Parse ``{(1),(1,2),(1,2,3)}``; inputs ascending within each party."""
        s = text.strip()
        if not (s.startswith("{") and s.endswith("}")):
            raise ParseError(f"IO BDAG must be enclosed in braces: {text!r}", "column 1")
        groups = re.findall(r"\(([^()]*)\)", s[1:-1])
        leftover = re.sub(r"\(([^()]*)\)", "", s[1:-1]).replace(",", "").strip()
        if leftover or not groups:
            raise ParseError(f"malformed IO BDAG {text!r}")
        sets = []
        for k, g in enumerate(groups):
            try:
                items = [int(t) for t in g.split(",")]
            except ValueError:
                raise ParseError(f"non-integer input index in {g!r}", f"party {k + 1}") from None
            if items != sorted(set(items)):
                raise ParseError(f"input indices must be strictly ascending in ({g})", f"party {k + 1}")
            sets.append(frozenset(j - 1 for j in items))
        try:
            return cls(tuple(sets))
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    def format(self) -> str:
        return "{" + ",".join("(" + ",".join(str(j + 1) for j in sorted(s)) + ")"
                              for s in self.in_sets) + "}"

    __str__ = format

    @property
    def num_parties(self) -> int:
        return len(self.in_sets)

    def sort_key(self) -> tuple:
        return tuple(tuple(sorted(s)) for s in self.in_sets)

    def permute(self, perm: Sequence[int]) -> "IoBdag":
        """Relabel party ``k`` as ``perm[k]`` (positions and contents)."""
        new = [None] * len(perm)
        for k, s in enumerate(self.in_sets):
            new[perm[k]] = frozenset(perm[j] for j in s)
        return IoBdag(tuple(new))

    def contains(self, other: "IoBdag") -> bool:
        """Pointwise in-set containment, without permuting."""
        return all(a >= b for a, b in zip(self.in_sets, other.in_sets))

    def orbit(self) -> list["IoBdag"]:
        """Distinct party-permutation images, sorted lexicographically."""
        images = {self.permute(p) for p in itertools.permutations(range(self.num_parties))}
        return sorted(images, key=IoBdag.sort_key)

    def to_general(self) -> GeneralBdag:
        edges = {(_node("x", j), _node("a", i))
                 for i, s in enumerate(self.in_sets) for j in s if j != i}
        return GeneralBdag(self.num_parties, frozenset(edges))


def canonicalize_to_io(g: GeneralBdag) -> IoBdag:
    """Rewrite a general Bell DAG into its nonsignaling-equivalent IO BDAG.

    Any edge from party ``i``'s input or output into party ``j``'s input or
    output becomes ``i`` in ``in_j``.  An edge between ``L`` and an input
    ``x_i`` (either direction) broadcasts ``i`` to every in-set.
    """
    n = g.num_parties
    in_sets = [{i} for i in range(n)]
    broadcast = set()
    for u, v in g.edges:
        ku, pu = _parse_node(u, n)
        kv, pv = _parse_node(v, n)
        if ku == LAMBDA and kv == "x":
            broadcast.add(pv)
        elif kv == LAMBDA and ku == "x":
            broadcast.add(pu)
        elif ku != LAMBDA and kv != LAMBDA and pu != pv:
            in_sets[pv].add(pu)
    for i in broadcast:
        for s in in_sets:
            s.add(i)
    return IoBdag(tuple(frozenset(s) for s in in_sets))


def level(io: IoBdag) -> int:
    return sum(len(s) - 1 for s in io.in_sets)


def canonical_form(io: IoBdag) -> IoBdag:
    return io.orbit()[0]


def orbit_size(io: IoBdag) -> int:
    return len(io.orbit())


def chain_witness(io: IoBdag) -> tuple[int, ...] | None:
    """A party ordering along which each output sees all earlier inputs."""
    n = io.num_parties
    # depth-first over prefixes; a prefix only grows if the next party sees all of it
    def extend(prefix, seen):
        if len(prefix) == n:
            return prefix
        for p in range(n):
            if p not in seen and io.in_sets[p] >= seen | {p}:
                found = extend(prefix + (p,), seen | {p})
                if found:
                    return found
        return None
    return extend((), frozenset())


def is_chain_boring(io: IoBdag) -> bool:
    return chain_witness(io) is not None
