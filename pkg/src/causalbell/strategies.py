"""Deterministic-strategy matrices and causal-class membership.

Column ordering.  A global strategy ``lam`` is the mixed-radix number
``(lam_1, ..., lam_N)`` with party 1 the slowest digit.  The local strategy
``lam_i`` of party ``i`` is an assignment of an output to every joint value
``c_0, c_1, ...`` of its parent inputs (listed lexicographically, lowest
party first); ``lam_i = sum_k f(c_k) * |A_i| ** (K_i - 1 - k)``, so the
first context is the most significant digit.

A class is handled as the union of the strategy columns of every distinct
party-permutation image of its IO BDAG (the images sorted lexicographically).
Duplicate columns across images are merged before solving, keeping the
first occurrence for witnesses.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .dag import IoBdag
from .errors import GuardLimitError, ScenarioMismatchError, SignalingError
from .lp import DEFAULT_MAX_COLUMNS, LinearProgram, LpOutcome, solve_seeded
from .rational import lcm_of_denominators
from .scenario import (Behavior, Scenario, is_nonsignaling, marginal, nonsignaling_equalities,
                       white_noise)

TABLE_ENTRY_LIMIT = 1 << 22
DEFAULT_MATERIALIZE_CAP = 2_000_000

STAR_FAMILY = tuple(IoBdag.parse(t) for t in
                    ("{(1),(2),(1,2,3)}", "{(1),(2,3),(1,2,3)}", "{(1,3),(2,3),(1,2,3)}"))


def strategy_count(s: Scenario, io: IoBdag, cap: int | None = None) -> int:
    """Number of global deterministic strategies, ``prod_i |A_i| ** prod_{j in in_i} |X_j|``."""
    _check_parties(s, io)
    total = 1
    for i, parents in enumerate(io.in_sets):
        total *= s.outputs[i] ** math.prod(s.inputs[j] for j in parents)
        if cap is not None and total > cap:
            raise GuardLimitError(f"strategy count exceeds the cap of {cap}")
    return total


def _check_parties(s: Scenario, io: IoBdag):
    if s.num_parties != io.num_parties:
        raise ScenarioMismatchError(
            f"IO BDAG has {io.num_parties} parties but the scenario has {s.num_parties}")


class StrategyMatrix:
    """The 0/1 matrix of global deterministic strategies for one labeled IO BDAG.

    Columns are generated on demand; ``rows(start, stop)`` gives, for each
    strategy in the range, the flat behavior index that is 1 in every input
    context.
    """

    def __init__(self, scenario: Scenario, io: IoBdag):
        _check_parties(scenario, io)
        self.scenario = scenario
        self.io = io
        n = scenario.num_parties
        self.local_counts = []
        self._positions = []
        contexts = list(scenario.contexts())
        for i in range(n):
            parents = sorted(io.in_sets[i])
            K = math.prod(scenario.inputs[j] for j in parents)
            self.local_counts.append(scenario.outputs[i] ** K)
            pos = []
            for x in contexts:
                k = 0
                for j in parents:
                    k = k * scenario.inputs[j] + x[j]
                pos.append(K - 1 - k)  # exponent of this context's digit
            self._positions.append(np.array(pos, dtype=np.int64))
        self.count = math.prod(self.local_counts)
        self._strides = []
        acc = 1
        for c in reversed(self.local_counts):
            self._strides.append(acc)
            acc *= c
        self._strides.reverse()
        self._out_strides = []
        acc = 1
        for k in reversed(scenario.outputs):
            self._out_strides.append(acc)
            acc *= k
        self._out_strides.reverse()
        nout = scenario.num_outcomes
        self._base = np.arange(len(contexts), dtype=np.int64) * nout
        self._tables: list[np.ndarray | None] = [None] * n

    def __len__(self):
        return self.count

    def _party_table(self, i: int) -> np.ndarray | None:
        if self._tables[i] is None and self.local_counts[i] * len(self._base) <= TABLE_ENTRY_LIMIT:
            lam = np.arange(self.local_counts[i], dtype=np.int64)
            self._tables[i] = self._offsets(i, lam)
        return self._tables[i]

    def _offsets(self, i: int, lam_i: np.ndarray) -> np.ndarray:
        A = self.scenario.outputs[i]
        powers = np.power(np.int64(A), self._positions[i]).astype(np.int64)
        digits = (lam_i[:, None] // powers[None, :]) % A
        return digits * self._out_strides[i]

    def local_strategies(self, lam) -> tuple[int, ...]:
        lam = int(lam)
        return tuple((lam // st) % c for st, c in zip(self._strides, self.local_counts))

    def rows(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        stop = self.count if stop is None else stop
        lam = np.arange(start, stop, dtype=np.int64)
        flat = np.broadcast_to(self._base, (len(lam), len(self._base))).copy()
        for i in range(self.scenario.num_parties):
            lam_i = (lam // self._strides[i]) % self.local_counts[i]
            table = self._party_table(i)
            flat += table[lam_i] if table is not None else self._offsets(i, lam_i)
        return flat

    def column(self, lam: int) -> Behavior:
        vals = [0] * self.scenario.dimension
        for k in self.rows(lam, lam + 1)[0]:
            vals[int(k)] = 1
        return Behavior(self.scenario, tuple(vals))

    def to_dense(self, cap: int = DEFAULT_MATERIALIZE_CAP) -> np.ndarray:
        """Materialize as a ``(d, |Lambda|)`` uint8 matrix."""
        if self.count * self.scenario.dimension > cap * 64:
            raise GuardLimitError(f"{self.count} columns are too many to materialize")
        out = np.zeros((self.scenario.dimension, self.count), dtype=np.uint8)
        r = self.rows()
        out[r, np.arange(self.count)[:, None]] = 1
        return out


def build_strategy_matrix(s: Scenario, io: IoBdag, materialize: bool = False,
                          cap: int = DEFAULT_MATERIALIZE_CAP) -> StrategyMatrix:
    mat = StrategyMatrix(s, io)
    if materialize:
        if mat.count > cap:
            raise GuardLimitError(f"{mat.count} strategies exceed the materialization cap of {cap}")
        mat.to_dense(cap)
    return mat


@dataclass(frozen=True)
class ClassColumns:
    """Merged strategy columns of a whole class."""

    scenario: Scenario
    blocks: tuple[IoBdag, ...]
    rows: np.ndarray          # (ncols, ncontexts) flat indices
    origin: np.ndarray        # (ncols, 2): block index, strategy index

    @property
    def num_columns(self) -> int:
        return len(self.rows)

    def sparse(self, extra_normalization: bool = True) -> sp.csc_matrix:
        ncols, nctx = self.rows.shape
        d = self.scenario.dimension
        if extra_normalization:
            idx = np.concatenate([self.rows, np.full((ncols, 1), d, dtype=np.int64)], axis=1)
            height = d + 1
        else:
            idx = self.rows
            height = d
        per = idx.shape[1]
        indptr = np.arange(0, ncols * per + 1, per, dtype=np.int64)
        data = np.ones(ncols * per, dtype=np.int64)
        return sp.csc_matrix((data, idx.ravel(), indptr), shape=(height, ncols))


def class_blocks(io: IoBdag) -> tuple[IoBdag, ...]:
    return tuple(io.orbit())


@functools.lru_cache(maxsize=32)
def _class_columns_cached(s: Scenario, blocks: tuple[IoBdag, ...], dedupe: bool) -> ClassColumns:
    parts, origin = [], []
    for b, io in enumerate(blocks):
        m = StrategyMatrix(s, io)
        parts.append(m.rows())
        origin.append(np.stack([np.full(m.count, b, dtype=np.int64),
                                np.arange(m.count, dtype=np.int64)], axis=1))
    rows = np.concatenate(parts)
    orig = np.concatenate(origin)
    if dedupe and len(blocks) > 1:
        _, first = np.unique(rows, axis=0, return_index=True)
        first.sort()
        rows, orig = rows[first], orig[first]
    rows.setflags(write=False)
    orig.setflags(write=False)
    return ClassColumns(s, blocks, rows, orig)


def class_columns(s: Scenario, io: IoBdag, max_columns: int = DEFAULT_MAX_COLUMNS,
                  dedupe: bool = True, orbit: bool = True) -> ClassColumns:
    """Strategy columns of the class, or of the labeled DAG alone with ``orbit=False``."""
    blocks = class_blocks(io) if orbit else (io,)
    total = sum(strategy_count(s, b) for b in blocks)
    if total > max_columns:
        raise GuardLimitError(
            f"class {io.format()} has {total} strategy columns, above the limit of {max_columns}")
    return _class_columns_cached(s, blocks, dedupe)


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of a class-membership LP.

    ``witness`` lists ``(block, strategy, weight)`` where ``block`` indexes
    ``blocks``.  ``certificate`` is the Farkas vector over the behavior rows
    followed by the normalization row; ``separating_inequality`` turns it
    into a Bell expression and its class bound.
    """

    feasible: bool
    blocks: tuple[IoBdag, ...]
    witness: tuple | None
    certificate: tuple | None
    outcome: LpOutcome

    def __bool__(self):
        return self.feasible

    def separating_inequality(self) -> tuple[tuple[Fraction, ...], Fraction] | None:
        """``(coefficients, bound)``: every class strategy scores ``<= bound``, the behavior more."""
        if self.certificate is None:
            return None
        y = self.certificate
        return tuple(y[:-1]), -y[-1]


def _require_nonsignaling(b: Behavior, what: str = "behavior"):
    check = is_nonsignaling(b)
    if not check.ok:
        raise SignalingError(f"{what} is signaling: {check.violation.describe()}", check.violation)


def _ensure_match(b: Behavior, io: IoBdag):
    if b.scenario.num_parties != io.num_parties:
        raise ScenarioMismatchError(
            f"behavior has {b.scenario.num_parties} parties but the class has {io.num_parties}")


def class_membership(b: Behavior, io: IoBdag, *, max_columns: int = DEFAULT_MAX_COLUMNS,
                     per_block_nonsignaling: bool = False, orbit: bool = True,
                     pivot_rule: str = "bland") -> MembershipResult:
    """Decide whether ``b`` lies in the causal class of ``io``.

    Solves ``b = D q, q >= 0, sum q = 1`` with ``D`` the strategy columns of
    every permutation image of ``io``; ``b`` must be nonsignaling.

    With ``per_block_nonsignaling`` each image's share ``D_k q_k`` must be
    nonsignaling by itself (an unnormalized cone condition), a stricter
    reading of the class as the hull of nonsignaling behaviors of each
    labeled DAG.  This mode is a research option and keeps blocks separate.

    ``orbit=False`` drops the party permutations and tests the polytope of
    the labeled DAG ``io`` alone.
    """
    _ensure_match(b, io)
    _require_nonsignaling(b)
    s = b.scenario
    if per_block_nonsignaling:
        return _membership_per_block(b, io, max_columns, pivot_rule, orbit)
    cols = class_columns(s, io, max_columns, orbit=orbit)
    A = cols.sparse()
    rhs = list(b.values) + [1]
    lp = LinearProgram(np.zeros(cols.num_columns, dtype=np.int64), A, rhs)
    out = solve_seeded(lp, max_columns=max_columns + 1, pivot_rule=pivot_rule)
    if out.status == "optimal":
        wit = tuple((int(cols.origin[j, 0]), int(cols.origin[j, 1]), v)
                    for j, v in enumerate(out.solution) if v)
        return MembershipResult(True, cols.blocks, wit, None, out)
    return MembershipResult(False, cols.blocks, None, out.certificate, out)


def _membership_per_block(b, io, max_columns, pivot_rule, orbit):
    s = b.scenario
    cols = class_columns(s, io, max_columns, dedupe=False, orbit=orbit)
    d = s.dimension
    ns_rows = nonsignaling_equalities(s)
    r_idx, c_idx, vals = [], [], []
    for r, row in enumerate(ns_rows):
        for k, v in row.items():
            r_idx.append(r)
            c_idx.append(k)
            vals.append(v)
    N = sp.csr_matrix((vals, (r_idx, c_idx)), shape=(len(ns_rows), d), dtype=np.int64)
    D = cols.sparse(extra_normalization=False)
    blocks_of = cols.origin[:, 0]
    pieces = [sp.vstack([D, sp.csr_matrix(np.ones((1, cols.num_columns), dtype=np.int64))])]
    for k in range(len(cols.blocks)):
        mask = sp.diags((blocks_of == k).astype(np.int64), dtype=np.int64)
        pieces.append(N @ D @ mask)
    A = sp.vstack(pieces).tocsc().astype(np.int64)
    rhs = list(b.values) + [1] + [0] * (len(ns_rows) * len(cols.blocks))
    lp = LinearProgram(np.zeros(cols.num_columns, dtype=np.int64), A, rhs)
    out = solve_seeded(lp, max_columns=max_columns + 1, pivot_rule=pivot_rule)
    if out.status == "optimal":
        wit = tuple((int(cols.origin[j, 0]), int(cols.origin[j, 1]), v)
                    for j, v in enumerate(out.solution) if v)
        return MembershipResult(True, cols.blocks, wit, None, out)
    return MembershipResult(False, cols.blocks, None, out.certificate[:d + 1], out)


def reconstruct(s: Scenario, blocks: Sequence[IoBdag], witness) -> Behavior:
    """``D q`` from a membership witness, for independent re-checking."""
    vals = [Fraction(0)] * s.dimension
    mats = [StrategyMatrix(s, io) for io in blocks]
    for block, lam, weight in witness:
        for k in mats[block].rows(lam, lam + 1)[0]:
            vals[int(k)] += weight
    return Behavior(s, tuple(vals))


def _threshold_lp(p_a: Behavior, p_b: Behavior, io: IoBdag, max_columns: int, pivot_rule: str):
    """Minimal ``nu`` in [0, 1] with ``(1 - nu) p_a + nu p_b`` in the class, or None."""
    _ensure_match(p_a, io)
    if p_a.scenario != p_b.scenario:
        raise ScenarioMismatchError("behaviors belong to different scenarios")
    _require_nonsignaling(p_a, "first behavior")
    _require_nonsignaling(p_b, "second behavior")
    cols = class_columns(p_a.scenario, io, max_columns)
    diff = [x - y for x, y in zip(p_a.values, p_b.values)] + [Fraction(0)]
    L = lcm_of_denominators(diff)
    # nu = L * t keeps the extra column integral
    extra = np.array([int(v * L) for v in diff], dtype=np.int64)
    A = sp.hstack([cols.sparse(), sp.csc_matrix(extra[:, None])]).tocsc()
    n = cols.num_columns
    c = np.zeros(n + 1, dtype=np.int64)
    c[n] = 1
    upper = [None] * n + [Fraction(1, L)]
    lp = LinearProgram(c, A, list(p_a.values) + [1], upper=upper)
    out = solve_seeded(lp, max_columns=max_columns + 2, pivot_rule=pivot_rule)
    if out.status != "optimal":
        return None
    return out.value * L


def critical_noise(p_ext: Behavior, io: IoBdag, *, max_columns: int = DEFAULT_MAX_COLUMNS,
                   pivot_rule: str = "bland") -> Fraction:
    """Smallest white-noise weight that brings ``p_ext`` into the class."""
    nu = _threshold_lp(p_ext, white_noise(p_ext.scenario), io, max_columns, pivot_rule)
    assert nu is not None, "white noise lies in every class"
    return nu


def mixture_threshold(p_a: Behavior, p_b: Behavior, io: IoBdag, *,
                      max_columns: int = DEFAULT_MAX_COLUMNS,
                      pivot_rule: str = "bland") -> Fraction | None:
    """Smallest ``nu`` with ``(1 - nu) p_a + nu p_b`` in the class; None if no ``nu <= 1`` works."""
    return _threshold_lp(p_a, p_b, io, max_columns, pivot_rule)


def star_family_verdicts(b: Behavior, max_columns: int = DEFAULT_MAX_COLUMNS) -> dict[str, bool]:
    if b.scenario.num_parties != 3:
        raise ScenarioMismatchError("the star family is defined for three parties")
    return {io.format(): class_membership(b, io, max_columns=max_columns).feasible
            for io in STAR_FAMILY}


def star_collapse_check(b: Behavior, max_columns: int = DEFAULT_MAX_COLUMNS) -> bool:
    """True iff the three star-family classes agree on ``b``."""
    verdicts = star_family_verdicts(b, max_columns)
    return len(set(verdicts.values())) == 1


def ab_marginal_is_lhv(b: Behavior) -> bool:
    """Is the marginal of the first two parties a bipartite LHV behavior?"""
    if b.scenario.num_parties != 3:
        raise ScenarioMismatchError("expected a tripartite behavior")
    ab = marginal(b, (0, 1))
    return class_membership(ab, IoBdag.lhv(2)).feasible
