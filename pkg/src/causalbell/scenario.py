"""Bell scenarios and exact behaviors.

A behavior is stored as a flat tuple of Fractions.  The flat index of
``p(a_1..a_N | x_1..x_N)`` is ``x_index * prod(|A_i|) + a_index`` where both
tuples are read as mixed-radix numbers with party 1 the most significant
digit: the input context is the major key (``x_1`` slowest) and the outcome
tuple the minor key (``a_N`` fastest).

Party indices are 0-based in the Python API.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .errors import ScenarioMismatchError, SignalingError
from .rational import to_rational

MAX_BEHAVIOR_DIMENSION = 10**8


@dataclass(frozen=True)
class Scenario:
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        inputs = tuple(int(v) for v in self.inputs)
        outputs = tuple(int(v) for v in self.outputs)
        if len(inputs) != len(outputs) or not inputs:
            raise ValueError("inputs and outputs must list one size per party")
        if any(v < 1 for v in inputs):
            raise ValueError("every party needs at least one input")
        if any(v < 2 for v in outputs):
            raise ValueError("every party needs at least two outputs")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        if self.dimension > MAX_BEHAVIOR_DIMENSION:
            raise ValueError(f"behavior dimension {self.dimension} exceeds {MAX_BEHAVIOR_DIMENSION}")

    @classmethod
    def uniform(cls, parties: int, inputs: int = 2, outputs: int = 2) -> "Scenario":
        return cls((inputs,) * parties, (outputs,) * parties)

    @property
    def num_parties(self) -> int:
        return len(self.inputs)

    @property
    def num_contexts(self) -> int:
        return math.prod(self.inputs)

    @property
    def num_outcomes(self) -> int:
        return math.prod(self.outputs)

    @property
    def dimension(self) -> int:
        return self.num_contexts * self.num_outcomes

    def contexts(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.inputs))

    def outcomes(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.outputs))

    def context_index(self, x: Sequence[int]) -> int:
        idx = 0
        for xi, k in zip(x, self.inputs):
            idx = idx * k + xi
        return idx

    def outcome_index(self, a: Sequence[int]) -> int:
        idx = 0
        for ai, k in zip(a, self.outputs):
            idx = idx * k + ai
        return idx

    def index(self, a: Sequence[int], x: Sequence[int]) -> int:
        return self.context_index(x) * self.num_outcomes + self.outcome_index(a)

    def sub(self, parties: Sequence[int]) -> "Scenario":
        return Scenario(tuple(self.inputs[i] for i in parties),
                        tuple(self.outputs[i] for i in parties))


@dataclass(frozen=True)
class Behavior:
    """Conditional distribution over the flat index of its scenario.

    Entries must be exact rationals in [0, 1]; normalization is checked by
    :func:`is_normalized` rather than enforced here.
    """

    scenario: Scenario
    values: tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(to_rational(v) for v in self.values)
        if len(values) != self.scenario.dimension:
            raise ValueError(f"expected {self.scenario.dimension} entries, got {len(values)}")
        for k, v in enumerate(values):
            if v < 0 or v > 1:
                raise ValueError(f"entry {k} = {v} lies outside [0, 1]")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, scenario: Scenario, prob) -> "Behavior":
        """Build from ``prob(a, x)`` evaluated on every outcome and context."""
        vals = []
        for x in scenario.contexts():
            for a in scenario.outcomes():
                vals.append(to_rational(prob(a, x)))
        return cls(scenario, tuple(vals))

    def __call__(self, a: Sequence[int], x: Sequence[int]) -> Fraction:
        return self.values[self.scenario.index(a, x)]

    def context_block(self, x: Sequence[int]) -> tuple[Fraction, ...]:
        start = self.scenario.context_index(x) * self.scenario.num_outcomes
        return self.values[start:start + self.scenario.num_outcomes]


def is_normalized(b: Behavior) -> bool:
    k = b.scenario.num_outcomes
    vals = b.values
    return all(sum(vals[s:s + k]) == 1 for s in range(0, len(vals), k))


class SignalingViolation(NamedTuple):
    """One failed nonsignaling equality.

    The marginal of ``marginal_parties`` at ``outcome`` differs between
    ``input_party`` choosing ``inputs[0]`` and ``inputs[1]`` while the other
    inputs are held at ``context``.
    """

    input_party: int
    marginal_parties: tuple[int, ...]
    outcome: tuple[int, ...]
    context: tuple[int, ...]
    inputs: tuple[int, int]
    values: tuple[Fraction, Fraction]

    def describe(self) -> str:
        others = ", ".join(f"a{p + 1}" for p in self.marginal_parties)
        return (f"marginal of ({others}) at {self.outcome} depends on input x{self.input_party + 1}: "
                f"{self.values[0]} at x{self.input_party + 1}={self.inputs[0]} vs "
                f"{self.values[1]} at x{self.input_party + 1}={self.inputs[1]} (other inputs {self.context})")


class NonsignalingCheck(NamedTuple):
    ok: bool
    violation: SignalingViolation | None = None

    def __bool__(self):
        return self.ok


def _marginal_sums(b: Behavior, party: int) -> dict:
    """Sum over party's output: {(x, a_rest): value}."""
    s = b.scenario
    out = {}
    for x in s.contexts():
        block = b.context_block(x)
        for a, v in zip(s.outcomes(), block):
            key = (x, a[:party] + a[party + 1:])
            out[key] = out.get(key, 0) + v
    return out


def is_nonsignaling(b: Behavior) -> NonsignalingCheck:
    """Check every single-party equality of the nonsignaling conditions exactly."""
    s = b.scenario
    n = s.num_parties
    for i in range(n):
        sums = _marginal_sums(b, i)
        rest = [p for p in range(n) if p != i]
        rest_outcomes = list(itertools.product(*(range(s.outputs[p]) for p in rest)))
        for x in s.contexts():
            if x[i] != 0:
                continue
            for xi in range(1, s.inputs[i]):
                x2 = x[:i] + (xi,) + x[i + 1:]
                for a_rest in rest_outcomes:
                    v0, v1 = sums[(x, a_rest)], sums[(x2, a_rest)]
                    if v0 != v1:
                        ctx = x[:i] + x[i + 1:]
                        return NonsignalingCheck(False, SignalingViolation(
                            i, tuple(rest), a_rest, ctx, (0, xi), (v0, v1)))
    return NonsignalingCheck(True)


def nonsignaling_equalities(s: Scenario) -> list[dict[int, int]]:
    """Homogeneous single-party nonsignaling equalities as sparse rows.

    Each row reads ``sum_{a_i} p(a | x_i = xi, x_rest) - sum_{a_i} p(a | x_i = 0, x_rest) = 0``.
    """
    rows = []
    n = s.num_parties
    for i in range(n):
        rest = [p for p in range(n) if p != i]
        for x in s.contexts():
            if x[i] != 0:
                continue
            for xi in range(1, s.inputs[i]):
                x2 = x[:i] + (xi,) + x[i + 1:]
                for a_rest in itertools.product(*(range(s.outputs[p]) for p in rest)):
                    row: dict[int, int] = {}
                    for ai in range(s.outputs[i]):
                        a = a_rest[:i] + (ai,) + a_rest[i:]
                        row[s.index(a, x2)] = row.get(s.index(a, x2), 0) + 1
                        row[s.index(a, x)] = row.get(s.index(a, x), 0) - 1
                    rows.append(row)
    return rows


def normalization_rows(s: Scenario) -> list[dict[int, int]]:
    k = s.num_outcomes
    return [{c * k + j: 1 for j in range(k)} for c in range(s.num_contexts)]


def _check_same(behaviors):
    s = behaviors[0].scenario
    for b in behaviors[1:]:
        if b.scenario != s:
            raise ScenarioMismatchError(f"scenario {b.scenario} differs from {s}")
    return s


def marginal(b: Behavior, parties: Sequence[int]) -> Behavior:
    """Marginal behavior of ``parties`` (in the order given).

    Inputs of discarded parties are fixed to 0, which is well defined
    because ``b`` must be nonsignaling.
    """
    parties = tuple(parties)
    s = b.scenario
    if len(set(parties)) != len(parties) or any(p < 0 or p >= s.num_parties for p in parties):
        raise ValueError(f"invalid party subset {parties}")
    check = is_nonsignaling(b)
    if not check.ok:
        raise SignalingError("marginal of a signaling behavior is ill-defined: "
                             + check.violation.describe(), check.violation)
    sub = s.sub(parties)
    acc = [Fraction(0)] * sub.dimension
    for x in s.contexts():
        if any(x[p] != 0 for p in range(s.num_parties) if p not in parties):
            continue
        xs = tuple(x[p] for p in parties)
        for a, v in zip(s.outcomes(), b.context_block(x)):
            if v:
                acc[sub.index(tuple(a[p] for p in parties), xs)] += v
    return Behavior(sub, tuple(acc))


def mix(behaviors: Sequence[Behavior], weights: Sequence) -> Behavior:
    """Exact convex combination."""
    if not behaviors or len(behaviors) != len(weights):
        raise ValueError("need one weight per behavior")
    s = _check_same(list(behaviors))
    w = [to_rational(v) for v in weights]
    if any(v < 0 for v in w) or sum(w) != 1:
        raise ValueError("weights must be nonnegative and sum to 1")
    vals = [Fraction(0)] * s.dimension
    for beh, wk in zip(behaviors, w):
        if wk:
            for k, v in enumerate(beh.values):
                if v:
                    vals[k] += wk * v
    return Behavior(s, tuple(vals))


def white_noise(s: Scenario) -> Behavior:
    v = Fraction(1, s.num_outcomes)
    return Behavior(s, (v,) * s.dimension)


def gyni_success(b: Behavior, direction: int = 1) -> Fraction:
    """Winning probability in guess-your-neighbour's-input.

    Inputs are uniform over ``x_1 + x_2 + x_3 = 0 (mod 2)`` and the players
    win when every ``a_i`` equals ``x_{i+direction}`` (indices mod 3).
    """
    s = b.scenario
    if s.inputs != (2, 2, 2) or s.outputs != (2, 2, 2):
        raise ScenarioMismatchError("guess-your-neighbour's-input needs three binary parties")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    total = Fraction(0)
    for x in s.contexts():
        if sum(x) % 2:
            continue
        a = tuple(x[(i + direction) % 3] for i in range(3))
        total += b(a, x)
    return total / 4
