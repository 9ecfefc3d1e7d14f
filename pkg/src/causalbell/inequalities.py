"""Bell expressions, their class bounds and the composite I3 construction.

An expression is a linear functional on behaviors, stored as a dense
vector of rational coefficients over the flat behavior index.  Correlator
terms map outcomes to signs with ``a -> 1 - 2a``.  A correlator that omits
some parties (input ``None``) is read off the marginal of the remaining
parties; to make it a functional on every behavior it is averaged over the
inputs of the omitted parties.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .dag import IoBdag
from .errors import GuardLimitError, ParseError, ScenarioMismatchError
from .lp import DEFAULT_MAX_COLUMNS, LinearProgram, solve_seeded
from .rational import format_rational, lcm_of_denominators, parse_rational, to_rational
from .scenario import Behavior, Scenario, nonsignaling_equalities, normalization_rows
from .strategies import StrategyMatrix, class_blocks, strategy_count

DEFAULT_SCAN_BUDGET = 10**9
SCAN_CHUNK = 1 << 18


@dataclass(frozen=True, eq=False)
class BellExpression:
    scenario: Scenario
    coefficients: tuple
    bounds: Mapping = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        coeffs = tuple(to_rational(v) for v in self.coefficients)
        if len(coeffs) != self.scenario.dimension:
            raise ValueError(f"expected {self.scenario.dimension} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "bounds", {k: to_rational(v) for k, v in dict(self.bounds).items()})

    @classmethod
    def from_correlators(cls, scenario: Scenario, terms: Mapping, signs=None, **kw) -> "BellExpression":
        """``terms`` maps input tuples (``None`` for absent parties) to coefficients.

        ``signs[i][a]`` overrides the default ``1 - 2a`` sign of party ``i``'s
        outcome ``a``; it is required for non-binary outputs.
        """
        if signs is None:
            if any(k != 2 for k in scenario.outputs):
                raise ValueError("correlator terms need binary outputs or an explicit sign map")
            signs = [(1, -1)] * scenario.num_parties
        signs = [tuple(int(v) for v in s) for s in signs]
        for i, s in enumerate(signs):
            if len(s) != scenario.outputs[i]:
                raise ValueError(f"sign map of party {i + 1} needs {scenario.outputs[i]} entries")
        vals = [Fraction(0)] * scenario.dimension
        outcomes = list(scenario.outcomes())
        for xs, coeff in terms.items():
            coeff = to_rational(coeff)
            xs = tuple(xs)
            _check_inputs(scenario, xs, allow_none=True)
            present = [i for i, v in enumerate(xs) if v is not None]
            free = [range(scenario.inputs[i]) if v is None else (v,) for i, v in enumerate(xs)]
            contexts = list(itertools.product(*free))
            w = coeff / len(contexts)
            for x in contexts:
                base = scenario.context_index(x) * scenario.num_outcomes
                for k, a in enumerate(outcomes):
                    sign = math.prod(signs[i][a[i]] for i in present)
                    vals[base + k] += w * sign
        return cls(scenario, tuple(vals), **kw)

    @classmethod
    def from_probability_terms(cls, scenario: Scenario, terms: Mapping, **kw) -> "BellExpression":
        """``terms`` maps ``(a, x)`` tuples to the coefficient of ``p(a|x)``."""
        vals = [Fraction(0)] * scenario.dimension
        for (a, x), coeff in terms.items():
            _check_inputs(scenario, tuple(x), allow_none=False)
            if len(a) != scenario.num_parties or any(not 0 <= v < k for v, k in zip(a, scenario.outputs)):
                raise ValueError(f"outcome {tuple(a)} outside the output alphabets")
            vals[scenario.index(a, x)] += to_rational(coeff)
        return cls(scenario, tuple(vals), **kw)

    def with_bounds(self, **bounds) -> "BellExpression":
        merged = dict(self.bounds)
        merged.update(bounds)
        return BellExpression(self.scenario, self.coefficients, merged, self.name)

    def integer_form(self) -> tuple[np.ndarray, int]:
        """``(c, L)`` with integer ``c = L * coefficients``."""
        L = lcm_of_denominators(self.coefficients)
        ints = [int(v * L) for v in self.coefficients]
        if sum(abs(v) for v in ints) >= 1 << 62:
            raise GuardLimitError("coefficients too large for the integer scan")
        return np.array(ints, dtype=np.int64), L


def _check_inputs(s: Scenario, xs: tuple, allow_none: bool):
    if len(xs) != s.num_parties:
        raise ValueError(f"term {xs} needs {s.num_parties} inputs")
    for v, k in zip(xs, s.inputs):
        if v is None and allow_none:
            continue
        if v is None or not 0 <= v < k:
            raise ValueError(f"input {v} outside the alphabet of size {k}")


def evaluate(e: BellExpression, b: Behavior) -> Fraction:
    if e.scenario != b.scenario:
        raise ScenarioMismatchError(f"expression on {e.scenario} applied to behavior on {b.scenario}")
    return sum((c * v for c, v in zip(e.coefficients, b.values) if c and v), Fraction(0))


def algebraic_max(e: BellExpression) -> Fraction:
    """Largest value over all assignments of one outcome per context, signaling or not."""
    k = e.scenario.num_outcomes
    c = e.coefficients
    return sum((max(c[s:s + k]) for s in range(0, len(c), k)), Fraction(0))


@dataclass(frozen=True)
class ScanResult:
    """Maximum of an expression over a class and the first strategy attaining it."""

    value: Fraction
    block: int
    strategy: int
    blocks: tuple
    columns: int


def _scan_range(scenario, io, coeffs, start, stop):
    m = StrategyMatrix(scenario, io)
    best, arg = None, None
    for lo in range(start, stop, SCAN_CHUNK):
        hi = min(stop, lo + SCAN_CHUNK)
        vals = coeffs[m.rows(lo, hi)].sum(axis=1)
        k = int(np.argmax(vals))
        if best is None or vals[k] > best:
            best, arg = int(vals[k]), lo + k
    return best, arg


def scan_class(e: BellExpression, io: IoBdag, *, jobs: int = 1,
               budget: int = DEFAULT_SCAN_BUDGET) -> ScanResult:
    """Exhaustive streamed scan over every strategy of every permutation image.

    Ties keep the first maximizer in (block, strategy) order, so the result
    does not depend on ``jobs``.
    """
    s = e.scenario
    if s.num_parties != io.num_parties:
        raise ScenarioMismatchError("expression and class have different party counts")
    blocks = class_blocks(io)
    counts = [strategy_count(s, b) for b in blocks]
    total = sum(counts)
    if total > budget:
        raise GuardLimitError(f"scan over {total} strategies exceeds the budget of {budget}")
    coeffs, L = e.integer_form()
    tasks = []
    per_task = max(SCAN_CHUNK, -(-max(counts) // max(1, 4 * jobs)))
    for k, (b, n) in enumerate(zip(blocks, counts)):
        for lo in range(0, n, per_task):
            tasks.append((k, b, lo, min(n, lo + per_task)))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_scan_range, s, b, coeffs, lo, hi) for _, b, lo, hi in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_scan_range(s, b, coeffs, lo, hi) for _, b, lo, hi in tasks]
    best = None
    for (k, _, _, _), (val, lam) in zip(tasks, results):
        if best is None or val > best[0]:
            best = (val, k, lam)
    return ScanResult(Fraction(best[0], L), best[1], best[2], tuple(blocks), total)


def class_bound(e: BellExpression, io: IoBdag, *, jobs: int = 1,
                budget: int = DEFAULT_SCAN_BUDGET) -> Fraction:
    """Maximum of ``e`` over the causal class of ``io``; attained at a strategy."""
    return scan_class(e, io, jobs=jobs, budget=budget).value


def ns_bound(e: BellExpression, *, max_columns: int = DEFAULT_MAX_COLUMNS) -> Fraction:
    """Maximum of ``e`` over the nonsignaling polytope, by an exact LP."""
    s = e.scenario
    d = s.dimension
    rows = nonsignaling_equalities(s) + normalization_rows(s)
    r_idx, c_idx, vals = [], [], []
    for r, row in enumerate(rows):
        for k, v in row.items():
            r_idx.append(r)
            c_idx.append(k)
            vals.append(v)
    A = sp.csc_matrix((vals, (r_idx, c_idx)), shape=(len(rows), d), dtype=np.int64)
    rhs = [0] * (len(rows) - s.num_contexts) + [1] * s.num_contexts
    lp = LinearProgram([-v for v in e.coefficients], A, rhs)
    out = solve_seeded(lp, max_columns=max_columns)
    if not out.optimal:
        raise RuntimeError(f"nonsignaling LP ended as {out.status}")
    return -out.value


def compose_i3(i2: BellExpression, beta_L, beta_NS) -> BellExpression:
    """Tripartite ``I2(A, B) + I2(A', C) + I2(B', C')``.

    Party 1 holds components (A, A'), party 2 (B, B'), party 3 (C, C'); the
    output of a party is ``first + k * second`` for ``k`` outcomes of ``i2``
    per component.  Every component uses its party's single input.  The
    recorded bound ``beta_L + 2 beta_NS`` holds over the star family.
    """
    s2 = i2.scenario
    if s2.num_parties != 2:
        raise ScenarioMismatchError("compose_i3 needs a bipartite expression")
    if s2.inputs[0] != s2.inputs[1] or s2.outputs[0] != s2.outputs[1]:
        raise ScenarioMismatchError(
            f"compose_i3 needs equal alphabets for both parties, got inputs {s2.inputs} "
            f"and outputs {s2.outputs}")
    m, k = s2.inputs[0], s2.outputs[0]
    beta_L, beta_NS = to_rational(beta_L), to_rational(beta_NS)
    s3 = Scenario((m,) * 3, (k * k,) * 3)
    c2 = i2.coefficients

    def c(x, y, a, b):
        return c2[s2.index((a, b), (x, y))]

    vals = []
    for x in s3.contexts():
        for o in s3.outcomes():
            A, A2 = o[0] % k, o[0] // k
            B, B2 = o[1] % k, o[1] // k
            C, C2 = o[2] % k, o[2] // k
            vals.append(c(x[0], x[1], A, B) / m + c(x[0], x[2], A2, C) / m
                        + c(x[1], x[2], B2, C2) / m)
    bounds = {"star": beta_L + 2 * beta_NS}
    return BellExpression(s3, tuple(vals), bounds, name=f"i3({i2.name})" if i2.name else "i3")


# ---------------------------------------------------------------------------
# builtin expressions

_TRIPARTITE = Scenario.uniform(3)
_BIPARTITE = Scenario.uniform(2)


def svetlichny() -> BellExpression:
    signs = (-1, 1, 1, 1, 1, 1, 1, -1)
    terms = {x: v for x, v in zip(_TRIPARTITE.contexts(), signs)}
    return BellExpression.from_correlators(_TRIPARTITE, terms, name="svetlichny",
                                           bounds={"local": 4, "nonsignaling": 8})


def circle() -> BellExpression:
    signs = (1, 1, 1, 1, 1, 1, 1, -1)
    terms = {x: v for x, v in zip(_TRIPARTITE.contexts(), signs)}
    return BellExpression.from_correlators(_TRIPARTITE, terms, name="circle",
                                           bounds={"circle": 6, "nonsignaling": 8})


def chsh() -> BellExpression:
    terms = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}
    return BellExpression.from_correlators(_BIPARTITE, terms, name="chsh",
                                           bounds={"local": 2, "nonsignaling": 4})


def chained(k: int) -> BellExpression:
    """``sum <A_i B_i> + sum <A_{i+1} B_i> - <A_0 B_{k-1}>`` with ``k`` inputs per party."""
    if k < 2:
        raise ValueError("the chained expression needs at least two inputs")
    s = Scenario.uniform(2, inputs=k)
    terms: dict = {}
    for i in range(k):
        terms[(i, i)] = terms.get((i, i), 0) + 1
    for i in range(k - 1):
        terms[(i + 1, i)] = terms.get((i + 1, i), 0) + 1
    terms[(0, k - 1)] = terms.get((0, k - 1), 0) - 1
    return BellExpression.from_correlators(s, terms, name=f"chained({k})",
                                           bounds={"local": 2 * k - 2, "nonsignaling": 2 * k})


_CHAINED_RE = re.compile(r"^chained[(:](\d+)\)?$")


def builtin(name: str) -> BellExpression:
    key = name.strip().lower()
    table = {"svetlichny": svetlichny, "circle": circle, "chsh": chsh}
    if key in table:
        return table[key]()
    if key == "i3":
        return compose_i3(chsh(), 2, 4)
    m = _CHAINED_RE.match(key)
    if m:
        return chained(int(m.group(1)))
    raise ValueError(f"unknown builtin expression {name!r}")


BUILTIN_NAMES = ("svetlichny", "circle", "chsh", "chained(k)", "i3")


# ---------------------------------------------------------------------------
# inequality files


def _json_path(path):
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None


def parse_scenario_block(obj, path=("scenario",)) -> Scenario:
    if not isinstance(obj, dict) or "inputs" not in obj or "outputs" not in obj:
        raise ParseError("scenario needs 'inputs' and 'outputs' lists", _json_path(path))
    try:
        return Scenario(tuple(obj["inputs"]), tuple(obj["outputs"]))
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), _json_path(path)) from None


def _rational_field(value, path) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError("expected an integer or a 'p/q' string", _json_path(path))
    if isinstance(value, int):
        return Fraction(value)
    return parse_rational(value, _json_path(path))


def expression_from_json(text: str, name: str = "") -> BellExpression:
    """Read ``{"scenario": {...}, "terms": [...], "bounds": {...}}``.

    A term is ``{"type": "correlator", "inputs": [...], "coeff": "p/q"}``
    (``null`` inputs for absent parties) or ``{"type": "prob", "inputs":
    [...], "outputs": [...], "coeff": "p/q"}``.
    """
    obj = _load_json(text)
    if not isinstance(obj, dict):
        raise ParseError("inequality file must hold an object", "$")
    s = parse_scenario_block(obj.get("scenario"))
    terms = obj.get("terms")
    if not isinstance(terms, list):
        raise ParseError("'terms' must be a list", "$.terms")
    vals = [Fraction(0)] * s.dimension
    for k, t in enumerate(terms):
        path = ("terms", k)
        if not isinstance(t, dict):
            raise ParseError("term must be an object", _json_path(path))
        kind = t.get("type")
        coeff = _rational_field(t.get("coeff"), path + ("coeff",))
        xs = t.get("inputs")
        if not isinstance(xs, list):
            raise ParseError("'inputs' must be a list", _json_path(path + ("inputs",)))
        try:
            if kind == "correlator":
                part = BellExpression.from_correlators(s, {tuple(xs): coeff})
            elif kind == "prob":
                a = t.get("outputs")
                if not isinstance(a, list):
                    raise ParseError("'outputs' must be a list", _json_path(path + ("outputs",)))
                part = BellExpression.from_probability_terms(s, {(tuple(a), tuple(xs)): coeff})
            else:
                raise ParseError(f"unknown term type {kind!r}", _json_path(path + ("type",)))
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), _json_path(path)) from None
        vals = [u + v for u, v in zip(vals, part.coefficients)]
    bounds = {}
    for key, v in (obj.get("bounds") or {}).items():
        bounds[key] = _rational_field(v, ("bounds", key))
    return BellExpression(s, tuple(vals), bounds, name or obj.get("name", ""))


def expression_to_json(e: BellExpression) -> str:
    """Dense probability-term form; zero coefficients are omitted."""
    s = e.scenario
    terms = []
    outcomes = list(s.outcomes())
    for ci, x in enumerate(s.contexts()):
        for ai, a in enumerate(outcomes):
            v = e.coefficients[ci * s.num_outcomes + ai]
            if v:
                terms.append({"type": "prob", "inputs": list(x), "outputs": list(a),
                              "coeff": format_rational(v)})
    obj = {"name": e.name, "scenario": {"inputs": list(s.inputs), "outputs": list(s.outputs)},
           "terms": terms, "bounds": {k: format_rational(v) for k, v in e.bounds.items()}}
    return json.dumps(obj, indent=1) + "\n"
