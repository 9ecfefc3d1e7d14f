import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from causalbell import (BellExpression, IoBdag, Scenario, algebraic_max, builtin, class_bound,
                        compose_i3, evaluate, mix, ns_bound, white_noise)
from causalbell.boxes import gyni_box, pr_box, pr_product_tripartite
from causalbell.errors import GuardLimitError, ParseError, ScenarioMismatchError
from causalbell.inequalities import (chained, chsh, circle, expression_from_json, expression_to_json,
                                     scan_class, svetlichny)

from oracles import local_deterministic_boxes, nonlocal_pool, random_ns_behavior

P = IoBdag.parse
S2, S3 = Scenario.uniform(2), Scenario.uniform(3)
DET3 = list(local_deterministic_boxes(S3))
POOL = nonlocal_pool()
PARTIALLY_PAIRED = ["{(1),(2),(3)}", "{(1),(1,2),(3)}", "{(1,2),(1,2),(3)}", "{(1),(1,2),(1,3)}",
                    "{(1),(1,2),(2,3)}", "{(1,2),(1,2),(1,3)}"]


def brute_force_bound(e, io):
    """Max over every tuple of response functions, written without the strategy module."""
    s = e.scenario
    n = s.num_parties
    contexts = list(s.contexts())
    best = None
    for image in io.orbit():
        local = []
        for i in range(n):
            parents = sorted(image.in_sets[i])
            keys = sorted({tuple(x[j] for j in parents) for x in contexts})
            funcs = [dict(zip(keys, outs)) for outs in itertools.product(range(s.outputs[i]), repeat=len(keys))]
            local.append((parents, funcs))
        for choice in itertools.product(*(f for _, f in local)):
            total = Fraction(0)
            for x in contexts:
                a = tuple(choice[i][tuple(x[j] for j in local[i][0])] for i in range(n))
                total += e.coefficients[s.index(a, x)]
            best = total if best is None else max(best, total)
    return best


def star_separable_bound(e):
    """Star class: the party seeing every input answers optimally per context."""
    s = e.scenario
    best = None
    for image in P("{(1),(2),(1,2,3)}").orbit():
        hub = next(i for i in range(3) if len(image.in_sets[i]) == 3)
        others = [i for i in range(3) if i != hub]
        for f in itertools.product(itertools.product(range(2), repeat=2), repeat=2):
            total = Fraction(0)
            for x in s.contexts():
                vals = []
                for ah in range(2):
                    a = [0, 0, 0]
                    a[hub] = ah
                    for k, i in enumerate(others):
                        a[i] = f[k][x[i]]
                    vals.append(e.coefficients[s.index(tuple(a), x)])
                total += max(vals)
            best = total if best is None else max(best, total)
    return best


@st.composite
def expressions(draw, s=S3):
    vals = draw(st.lists(st.integers(-3, 3), min_size=s.dimension, max_size=s.dimension))
    return BellExpression(s, tuple(vals))


def test_evaluate_examples():
    assert evaluate(svetlichny(), white_noise(S3)) == 0
    assert evaluate(circle(), gyni_box()) == 8
    assert evaluate(builtin("i3"), pr_product_tripartite()) == 12
    assert evaluate(chsh(), pr_box()) == 4
    with pytest.raises(ScenarioMismatchError):
        evaluate(chsh(), gyni_box())


def test_svetlichny_on_gyni():
    assert evaluate(svetlichny(), gyni_box()) == 6


def test_builtin_shapes():
    sv, ci = svetlichny(), circle()
    for e, signs in ((sv, (-1, 1, 1, 1, 1, 1, 1, -1)), (ci, (1, 1, 1, 1, 1, 1, 1, -1))):
        for x, sign in zip(S3.contexts(), signs):
            # the correlator of a uniformly random box with a fixed parity is +-1
            corr = sum(e.coefficients[S3.index(a, x)] * (1 - 2 * (sum(a) % 2))
                       for a in S3.outcomes()) / 8
            assert corr == sign
    diff = [k for k, (u, v) in enumerate(zip(sv.coefficients, ci.coefficients)) if u != v]
    assert diff and all(k < 8 for k in diff)   # only the x=000 block differs
    with pytest.raises(ValueError):
        builtin("mermin")


def test_algebraic_max_examples():
    assert algebraic_max(svetlichny()) == 8
    assert algebraic_max(circle()) == 8
    assert algebraic_max(builtin("i3")) == 12


def test_class_bound_examples():
    assert class_bound(svetlichny(), IoBdag.lhv(3)) == 4
    assert class_bound(circle(), P("{(1,3),(1,2),(2,3)}")) == 6
    assert class_bound(chsh(), IoBdag.lhv(2)) == 2


@pytest.mark.parametrize("cls", PARTIALLY_PAIRED)
def test_svetlichny_partially_paired(cls):
    assert class_bound(svetlichny(), P(cls)) == 4


def test_totally_paired_reach_eight():
    assert class_bound(svetlichny(), P("{(1,3),(1,2),(2,3)}")) == 8
    assert class_bound(svetlichny(), P("{(1),(2),(1,2,3)}")) == 8


def test_ns_bound_examples():
    assert ns_bound(chsh()) == 4
    assert ns_bound(circle()) == 8
    assert ns_bound(svetlichny()) == 8


def test_chained():
    for k in (2, 3, 4):
        e = chained(k)
        assert class_bound(e, IoBdag.lhv(2)) == 2 * k - 2
        assert ns_bound(e) == 2 * k
    assert builtin("chained(3)").coefficients == chained(3).coefficients
    with pytest.raises(ValueError):
        chained(1)


def test_compose_i3_recorded_bounds():
    assert compose_i3(chsh(), 2, 4).bounds["star"] == 10
    assert compose_i3(chsh(), 7, 9).bounds["star"] == 25
    assert compose_i3(chained(3), 4, 6).scenario == Scenario.uniform(3, 3, 4)
    with pytest.raises(ScenarioMismatchError):
        compose_i3(svetlichny(), 4, 8)
    with pytest.raises(ScenarioMismatchError):
        compose_i3(BellExpression(Scenario((2, 3), (2, 2)), (0,) * 24), 1, 1)


def test_compose_i3_pairing():
    # components: output o = first + 2 * second
    e = builtin("i3")
    i2 = chsh()
    s = e.scenario
    x = (1, 0, 1)
    a = (1 + 2 * 0, 1 + 2 * 1, 0 + 2 * 1)
    A, A2, B, B2, C, C2 = 1, 0, 1, 1, 0, 1
    expected = (i2.coefficients[S2.index((A, B), (x[0], x[1]))]
                + i2.coefficients[S2.index((A2, C), (x[0], x[2]))]
                + i2.coefficients[S2.index((B2, C2), (x[1], x[2]))]) / 2
    assert e.coefficients[s.index(a, x)] == expected


def test_ns_bound_i3():
    assert ns_bound(builtin("i3")) == 12


def test_scan_i3_on_small_classes():
    # separable oracle for the star class in the binary scenario
    for e in (svetlichny(), circle()):
        assert class_bound(e, P("{(1),(2),(1,2,3)}")) == star_separable_bound(e)


@settings(max_examples=25)
@given(expressions(S2), st.sampled_from(["{(1),(2)}", "{(1),(1,2)}", "{(1,2),(1,2)}"]))
def test_scan_matches_brute_force_bipartite(e, cls):
    assert class_bound(e, P(cls)) == brute_force_bound(e, P(cls))


@settings(max_examples=10)
@given(expressions(), st.sampled_from(["{(1),(2),(3)}", "{(1),(1,2),(3)}", "{(1),(2),(1,2,3)}"]))
def test_scan_matches_brute_force_tripartite(e, cls):
    io = P(cls)
    expected = star_separable_bound(e) if cls == "{(1),(2),(1,2,3)}" else brute_force_bound(e, io)
    assert class_bound(e, io) == expected


@settings(max_examples=10)
@given(expressions(), st.sampled_from(PARTIALLY_PAIRED + ["{(1,3),(1,2),(2,3)}"]), st.data())
def test_bound_invariants(e, cls, data):
    io = P(cls)
    perm = data.draw(st.permutations(range(3)))
    value = class_bound(e, io)
    assert value == class_bound(e, io.permute(perm))
    assert value <= algebraic_max(e)
    res = scan_class(e, io)
    from causalbell.strategies import StrategyMatrix
    col = StrategyMatrix(S3, res.blocks[res.block]).column(res.strategy)
    assert evaluate(e, col) == value


@settings(max_examples=10)
@given(expressions())
def test_ns_bound_below_algebraic(e):
    assert ns_bound(e) <= algebraic_max(e)
    assert ns_bound(e) >= evaluate(e, white_noise(S3))


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1), st.fractions(0, 1))
def test_evaluate_affine(s1, s2, w):
    p = random_ns_behavior(random.Random(s1), DET3, POOL)
    q = random_ns_behavior(random.Random(s2), DET3, POOL)
    for e in (svetlichny(), circle()):
        assert evaluate(e, mix([p, q], [w, 1 - w])) == w * evaluate(e, p) + (1 - w) * evaluate(e, q)


def test_scan_is_deterministic_across_jobs():
    e = circle()
    io = P("{(1),(2),(1,2,3)}")
    one = scan_class(e, io, jobs=1)
    two = scan_class(e, io, jobs=2)
    assert (one.value, one.block, one.strategy) == (two.value, two.block, two.strategy)


def test_scan_budget():
    with pytest.raises(GuardLimitError):
        scan_class(builtin("i3"), P("{(1),(2),(1,2,3)}"), budget=10**6)


def test_correlator_with_absent_parties():
    e = BellExpression.from_correlators(S3, {(0, None, None): 1})
    b = gyni_box()
    assert evaluate(e, b) == 0
    marg = BellExpression.from_correlators(S3, {(1, 1, None): 1})
    det = next(iter(local_deterministic_boxes(S3)))
    assert evaluate(marg, det) == 1


def test_correlators_need_binary_or_signs():
    s = Scenario.uniform(2, outputs=3)
    with pytest.raises(ValueError):
        BellExpression.from_correlators(s, {(0, 0): 1})
    e = BellExpression.from_correlators(s, {(0, 0): 1}, signs=[(1, 0, -1), (1, 0, -1)])
    assert algebraic_max(e) == 1


def test_probability_terms():
    e = BellExpression.from_probability_terms(S2, {((0, 0), (0, 0)): 1, ((1, 1), (1, 1)): "1/2"})
    assert evaluate(e, pr_box()) == Fraction(1, 2)
    with pytest.raises(ValueError):
        BellExpression.from_probability_terms(S2, {((2, 0), (0, 0)): 1})


def test_json_roundtrip():
    for e in (svetlichny(), builtin("i3")):
        back = expression_from_json(expression_to_json(e))
        assert back.coefficients == e.coefficients
        assert back.bounds == e.bounds
        assert back.scenario == e.scenario


def test_json_terms():
    text = json.dumps({"scenario": {"inputs": [2, 2], "outputs": [2, 2]},
                       "terms": [{"type": "correlator", "inputs": [0, 0], "coeff": 1},
                                 {"type": "correlator", "inputs": [0, 1], "coeff": "1"},
                                 {"type": "correlator", "inputs": [1, 0], "coeff": 1},
                                 {"type": "correlator", "inputs": [1, 1], "coeff": "-1"}],
                       "bounds": {"local": 2}})
    e = expression_from_json(text)
    assert e.coefficients == chsh().coefficients and e.bounds == {"local": 2}


def test_json_errors():
    with pytest.raises(ParseError, match="line 1, column"):
        expression_from_json("{oops")
    base = {"scenario": {"inputs": [2, 2], "outputs": [2, 2]}}
    bad = dict(base, terms=[{"type": "correlator", "inputs": [0, 0], "coeff": 0.5}])
    with pytest.raises(ParseError, match=r"\$\.terms\[0\]\.coeff"):
        expression_from_json(json.dumps(bad))
    bad = dict(base, terms=[{"type": "moment", "inputs": [0, 0], "coeff": 1}])
    with pytest.raises(ParseError, match=r"\$\.terms\[0\]\.type"):
        expression_from_json(json.dumps(bad))
    bad = dict(base, terms=[{"type": "correlator", "inputs": [0, 5], "coeff": 1}])
    with pytest.raises(ParseError, match=r"\$\.terms\[0\]"):
        expression_from_json(json.dumps(bad))
    with pytest.raises(ParseError, match=r"\$\.scenario"):
        expression_from_json(json.dumps({"terms": []}))
