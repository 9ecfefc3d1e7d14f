"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line, printed in the
terminal summary.  Criterion 9 needs the external 46-box file named by the
``CAUSALBELL_BOXES`` environment variable and is skipped without it.
"""

import math
import os
import random
import time
from fractions import Fraction

import pytest

from causalbell import (IoBdag, Scenario, ab_marginal_is_lhv, canonical_form, class_bound,
                        class_membership, critical_noise, enumerate_classes, evaluate,
                        level_histogram, mixture_threshold, ns_bound)
from causalbell.boxes import (gyni_box, load_boxes, pr_box, pr_product_tripartite,
                              reference_noise_table, reproduce_noise_table, verify_extremal)
from causalbell.inequalities import builtin, chsh, circle, compose_i3, scan_class, svetlichny
from causalbell.lp import LinearProgram, check_farkas, solve
from causalbell.rational import format_rational
from causalbell.strategies import STAR_FAMILY, class_columns, star_family_verdicts

from conftest import ACCEPTANCE_LINES
from oracles import (local_deterministic_boxes, lp_oracle, nonlocal_pool, pr_on_pair,
                     random_ns_behavior, relabeled)
from test_lp import random_lp

P = IoBdag.parse
S3 = Scenario.uniform(3)

# level, representative, printed symmetry count, printed nonsignaling violation
REFERENCE_N3 = [
    (0, "{(1),(2),(3)}", 1, True),
    (1, "{(1),(1,2),(3)}", 6, True),
    (2, "{(1,2),(1,2),(3)}", 3, True),
    (2, "{(1),(1,2),(1,3)}", 6, True),
    (2, "{(1),(1,2),(2,3)}", 3, True),
    (2, "{(1),(2),(1,2,3)}", 3, True),
    (3, "{(1,2),(1,2),(1,3)}", 6, True),
    (3, "{(1),(1,2),(1,2,3)}", 6, False),
    (3, "{(1),(2,3),(1,2,3)}", 6, True),
    (3, "{(1,3),(1,2),(2,3)}", 2, True),
    (4, "{(1),(1,2,3),(1,2,3)}", 3, False),
    (4, "{(1,2),(1,2),(1,2,3)}", 3, False),
    (4, "{(1,2),(2,3),(1,2,3)}", 6, False),
    (4, "{(1,3),(2,3),(1,2,3)}", 3, True),
    (5, "{(1,2),(1,2,3),(1,2,3)}", 6, False),
    (6, "{(1,2,3),(1,2,3),(1,2,3)}", 1, False),
]
REFERENCE_N4_LEVELS = [1, 1, 5, 13, 27, 38, 48, 38, 27, 13, 5, 1, 1]
PARTIALLY_PAIRED = ["{(1),(2),(3)}", "{(1),(1,2),(3)}", "{(1,2),(1,2),(3)}", "{(1),(1,2),(1,3)}",
                    "{(1),(1,2),(2,3)}", "{(1,2),(1,2),(1,3)}"]
CIRCLE = P("{(1,3),(1,2),(2,3)}")
CHAIN = P("{(1),(1,2),(1,2,3)}")
GYNI_CIRCLE_NOISE = Fraction(1, 4)   # regression constant from the exact LP


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


_SUITE = None


def random_suite():
    """200 random nonsignaling behaviors; even ones mix only deterministic boxes and noise."""
    global _SUITE
    if _SUITE is None:
        rng = random.Random(20260101)
        det = list(local_deterministic_boxes(S3))
        pool = nonlocal_pool()
        _SUITE = [random_ns_behavior(rng, det, pool, nonlocal_weight=bool(k % 2)) for k in range(200)]
    return _SUITE


def test_criterion_1_enumeration_n3():
    t0 = time.perf_counter()
    classes = enumerate_classes(3)
    elapsed = time.perf_counter() - t0
    by_rep = {c.representative: c for c in classes}
    problems = []
    if len(classes) != 16:
        problems.append(f"{len(classes)} classes")
    if level_histogram(classes) != [1, 1, 4, 4, 4, 1, 1]:
        problems.append(f"histogram {level_histogram(classes)}")
    matched = set()
    for lev, rep, symmetry, violation in REFERENCE_N3:
        c = by_rep.get(canonical_form(P(rep)))
        if c is None or c.level != lev:
            problems.append(f"{rep} not enumerated at level {lev}")
            continue
        matched.add(c.representative)
        if c.orbit_size != symmetry:
            problems.append(f"{rep} printed symmetry {symmetry}, orbit size {c.orbit_size}")
        if c.chain_boring == violation:
            problems.append(f"{rep} chain flag {c.chain_boring} vs printed violation {violation}")
    if len(matched) != 16:
        problems.append("reference rows do not cover all classes")
    if sum(c.chain_boring for c in classes) != 6:
        problems.append("boring count differs from 6")
    if elapsed >= 1:
        problems.append(f"runtime {elapsed:.2f} s")
    report(1, not problems, "; ".join(problems) or f"16 classes, 6 boring, {elapsed:.2f} s")


def test_criterion_2_enumeration_n4():
    t0 = time.perf_counter()
    classes = enumerate_classes(4)
    elapsed = time.perf_counter() - t0
    hist = level_histogram(classes)
    sums = [0] * 13
    for c in classes:
        sums[c.level] += c.orbit_size
    ok = (hist == REFERENCE_N4_LEVELS and sums == [math.comb(12, l) for l in range(13)]
          and sum(sums) == 4096 and elapsed < 10)
    report(2, ok, f"{len(classes)} classes (prose figure 52 is inconsistent), "
                  f"{sum(sums)} assignments, {elapsed:.2f} s")


def test_criterion_3_svetlichny():
    t0 = time.perf_counter()
    values = {c: class_bound(svetlichny(), P(c)) for c in PARTIALLY_PAIRED}
    ns = ns_bound(svetlichny())
    elapsed = time.perf_counter() - t0
    ok = all(v == 4 for v in values.values()) and ns == 8 and elapsed < 30
    report(3, ok, f"class bounds {','.join(format_rational(v) for v in values.values())}, "
                  f"ns bound {ns}, {elapsed:.1f} s")


def test_criterion_4_circle():
    t0 = time.perf_counter()
    bound = class_bound(circle(), CIRCLE)
    value = evaluate(circle(), gyni_box())
    nu = critical_noise(gyni_box(), CIRCLE)
    elapsed = time.perf_counter() - t0
    ok = bound == 6 and value == 8 and nu >= Fraction(1, 4) and nu == GYNI_CIRCLE_NOISE and elapsed < 60
    report(4, ok, f"bound {bound}, GYNI value {value}, critical noise {nu}, {elapsed:.1f} s")


def test_criterion_5_composite_chsh():
    e = builtin("i3")
    t0 = time.perf_counter()
    res = scan_class(e, P("{(1),(2),(1,2,3)}"), jobs=os.cpu_count() or 1)
    elapsed = time.perf_counter() - t0
    pr_value = evaluate(e, pr_product_tripartite())
    ns = ns_bound(e)
    recorded = compose_i3(chsh(), 7, 9).bounds["star"]
    ok = (res.value == 10 and pr_value == 12 and ns == 12 and recorded == 25
          and e.bounds["star"] == 10 and elapsed <= 900)
    report(5, ok, f"star bound {res.value} over {res.columns} columns in {elapsed:.0f} s, "
                  f"PR product {pr_value}, ns bound {ns}, composed bound {recorded}")


def test_criterion_6_chain_is_boring():
    suite = random_suite()
    t0 = time.perf_counter()
    failures = [k for k, b in enumerate(suite) if not class_membership(b, CHAIN).feasible]
    elapsed = time.perf_counter() - t0
    report(6, not failures and elapsed < 120,
           f"{len(suite) - len(failures)}/{len(suite)} feasible, {elapsed:.0f} s")


def test_criterion_7_star_collapse():
    pr_boxes = [pr_on_pair(pair, out) for pair in ((0, 1), (0, 2), (1, 2)) for out in (0, 1)]
    pr_boxes += [relabeled(pr_on_pair((0, 1)), (1, 0, 0), (0, 1, 0), perm) for perm in
                 ((1, 2, 0), (2, 0, 1))]
    behaviors = random_suite() + [gyni_box()] + pr_boxes
    disagree = []
    verdicts = set()
    for k, b in enumerate(behaviors):
        v = star_family_verdicts(b)
        verdicts.add(tuple(v.values()))
        if len(set(v.values())) != 1:
            disagree.append(k)
    report(7, not disagree, f"{len(behaviors) - len(disagree)}/{len(behaviors)} agree, "
                            f"verdict patterns {sorted(verdicts)}")


def test_criterion_8_lhv_marginals():
    star = STAR_FAMILY[0]
    rng = random.Random(7)
    det = list(local_deterministic_boxes(S3))
    pool = nonlocal_pool()
    samples, tries = [], 0
    while len(samples) < 100 and tries < 2000:
        tries += 1
        b = random_ns_behavior(rng, det, pool)
        if class_membership(b, star, orbit=False).feasible:
            samples.append(b)
    bad = [k for k, b in enumerate(samples) if not ab_marginal_is_lhv(b)]
    res = class_membership(pr_box(), IoBdag.lhv(2))
    cols = class_columns(Scenario.uniform(2), IoBdag.lhv(2))
    lp = LinearProgram([0] * cols.num_columns, cols.sparse(), list(pr_box().values) + [1])
    pr_rejected = not res.feasible and check_farkas(lp, res.certificate)
    ok = len(samples) == 100 and not bad and pr_rejected
    report(8, ok, f"{len(samples) - len(bad)}/{len(samples)} star samples with local AB marginal "
                  f"({tries} draws), PR box infeasible with certificate: {pr_rejected}")


def test_criterion_9_forty_six_boxes():
    path = os.environ.get("CAUSALBELL_BOXES")
    if not path or not os.path.exists(path):
        line = "criterion 9: SKIPPED (set CAUSALBELL_BOXES to the 46-box data file)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        pytest.skip("the 46-box data file is not available")
    boxes = load_boxes(path)
    by_id = {b.id: b for b in boxes}
    problems = []
    if len(boxes) != 46:
        problems.append(f"{len(boxes)} boxes")
    not_extremal = [b.id for b in boxes if not verify_extremal(b)]
    if not_extremal:
        problems.append(f"not extremal: {not_extremal}")
    t0 = time.perf_counter()
    table = reproduce_noise_table(boxes)
    elapsed = time.perf_counter() - t0
    mismatches = table.compare(reference_noise_table())
    if mismatches:
        problems.append(f"{len(mismatches)} table mismatches, first {mismatches[0]}")
    if elapsed > 1800:
        problems.append(f"table took {elapsed:.0f} s")
    if 1 in by_id and 38 in by_id:
        t1 = mixture_threshold(by_id[1].behavior, by_id[38].behavior, P("{(1),(1,2),(2,3)}"))
        t2 = mixture_threshold(by_id[1].behavior, by_id[38].behavior, P("{(1,2),(1,2),(1,3)}"))
        if (t1, t2) != (1, Fraction(1, 7)):
            problems.append(f"mixture thresholds {t1}, {t2} instead of 1, 1/7")
    else:
        problems.append("boxes 1 and 38 missing")
    outside = [b.id for b in boxes for io in STAR_FAMILY
               if not class_membership(b.behavior, io).feasible]
    if outside:
        problems.append(f"outside the star family: {sorted(set(outside))}")
    report(9, not problems, "; ".join(problems) or f"46 boxes verified, table matches, {elapsed:.0f} s")


def test_criterion_10_lp_engine():
    rng = random.Random(424242)
    counts = {"optimal": 0, "infeasible": 0, "unbounded": 0}
    problems = []
    for k in range(1000):
        c, A, b = random_lp(rng)
        lp = LinearProgram(c, A, b)
        out = solve(lp)
        expected = lp_oracle(c, A, b)
        counts[out.status] += 1
        if out.status != expected[0]:
            problems.append(f"lp {k}: {out.status} vs {expected[0]}")
        elif out.optimal and out.value != expected[1]:
            problems.append(f"lp {k}: value {out.value} vs {expected[1]}")
        elif out.infeasible and not check_farkas(lp, out.certificate):
            problems.append(f"lp {k}: certificate fails")
    report(10, not problems, "; ".join(problems[:3]) or
           ", ".join(f"{v} {k}" for k, v in counts.items()))
