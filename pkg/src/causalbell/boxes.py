"""Box files, named generators, extremality checks and the noise table.

Box and behavior files are JSON.  Probabilities are reduced rational
strings in canonical flat order: input context major (``x_1`` slowest),
outcome minor (``a_N`` fastest).
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .dag import IoBdag
from .errors import CausalBellError, GuardLimitError, ParseError, ScenarioMismatchError
from .inequalities import _json_path, _load_json, _rational_field, parse_scenario_block
from .lp import DEFAULT_MAX_COLUMNS, rank
from .rational import format_rational, parse_rational
from .scenario import (Behavior, Scenario, is_nonsignaling, is_normalized, nonsignaling_equalities,
                       normalization_rows, white_noise)
from .strategies import critical_noise

INDEX_ORDER = "flat index = context * prod(outputs) + outcome; x1 slowest, aN fastest"

TABLE2_CLASSES = tuple(IoBdag.parse(t) for t in (
    "{(1),(2),(3)}",
    "{(1),(1,2),(3)}",
    "{(1,2),(1,2),(3)}",
    "{(1),(1,2),(1,3)}",
    "{(1),(1,2),(2,3)}",
    "{(1,2),(1,2),(1,3)}",
    "{(1,3),(1,2),(2,3)}",
))


@dataclass(frozen=True)
class BoxRecord:
    id: int
    label: str
    behavior: Behavior
    claimed_extremal: bool = True

    @property
    def scenario(self) -> Scenario:
        return self.behavior.scenario


class BoxValidationError(CausalBellError, ValueError):
    pass


def _validate(b: Behavior, where: str):
    if not is_normalized(b):
        k = b.scenario.num_outcomes
        for c, x in enumerate(b.scenario.contexts()):
            total = sum(b.values[c * k:(c + 1) * k])
            if total != 1:
                raise BoxValidationError(
                    f"{where}: probabilities at inputs {x} sum to {format_rational(total)}, not 1")
    check = is_nonsignaling(b)
    if not check.ok:
        raise BoxValidationError(f"{where}: signaling, {check.violation.describe()}")


def _probabilities(values, s: Scenario, path) -> Behavior:
    if not isinstance(values, list):
        raise ParseError("'probabilities' must be a list", _json_path(path))
    if len(values) != s.dimension:
        raise ParseError(f"expected {s.dimension} probabilities, got {len(values)}", _json_path(path))
    vals = [_rational_field(v, path + (k,)) for k, v in enumerate(values)]
    for k, v in enumerate(vals):
        if v < 0 or v > 1:
            raise ParseError(f"probability {v} outside [0, 1]", _json_path(path + (k,)))
    return Behavior(s, tuple(vals))


def load_boxes(source) -> list[BoxRecord]:
    """Read a box file (path, file object or JSON text) and validate every box."""
    obj = _load_json(_read(source))
    if not isinstance(obj, dict):
        raise ParseError("box file must hold an object", "$")
    if not isinstance(obj.get("provenance"), str) or not obj["provenance"].strip():
        raise ParseError("box file needs a non-empty 'provenance' string", "$.provenance")
    s = parse_scenario_block(obj.get("scenario"))
    boxes = obj.get("boxes")
    if not isinstance(boxes, list):
        raise ParseError("'boxes' must be a list", "$.boxes")
    out, seen = [], set()
    for k, rec in enumerate(boxes):
        path = ("boxes", k)
        if not isinstance(rec, dict):
            raise ParseError("box must be an object", _json_path(path))
        bid = rec.get("id")
        if isinstance(bid, bool) or not isinstance(bid, int):
            raise ParseError("box 'id' must be an integer", _json_path(path + ("id",)))
        if bid in seen:
            raise ParseError(f"duplicate box id {bid}", _json_path(path + ("id",)))
        seen.add(bid)
        label = rec.get("label", "")
        if not isinstance(label, str):
            raise ParseError("'label' must be a string", _json_path(path + ("label",)))
        claimed = rec.get("claimed_extremal", True)
        if not isinstance(claimed, bool):
            raise ParseError("'claimed_extremal' must be a boolean", _json_path(path + ("claimed_extremal",)))
        b = _probabilities(rec.get("probabilities"), s, path + ("probabilities",))
        _validate(b, f"box {bid}")
        out.append(BoxRecord(bid, label, b, claimed))
    return out


def write_boxes(boxes: Sequence[BoxRecord], provenance: str) -> str:
    if not boxes:
        raise ValueError("nothing to write")
    s = boxes[0].scenario
    if any(b.scenario != s for b in boxes):
        raise ScenarioMismatchError("all boxes in a file share one scenario")
    obj = {
        "provenance": provenance,
        "index_order": INDEX_ORDER,
        "scenario": {"inputs": list(s.inputs), "outputs": list(s.outputs)},
        "boxes": [{"id": b.id, "label": b.label, "claimed_extremal": b.claimed_extremal,
                   "probabilities": [format_rational(v) for v in b.behavior.values]}
                  for b in boxes],
    }
    return json.dumps(obj, indent=1) + "\n"


def load_behavior(source) -> Behavior:
    """Read ``{"scenario": ..., "probabilities": [...]}``; must be normalized and nonsignaling."""
    obj = _load_json(_read(source))
    if not isinstance(obj, dict):
        raise ParseError("behavior file must hold an object", "$")
    s = parse_scenario_block(obj.get("scenario"))
    b = _probabilities(obj.get("probabilities"), s, ("probabilities",))
    _validate(b, "behavior")
    return b


def behavior_to_json(b: Behavior) -> str:
    s = b.scenario
    obj = {"index_order": INDEX_ORDER,
           "scenario": {"inputs": list(s.inputs), "outputs": list(s.outputs)},
           "probabilities": [format_rational(v) for v in b.values]}
    return json.dumps(obj, indent=1) + "\n"


def _read(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    text = str(source)
    if text.lstrip().startswith("{"):
        return text
    with open(text, encoding="utf-8") as fh:
        return fh.read()


def verify_extremal(box) -> bool:
    """True iff the constraints tight at the box pin it to a single point.

    Tight constraints are every normalization and nonsignaling equality plus
    the nonnegativity of each zero entry.
    """
    b = box.behavior if isinstance(box, BoxRecord) else box
    s = b.scenario
    d = s.dimension
    rows = []
    for sparse_row in normalization_rows(s) + nonsignaling_equalities(s):
        row = [0] * d
        for k, v in sparse_row.items():
            row[k] = v
        rows.append(row)
    for k, v in enumerate(b.values):
        if v == 0:
            row = [0] * d
            row[k] = 1
            rows.append(row)
    return rank(rows) == d


# ---------------------------------------------------------------------------
# generators


def gyni_box() -> Behavior:
    s = Scenario.uniform(3)
    return Behavior.from_function(
        s, lambda a, x: Fraction(1, 4) if a[0] ^ a[1] ^ a[2] == x[0] & x[1] & x[2] else 0)


def pr_box() -> Behavior:
    return Behavior.from_function(
        Scenario.uniform(2), lambda a, x: Fraction(1, 2) if a[0] ^ a[1] == x[0] & x[1] else 0)


def pr_product_tripartite() -> Behavior:
    """PR boxes shared on (A, B), (A', C), (B', C'); each party outputs ``first + 2 * second``."""
    s = Scenario((2, 2, 2), (4, 4, 4))

    def pr(a, b, x, y):
        return Fraction(1, 2) if a ^ b == x & y else Fraction(0)

    def prob(o, x):
        A, A2 = o[0] % 2, o[0] // 2
        B, B2 = o[1] % 2, o[1] // 2
        C, C2 = o[2] % 2, o[2] // 2
        return pr(A, B, x[0], x[1]) * pr(A2, C, x[0], x[2]) * pr(B2, C2, x[1], x[2])

    return Behavior.from_function(s, prob)


def deterministic(assignment: Sequence[Sequence[int]], outputs: Sequence[int] | None = None) -> Behavior:
    """Local deterministic box: party ``i`` answers ``assignment[i][x_i]``."""
    assignment = [tuple(int(v) for v in row) for row in assignment]
    inputs = tuple(len(row) for row in assignment)
    if outputs is None:
        outputs = tuple(max(2, max(row) + 1) for row in assignment)
    s = Scenario(inputs, tuple(outputs))
    for i, row in enumerate(assignment):
        if any(not 0 <= v < s.outputs[i] for v in row):
            raise ValueError(f"party {i + 1} answers outside its output alphabet")
    return Behavior.from_function(
        s, lambda a, x: 1 if all(a[i] == assignment[i][x[i]] for i in range(len(x))) else 0)


_DET_RE = re.compile(r"^deterministic\(([0-9,\s]+)\)$")
_WN_RE = re.compile(r"^white_noise\((\d+)(?:,(\d+))?(?:,(\d+))?\)$")

BEHAVIOR_NAMES = ("gyni", "pr", "pr_product_tripartite", "white_noise(N[,inputs[,outputs]])",
                  "deterministic(a1,a2,...)")


def generator(name: str, params: dict | None = None) -> Behavior:
    """Named behavior.

    ``deterministic`` takes ``params["assignment"]`` or the text form
    ``deterministic(01,10,00)``, one digit string per party listing its
    answer to each input.  ``white_noise`` takes ``params["scenario"]`` or
    ``white_noise(N[,inputs[,outputs]])``.
    """
    params = params or {}
    key = name.strip().lower().replace(" ", "")
    if key == "gyni":
        return gyni_box()
    if key == "pr":
        return pr_box()
    if key == "pr_product_tripartite":
        return pr_product_tripartite()
    if key == "white_noise":
        s = params.get("scenario", Scenario.uniform(3))
        return white_noise(s)
    m = _WN_RE.match(key)
    if m:
        n, k_in, k_out = (int(g) if g else None for g in m.groups())
        return white_noise(Scenario.uniform(n, k_in or 2, k_out or 2))
    if key == "deterministic":
        if "assignment" not in params:
            raise ValueError("deterministic needs an 'assignment' parameter")
        return deterministic(params["assignment"], params.get("outputs"))
    m = _DET_RE.match(key)
    if m:
        rows = [[int(ch) for ch in part] for part in m.group(1).split(",")]
        return deterministic(rows)
    raise ValueError(f"unknown behavior generator {name!r}")


# ---------------------------------------------------------------------------
# noise table


@dataclass(frozen=True)
class NoiseTable:
    classes: tuple
    rows: tuple  # (box id, tuple of Fraction or error string)

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["box"] + [c.format() for c in self.classes])
        for bid, cells in self.rows:
            w.writerow([bid] + [format_rational(v) if isinstance(v, Fraction) else v for v in cells])
        return buf.getvalue()

    def compare(self, reference: "NoiseTable") -> list[tuple]:
        """Mismatches as ``(box, class, expected, computed)``."""
        ref = dict(reference.rows)
        col = {c: k for k, c in enumerate(reference.classes)}
        out = []
        for bid, cells in self.rows:
            if bid not in ref:
                out.append((bid, None, "missing in reference", None))
                continue
            for c, v in zip(self.classes, cells):
                expected = ref[bid][col[c]] if c in col else "missing"
                if expected != v:
                    out.append((bid, c.format(), expected, v))
        return out


def reproduce_noise_table(boxes: Sequence[BoxRecord], classes: Sequence[IoBdag] = TABLE2_CLASSES,
                          *, max_columns: int = DEFAULT_MAX_COLUMNS) -> NoiseTable:
    rows = []
    for box in boxes:
        cells = []
        for io in classes:
            try:
                cells.append(critical_noise(box.behavior, io, max_columns=max_columns))
            except GuardLimitError as exc:
                cells.append(f"error: {exc}")
        rows.append((box.id, tuple(cells)))
    return NoiseTable(tuple(classes), tuple(rows))


def read_noise_table(text: str) -> NoiseTable:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "box":
        raise ParseError("noise table must start with a 'box' column", "line 1")
    classes = tuple(IoBdag.parse(h) for h in header[1:])
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(rec)}", f"line {lineno}")
        try:
            bid = int(rec[0])
        except ValueError:
            raise ParseError(f"box id {rec[0]!r} is not an integer", f"line {lineno}") from None
        cells = tuple(parse_rational(v, f"line {lineno}") for v in rec[1:])
        rows.append((bid, cells))
    return NoiseTable(classes, tuple(rows))


def reference_noise_table() -> NoiseTable:
    """The bundled reference table of critical noise rates for the 46 boxes."""
    text = resources.files("causalbell").joinpath("data/table2_reference.csv").read_text()
    return read_noise_table(text)
