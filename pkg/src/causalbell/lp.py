"""Exact rational linear programming.

The solver is a two-phase revised simplex method over the integers: every
column is scaled to integer entries, the basis inverse is kept as an integer
matrix over a common denominator, and pricing uses exact int64 sparse
products (split into limbs when the dual vector grows too large).

Bland's rule is the default pivot rule, so results are deterministic and the
solver terminates on degenerate problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GuardLimitError
from .rational import lcm_of_denominators, to_rational

DEFAULT_MAX_COLUMNS = 200_000

_INT64_SAFE = 1 << 62
_ZERO = Fraction(0)


def _is_sparse(A) -> bool:
    return sp.issparse(A)


def _exact_tuple(values) -> tuple:
    # integer arrays stay plain ints, which are exact rationals already
    if isinstance(values, np.ndarray) and np.issubdtype(values.dtype, np.integer):
        return tuple(values.tolist())
    return tuple(to_rational(v) for v in values)


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """minimize ``c . z`` subject to ``A z = b`` and ``lower <= z <= upper``.

    ``A`` is either a dense sequence of rows of rationals or a scipy sparse
    matrix with integer entries (the form used for strategy matrices).
    ``lower`` defaults to zero for every variable; a ``None`` entry makes the
    variable free below.  ``upper`` entries of ``None`` mean unbounded.
    """

    c: Sequence
    A: object
    b: Sequence
    lower: Sequence | None = None
    upper: Sequence | None = None

    def __post_init__(self):
        c = _exact_tuple(self.c)
        b = _exact_tuple(self.b)
        if _is_sparse(self.A):
            if not np.issubdtype(self.A.dtype, np.integer):
                raise TypeError("sparse constraint matrices must have integer dtype")
            A = sp.csc_matrix(self.A, dtype=np.int64)
            shape = A.shape
        else:
            A = tuple(tuple(to_rational(v) for v in row) for row in self.A)
            widths = {len(row) for row in A}
            if len(widths) > 1:
                raise ValueError("ragged constraint matrix")
            shape = (len(A), widths.pop() if widths else len(c))
        if shape[0] != len(b):
            raise ValueError(f"A has {shape[0]} rows but b has {len(b)} entries")
        if shape[1] != len(c):
            raise ValueError(f"A has {shape[1]} columns but c has {len(c)} entries")
        n = len(c)
        lower = (_ZERO,) * n if self.lower is None else tuple(
            None if v is None else to_rational(v) for v in self.lower)
        upper = (None,) * n if self.upper is None else tuple(
            None if v is None else to_rational(v) for v in self.upper)
        if len(lower) != n or len(upper) != n:
            raise ValueError("bound vectors must have one entry per variable")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def num_rows(self) -> int:
        return len(self.b)

    @property
    def num_vars(self) -> int:
        return len(self.c)

    def column(self, j: int) -> list[Fraction]:
        if _is_sparse(self.A):
            col = self.A[:, j].toarray().ravel()
            return [Fraction(int(v)) for v in col]
        return [row[j] for row in self.A]


@dataclass(frozen=True)
class LpOutcome:
    """Result of :func:`solve`.

    ``certificate`` (infeasible only) is a Farkas vector ``y`` over the rows
    of :func:`standard_form` with ``y . A_j <= 0`` for every column and
    ``y . b > 0``.  ``ray`` (unbounded only) is a direction in the original
    variables along which the objective decreases without bound.
    """

    status: str
    value: Fraction | None = None
    solution: tuple | None = None
    certificate: tuple | None = None
    duals: tuple | None = None
    ray: tuple | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def infeasible(self) -> bool:
        return self.status == "infeasible"


@dataclass(frozen=True, eq=False)
class StandardForm:
    """``A z = b, z >= 0`` equivalent of a :class:`LinearProgram`.

    ``columns[k]`` is ``(var, sign)`` for a column standing for ``sign`` times
    a shifted original variable, or ``(None, 1)`` for an upper-bound slack.
    Original values are ``shift[var] + sum(sign * z_k)``.
    """

    A: object
    b: tuple
    c: tuple
    offset: Fraction
    shift: tuple
    columns: tuple

    @property
    def shape(self):
        if _is_sparse(self.A):
            return self.A.shape
        return (len(self.b), len(self.columns))

    def recover(self, z) -> tuple:
        values = list(self.shift)
        for k, (var, sign) in enumerate(self.columns):
            if var is not None and z[k]:
                values[var] += sign * z[k]
        return tuple(values)


def standard_form(lp: LinearProgram) -> StandardForm:
    n = lp.num_vars
    shift = []
    cols: list[tuple] = []
    bound_rows: list[tuple[int, Fraction]] = []
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is None and hi is None:
            shift.append(Fraction(0))
            cols += [(j, 1), (j, -1)]
        elif lo is None:
            shift.append(hi)
            cols.append((j, -1))
        else:
            shift.append(lo)
            cols.append((j, 1))
            if hi is not None:
                bound_rows.append((len(cols) - 1, hi - lo))
    m = lp.num_rows

    b = list(lp.b)
    for j in range(n):
        if shift[j]:
            for i, a in enumerate(lp.column(j)):
                if a:
                    b[i] -= a * shift[j]
    b += [rhs for _, rhs in bound_rows]

    c = [lp.c[var] * sign for var, sign in cols]
    offset = sum((lp.c[j] * shift[j] for j in range(n)), Fraction(0))
    k = len(bound_rows)
    cols_all = cols + [(None, 1)] * k

    if _is_sparse(lp.A):
        A = lp.A
        pieces = []
        for var, sign in cols:
            pieces.append((var, sign))
        idx = np.array([var for var, _ in pieces], dtype=np.int64)
        signs = np.array([sign for _, sign in pieces], dtype=np.int64)
        main = A[:, idx] @ sp.diags(signs)
        if k:
            width = len(cols)
            rows = np.arange(k)
            bound_part = sp.csc_matrix(
                (np.ones(k, dtype=np.int64), (rows, [p for p, _ in bound_rows])),
                shape=(k, width))
            top = sp.hstack([main, sp.csc_matrix((m, k), dtype=np.int64)])
            bottom = sp.hstack([bound_part, sp.identity(k, dtype=np.int64, format="csc")])
            A_std = sp.vstack([top, bottom])
        else:
            A_std = main
        A_std = sp.csc_matrix(A_std, dtype=np.int64)
    else:
        width = len(cols) + k
        A_std = []
        for i in range(m):
            A_std.append(tuple([lp.A[i][var] * sign for var, sign in cols] + [Fraction(0)] * k))
        for r, (pos, _) in enumerate(bound_rows):
            row = [Fraction(0)] * width
            row[pos] = Fraction(1)
            row[len(cols) + r] = Fraction(1)
            A_std.append(tuple(row))
        A_std = tuple(A_std)
    return StandardForm(A_std, tuple(b), tuple(c + [Fraction(0)] * k), offset,
                        tuple(shift), tuple(cols_all))


class _IntegerColumns:
    """Integer matrix with exact products ``y . A_j`` for every column."""

    def __init__(self, matrix):
        self.sparse = _is_sparse(matrix)
        if self.sparse:
            self.A = sp.csc_matrix(matrix, dtype=np.int64)
            absA = abs(self.A)
            sums = np.asarray(absA.sum(axis=0)).ravel()
            self.col_l1 = int(sums.max()) if sums.size else 0
        else:
            self.A = matrix  # object ndarray
            self.col_l1 = max((sum(abs(int(v)) for v in self.A[:, j])
                               for j in range(self.A.shape[1])), default=0)
        self.shape = self.A.shape

    def column(self, j: int) -> np.ndarray:
        if self.sparse:
            col = self.A[:, j].toarray().ravel()
            return np.array([int(v) for v in col], dtype=object)
        return self.A[:, j].copy()

    def rdot(self, y: np.ndarray) -> np.ndarray:
        """Exact ``y . A_j`` for all ``j``; int64 when it provably fits."""
        if not self.sparse:
            return self.A.T.dot(y)
        ymax = max((abs(int(v)) for v in y), default=0)
        if ymax == 0:
            return np.zeros(self.shape[1], dtype=np.int64)
        l1 = max(self.col_l1, 1)
        if ymax * l1 < _INT64_SAFE:
            return self.A.T @ np.array([int(v) for v in y], dtype=np.int64)
        bits = max(1, 61 - l1.bit_length())
        mask = (1 << bits) - 1
        mags = [abs(int(v)) for v in y]
        signs = [1 if int(v) >= 0 else -1 for v in y]
        total = np.zeros(self.shape[1], dtype=object)
        shift = 0
        while any(mags):
            limb = np.array([s * (mg & mask) for s, mg in zip(signs, mags)], dtype=np.int64)
            part = (self.A.T @ limb).astype(object)
            total = total + part * (1 << shift)
            mags = [mg >> bits for mg in mags]
            shift += bits
        return total

    def drop_rows(self, keep: list[int]) -> "_IntegerColumns":
        return _IntegerColumns(self.A[keep, :])


def _integer_columns(sf: StandardForm):
    """Scale each column to integers; returns (matrix, per-column scale)."""
    if _is_sparse(sf.A):
        return _IntegerColumns(sf.A), [1] * sf.shape[1]
    m, n = sf.shape
    scales = []
    cols = []
    for j in range(n):
        col = [sf.A[i][j] for i in range(m)]
        L = lcm_of_denominators(col)
        scales.append(L)
        cols.append([int(v * L) for v in col])
    mat = np.empty((m, n), dtype=object)
    for j, col in enumerate(cols):
        for i, v in enumerate(col):
            mat[i, j] = v
    biggest = max((abs(v) for col in cols for v in col), default=0)
    if biggest < (1 << 31) and m * n:
        return _IntegerColumns(sp.csc_matrix(mat.astype(np.int64))), scales
    return _IntegerColumns(mat), scales


def _gcd_all(values) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, int(v))
        if g == 1:
            return 1
    return g


class _Basis:
    """Basis inverse stored as ``M / den`` with integer ``M``.

    Updates are fraction free: ``den`` stays equal to the basis determinant
    up to sign and ``M`` to the matching adjugate, so each pivot divides
    exactly by the previous denominator and no gcd reduction is needed.
    """

    def __init__(self, m: int):
        self.M = np.empty((m, m), dtype=object)
        for i in range(m):
            for j in range(m):
                self.M[i, j] = 1 if i == j else 0
        self.den = 1

    def solve(self, col: np.ndarray) -> np.ndarray:
        return self.M.dot(col)

    def pivot(self, w: np.ndarray, r: int):
        wr = int(w[r])
        Mr = self.M[r].copy()
        newM = self.M * wr - np.outer(w, Mr)
        if self.den != 1:
            newM = newM // self.den
        newM[r] = Mr
        if wr < 0:
            newM = -newM
            wr = -wr
        self.M = newM
        self.den = wr

    def restrict(self, keep_positions: list[int], keep_rows: list[int]):
        self.M = self.M[np.ix_(keep_positions, keep_rows)]


PIVOT_RULES = ("bland", "dantzig")

def _pick_entering(red: np.ndarray, rule: str):
    neg = np.flatnonzero(red < 0)
    if neg.size == 0:
        return None
    if rule == "bland":
        return int(neg[0])
    # largest coefficient; ties to the lowest index
    vals = red[neg]
    return int(neg[int(np.argmin(vals))])


def _dual_vector(cost_basic: np.ndarray, basis: _Basis):
    Y = cost_basic.dot(basis.M)
    D = basis.den
    g = math.gcd(_gcd_all(Y), D)
    if g > 1:
        Y = Y // g
        D //= g
    return Y, D


def solve(lp: LinearProgram, *, max_columns: int = DEFAULT_MAX_COLUMNS,
          pivot_rule: str = "bland", max_iterations: int | None = None) -> LpOutcome:
    """Solve ``lp`` exactly.

    Raises :class:`GuardLimitError` when the standard form has more than
    ``max_columns`` columns.
    """
    if pivot_rule not in PIVOT_RULES:
        raise ValueError(f"unknown pivot rule {pivot_rule!r}")
    sf = standard_form(lp)
    m, n = sf.shape
    if n > max_columns:
        raise GuardLimitError(f"LP has {n} columns, above the limit of {max_columns}")
    A, scales = _integer_columns(sf)

    # rows with negative right-hand side are negated so artificials start at b
    row_sign = [(-1 if v < 0 else 1) for v in sf.b]
    if any(s < 0 for s in row_sign):
        if A.sparse:
            A = _IntegerColumns(sp.diags(np.array(row_sign, dtype=np.int64)) @ A.A)
        else:
            A = _IntegerColumns(A.A * np.array(row_sign, dtype=object)[:, None])
    b = [v * s for v, s in zip(sf.b, row_sign)]
    Lb = lcm_of_denominators(b)
    b_int = np.array([int(v * Lb) for v in b], dtype=object)

    c_scaled = [cj * L for cj, L in zip(sf.c, scales)]
    Lc = lcm_of_denominators(c_scaled)
    c_int = np.array([int(v * Lc) for v in c_scaled], dtype=object)
    c_fast = None
    if all(abs(v) < (1 << 40) for v in c_int):
        c_fast = c_int.astype(np.int64)

    rows = list(range(m))           # original std-form row of each current row
    basis_vars = [n + i for i in range(m)]  # n + i is the artificial of row i
    B = _Basis(m)
    iterations = 0

    def bland_key(v):
        return v - n if v >= n else v + m

    def run_phase(phase: int):
        nonlocal iterations
        while True:
            if max_iterations is not None and iterations >= max_iterations:
                raise RuntimeError("simplex iteration limit reached")
            if phase == 1:
                cost_basic = np.array([1 if v >= n else 0 for v in basis_vars], dtype=object)
            else:
                cost_basic = np.array([c_int[v] for v in basis_vars], dtype=object)
            Y, D = _dual_vector(cost_basic, B)
            YA = A.rdot(Y)
            if phase == 1:
                red = -YA
            elif c_fast is not None and YA.dtype == np.int64 and abs(D) < (1 << 20):
                red = c_fast * D - YA
            else:
                red = c_int * D - YA.astype(object)
            q = _pick_entering(red, pivot_rule)
            if q is None:
                return ("optimal", Y, D)
            w = B.solve(A.column(q))
            X = B.solve(b_int)
            best = None
            for i, wi in enumerate(w):
                if wi == 0 or (wi > 0) != (B.den > 0):
                    continue
                ratio = Fraction(int(X[i]), int(wi))
                key = (ratio, bland_key(basis_vars[i]))
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return ("unbounded", q, w)
            r = best[1]
            B.pivot(w, r)
            basis_vars[r] = q
            iterations += 1

    status, Y, D = run_phase(1)
    X = B.solve(b_int)
    phase1_value = sum((Fraction(int(X[i]), B.den * Lb)
                        for i, v in enumerate(basis_vars) if v >= n), Fraction(0))
    if phase1_value > 0:
        cert = tuple(Fraction(int(Y[i]), int(D)) * row_sign[rows[i]] for i in range(m))
        return LpOutcome("infeasible", certificate=cert, iterations=iterations)

    # drive zero-level artificials out of the basis; drop redundant rows
    redundant_positions = []
    for pos in range(m):
        if basis_vars[pos] < n:
            continue
        R = A.rdot(B.M[pos])
        basic = set(v for v in basis_vars if v < n)
        nz = [j for j in np.flatnonzero(R != 0) if int(j) not in basic]
        if nz:
            q = int(nz[0])
            w = B.solve(A.column(q))
            B.pivot(w, pos)
            basis_vars[pos] = q
            iterations += 1
        else:
            redundant_positions.append(pos)
    if redundant_positions:
        dropped_rows = [basis_vars[pos] - n for pos in redundant_positions]
        keep_pos = [p for p in range(m) if p not in redundant_positions]
        keep_rows = [i for i in range(m) if i not in dropped_rows]
        B.restrict(keep_pos, keep_rows)
        basis_vars[:] = [basis_vars[p] for p in keep_pos]
        A = A.drop_rows(keep_rows)
        b_int = b_int[keep_rows]
        rows = [rows[i] for i in keep_rows]
        m = len(keep_rows)

    result = run_phase(2)
    if result[0] == "unbounded":
        _, q, w = result
        direction = [Fraction(0)] * n
        direction[q] = Fraction(scales[q])
        for i, v in enumerate(basis_vars):
            if w[i]:
                direction[v] = -Fraction(int(w[i]), B.den) * scales[v]
        ray = _recover_direction(sf, direction)
        return LpOutcome("unbounded", ray=ray, iterations=iterations)

    _, Y, D = result
    X = B.solve(b_int)
    z = [Fraction(0)] * n
    for i, v in enumerate(basis_vars):
        z[v] = Fraction(int(X[i]), B.den * Lb) * scales[v]
    solution = sf.recover(z)
    value = sum((cj * zj for cj, zj in zip(lp.c, solution)), Fraction(0))
    duals = [Fraction(0)] * len(sf.b)
    for i in range(m):
        duals[rows[i]] = Fraction(int(Y[i]), int(D) * Lc) * row_sign[rows[i]]
    return LpOutcome("optimal", value=value, solution=solution, duals=tuple(duals),
                     iterations=iterations)


def _recover_direction(sf: StandardForm, direction) -> tuple:
    n_orig = len(sf.shift)
    values = [Fraction(0)] * n_orig
    for k, (var, sign) in enumerate(sf.columns):
        if var is not None and direction[k]:
            values[var] += sign * direction[k]
    return tuple(values)


def _plain_columns(lp: LinearProgram) -> np.ndarray:
    """Columns with bounds exactly ``[0, inf)``."""
    return np.array([(lo is _ZERO or (lo is not None and lo == 0)) and hi is None
                     for lo, hi in zip(lp.lower, lp.upper)], dtype=bool)


def _float_bound(lp: LinearProgram, j: int) -> tuple:
    lo, hi = lp.lower[j], lp.upper[j]
    return (None if lo is None else float(lo), None if hi is None else float(hi))


def _highs(c, A, b, bounds):
    from scipy.optimize import linprog
    return linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")


def _float_support(lp: LinearProgram, tol: float = 1e-9, max_rounds: int = 200) -> list[int]:
    """Columns used by a floating-point solution; only a hint for exact solving.

    Runs floating-point column generation: an elastic restricted problem
    first reaches feasibility, then the objective is minimized.
    """
    A = sp.csc_matrix(lp.A, dtype=np.float64)
    m, n = A.shape
    AT = A.T.tocsr()
    b = np.array(lp.b, dtype=np.float64)
    c = np.array(lp.c, dtype=np.float64)
    plain = _plain_columns(lp)
    active = np.zeros(n, dtype=bool)
    active[~plain] = True
    active[np.linspace(0, n - 1, min(n, 2 * m)).astype(np.int64)] = True
    batch = max(2 * m, 50)
    eye = sp.identity(m, format="csc")
    x = None
    for phase in (1, 2):
        for _ in range(max_rounds):
            cols = np.flatnonzero(active)
            Asub = A[:, cols]
            bnds = [_float_bound(lp, j) for j in cols]
            if phase == 1:
                Ael = sp.hstack([Asub, eye, -eye]).tocsc()
                cel = np.concatenate([np.zeros(len(cols)), np.ones(2 * m)])
                res = _highs(cel, Ael, b, bnds + [(0, None)] * (2 * m))
                cost = np.zeros(n)
            else:
                res = _highs(c[cols], Asub, b, bnds)
                cost = c
            if res.status != 0 or res.eqlin is None:
                break
            x = np.zeros(n)
            x[cols] = res.x[:len(cols)]
            y = res.eqlin.marginals
            red = cost - AT @ y
            bad = np.flatnonzero((red < -tol) & ~active)
            if bad.size == 0:
                if phase == 2:
                    # columns on the optimal face give the exact solve a basis to land on
                    near = np.flatnonzero(np.abs(red) <= tol)
                    near = near[np.argsort(np.abs(red[near]), kind="stable")[:3 * m]]
                    x[near] = np.maximum(x[near], 2 * tol)
                break
            pick = bad[np.argsort(red[bad], kind="stable")[:batch]]
            active[pick] = True
        if phase == 1 and (res.status != 0 or res.fun > tol):
            break
        if not np.any(c):
            break
    if x is None:
        return []
    return [int(j) for j in np.flatnonzero(np.abs(x) > tol)]


def solve_seeded(lp: LinearProgram, *, max_columns: int = DEFAULT_MAX_COLUMNS,
                 pivot_rule: str = "bland", batch: int | None = None) -> LpOutcome:
    """Exact column generation for sparse LPs with many plain columns.

    A floating-point solve proposes a small set of columns; the exact simplex
    solves the LP restricted to them and exact pricing over all columns
    either certifies the answer for the full LP or adds the violated
    columns.  Columns with bounds other than ``[0, inf)`` are always kept.
    The returned outcome refers to the full LP and is exact.
    """
    if not _is_sparse(lp.A):
        return solve(lp, max_columns=max_columns, pivot_rule=pivot_rule)
    n = lp.num_vars
    if len(standard_form_columns(lp)) > max_columns:
        raise GuardLimitError(f"LP has more than {max_columns} columns")
    m = lp.num_rows
    plain = _plain_columns(lp)
    keep = set(np.flatnonzero(~plain).tolist())
    keep.update(_float_support(lp))
    full = _IntegerColumns(lp.A)
    Lc = lcm_of_denominators(lp.c)
    c_int = np.array([int(v * Lc) for v in lp.c], dtype=object)
    batch = batch or max(2 * m, 50)
    iterations = 0
    while True:
        cols = sorted(keep)
        sub = LinearProgram([lp.c[j] for j in cols], lp.A[:, cols], lp.b,
                            [lp.lower[j] for j in cols], [lp.upper[j] for j in cols])
        out = solve(sub, max_columns=max_columns, pivot_rule=pivot_rule)
        iterations += out.iterations
        if out.status == "unbounded":
            ray = [Fraction(0)] * n
            for k, j in enumerate(cols):
                ray[j] = out.ray[k]
            return LpOutcome("unbounded", ray=tuple(ray), iterations=iterations)
        y = (out.duals if out.status == "optimal" else out.certificate)[:m]
        L = lcm_of_denominators(y)
        Y = np.array([int(v * L) for v in y], dtype=object)
        yA = full.rdot(Y).astype(object)
        if out.status == "optimal":
            score = yA * Lc - c_int * L   # positive means negative reduced cost
        else:
            score = yA                    # positive breaks the Farkas certificate
        score[cols] = 0
        score = np.where(plain, score, 0)
        bad = np.flatnonzero(score > 0)
        if bad.size == 0:
            break
        order = sorted(bad.tolist(), key=lambda j: (-score[j], j))
        keep.update(order[:batch])
    if out.status == "infeasible":
        return LpOutcome("infeasible", certificate=out.certificate, iterations=iterations)
    solution = [Fraction(0)] * n
    for k, j in enumerate(cols):
        solution[j] = out.solution[k]
    return LpOutcome("optimal", value=out.value, solution=tuple(solution), duals=out.duals,
                     iterations=iterations)


def standard_form_columns(lp: LinearProgram) -> list:
    cols = []
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is None and hi is None:
            cols += [j, j]
        else:
            cols.append(j)
            if lo is not None and hi is not None:
                cols.append(None)
    return cols


# ---------------------------------------------------------------------------
# independent checkers


def check_solution(lp: LinearProgram, z: Sequence) -> bool:
    """True iff ``z`` satisfies every constraint and bound of ``lp`` exactly."""
    z = [to_rational(v) for v in z]
    if len(z) != lp.num_vars:
        return False
    for j, v in enumerate(z):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None and v < lo:
            return False
        if hi is not None and v > hi:
            return False
    if _is_sparse(lp.A):
        A = lp.A.tocsr()
        for i in range(lp.num_rows):
            start, stop = A.indptr[i], A.indptr[i + 1]
            total = sum((int(a) * z[int(j)] for j, a in
                         zip(A.indices[start:stop], A.data[start:stop])), Fraction(0))
            if total != lp.b[i]:
                return False
        return True
    for row, bi in zip(lp.A, lp.b):
        if sum((a * v for a, v in zip(row, z) if a), Fraction(0)) != bi:
            return False
    return True


def check_farkas(lp: LinearProgram, y: Sequence) -> bool:
    """True iff ``y`` proves infeasibility of ``lp`` in standard form.

    Checks ``y . A_j <= 0`` for every standard-form column and ``y . b > 0``.
    """
    sf = standard_form(lp)
    y = [to_rational(v) for v in y]
    if len(y) != len(sf.b):
        return False
    if sum((a * v for a, v in zip(y, sf.b)), Fraction(0)) <= 0:
        return False
    if _is_sparse(sf.A):
        L = lcm_of_denominators(y)
        Y = np.array([int(v * L) for v in y], dtype=object)
        A = sf.A
        if A.nnz == 0:
            return True
        prod = A.data.astype(object) * Y[A.indices]
        starts = A.indptr[:-1]
        nonempty = A.indptr[1:] > starts
        sums = np.add.reduceat(prod, starts[nonempty]) if nonempty.any() else np.array([])
        return all(int(s) <= 0 for s in sums)
    m, n = sf.shape
    for j in range(n):
        if sum((sf.A[i][j] * y[i] for i in range(m) if sf.A[i][j]), Fraction(0)) > 0:
            return False
    return True


# ---------------------------------------------------------------------------
# exact ranks


def rank(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by exact Gaussian elimination."""
    work = [[to_rational(v) for v in row] for row in rows]
    if not work:
        return 0
    ncols = len(work[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        prow = work[r]
        inv = 1 / prow[col]
        for i in range(r + 1, len(work)):
            f = work[i][col]
            if f:
                f *= inv
                row = work[i]
                for k in range(col, ncols):
                    if prow[k]:
                        row[k] -= f * prow[k]
        r += 1
        if r == len(work):
            break
    return r


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of ``points``."""
    pts = [[to_rational(v) for v in p] for p in points]
    if not pts:
        raise ValueError("affine_rank needs at least one point")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise ValueError("points must share one dimension")
    base = pts[0]
    return rank([[a - b for a, b in zip(p, base)] for p in pts[1:]])
