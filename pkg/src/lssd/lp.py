"""Exact linear programming: two-phase primal simplex on a dense rational tableau.

Pivoting follows Bland's rule (lowest eligible index enters, ties in the
ratio test go to the lowest basic index), which rules out cycling.  Every
optimal point is re-substituted into the original constraints with exact
arithmetic before it is returned.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .rational import from_mpq, independent_rows, parse_rational, to_mpq

LE, EQ, GE = "<=", "==", ">="
SENSES = (LE, EQ, GE)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LinearProgram:
    """``max c.x`` subject to ``A x (senses) d`` and ``x >= lower``.

    ``lower[j] = None`` marks a free variable.  Entries are anything
    :func:`parse_rational` accepts.
    """

    objective: list
    matrix: list
    rhs: list
    senses: list = None
    lower: list = None

    def __post_init__(self):
        n = len(self.objective)
        self.objective = [parse_rational(c) for c in self.objective]
        self.matrix = [[parse_rational(v) for v in row] for row in self.matrix]
        self.rhs = [parse_rational(v) for v in self.rhs]
        if self.senses is None:
            self.senses = [LE] * len(self.matrix)
        if self.lower is None:
            self.lower = [Fraction(0)] * n
        else:
            self.lower = [None if v is None else parse_rational(v) for v in self.lower]
        if len(self.rhs) != len(self.matrix) or len(self.senses) != len(self.matrix):
            raise ValueError("matrix, rhs and senses disagree in length")
        if any(len(row) != n for row in self.matrix):
            raise ValueError("constraint row length differs from objective length")
        if len(self.lower) != n:
            raise ValueError("lower bounds length differs from objective length")
        bad = [s for s in self.senses if s not in SENSES]
        if bad:
            raise ValueError(f"unknown constraint senses {bad}")

    @property
    def num_vars(self):
        return len(self.objective)

    def is_feasible(self, point):
        """Exact check of every constraint and bound at ``point``."""
        for j, lb in enumerate(self.lower):
            if lb is not None and point[j] < lb:
                return False
        for row, d, s in zip(self.matrix, self.rhs, self.senses):
            lhs = sum((a * x for a, x in zip(row, point) if a), Fraction(0))
            if (s == LE and lhs > d) or (s == GE and lhs < d) or (s == EQ and lhs != d):
                return False
        return True

    def value(self, point):
        return sum((c * x for c, x in zip(self.objective, point) if c), Fraction(0))

    def dump(self):
        """Plain-text listing, one constraint per line."""
        lines = ["max " + " ".join(str(c) for c in self.objective)]
        for row, s, d in zip(self.matrix, self.senses, self.rhs):
            lines.append(" ".join(str(v) for v in row) + f" {s} {d}")
        lines.append("lower " + " ".join("free" if v is None else str(v) for v in self.lower))
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: str
    optimal_value: Fraction = None
    point: list = None
    pivots: int = 0
    basis: list = field(default_factory=list)


class _Tableau:
    """Rows ``B^-1 [A | b]`` plus a reduced-cost row, stored as mpq lists."""

    def __init__(self, rows, rhs, basis):
        self.rows = [r + [b] for r, b in zip(rows, rhs)]
        self.basis = basis
        self.pivots = 0

    def set_objective(self, cost):
        # reduced costs: c_j - c_B B^-1 A_j, value in the last slot (negated)
        obj = list(cost) + [gmpy2.mpq(0)]
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb != 0:
                row = self.rows[i]
                for j, v in enumerate(row):
                    if v != 0:
                        obj[j] -= cb * v
        self.obj = obj

    def pivot(self, r, c):
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            prow = [v / piv for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v != 0]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[c]
                if f != 0:
                    for j in nz:
                        row[j] -= f * prow[j]
        f = self.obj[c]
        if f != 0:
            for j in nz:
                self.obj[j] -= f * prow[j]
        self.basis[r] = c
        self.pivots += 1

    def run(self, allowed):
        """Bland-rule iterations maximizing the current objective row."""
        while True:
            enter = next((j for j in allowed if self.obj[j] > 0), None)
            if enter is None:
                return OPTIMAL
            best, leave = None, None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return UNBOUNDED
            self.pivot(leave, enter)


def _standard_form(lp):
    """Map ``lp`` to ``max c'.y, A'y = b' >= 0, y >= 0``.

    Returns the standard-form data plus a function recovering the
    original point from ``y``.
    """
    cols = []  # (original var, sign, shift)
    for j, lb in enumerate(lp.lower):
        if lb is None:
            cols.append((j, 1))
            cols.append((j, -1))
        else:
            cols.append((j, 1))
    shift = [lb if lb is not None else Fraction(0) for lb in lp.lower]
    m = len(lp.matrix)
    n_struct = len(cols)
    n_slack = sum(1 for s in lp.senses if s != EQ)
    rows, rhs, slack_of_row = [], [], []
    k = 0
    for i, (row, d, s) in enumerate(zip(lp.matrix, lp.rhs, lp.senses)):
        new = [to_mpq(row[j] * sign) for j, sign in cols] + [gmpy2.mpq(0)] * n_slack
        b = d - sum((a * sh for a, sh in zip(row, shift) if a and sh), Fraction(0))
        slack = None
        if s != EQ:
            slack = n_struct + k
            new[slack] = gmpy2.mpq(1 if s == LE else -1)
            k += 1
        b = to_mpq(b)
        if b < 0:
            new = [-v for v in new]
            b = -b
        rows.append(new)
        rhs.append(b)
        slack_of_row.append(slack)
    cost = [to_mpq(lp.objective[j] * sign) for j, sign in cols] + [gmpy2.mpq(0)] * n_slack

    def recover(y):
        x = list(shift)
        for (j, sign), v in zip(cols, y):
            if v:
                x[j] += from_mpq(v) * sign
        return x

    return rows, rhs, cost, slack_of_row, recover


def solve_max(lp, drop_redundant=False):
    """Exact optimum of ``lp`` (status, value, basic optimal point).

    Infeasible and unbounded programs are reported through ``status``.
    With ``drop_redundant`` linearly dependent equality rows are removed by
    exact elimination before the simplex starts.
    """
    if not lp.matrix:
        raise ValueError("linear program has no constraints")
    if drop_redundant:
        lp = remove_redundant_equalities(lp)
    rows, rhs, cost, slack_of_row, recover = _standard_form(lp)
    m, n = len(rows), len(cost)
    basis = []
    n_art = 0
    for i in range(m):
        sc = slack_of_row[i]
        if sc is not None and rows[i][sc] == 1:
            basis.append(sc)
        else:
            basis.append(None)
            n_art += 1
    # artificial columns after the real ones
    art_cols = []
    total = n + n_art
    for row in rows:
        row.extend([gmpy2.mpq(0)] * n_art)
    a = n
    for i in range(m):
        if basis[i] is None:
            rows[i][a] = gmpy2.mpq(1)
            basis[i] = a
            art_cols.append(a)
            a += 1
    tab = _Tableau(rows, rhs, basis)
    if n_art:
        phase1 = [gmpy2.mpq(0)] * n + [gmpy2.mpq(-1)] * n_art
        tab.set_objective(phase1)
        tab.run(range(total))
        if tab.obj[-1] != 0:
            # objective value is -obj[-1]; nonzero means artificials stay positive
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        # drive artificials out of the basis, dropping redundant rows
        art = set(art_cols)
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] in art:
                c = next((j for j in range(n) if tab.rows[i][j] != 0), None)
                if c is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, c)
            i += 1
        for row in tab.rows:
            del row[n:total]
    tab.set_objective(cost)
    status = tab.run(range(n))
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)
    y = [gmpy2.mpq(0)] * n
    for i, bv in enumerate(tab.basis):
        y[bv] = tab.rows[i][-1]
    point = recover(y)
    if not lp.is_feasible(point):
        raise AssertionError("simplex returned an infeasible point")
    value = lp.value(point)
    if to_mpq(value) != -tab.obj[-1] + sum(
        (to_mpq(c) * to_mpq(lb) for c, lb in zip(lp.objective, lp.lower) if lb), gmpy2.mpq(0)
    ):
        raise AssertionError("objective row disagrees with re-evaluated value")
    return LpSolution(OPTIMAL, value, point, tab.pivots, list(tab.basis))


def remove_redundant_equalities(lp):
    """Drop equality rows that are linear combinations of earlier ones.

    Consistency of the dropped rows is not checked here; an inconsistent
    system is caught by the post-solve feasibility check.
    """
    eq = [i for i, s in enumerate(lp.senses) if s == EQ]
    if len(eq) < 2:
        return lp
    keep_eq = {eq[k] for k in independent_rows([lp.matrix[i] + [lp.rhs[i]] for i in eq])}
    keep = [i for i in range(len(lp.matrix)) if lp.senses[i] != EQ or i in keep_eq]
    return LinearProgram(
        lp.objective,
        [lp.matrix[i] for i in keep],
        [lp.rhs[i] for i in keep],
        [lp.senses[i] for i in keep],
        lp.lower,
    )


def dual(lp):
    """The LP dual, written again as a maximization.

    Only bounds ``0`` and free are supported.  For an optimal primal,
    ``solve_max(dual(lp)).optimal_value == -solve_max(lp).optimal_value``.
    """
    if any(lb not in (None, 0) for lb in lp.lower):
        raise ValueError("dual() needs lower bounds of 0 or free")
    m, n = len(lp.matrix), lp.num_vars
    # dual variable y_i: >=0 for <=, free for ==, <=0 for >= (stored as -y >= 0)
    sign = [1 if s != GE else -1 for s in lp.senses]
    lower = [None if s == EQ else Fraction(0) for s in lp.senses]
    objective = [-lp.rhs[i] * sign[i] for i in range(m)]
    matrix, rhs, senses = [], [], []
    for j in range(n):
        matrix.append([lp.matrix[i][j] * sign[i] for i in range(m)])
        rhs.append(lp.objective[j])
        senses.append(GE if lp.lower[j] is not None else EQ)
    return LinearProgram(objective, matrix, rhs, senses, lower)
