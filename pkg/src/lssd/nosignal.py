"""No-signalling behaviors and the no-signalling value of LSSD games.

A behavior ``Q(x_1..x_m | a_1..a_m)`` is stored with shape
``(|X|,)*m + input_sizes``: outputs are the slow axes, inputs the fast ones.
It suffices to forbid signalling from every single player to the rest; the
resulting equalities imply the condition for every subset of players.
"""
from dataclasses import dataclass
from fractions import Fraction
import itertools
import json
import math

import numpy as np

from .errors import BudgetError, DomainError, GameFormatError, ShapeError
from .lp import EQ, OPTIMAL, LinearProgram, solve_max
from .rational import FLOAT, RATIONAL, SCALARS, as_array, format_rational, parse_rational
from .symmetry import game_symmetries, orbits

BEHAVIOR_TOL = 1e-9
DEFAULT_LP_BUDGET = 1 << 20


def _zero(scalar):
    return Fraction(0) if scalar == RATIONAL else 0.0


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional table ``Q(outputs | inputs)`` (validated on construction)."""

    table: np.ndarray
    num_players: int
    scalar: str = RATIONAL
    check_ns: bool = True

    def __post_init__(self):
        if self.scalar not in SCALARS:
            raise ValueError(f"unknown scalar backend {self.scalar!r}")
        arr = as_array(self.table, self.scalar)
        if arr.ndim != 2 * self.num_players:
            raise ShapeError(f"behavior needs {2 * self.num_players} axes, got {arr.ndim}")
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)
        self.validate(no_signalling=self.check_ns)

    @property
    def output_sizes(self):
        return self.table.shape[: self.num_players]

    @property
    def input_sizes(self):
        return self.table.shape[self.num_players:]

    def _close(self, a, b):
        if self.scalar == RATIONAL:
            return bool((a == b).all())
        return np.allclose(np.asarray(a, float), np.asarray(b, float), atol=BEHAVIOR_TOL, rtol=0)

    def validate(self, no_signalling=True):
        m = self.num_players
        t = self.table
        if self.scalar == RATIONAL:
            neg = (t < 0).any()
        else:
            neg = (t < -BEHAVIOR_TOL).any()
        if neg:
            raise DomainError("behavior has a negative entry")
        sums = t.sum(axis=tuple(range(m)))
        if not self._close(sums, np.full(sums.shape, 1 if self.scalar == RATIONAL else 1.0, dtype=sums.dtype)):
            raise DomainError("behavior rows do not sum to 1 for every input tuple")
        if no_signalling:
            bad = self.signalling_parties()
            if bad:
                raise DomainError(f"behavior signals from player {bad[0]}")

    def _signals_from(self, subset):
        m = self.num_players
        marg = self.table.sum(axis=tuple(subset))
        # remaining axes: outputs not in subset, then all inputs
        kept_outputs = m - len(subset)
        base = marg
        for j in subset:
            ax = kept_outputs + j
            ref = np.take(base, [0], axis=ax)
            if not self._close(base, np.broadcast_to(ref, base.shape)):
                return True
        return False

    def signalling_parties(self):
        """Players that can signal to the others (singleton condition)."""
        return [j for j in range(self.num_players) if self._signals_from((j,))]

    def is_no_signalling(self):
        """Full condition: no proper subset of players signals to its complement."""
        m = self.num_players
        for r in range(1, m):
            for subset in itertools.combinations(range(m), r):
                if self._signals_from(subset):
                    return False
        return True

    def diagonal(self):
        """``Q(x, .., x | a_1..a_m)`` as an array of shape ``(|X|,) + input_sizes``."""
        k = self.output_sizes[0]
        idx = (np.arange(k),) * self.num_players
        return self.table[idx]

    def flat(self):
        return self.table.ravel()

    def __eq__(self, other):
        return (
            isinstance(other, Behavior)
            and self.table.shape == other.table.shape
            and self.scalar == other.scalar
            and bool((self.table == other.table).all())
        )

    def __repr__(self):
        return (f"Behavior(players={self.num_players}, outputs={self.output_sizes}, "
                f"inputs={self.input_sizes}, scalar={self.scalar!r})")


def behavior_from_strategy(s, x_size):
    """Embed a deterministic strategy as a 0/1 behavior."""
    m = s.num_players
    sizes = tuple(len(t) for t in s.tables)
    table = np.zeros((x_size,) * m + sizes, dtype=np.int64)
    for a in itertools.product(*(range(n) for n in sizes)):
        outs = tuple(s.tables[i][a[i]] for i in range(m))
        table[outs + a] = 1
    return Behavior(table, m)


def eval_behavior(g, q):
    """Winning probability ``sum P(x, a..) Q(x, .., x | a..)``."""
    if q.num_players != g.num_players or tuple(q.input_sizes) != g.input_sizes:
        raise ShapeError("behavior and game disagree on players or input alphabets")
    if any(s != g.x_size for s in q.output_sizes):
        raise ShapeError("behavior output alphabets differ from the referee alphabet")
    prod = g.probs * q.diagonal()
    if g.scalar == RATIONAL and q.scalar == RATIONAL:
        return sum(prod.ravel(), Fraction(0))
    return float(np.sum(prod.astype(float)))


# -- the linear program ---------------------------------------------------------

def ns_matrix(output_sizes, input_sizes):
    """Equality system ``A q = b`` of normalization and singleton no-signalling rows.

    Returns ``(A, b, counts)`` with ``A`` an int8 array.  Normalization rows
    come first (one per input tuple), then for each player ``j`` and every
    fixing of the other outputs and inputs, one row per input ``a_j >= 1``
    equating its marginal with that of ``a_j = 0``.
    """
    m = len(input_sizes)
    if m < 2 or len(output_sizes) != m:
        raise ShapeError("need at least two players with one output alphabet each")
    shape = tuple(output_sizes) + tuple(input_sizes)
    nvars = math.prod(shape)
    idx = np.arange(nvars).reshape(shape)
    n_out = math.prod(output_sizes)
    n_in = math.prod(input_sizes)
    norm_cols = idx.reshape(n_out, n_in)
    rows = []
    for c in range(n_in):
        r = np.zeros(nvars, dtype=np.int8)
        r[norm_cols[:, c]] = 1
        rows.append(r)
    n_norm = len(rows)
    for j in range(m):
        t = np.moveaxis(idx, (j, m + j), (0, 1))
        t = t.reshape(output_sizes[j], input_sizes[j], -1)
        for aj in range(1, input_sizes[j]):
            for rest in range(t.shape[2]):
                r = np.zeros(nvars, dtype=np.int8)
                r[t[:, aj, rest]] = 1
                r[t[:, 0, rest]] = -1
                rows.append(r)
    A = np.array(rows, dtype=np.int8)
    b = np.zeros(len(rows), dtype=np.int64)
    b[:n_norm] = 1
    counts = {"variables": nvars, "normalization": n_norm, "no_signalling": len(rows) - n_norm}
    return A, b, counts


def ns_constraints(output_sizes, input_sizes):
    """The no-signalling feasibility LP (zero objective) and its row counts."""
    A, b, counts = ns_matrix(output_sizes, input_sizes)
    lp = LinearProgram([0] * A.shape[1], A.tolist(), b.tolist(), [EQ] * len(b))
    return lp, counts


def _objective(g):
    """Winning-probability coefficients on the flat behavior table."""
    m = g.num_players
    shape = (g.x_size,) * m + g.input_sizes
    c = np.zeros(math.prod(shape), dtype=object if g.scalar == RATIONAL else np.float64)
    if g.scalar == RATIONAL:
        c[:] = Fraction(0)
    idx = np.arange(c.size).reshape(shape)
    diag = idx[(np.arange(g.x_size),) * m]
    c[diag.ravel()] = g.probs.ravel()
    return c, shape


def _dedupe_rows(A, b):
    """Drop zero rows and exact duplicates (up to sign), keeping first occurrences."""
    keep = []
    seen = set()
    for i in range(A.shape[0]):
        row = A[i]
        nz = np.flatnonzero(row)
        if len(nz) == 0:
            if b[i] != 0:
                raise DomainError("inconsistent symmetry-reduced system")
            continue
        sign = 1 if row[nz[0]] > 0 else -1
        key = (tuple((row * sign).tolist()), b[i] * sign)
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return A[keep], b[keep]


@dataclass
class NsResult:
    value: object
    behavior: Behavior
    method: str
    num_variables: int
    num_constraints: int


def optimal_ns(g, method="exact", symmetrize="auto", budget=DEFAULT_LP_BUDGET, details=False):
    """Optimal no-signalling winning probability and a behavior attaining it.

    ``method="exact"`` runs the rational simplex; ``"float"`` runs HiGHS on
    the full table.  With ``symmetrize`` the exact LP is restricted to
    behaviors constant on orbits of the relabelings fixing ``g``; averaging
    any optimum over the group stays optimal, so the value is unchanged.
    ``"auto"`` symmetrizes when the table has more than 512 entries.
    """
    m = g.num_players
    c, shape = _objective(g)
    nvars = c.size
    if nvars > budget:
        raise BudgetError("no-signalling LP", nvars, budget)
    A, b, counts = ns_matrix((g.x_size,) * m, g.input_sizes)
    if method == "float":
        res = _solve_float(g, c, A, b, shape)
    elif method == "exact":
        if g.scalar != RATIONAL:
            raise DomainError("exact no-signalling LP needs a rational game")
        if symmetrize == "auto":
            symmetrize = nvars > 512
        res = _solve_exact(g, c, A, b, shape, symmetrize)
    else:
        raise ValueError(f"unknown method {method!r}")
    return res if details else (res.value, res.behavior)


def _solve_float(g, c, A, b, shape):
    from scipy.optimize import linprog

    cf = np.asarray(c, dtype=np.float64)
    out = linprog(-cf, A_eq=A.astype(np.float64), b_eq=b.astype(np.float64), bounds=(0, None), method="highs")
    if out.status != 0:
        raise ArithmeticError(f"float no-signalling LP failed: {out.message}")
    q = np.clip(out.x, 0.0, None).reshape(shape)
    beh = Behavior(q, g.num_players, FLOAT)
    return NsResult(float(-out.fun), beh, "float", A.shape[1], A.shape[0])


def _solve_exact(g, c, A, b, shape, symmetrize):
    nvars = A.shape[1]
    if symmetrize:
        syms = game_symmetries(g)
        perms = [s.behavior_index_map(shape) for s in syms]
        lab = orbits(nvars, perms)
    else:
        lab = np.arange(nvars)
    norb = int(lab.max()) + 1
    # columns summed over each orbit
    Ared = np.zeros((A.shape[0], norb), dtype=np.int64)
    np.add.at(Ared.T, lab, A.T.astype(np.int64))
    cred = [Fraction(0)] * norb
    for j, v in enumerate(c):
        if v:
            cred[lab[j]] += v
    Ared, bred = _dedupe_rows(Ared, b)
    lp = LinearProgram(cred, Ared.tolist(), bred.tolist(), [EQ] * len(bred))
    sol = solve_max(lp, drop_redundant=True)
    if sol.status != OPTIMAL:
        raise ArithmeticError(f"no-signalling LP ended {sol.status}")
    y = sol.point
    q = np.empty(nvars, dtype=object)
    for j in range(nvars):
        q[j] = y[lab[j]]
    beh = Behavior(q.reshape(shape), g.num_players, RATIONAL)
    if not beh.is_no_signalling():
        raise AssertionError("optimal behavior violates the no-signalling condition")
    value = eval_behavior(g, beh)
    if value != sol.optimal_value:
        raise AssertionError("re-evaluated behavior disagrees with the LP optimum")
    method = "exact-symmetrized" if symmetrize else "exact"
    return NsResult(value, beh, method, norb, len(bred))


# -- explicit behaviors for repeated binary games --------------------------------

def pairing_behavior(sets_a, sets_b, x_size, scalar=RATIONAL):
    """Two-player behavior from equal-size output sets.

    ``sets_a[a]`` lists Alice's allowed outputs on input ``a`` (likewise
    for Bob).  Outputs in both sets are paired with themselves; the rest
    are matched in ascending order.  Each pair gets weight ``1/L``.
    """
    sizes = {len(s) for s in sets_a} | {len(s) for s in sets_b}
    if len(sizes) != 1:
        raise DomainError("output sets must all have the same size")
    L = sizes.pop()
    w = Fraction(1, L) if scalar == RATIONAL else 1.0 / L
    table = np.empty((x_size, x_size, len(sets_a), len(sets_b)), dtype=object if scalar == RATIONAL else float)
    table[...] = _zero(scalar)
    for a, sa in enumerate(sets_a):
        set_a = set(sa)
        for b, sb in enumerate(sets_b):
            set_b = set(sb)
            for x in sorted(set_a & set_b):
                table[x, x, a, b] = w
            for x, y in zip(sorted(set_a - set_b), sorted(set_b - set_a)):
                table[x, y, a, b] = w
    return Behavior(table, 2, scalar)


def _hamming_ball(center, n, d):
    return [v for v in range(1 << n) if bin(v ^ center).count("1") <= d]


def hamming_ball_behavior(n, d, scalar=RATIONAL):
    """The ``Q_n^d`` behavior for ``n`` copies of a binary two-player game.

    Each player's output set is the radius-``d`` Hamming ball around its
    input; shared outputs are paired with themselves and the rest matched
    in ascending index order.
    """
    if not 0 <= d <= n:
        raise DomainError(f"radius {d} outside [0, {n}]")
    balls = [_hamming_ball(a, n, d) for a in range(1 << n)]
    return pairing_behavior(balls, balls, 1 << n, scalar)


def complement_pairing_behavior(n, scalar=RATIONAL):
    """Weight ``1/(2^n - 1)`` on ``(x, y)`` when ``x = y`` or ``x^b = 1..1 = y^a``,
    provided ``x^a != 1..1 != y^b``."""
    full = (1 << n) - 1
    size = 1 << n
    w = Fraction(1, full) if scalar == RATIONAL else 1.0 / full
    table = np.empty((size,) * 4, dtype=object if scalar == RATIONAL else float)
    table[...] = _zero(scalar)
    for x, y, a, b in itertools.product(range(size), repeat=4):
        if (x == y or (x ^ b == full and y ^ a == full)) and x ^ a != full and y ^ b != full:
            table[x, y, a, b] = w
    return Behavior(table, 2, scalar)


def qnd_win_prob(n, d, alpha):
    """Closed-form winning probability of ``Q_n^d`` on ``n`` copies of the BSC game."""
    if not 0 <= d <= n:
        raise DomainError(f"radius {d} outside [0, {n}]")
    exact = not isinstance(alpha, float)
    a = parse_rational(alpha) if exact else alpha
    if not 0 <= a <= (Fraction(1, 2) if exact else 0.5):
        raise DomainError(f"alpha={alpha} outside [0, 1/2]")
    ball = sum(math.comb(n, i) for i in range(d + 1))
    hit = sum(math.comb(n, i) * a ** i * (1 - a) ** (n - i) for i in range(d + 1))
    if exact:
        return Fraction(hit) ** 2 / ball
    return hit * hit / ball


# -- JSON -------------------------------------------------------------------------

def behavior_to_dict(q):
    probs = [format_rational(v) for v in q.flat()] if q.scalar == RATIONAL else [float(v) for v in q.flat()]
    return {
        "players": q.num_players,
        "output_sizes": list(q.output_sizes),
        "input_sizes": list(q.input_sizes),
        "scalar": q.scalar,
        "probs": probs,
    }


def behavior_from_dict(data):
    try:
        m = data["players"]
        shape = tuple(data["output_sizes"]) + tuple(data["input_sizes"])
        scalar = data.get("scalar", RATIONAL)
        probs = data["probs"]
    except (KeyError, TypeError) as exc:
        raise GameFormatError(str(exc), "missing or malformed field") from None
    if len(probs) != math.prod(shape):
        raise GameFormatError("probs", f"expected {math.prod(shape)} entries")
    return Behavior(as_array(probs, scalar).reshape(shape), m, scalar)


def save_behavior(q, path):
    with open(path, "w") as fh:
        json.dump(behavior_to_dict(q), fh, indent=1)
        fh.write("\n")


