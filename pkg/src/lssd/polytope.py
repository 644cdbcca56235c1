"""Exact vertex enumeration and the three-player no-gap analysis.

Vertices are found with the double description method on the homogenized
cone ``{(x, t): d t - A x >= 0, t >= 0}``.  The cone is parametrized by a
basis of the equality nullspace, and every ray is carried as its integer
slack vector.  Adjacency is decided combinatorially from zero sets stored
as 64-bit masks, which avoids rank computations entirely.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import itertools
import json
import math

import numpy as np

from .classical import DeterministicStrategy, reduced_deterministic_strategies
from .errors import ShapeError, UnboundedPolytopeError
from .game import GameTable
from .lp import EQ, GE, OPTIMAL, LinearProgram, solve_max
from .nosignal import Behavior, behavior_from_strategy, ns_matrix
from .rational import RATIONAL, format_rational, independent_rows, integer_row, inverse, nullspace, parse_rational

INT_LIMIT = 2 ** 62


@dataclass
class HRep:
    """``{x : A_i x <= d_i}`` with rows flagged in ``equality`` read as ``A_i x = d_i``."""

    A: list
    d: list
    equality: list = None

    def __post_init__(self):
        self.A = [[parse_rational(v) for v in row] for row in self.A]
        self.d = [parse_rational(v) for v in self.d]
        if self.equality is None:
            self.equality = [False] * len(self.A)
        self.equality = [bool(e) for e in self.equality]
        if len(self.d) != len(self.A) or len(self.equality) != len(self.A):
            raise ShapeError("A, d and equality flags disagree in length")
        widths = {len(row) for row in self.A}
        if len(widths) > 1:
            raise ShapeError("rows of A have different lengths")

    @property
    def dim(self):
        return len(self.A[0]) if self.A else 0

    def contains(self, x):
        for row, d, eq in zip(self.A, self.d, self.equality):
            lhs = sum((a * v for a, v in zip(row, x) if a), Fraction(0))
            if (eq and lhs != d) or (not eq and lhs > d):
                return False
        return True


@dataclass
class VRep:
    """Vertices held as integer numerators over a per-vertex denominator."""

    numerators: np.ndarray
    denominators: np.ndarray
    _cache: list = field(default=None, repr=False)

    def __len__(self):
        return len(self.denominators)

    @property
    def dim(self):
        return self.numerators.shape[1]

    def vertex(self, i):
        den = int(self.denominators[i])
        return tuple(Fraction(int(v), den) for v in self.numerators[i])

    @property
    def vertices(self):
        if self._cache is None:
            self._cache = [self.vertex(i) for i in range(len(self))]
        return self._cache

    def subset(self, mask):
        return VRep(self.numerators[mask], self.denominators[mask])

    def to_json(self):
        return [[format_rational(v) for v in vert] for vert in self.vertices]


def _canonical(num, den):
    """Reduce every row to lowest terms and sort rows by exact value."""
    num = np.asarray(num)
    den = np.asarray(den)
    g = np.gcd.reduce(np.concatenate([num, den[:, None]], axis=1), axis=1)
    g[g == 0] = 1
    num = num // g[:, None]
    den = den // g
    if len(den) == 0:
        return num, den
    lcm = int(np.lcm.reduce(den))
    scaled = num * (lcm // den)[:, None]
    keys = [scaled[:, j] for j in range(scaled.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys)
    num, den, scaled = num[order], den[order], scaled[order]
    # drop exact duplicates
    if len(den) > 1:
        dup = np.all(scaled[1:] == scaled[:-1], axis=1)
        keep = np.concatenate([[True], ~dup])
        num, den = num[keep], den[keep]
    return num, den


def _popcount(words):
    return np.bitwise_count(words).sum(axis=-1)


def _zero_masks(S, done_idx):
    """Bit masks of processed constraints at which each ray is tight."""
    n_words = max(1, math.ceil(len(done_idx) / 64))
    out = np.zeros((S.shape[0], n_words), dtype=np.uint64)
    for pos, k in enumerate(done_idx):
        bit = np.uint64(1) << np.uint64(pos % 64)
        out[:, pos // 64] |= np.where(S[:, k] == 0, bit, np.uint64(0))
    return out


def _double_description(G, log=None):
    """Extreme rays of the pointed cone ``{y : G y >= 0}`` as integer slack vectors.

    ``G`` is an integer matrix of full column rank.  Returns ``(S, K, GK_inv)``
    with ``S[r] = G y_r`` for every extreme ray ``y_r``.
    """
    n, d = G.shape
    K = independent_rows(G.tolist())
    if len(K) < d:
        raise UnboundedPolytopeError("constraint system does not define a pointed cone")
    GK_inv = inverse([[int(v) for v in G[r]] for r in K])
    # initial simplicial cone: columns of G GK^-1
    S = []
    for i in range(d):
        col = [sum((int(G[r, j]) * GK_inv[j][i] for j in range(d) if G[r, j]), Fraction(0)) for r in range(n)]
        S.append(integer_row(col))
    S = np.array(S, dtype=object)
    if np.abs(S).max() < INT_LIMIT // 4:
        S = S.astype(np.int64)
    done = list(K)
    for k in (k for k in range(n) if k not in set(K)):
        col = S[:, k]
        pos = np.flatnonzero(col > 0)
        neg = np.flatnonzero(col < 0)
        zer = np.flatnonzero(col == 0)
        pairs_i, pairs_j = [], []
        if len(pos) and len(neg):
            M = _zero_masks(S, done)
            Mn = M[neg]
            for i in pos:
                inter = M[i] & Mn
                cand = np.flatnonzero(_popcount(inter) >= d - 2)
                if len(cand) == 0:
                    continue
                I = inter[cand]
                # adjacent iff exactly the two endpoints contain the common zero set
                cont = np.all((M[None, :, :] & I[:, None, :]) == I[:, None, :], axis=2).sum(axis=1)
                ok = cand[cont == 2]
                pairs_i.extend([i] * len(ok))
                pairs_j.extend(neg[ok].tolist())
        parts = [S[pos], S[zer]]
        if pairs_i:
            ii = np.array(pairs_i)
            jj = np.array(pairs_j)
            if S.dtype != object and int(np.abs(S).max()) ** 2 * 2 >= INT_LIMIT:
                S = S.astype(object)
                col = S[:, k]
                parts = [S[pos], S[zer]]
            new = S[jj] * col[ii][:, None] - S[ii] * col[jj][:, None]
            g = np.gcd.reduce(new, axis=1)
            new = new // g[:, None]
            parts.append(new)
        S = np.concatenate(parts, axis=0)
        done.append(k)
        if log:
            log(f"constraint {k}: +{len(pos)} -{len(neg)} 0:{len(zer)} -> {len(S)} rays")
    return S, K, GK_inv


def enumerate_vertices(h, log=None):
    """All vertices of the bounded polytope ``h``, exact and duplicate-free.

    Raises :class:`UnboundedPolytopeError` when a recession direction is
    found.  Every vertex is substituted back into ``h`` before returning.
    """
    dim = h.dim
    # homogenized variables (x, t); equalities A x - d t = 0
    eq_rows = [list(row) + [-d] for row, d, e in zip(h.A, h.d, h.equality) if e]
    N = nullspace(eq_rows, dim + 1) if eq_rows else [
        [Fraction(int(i == j)) for i in range(dim + 1)] for j in range(dim + 1)
    ]
    if not N:
        return VRep(np.zeros((0, dim), dtype=np.int64), np.zeros(0, dtype=np.int64))
    Nmat = [[N[j][i] for j in range(len(N))] for i in range(dim + 1)]  # (dim+1) x k
    k = len(N)
    rows = []
    for row, d, e in zip(h.A, h.d, h.equality):
        if not e:
            full = [-v for v in row] + [d]
            rows.append([sum((full[i] * Nmat[i][j] for i in range(dim + 1) if full[i]), Fraction(0)) for j in range(k)])
    rows.append(list(Nmat[dim]))  # t >= 0
    G = np.array([integer_row(r) for r in rows], dtype=object)
    zero = [i for i in range(len(G)) if not any(G[i])]
    if zero:
        G = np.delete(G, zero, axis=0)
    G = G.astype(np.int64)
    S, K, GK_inv = _double_description(G, log)
    # (x, t) = N GK^-1 S_K, scaled to a common integer matrix
    T = [[sum((Nmat[i][a] * GK_inv[a][b] for a in range(k)), Fraction(0)) for b in range(k)] for i in range(dim + 1)]
    den = math.lcm(*[v.denominator for r in T for v in r])
    Ti = np.array([[int(v * den) for v in r] for r in T], dtype=object)
    SK = S[:, K].astype(object)
    XT = SK.dot(Ti.T)
    t = XT[:, dim]
    if (t <= 0).any():
        raise UnboundedPolytopeError("polytope has a recession direction")
    num, dens = XT[:, :dim], t
    try:
        num = num.astype(np.int64)
        dens = dens.astype(np.int64)
        if np.abs(num).max(initial=0) >= INT_LIMIT or dens.max(initial=0) >= INT_LIMIT:
            raise OverflowError
    except OverflowError:
        pass
    num, dens = _canonical(num, dens)
    v = VRep(num, dens)
    _verify(h, v)
    return v


def _verify(h, v):
    """Exact substitution of every vertex (integer arithmetic on common scales)."""
    if len(v) == 0:
        return
    A_int, d_int = [], []
    for row, d in zip(h.A, h.d):
        ints = integer_row(list(row) + [d])
        A_int.append(ints[:-1])
        d_int.append(ints[-1])
    A_int = np.array(A_int, dtype=object)
    d_int = np.array(d_int, dtype=object)
    lhs = A_int.dot(v.numerators.T.astype(object))  # rows x vertices
    rhs = d_int[:, None] * v.denominators.astype(object)[None, :]
    eq = np.array(h.equality)
    # integer_row keeps signs, so comparisons survive the row scaling
    if not np.all(lhs[eq] == rhs[eq]) or not np.all(lhs[~eq] <= rhs[~eq]):
        raise AssertionError("an enumerated vertex violates the H-representation")


def ns_polytope_hrep(output_sizes, input_sizes):
    """No-signalling polytope: nonnegativity, normalization, singleton NS rows."""
    A, b, _ = ns_matrix(output_sizes, input_sizes)
    n = A.shape[1]
    rows = A.tolist() + (-np.eye(n, dtype=np.int64)).tolist()
    rhs = b.tolist() + [0] * n
    eq = [True] * len(b) + [False] * n
    return HRep(rows, rhs, eq)


def vertices_as_behaviors(v, num_players, output_sizes, input_sizes):
    shape = tuple(output_sizes) + tuple(input_sizes)
    return [Behavior(np.array(vert, dtype=object).reshape(shape), num_players, RATIONAL, check_ns=False)
            for vert in v.vertices]


def is_deterministic_mask(v):
    return np.all((v.numerators == 0) | (v.numerators == v.denominators[:, None]), axis=1)


def diagonal_columns(num_players, output_size, input_sizes):
    shape = (output_size,) * num_players + tuple(input_sizes)
    idx = np.arange(math.prod(shape)).reshape(shape)
    return idx[(np.arange(output_size),) * num_players].ravel()


def filter_vertices(v, x_size, num_players, input_sizes, drop_deterministic=False):
    """Keep vertices with some diagonal ``Q(x, .., x | a..) > 1/|X|``.

    Vertices failing this cannot beat the best classical strategy.  With
    ``drop_deterministic`` the deterministic vertices are removed as well.
    """
    cols = diagonal_columns(num_players, x_size, input_sizes)
    diag = v.numerators[:, cols]
    keep = np.any(diag * x_size > v.denominators[:, None], axis=1)
    if drop_deterministic:
        keep &= ~is_deterministic_mask(v)
    return v.subset(keep)


# -- gap analysis -------------------------------------------------------------------

@dataclass
class GapReport:
    gap: Fraction
    worst_game: GameTable
    worst_vertex: int
    per_vertex: list
    num_vertices: int
    num_filtered: int
    num_strategies: int


def _strategy_rows(strategies, x_size, input_sizes):
    """Coefficient vectors ``P -> win probability`` for each deterministic strategy."""
    shape = (x_size,) + tuple(input_sizes)
    out = []
    for s in strategies:
        row = np.zeros(shape, dtype=np.int64)
        for a in itertools.product(*(range(n) for n in input_sizes)):
            outs = {s.tables[i][a[i]] for i in range(len(a))}
            if len(outs) == 1:
                row[(outs.pop(),) + a] = 1
        out.append(row.ravel().tolist())
    return out


def _gap_lp(args):
    vert_diag, strat_rows, nprob = args
    # variables: P (nprob entries), c_d, c_ns
    n = nprob + 2
    objective = [0] * nprob + [-1, 1]
    matrix = [[1] * nprob + [0, 0]]
    rhs = [1]
    senses = [EQ]
    for r in strat_rows:
        matrix.append([-v for v in r] + [1, 0])
        rhs.append(0)
        senses.append(GE)
    matrix.append([-v for v in vert_diag] + [0, 1])
    rhs.append(0)
    senses.append(EQ)
    lower = [0] * nprob + [None, None]
    lp = LinearProgram(objective, matrix, rhs, senses, lower)
    sol = solve_max(lp)
    if sol.status != OPTIMAL:
        raise ArithmeticError(f"gap LP ended {sol.status}")
    assert len(sol.point) == n
    return sol.optimal_value, sol.point[:nprob]


def max_gap_binary(num_players=3, vertices=None, jobs=1, log=None):
    """Largest ``omega_ns - omega_c`` over all games with binary alphabets.

    For each no-signalling vertex that can beat the classical value, solve
    an LP over game tables that pins ``c_ns`` to that vertex's winning
    probability, keeps ``c_d`` above every relevant deterministic strategy,
    and maximizes ``c_ns - c_d``.
    """
    x_size = 2
    input_sizes = (2,) * num_players
    if vertices is None:
        vertices = enumerate_vertices(ns_polytope_hrep((x_size,) * num_players, input_sizes), log)
    filtered = filter_vertices(vertices, x_size, num_players, input_sizes)
    if num_players == 3:
        strategies = reduced_deterministic_strategies(x_size)
    else:
        strategies = [
            DeterministicStrategy(t)
            for t in itertools.product(itertools.product(range(x_size), repeat=2), repeat=num_players)
        ]
    strat_rows = _strategy_rows(strategies, x_size, input_sizes)
    cols = diagonal_columns(num_players, x_size, input_sizes)
    nprob = x_size * 2 ** num_players
    tasks = []
    for vert in filtered.vertices:
        tasks.append(([vert[c] for c in cols], strat_rows, nprob))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_gap_lp, tasks, chunksize=8))
    else:
        results = [_gap_lp(t) for t in tasks]
    per_vertex = [r[0] for r in results]
    worst = max(range(len(results)), key=lambda i: (per_vertex[i], -i))
    game = GameTable(np.array(results[worst][1], dtype=object).reshape((x_size,) + input_sizes))
    return GapReport(per_vertex[worst], game, worst, per_vertex, len(vertices), len(filtered), len(strategies))


def max_gap_3party_binary(vertices=None, jobs=1, log=None):
    """``(gap, worst_game)`` for three players with binary alphabets."""
    rep = max_gap_binary(3, vertices, jobs, log)
    return rep.gap, rep.worst_game


def dump_vertices(v, path):
    with open(path, "w") as fh:
        json.dump(v.to_json(), fh, separators=(",", ":"))
        fh.write("\n")


def deterministic_vertex_count(v):
    return int(is_deterministic_mask(v).sum())


def ns_vertex_behaviors_check(v, num_players, x_size, input_sizes):
    """True when every vertex passes the full (all-subset) no-signalling test."""
    return all(b.is_no_signalling() for b in vertices_as_behaviors(v, num_players, (x_size,) * num_players, input_sizes))


def strategy_vertex(s, x_size):
    """Flat tuple of the 0/1 behavior of ``s``; handy for membership tests."""
    return tuple(Fraction(int(v)) for v in behavior_from_strategy(s, x_size).flat())
