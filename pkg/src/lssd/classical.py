"""Optimal classical (deterministic) strategies for LSSD games.

Shared randomness never helps, so the classical value is a maximum over
tuples of functions ``f_i: A_i -> X``.  Candidate search runs in float64;
every candidate within ``SCREEN_TOL`` of the best is then re-scored
exactly, so values returned for rational games are exact Fractions.
"""
from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

import numpy as np

from .errors import BudgetError, ShapeError
from .game import symmetric_channel
from .rational import RATIONAL

SCREEN_TOL = 1e-9
DEFAULT_ENUM_BUDGET = 10 ** 8
CHUNK = 1 << 15


@dataclass(frozen=True)
class DeterministicStrategy:
    """One output table per player; ``tables[i][a]`` is player ``i``'s guess on input ``a``."""

    tables: tuple

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(tuple(int(v) for v in t) for t in self.tables))

    @classmethod
    def symmetric(cls, table, num_players):
        return cls((tuple(table),) * num_players)

    @property
    def num_players(self):
        return len(self.tables)

    def validate(self, g):
        if self.num_players != g.num_players:
            raise ShapeError(f"strategy has {self.num_players} players, game has {g.num_players}")
        for i, (t, size) in enumerate(zip(self.tables, g.input_sizes)):
            if len(t) != size:
                raise ShapeError(f"player {i} table has {len(t)} entries, expected {size}")
            if any(v < 0 or v >= g.x_size for v in t):
                raise ShapeError(f"player {i} table has guesses outside [0, {g.x_size})")

    def label(self):
        return "|".join("".join(str(v) for v in t) if max(t, default=0) < 10 else ",".join(map(str, t))
                        for t in self.tables)


def _win_mask(shape, tables):
    """Boolean mask over the game table: all players guess the referee value."""
    x_size = shape[0]
    m = len(tables)
    mask = np.ones(shape, dtype=bool)
    for i, t in enumerate(tables):
        hit = np.asarray(t)[None, :] == np.arange(x_size)[:, None]  # (x, a_i)
        view = [x_size] + [1] * m
        view[1 + i] = len(t)
        mask &= hit.reshape(view)
    return mask


def eval_deterministic(g, s):
    """Winning probability ``sum P(x, a...) [f_i(a_i) = x for all i]``."""
    s.validate(g)
    picked = g.probs[_win_mask(g.probs.shape, s.tables)]
    if g.scalar == RATIONAL:
        return sum(picked, Fraction(0))
    return float(picked.sum())


def _index_to_table(idx, size, base):
    # most significant digit first, so index order is lexicographic order
    out = []
    for _ in range(size):
        idx, r = divmod(idx, base)
        out.append(r)
    return tuple(reversed(out))


def _tables_block(start, stop, size, base):
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((len(idx), size), dtype=np.int64)
    for a in range(size - 1, -1, -1):
        digits[:, a] = idx % base
        idx //= base
    return digits


def _best_indices(scores, offset, best, keep):
    top = scores.max()
    if top > best + SCREEN_TOL:
        keep = []
        best = top
    hit = np.nonzero(scores >= best - SCREEN_TOL)[0]
    keep.extend((hit + offset).tolist())
    return best, keep


def optimal_classical_symmetric(g):
    """Best strategy where every player applies the same ``f: A -> X``.

    Requires uniform ``P_X``, conditionally independent inputs and equal
    channels, under which a symmetric optimum exists.  Each candidate is
    scored as ``(1/|X|) sum_x q_f(x)^m`` with ``q_f(x) = P(f^{-1}(x) | x)``.
    Ties go to the lexicographically least table.
    """
    ch = symmetric_channel(g)
    m = g.num_players
    k, na = ch.x_size, ch.a_size
    w = ch.cond_probs.astype(np.float64)
    total = k ** na
    best, keep = -1.0, []
    cols = np.arange(na)
    for start in range(0, total, CHUNK):
        f = _tables_block(start, min(total, start + CHUNK), na, k)
        contrib = w[f, cols]  # P(a | f(a))
        q = np.zeros((len(f), k))
        for x in range(k):
            q[:, x] = np.where(f == x, contrib, 0.0).sum(axis=1)
        scores = (q ** m).sum(axis=1) / k
        best, keep = _best_indices(scores, start, best, keep)
    exact = g.scalar == RATIONAL
    cp = ch.cond_probs
    results = []
    for idx in sorted(set(keep)):
        f = _index_to_table(idx, na, k)
        if exact:
            q = [sum((cp[x, a] for a in range(na) if f[a] == x), Fraction(0)) for x in range(k)]
            val = sum((v ** m for v in q), Fraction(0)) / k
        else:
            q = [sum(float(cp[x, a]) for a in range(na) if f[a] == x) for x in range(k)]
            val = sum(v ** m for v in q) / k
        results.append((val, idx, f))
    top = max(r[0] for r in results)
    if not exact:
        top_float = top
        results = [r for r in results if r[0] >= top_float - 1e-15]
    else:
        results = [r for r in results if r[0] == top]
    val, _, f = min(results, key=lambda r: r[1])
    return val, DeterministicStrategy.symmetric(f, m)


def _greedy_last(weights, exact):
    """``weights[x, a_m]`` -> (value, last table) with smallest-x tie-break."""
    if exact:
        table, total = [], Fraction(0)
        for a in range(weights.shape[1]):
            col = list(weights[:, a])
            best = max(col)
            table.append(col.index(best))
            total += best
        return total, table
    table = np.argmax(weights, axis=0)
    return float(weights.max(axis=0).sum()), table.tolist()


def optimal_classical_exhaustive(g, budget=DEFAULT_ENUM_BUDGET):
    """Global optimum over all deterministic strategy tuples.

    The first ``m-1`` players are enumerated; the last player's best reply
    is a per-input argmax, so the work is ``prod_{i<m} |X|^{|A_i|}``
    table contractions.  ``budget`` caps ``prod_i |X|^{|A_i|}``.
    """
    k = g.x_size
    m = g.num_players
    sizes = g.input_sizes
    required = math.prod(k ** s for s in sizes)
    if required > budget:
        raise BudgetError("deterministic strategy enumeration", required, budget)
    counts = [k ** s for s in sizes[:-1]]
    total = math.prod(counts)
    pf = g.probs.astype(np.float64) if g.scalar == RATIONAL else g.probs
    last = sizes[-1]
    # table reshaped to (x, a_1..a_{m-1} flattened, a_m)
    p2 = pf.reshape(k, -1, last)
    best, keep = -1.0, []
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        idx = np.arange(start, stop, dtype=np.int64)
        # joint indicator over (chunk, x, a_1..a_{m-1})
        ind = np.ones((len(idx), k, 1), dtype=bool)
        rem = idx.copy()
        per_party = []
        for c, s in zip(reversed(counts), reversed(sizes[:-1])):
            per_party.append(rem % c)
            rem //= c
        per_party.reverse()
        for pi, s in zip(per_party, sizes[:-1]):
            digits = np.empty((len(pi), s), dtype=np.int64)
            r = pi.copy()
            for a in range(s - 1, -1, -1):
                digits[:, a] = r % k
                r //= k
            hit = digits[:, None, :] == np.arange(k)[None, :, None]  # (chunk, x, a_i)
            ind = (ind[:, :, :, None] & hit[:, :, None, :]).reshape(len(idx), k, -1)
        wts = np.einsum("cxr,xrb->cxb", ind.astype(np.float64), p2)
        scores = wts.max(axis=1).sum(axis=1)
        best, keep = _best_indices(scores, start, best, keep)
    exact = g.scalar == RATIONAL
    results = []
    p2e = g.probs.reshape(k, -1, last)
    for idx in sorted(set(keep)):
        tables = []
        r = idx
        for c, s in zip(reversed(counts), reversed(sizes[:-1])):
            r, d = divmod(r, c)
            tables.append(_index_to_table(d, s, k))
        tables.reverse()
        mask = _win_mask((k,) + tuple(sizes[:-1]), tables).reshape(k, -1)
        if exact:
            weights = np.empty((k, last), dtype=object)
            for x in range(k):
                rows = p2e[x][mask[x]]
                for b in range(last):
                    weights[x, b] = sum(rows[:, b], Fraction(0)) if len(rows) else Fraction(0)
        else:
            weights = np.einsum("xr,xrb->xb", mask.astype(np.float64), p2e)
        val, last_table = _greedy_last(weights, exact)
        results.append((val, idx, tuple(tables) + (tuple(last_table),)))
    top = max(r[0] for r in results)
    tol = 0 if exact else 1e-15
    val, _, tables = min((r for r in results if r[0] >= top - tol), key=lambda r: (r[1], r[2]))
    return val, DeterministicStrategy(tables)


# -- three binary players -----------------------------------------------------

# input patterns (a, b, c) that receive guess s; the complement pattern gets t
_PATTERNS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))


def reduced_deterministic_strategies(x_size):
    """The deterministic strategies that suffice for three binary-input players.

    Every player must use the same output set: either one constant ``s``,
    or ``{s, t}`` with ``s != t`` split along one of four input patterns.
    For ``|X| = 2`` this leaves 10 of the 64 strategies.
    """
    out = []
    for s in range(x_size):
        out.append(DeterministicStrategy(((s, s),) * 3))
    for pat in _PATTERNS:
        for s, t in itertools.permutations(range(x_size), 2):
            # pattern bit 0 means "input 0 maps to s" for that player
            tables = tuple((s, t) if bit == 0 else (t, s) for bit in pat)
            out.append(DeterministicStrategy(tables))
    return out


def optimal_classical_3party_binary(g):
    """Classical value of a three-player game with binary inputs.

    Maximum of ``P_X(s)`` and ``P(s, p) + P(t, not p)`` over the four
    patterns ``p`` and ordered pairs ``s != t``.
    """
    if g.num_players != 3 or g.input_sizes != (2, 2, 2):
        raise ShapeError("expected three players with binary inputs")
    p = g.probs
    exact = g.scalar == RATIONAL
    px = g.x_marginal()
    cands = list(px)
    for pat in _PATTERNS:
        comp = tuple(1 - v for v in pat)
        for s, t in itertools.permutations(range(g.x_size), 2):
            cands.append(p[(s,) + pat] + p[(t,) + comp])
    best = max(cands)
    return best if exact else float(best)
