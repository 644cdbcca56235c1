"""LSSD games with classical inputs.

A game is a joint table ``P(x, a_1, ..., a_m)``: the referee draws the
triple, hands ``a_i`` to player ``i`` and keeps ``x``.  Tables are stored
as arrays of shape ``(|X|, |A_1|, ..., |A_m|)``, so the flat C-order is
x slowest and ``a_m`` fastest.  Repeated games encode a string
``(s_0, ..., s_{n-1})`` as the integer ``sum_k s_k * base**k`` (slot 0 is
the least significant digit).
"""
from dataclasses import dataclass
from fractions import Fraction
import json
import math

import numpy as np

from .errors import BudgetError, DomainError, GameFormatError, HypothesisError, ShapeError
from .rational import FLOAT, RATIONAL, SCALARS, as_array, format_rational, parse_rational

DEFAULT_BUDGET = 2 ** 26
FLOAT_TOL = 1e-12


def _infer_scalar(*values):
    if any(isinstance(v, float) or isinstance(v, np.floating) for v in values):
        return FLOAT
    return RATIONAL


def _frozen(arr):
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Channel:
    """Classical channel ``P(a|x)`` stored as an ``(|X|, |A|)`` table."""

    cond_probs: np.ndarray
    scalar: str = RATIONAL

    def __post_init__(self):
        if self.scalar not in SCALARS:
            raise ValueError(f"unknown scalar backend {self.scalar!r}")
        table = as_array(self.cond_probs, self.scalar)
        if table.ndim != 2:
            raise ShapeError("channel table must be two-dimensional")
        if (table < 0).any():
            raise DomainError("channel has a negative entry")
        rows = table.sum(axis=1)
        if self.scalar == RATIONAL:
            bad = [i for i, r in enumerate(rows) if r != 1]
        else:
            bad = [i for i, r in enumerate(rows) if abs(r - 1.0) > FLOAT_TOL]
        if bad:
            raise DomainError(f"channel rows {bad} do not sum to 1")
        object.__setattr__(self, "cond_probs", _frozen(table))

    @property
    def x_size(self):
        return self.cond_probs.shape[0]

    @property
    def a_size(self):
        return self.cond_probs.shape[1]

    def power(self, n):
        """The product channel ``P(a^n|x^n)`` with little-endian string indices."""
        table = self.cond_probs
        for _ in range(n - 1):
            # new slot becomes the more significant digit
            table = np.multiply.outer(self.cond_probs, table).transpose(0, 2, 1, 3)
            table = table.reshape(table.shape[0] * table.shape[1], -1)
        return Channel(table, self.scalar)

    def __eq__(self, other):
        return (
            isinstance(other, Channel)
            and self.scalar == other.scalar
            and self.cond_probs.shape == other.cond_probs.shape
            and bool((self.cond_probs == other.cond_probs).all())
        )


@dataclass(frozen=True, eq=False)
class GameTable:
    """Joint distribution defining an ``m``-player LSSD game.

    The table is immutable after construction.  ``scalar`` selects exact
    Fractions (``"rational"``) or binary64 (``"float"``).
    """

    probs: np.ndarray
    scalar: str = RATIONAL

    def __post_init__(self):
        if self.scalar not in SCALARS:
            raise ValueError(f"unknown scalar backend {self.scalar!r}")
        table = as_array(self.probs, self.scalar)
        if table.ndim < 3:
            raise ShapeError("a game needs a referee axis and at least two players")
        if table.shape[0] < 2:
            raise ShapeError("|X| must be at least 2")
        if min(table.shape) < 1:
            raise ShapeError("empty input alphabet")
        if (table < 0).any():
            raise DomainError("game table has a negative entry")
        total = table.sum()
        if self.scalar == RATIONAL and total != 1:
            raise DomainError(f"game table sums to {total}, not 1")
        if self.scalar == FLOAT and abs(total - 1.0) > FLOAT_TOL:
            raise DomainError(f"game table sums to {total!r}, not 1")
        object.__setattr__(self, "probs", _frozen(table))

    @classmethod
    def from_flat(cls, x_size, input_sizes, probs, scalar=RATIONAL):
        shape = (x_size, *input_sizes)
        flat = list(probs)
        if len(flat) != math.prod(shape):
            raise ShapeError(f"expected {math.prod(shape)} entries, got {len(flat)}")
        arr = as_array(flat, scalar).reshape(shape)
        return cls(arr, scalar)

    @property
    def num_players(self):
        return self.probs.ndim - 1

    @property
    def x_size(self):
        return self.probs.shape[0]

    @property
    def input_sizes(self):
        return tuple(self.probs.shape[1:])

    @property
    def size(self):
        return self.probs.size

    def flat(self):
        return self.probs.ravel()

    def x_marginal(self):
        return self.probs.reshape(self.x_size, -1).sum(axis=1)

    def party_marginal(self, party):
        """Joint table of ``(x, a_party)``."""
        axes = tuple(1 + i for i in range(self.num_players) if i != party)
        return self.probs.sum(axis=axes) if axes else self.probs

    def astype(self, scalar):
        if scalar == self.scalar:
            return self
        if scalar == FLOAT:
            return GameTable(self.probs.astype(np.float64), FLOAT)
        raise ValueError("float games cannot be converted to exact rationals")

    def __eq__(self, other):
        return (
            isinstance(other, GameTable)
            and self.scalar == other.scalar
            and self.probs.shape == other.probs.shape
            and bool((self.probs == other.probs).all())
        )

    def __repr__(self):
        return (
            f"GameTable(players={self.num_players}, x_size={self.x_size}, "
            f"input_sizes={self.input_sizes}, scalar={self.scalar!r})"
        )


def bsc_channel(alpha, scalar=None):
    """Binary symmetric channel flipping its input with probability ``alpha``."""
    scalar = scalar or _infer_scalar(alpha)
    a = parse_rational(alpha) if scalar == RATIONAL else float(alpha)
    if not (0 <= a <= Fraction(1, 2)):
        raise DomainError(f"alpha={alpha} outside [0, 1/2]")
    one = 1 if scalar == RATIONAL else 1.0
    return Channel([[one - a, a], [a, one - a]], scalar)


def channel_game(ch, num_players=2):
    """Game where a uniform ``x`` goes through independent copies of ``ch``."""
    if num_players < 2:
        raise DomainError("a channel game needs at least two players")
    table = ch.cond_probs
    for _ in range(num_players - 1):
        table = table[..., None] * ch.cond_probs.reshape((ch.x_size,) + (1,) * (table.ndim - 1) + (ch.a_size,))
    uniform = Fraction(1, ch.x_size) if ch.scalar == RATIONAL else 1.0 / ch.x_size
    return GameTable(table * uniform, ch.scalar)


def bsc_game(alpha, copies=1, scalar=None, num_players=2, budget=DEFAULT_BUDGET):
    """The (optionally repeated) binary-symmetric-channel game."""
    game = channel_game(bsc_channel(alpha, scalar), num_players)
    return parallel_repetition(game, copies, budget) if copies > 1 else game


def parallel_repetition(g, n, budget=DEFAULT_BUDGET):
    """``n`` independent copies of ``g`` played simultaneously.

    Slot ``k`` of every string is digit ``k`` (little-endian) of the merged
    index, for the referee value and for every player's input.
    """
    if n < 1:
        raise DomainError("number of copies must be positive")
    required = g.size ** n
    if required > budget:
        raise BudgetError(f"{n}-fold repetition", required, budget)
    if n == 1:
        return g
    ndim = g.probs.ndim
    table = g.probs
    for _ in range(n - 1):
        table = np.multiply.outer(g.probs, table)
    # axes now run (slot n-1 axes..., slot 0 axes...); group by variable
    order = [slot * ndim + var for var in range(ndim) for slot in range(n)]
    table = table.transpose(order)
    shape = tuple(s ** n for s in g.probs.shape)
    return GameTable(table.reshape(shape), g.scalar)


def symmetric_channel(g):
    """Return the common channel if ``g`` meets the symmetric-strategy hypotheses.

    Hypotheses: uniform referee marginal, conditionally independent inputs,
    and identical conditional channels for all players.  Raises
    :class:`HypothesisError` naming the first violated one.
    """
    exact = g.scalar == RATIONAL

    def close(a, b):
        a, b = np.asarray(a), np.asarray(b)
        if exact:
            return bool((a == b).all())
        return np.allclose(a.astype(float), b.astype(float), atol=FLOAT_TOL, rtol=0)

    sizes = set(g.input_sizes)
    if len(sizes) != 1:
        raise HypothesisError(f"players have different input alphabets {g.input_sizes}")
    px = g.x_marginal()
    uniform = Fraction(1, g.x_size) if exact else 1.0 / g.x_size
    if not all(close(p, uniform) for p in px):
        raise HypothesisError("referee marginal P_X is not uniform")
    k = g.x_size
    channels = [g.party_marginal(i) * k for i in range(g.num_players)]
    for i in range(1, g.num_players):
        if not close(channels[i], channels[0]):
            raise HypothesisError(f"player {i} sees a different channel than player 0")
    product = channels[0]
    for _ in range(g.num_players - 1):
        product = product[..., None] * channels[0].reshape((k,) + (1,) * (product.ndim - 1) + (-1,))
    if not close(product * (Fraction(1, k) if exact else 1.0 / k), g.probs):
        raise HypothesisError("inputs are not conditionally independent given x")
    return Channel(channels[0], g.scalar)


# -- JSON ---------------------------------------------------------------------

def game_to_dict(g):
    if g.scalar == RATIONAL:
        probs = [format_rational(p) for p in g.flat()]
    else:
        probs = [float(p) for p in g.flat()]
    return {
        "players": g.num_players,
        "x_size": g.x_size,
        "input_sizes": list(g.input_sizes),
        "scalar": g.scalar,
        "probs": probs,
    }


def game_from_dict(data):
    if not isinstance(data, dict):
        raise GameFormatError("$", "expected a JSON object")
    for key in ("players", "x_size", "input_sizes", "probs"):
        if key not in data:
            raise GameFormatError(key, "missing field")
    players, x_size, sizes = data["players"], data["x_size"], data["input_sizes"]
    if not isinstance(players, int) or players < 2:
        raise GameFormatError("players", "must be an integer >= 2")
    if not isinstance(x_size, int) or x_size < 2:
        raise GameFormatError("x_size", "must be an integer >= 2")
    if not isinstance(sizes, list) or len(sizes) != players:
        raise GameFormatError("input_sizes", f"must list {players} sizes")
    for i, s in enumerate(sizes):
        if not isinstance(s, int) or s < 1:
            raise GameFormatError(f"input_sizes[{i}]", "must be a positive integer")
    scalar = data.get("scalar", RATIONAL)
    if scalar not in SCALARS:
        raise GameFormatError("scalar", f"must be one of {SCALARS}")
    probs = data["probs"]
    expected = x_size * math.prod(sizes)
    if not isinstance(probs, list) or len(probs) != expected:
        raise GameFormatError("probs", f"expected a list of {expected} entries")
    values = []
    for i, p in enumerate(probs):
        try:
            if scalar == RATIONAL:
                v = parse_rational(p)
            else:
                if isinstance(p, bool) or not isinstance(p, (int, float)):
                    raise TypeError
                v = float(p)
        except (TypeError, ValueError, ZeroDivisionError):
            raise GameFormatError(f"probs[{i}]", f"not a {scalar} number: {p!r}") from None
        if v < 0:
            raise GameFormatError(f"probs[{i}]", f"negative probability {p!r}")
        values.append(v)
    total = sum(values)
    if (scalar == RATIONAL and total != 1) or (scalar == FLOAT and abs(total - 1) > FLOAT_TOL):
        raise GameFormatError("probs", f"entries sum to {total}, not 1")
    return GameTable.from_flat(x_size, sizes, values, scalar)


def save_game(g, path):
    with open(path, "w") as fh:
        json.dump(game_to_dict(g), fh, indent=1)
        fh.write("\n")


def load_game(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GameFormatError("$", f"malformed JSON ({exc})") from None
    return game_from_dict(data)
