"""Block codes and list codes as strategies for repeated channel games.

Strings of length ``n`` over an alphabet of size ``k`` are the integers
``sum_s c_s k**s`` (slot ``s`` is digit ``s``), matching the repeated-game
index order.  Codes are explicit tables: ``enc[m]`` is a codeword index,
``dec[a]`` is the list of candidate messages for received string ``a``.
"""
from dataclasses import dataclass
from fractions import Fraction
import json
import math

import numpy as np

from .classical import DeterministicStrategy
from .errors import BudgetError, DomainError, GameFormatError, ShapeError
from .nosignal import pairing_behavior
from .rational import RATIONAL

MAX_BLOCK = 16
DEFAULT_BUDGET = 2 ** 26


@dataclass(frozen=True)
class Code:
    n: int
    messages: int
    enc: tuple
    dec: tuple
    x_size: int = 2
    a_size: int = 2

    def __post_init__(self):
        object.__setattr__(self, "enc", tuple(int(v) for v in self.enc))
        object.__setattr__(self, "dec", tuple(tuple(int(m) for m in lst) for lst in self.dec))
        if not 1 <= self.n <= MAX_BLOCK:
            raise DomainError(f"block length {self.n} outside [1, {MAX_BLOCK}]")
        if len(self.enc) != self.messages:
            raise ShapeError(f"encoder has {len(self.enc)} entries for {self.messages} messages")
        if any(not 0 <= c < self.x_size ** self.n for c in self.enc):
            raise DomainError("codeword outside the input string space")
        if len(self.dec) != self.a_size ** self.n:
            raise ShapeError(f"decoder needs {self.a_size ** self.n} entries, has {len(self.dec)}")
        sizes = {len(lst) for lst in self.dec}
        if len(sizes) != 1 or 0 in sizes:
            raise DomainError("decoder lists must be non-empty and of one common size")
        for lst in self.dec:
            if len(set(lst)) != len(lst) or any(not 0 <= m < self.messages for m in lst):
                raise DomainError("decoder list has repeated or out-of-range messages")

    @property
    def list_size(self):
        return len(self.dec[0])

    def decode(self, a):
        return self.dec[a][0]

    def estimator(self):
        """``Enc(Dec(a))`` for every received string (plain codes only)."""
        if self.list_size != 1:
            raise DomainError("a list code has no single estimate; use list_behavior")
        return tuple(self.enc[lst[0]] for lst in self.dec)


def _bits(v, n):
    return [(v >> s) & 1 for s in range(n)]


def _from_bits(bits):
    return sum(b << s for s, b in enumerate(bits))


def repetition_code(n):
    """Two messages sent as ``0^n`` and ``1^n``, decoded by majority."""
    if n % 2 == 0:
        raise DomainError("repetition code needs an odd block length")
    full = (1 << n) - 1
    dec = [(int(bin(a).count("1") > n // 2),) for a in range(1 << n)]
    return Code(n, 2, (0, full), dec)


def identity_code(n):
    size = 1 << n
    return Code(n, size, tuple(range(size)), [(a,) for a in range(size)])


# parity bit -> data bits it covers (data d1..d4 sit in slots 0..3)
HAMMING_PARITY = ((0, 1, 3), (0, 2, 3), (1, 2, 3))


def hamming_encode(msg):
    d = _bits(msg, 4)
    p = [d[i] ^ d[j] ^ d[k] for i, j, k in HAMMING_PARITY]
    return _from_bits(d + p)


def hamming_7_4():
    """The (7,4) Hamming code with syndrome decoding of single flips.

    Slots 0..3 hold the data bits, slots 4..6 the parities of
    ``(d1,d2,d4)``, ``(d1,d3,d4)`` and ``(d2,d3,d4)``.
    """
    enc = tuple(hamming_encode(m) for m in range(16))
    # syndrome pattern produced by a flip in each slot
    flip_syndrome = {}
    for slot in range(7):
        bits = [0] * 7
        bits[slot] = 1
        syn = tuple(bits[4 + p] ^ bits[i] ^ bits[j] ^ bits[k] for p, (i, j, k) in enumerate(HAMMING_PARITY))
        flip_syndrome[syn] = slot
    dec = []
    for a in range(128):
        bits = _bits(a, 7)
        syn = tuple(bits[4 + p] ^ bits[i] ^ bits[j] ^ bits[k] for p, (i, j, k) in enumerate(HAMMING_PARITY))
        if any(syn):
            bits[flip_syndrome[syn]] ^= 1
        dec.append((_from_bits(bits[:4]),))
    return Code(7, 16, enc, dec)


def hamming_ball_code(n, d):
    """List code over all ``2^n`` strings listing the radius-``d`` ball."""
    size = 1 << n
    dec = [tuple(v for v in range(size) if bin(v ^ a).count("1") <= d) for a in range(size)]
    return Code(n, size, tuple(range(size)), dec)


def strategy_from_code(c, num_players=2):
    """Every player outputs ``Enc(Dec(a))``."""
    return DeterministicStrategy.symmetric(c.estimator(), num_players)


def _product_channel(c, ch, budget):
    if ch.x_size != c.x_size or ch.a_size != c.a_size:
        raise ShapeError("channel alphabets do not match the code")
    required = (c.x_size * c.a_size) ** c.n
    if required > budget:
        raise BudgetError(f"{c.n}-fold product channel", required, budget)
    return ch.power(c.n).cond_probs


def code_strategy_value(c, ch, num_players=2, budget=DEFAULT_BUDGET):
    """Winning probability of :func:`strategy_from_code` on the repeated channel game.

    Uses ``|X|^-n sum_x P(f^-1(x) | x)^m`` with ``f = Enc o Dec``.
    """
    w = _product_channel(c, ch, budget)
    f = np.array(c.estimator())
    exact = ch.scalar == RATIONAL
    total = Fraction(0) if exact else 0.0
    for x in sorted(set(f.tolist())):
        hits = w[x, f == x]
        q = sum(hits, Fraction(0)) if exact else float(np.sum(hits))
        total += q ** num_players
    return total / c.x_size ** c.n


def code_min_success(c, ch, budget=DEFAULT_BUDGET, mc=False, samples=20000, seed=0):
    """``min_m P(m in Dec(A^n) | Enc(m))``: exact sum, or Monte Carlo with ``mc``."""
    required = (c.x_size * c.a_size) ** c.n
    if required <= budget:
        w = _product_channel(c, ch, budget)
        exact = ch.scalar == RATIONAL
        listed = np.zeros((c.messages, len(c.dec)), dtype=bool)
        for a, lst in enumerate(c.dec):
            listed[list(lst), a] = True
        vals = []
        for m, cw in enumerate(c.enc):
            hits = w[cw, listed[m]]
            vals.append(sum(hits, Fraction(0)) if exact else float(np.sum(hits)))
        return min(vals)
    if not mc:
        raise BudgetError("exact decoding-success summation", required, budget)
    rng = np.random.default_rng(seed)
    p = np.asarray(ch.cond_probs, dtype=np.float64)
    worst = 1.0
    weights = np.array([c.a_size ** s for s in range(c.n)])
    for m, cw in enumerate(c.enc):
        digits = [(cw // c.x_size ** s) % c.x_size for s in range(c.n)]
        recv = np.stack([rng.choice(c.a_size, size=samples, p=p[x]) for x in digits], axis=1)
        idx = recv @ weights
        ok = np.fromiter((m in c.dec[a] for a in idx), dtype=bool, count=samples)
        worst = min(worst, float(ok.mean()))
    return worst


def list_behavior(c, scalar=RATIONAL):
    """Two-player behavior: each player is uniform over ``Enc(Dec(a))``.

    Shared codewords are paired with themselves and the rest matched in
    ascending order, so every marginal is uniform over the player's list.
    """
    sets = [sorted({c.enc[m] for m in lst}) for lst in c.dec]
    if len({len(s) for s in sets}) != 1:
        raise DomainError("encoded decoder lists differ in size")
    required = (c.x_size ** c.n * c.a_size ** c.n) ** 2
    if required > DEFAULT_BUDGET:
        raise BudgetError("list behavior table", required, DEFAULT_BUDGET)
    return pairing_behavior(sets, sets, c.x_size ** c.n, scalar)


def majority_win_prob(n, alpha):
    """Closed form for the majority strategy on ``n`` (odd) BSC copies."""
    if n % 2 == 0:
        raise DomainError("majority formula needs odd n")
    s = sum(math.comb(n, i) * alpha ** i * (1 - alpha) ** (n - i) for i in range((n - 1) // 2 + 1))
    return s * s / 2 ** (n - 1)


# -- JSON --------------------------------------------------------------------------

def code_to_dict(c):
    return {
        "n": c.n,
        "messages": c.messages,
        "list_size": c.list_size,
        "x_size": c.x_size,
        "a_size": c.a_size,
        "enc": list(c.enc),
        "dec": [list(lst) for lst in c.dec],
    }


def code_from_dict(data):
    if not isinstance(data, dict):
        raise GameFormatError("$", "expected a JSON object")
    for key in ("n", "messages", "enc", "dec"):
        if key not in data:
            raise GameFormatError(key, "missing field")
    code = Code(data["n"], data["messages"], data["enc"], data["dec"],
                data.get("x_size", 2), data.get("a_size", 2))
    if "list_size" in data and data["list_size"] != code.list_size:
        raise GameFormatError("list_size", f"declared {data['list_size']}, tables give {code.list_size}")
    return code


def save_code(c, path):
    with open(path, "w") as fh:
        json.dump(code_to_dict(c), fh)
        fh.write("\n")


def load_code(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GameFormatError("$", f"malformed JSON ({exc})") from None
    return code_from_dict(data)
