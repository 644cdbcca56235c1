"""Information quantities and the winning-probability exponent of channel games.

All logarithms are base 2.  Support violations in relative entropies give
``+inf`` (and hence ``-inf`` objectives) instead of raising.

The exponent objective for a joint ``Q(x, a)`` and channel ``P(a|x)`` is

    I(X;A)_Q - 2 D(Q_{A|X} || P_{A|X} | Q_X) - log|X|
      = H(A)_Q + H(A|X)_Q + 2 sum Q(x,a) log P(a|x) - log|X|,

which is concave in ``Q``; it is maximized by exponentiated-gradient
ascent from several starts.
"""
import csv
import io
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .nosignal import qnd_win_prob

TINY = 1e-300


def _xlogx(p):
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    nz = p > TINY
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def entropy(p):
    return float(-_xlogx(p).sum())


def cond_entropy(q):
    """``H(A|X)`` for a joint table ``q[x, a]``."""
    q = np.asarray(q, dtype=np.float64)
    return entropy(q) - entropy(q.sum(axis=1))


def mutual_info(q):
    q = np.asarray(q, dtype=np.float64)
    return entropy(q.sum(axis=1)) + entropy(q.sum(axis=0)) - entropy(q)


def rel_entropy(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    nz = p > TINY
    if np.any(q[nz] <= TINY):
        return math.inf
    return float(np.sum(p[nz] * np.log2(p[nz] / q[nz])))


def cond_rel_entropy(q1, q2, marg):
    """``sum_x marg(x) D(q1(.|x) || q2(.|x))`` for row-stochastic ``q1``, ``q2``."""
    total = 0.0
    for x, w in enumerate(np.asarray(marg, dtype=np.float64)):
        if w > TINY:
            d = rel_entropy(np.asarray(q1)[x], np.asarray(q2)[x])
            if math.isinf(d):
                return math.inf
            total += w * d
    return total


def _channel_array(ch):
    return np.asarray(ch.cond_probs, dtype=np.float64)


def exponent_objective(q, ch):
    """The exponent objective at joint ``q`` (bits); ``-inf`` off the channel support."""
    q = np.asarray(q, dtype=np.float64)
    p = _channel_array(ch)
    if q.shape != p.shape:
        raise ValueError(f"joint shape {q.shape} does not match channel {p.shape}")
    qx = q.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(qx[:, None] > TINY, q / qx[:, None], 0.0)
    d = cond_rel_entropy(cond, p, qx)
    if math.isinf(d):
        return -math.inf
    return mutual_info(q) - 2.0 * d - math.log2(p.shape[0])


def _objective_batch(q, logp):
    """Vectorized objective over a batch ``q[s, x, a]`` supported where ``logp`` is finite."""
    qa = q.sum(axis=1)
    qx = q.sum(axis=2)
    h_a = -_xlogx(qa).sum(axis=1)
    h_ax = -_xlogx(q).sum(axis=(1, 2)) + _xlogx(qx).sum(axis=1)
    lin = 2.0 * np.where(q > 0, q * np.where(np.isfinite(logp), logp, 0.0), 0.0).sum(axis=(1, 2))
    return h_a + h_ax + lin - math.log2(q.shape[1])


def symmetric_reduction(ch):
    """Best objective over ``Q = [[c, 1/2-c], [1/2-c, c]]`` for a 2x2 channel."""
    p = _channel_array(ch)
    if p.shape != (2, 2):
        raise ValueError("the symmetric reduction needs a 2x2 channel")

    def neg(c):
        q = np.array([[c, 0.5 - c], [0.5 - c, c]])
        v = exponent_objective(q, ch)
        return 1e6 if not np.isfinite(v) else -v

    if p[0, 1] <= TINY or p[1, 0] <= TINY:
        # off-diagonal mass must vanish
        return exponent_objective(np.array([[0.5, 0.0], [0.0, 0.5]]), ch), np.array([[0.5, 0.0], [0.0, 0.5]])
    if p[0, 0] <= TINY or p[1, 1] <= TINY:
        return exponent_objective(np.array([[0.0, 0.5], [0.5, 0.0]]), ch), np.array([[0.0, 0.5], [0.5, 0.0]])
    res = minimize_scalar(neg, bounds=(0.0, 0.5), method="bounded", options={"xatol": 1e-12, "maxiter": 500})
    c = float(res.x)
    q = np.array([[c, 0.5 - c], [0.5 - c, c]])
    return -float(res.fun), q


def optimize_exponent(ch, starts=32, iters=4000, seed=0, step=0.5, use_reduction=True):
    """Maximize the exponent objective over joint distributions.

    Runs exponentiated-gradient ascent from ``starts`` seeded random points
    plus ``Q = P_X P_{A|X}``, restricted to the support of the channel.
    Two-by-two channels are also optimized over the symmetric one-parameter
    family (unless ``use_reduction`` is off), and the better value is
    returned with its maximizer.
    """
    p = _channel_array(ch)
    k, na = p.shape
    support = p > TINY
    with np.errstate(divide="ignore"):
        logp = np.where(support, np.log2(np.where(support, p, 1.0)), -np.inf)
    rng = np.random.default_rng(seed)
    q0 = rng.dirichlet(np.ones(k * na), size=starts).reshape(starts, k, na)
    q0 = np.concatenate([q0, (p / k)[None]], axis=0)
    q = np.where(support[None], q0, 0.0)
    q /= q.sum(axis=(1, 2), keepdims=True)
    q = np.maximum(q, 1e-12) * support[None]
    q /= q.sum(axis=(1, 2), keepdims=True)
    for _ in range(iters):
        qa = q.sum(axis=1, keepdims=True)
        qx = q.sum(axis=2, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = -np.log2(np.maximum(qa, TINY)) - np.log2(np.maximum(q, TINY) / np.maximum(qx, TINY))
        grad = grad + 2.0 * np.where(support[None], logp, 0.0)
        grad -= np.where(support[None], grad, -np.inf).max(axis=(1, 2), keepdims=True)
        q = q * np.exp2(step * grad) * support[None]
        q /= q.sum(axis=(1, 2), keepdims=True)
    vals = _objective_batch(q, logp)
    best = int(np.argmax(vals))
    value, arg = float(vals[best]), q[best]
    if use_reduction and p.shape == (2, 2):
        v2, q2 = symmetric_reduction(ch)
        if v2 > value:
            value, arg = v2, q2
    return value, arg


def bsc_exponent_closed_form(alpha):
    """``log2(1 - 2 alpha (1 - alpha))``."""
    if not 0 <= alpha <= 0.5:
        raise ValueError(f"alpha={alpha} outside [0, 1/2]")
    return math.log2(1 - 2 * alpha * (1 - alpha))


def finite_n_exponent_table(n_list, alpha_grid):
    """Rows ``(n, alpha, best_d, log2(w)/n, limit)`` maximizing over ``Q_n^d``."""
    rows = []
    for n in n_list:
        if n > 64:
            raise ValueError("n above 64 overflows float binomials")
        for alpha in alpha_grid:
            alpha = float(alpha)
            vals = [qnd_win_prob(n, d, alpha) for d in range(n + 1)]
            best = int(np.argmax(vals))
            rows.append((n, alpha, best, math.log2(vals[best]) / n, bsc_exponent_closed_form(alpha)))
    return rows


EXPONENT_COLUMNS = ("n", "alpha", "best_d", "log_w_over_n", "limit")


def exponent_table_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXPONENT_COLUMNS)
    for n, alpha, d, v, lim in rows:
        w.writerow([n, repr(alpha), d, repr(v), repr(lim)])
    return buf.getvalue()
