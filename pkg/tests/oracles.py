"""Independent reference computations used by the tests.

Nothing here calls the solvers under test: closed forms are written out
directly, classical values come from plain enumeration and no-signalling
values from a separately assembled HiGHS program with every subset
constraint.
"""
from fractions import Fraction
import itertools
import math

import numpy as np
from scipy.optimize import linprog


def single_bsc(alpha):
    a = Fraction(alpha)
    return max((1 - a) ** 2, Fraction(1, 2))


def _le_2_minus_sqrt3(a):
    return (2 - a) ** 2 >= 3


def _le_alpha0(a):
    return (1 - a * a) ** 2 + (1 - a) ** 4 >= 1


def _le_half_sqrt3_minus_1(a):
    return (2 * a + 1) ** 2 <= 3


def two_fold_classical(alpha):
    a = Fraction(alpha)
    if _le_2_minus_sqrt3(a):
        return (1 - a) ** 4
    if _le_alpha0(a):
        return Fraction(1, 4) * (1 - a * a) ** 2 + Fraction(1, 4) * (1 - a) ** 4
    return Fraction(1, 4)


def two_fold_ns(alpha):
    a = Fraction(alpha)
    if _le_2_minus_sqrt3(a):
        return (1 - a) ** 4
    if _le_half_sqrt3_minus_1(a):
        return (1 - a * a) ** 2 / 3
    return Fraction(1, 4)


ALPHA_1 = (3 - math.sqrt(7) + math.sqrt(2 * (32 - 11 * math.sqrt(7)))) / 8
ALPHA_2 = 2 ** (-2 / 3) * (4 - math.sqrt(14)) ** (1 / 3)


def three_fold_ns(alpha):
    """Piecewise value; branch chosen in floats (keep test points off the breakpoints)."""
    a = Fraction(alpha)
    x = float(a)
    if x <= 0.25:
        return (1 - a) ** 6
    if x <= ALPHA_1:
        return Fraction(1, 4) * (1 - a) ** 4 * (1 + 2 * a) ** 2
    if x <= ALPHA_2:
        return (1 - a ** 3) ** 2 / 7
    return Fraction(1, 8)


def qnd_closed_form(n, d, alpha):
    ball = sum(math.comb(n, i) for i in range(d + 1))
    hit = sum(math.comb(n, i) * alpha ** i * (1 - alpha) ** (n - i) for i in range(d + 1))
    return hit * hit / ball


def hamming_value(alpha):
    return 2 ** 4 / 2 ** 7 * ((1 - alpha) ** 7 + 7 * alpha * (1 - alpha) ** 6) ** 2


def bsc_table(alpha, copies=1, players=2):
    """Game table ``P(x, a_1..a_m)`` built by explicit loops (float)."""
    k = 2 ** copies
    shape = (k,) + (k,) * players
    p = np.zeros(shape)
    for idx in itertools.product(range(k), repeat=players + 1):
        x, inputs = idx[0], idx[1:]
        prob = 1.0 / k
        for a in inputs:
            flips = bin(x ^ a).count("1")
            prob *= alpha ** flips * (1 - alpha) ** (copies - flips)
        p[idx] = prob
    return p


def brute_force_classical(p):
    """Max over all deterministic strategy tuples (any exact or float table)."""
    x_size = p.shape[0]
    sizes = p.shape[1:]
    best = None
    tables = [list(itertools.product(range(x_size), repeat=s)) for s in sizes]
    for combo in itertools.product(*tables):
        total = 0
        for inputs in itertools.product(*(range(s) for s in sizes)):
            outs = {combo[i][a] for i, a in enumerate(inputs)}
            if len(outs) == 1:
                total = total + p[(outs.pop(),) + inputs]
        if best is None or total > best:
            best = total
    return best


def full_ns_value(p):
    """No-signalling optimum with all subset marginal constraints (HiGHS)."""
    p = np.asarray(p, dtype=np.float64)
    x_size = p.shape[0]
    sizes = p.shape[1:]
    m = len(sizes)
    shape = (x_size,) * m + tuple(sizes)
    n = math.prod(shape)
    idx = np.arange(n).reshape(shape)
    rows, rhs = [], []
    for inputs in itertools.product(*(range(s) for s in sizes)):
        r = np.zeros(n)
        r[idx[(slice(None),) * m + inputs].ravel()] = 1
        rows.append(r)
        rhs.append(1.0)
    for size in range(1, m):
        for group in itertools.combinations(range(m), size):
            others = [j for j in range(m) if j not in group]
            for outs in itertools.product(range(x_size), repeat=size):
                for ins in itertools.product(*(range(sizes[j]) for j in group)):
                    for j in others:
                        for aj in range(1, sizes[j]):
                            for rest in itertools.product(*(range(sizes[o]) for o in others if o != j)):
                                r = np.zeros(n)
                                for val, base in ((1, aj), (-1, 0)):
                                    inp = [None] * m
                                    for g, v in zip(group, ins):
                                        inp[g] = v
                                    inp[j] = base
                                    for o, v in zip([o for o in others if o != j], rest):
                                        inp[o] = v
                                    sel = [slice(None)] * m
                                    for g, v in zip(group, outs):
                                        sel[g] = v
                                    r[idx[tuple(sel) + tuple(inp)].ravel()] += val
                                rows.append(r)
                                rhs.append(0.0)
    c = np.zeros(shape)
    for x in range(x_size):
        c[(x,) * m] = p[x]
    res = linprog(-c.ravel(), A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None), method="highs")
    assert res.status == 0
    return -res.fun
