"""Exact scalars and small exact linear-algebra routines.

Public values are :class:`fractions.Fraction`; hot loops run on
``gmpy2.mpq`` and convert back at the boundary.
"""
from fractions import Fraction
import numbers

import gmpy2
import numpy as np

RATIONAL = "rational"
FLOAT = "float"
SCALARS = (RATIONAL, FLOAT)


def parse_rational(value):
    """Convert ``value`` to an exact Fraction.

    Accepts ints, Fractions, ``mpq``, strings such as ``"9/32"`` or ``"0.3"``,
    and floats (taken by their decimal repr, so ``0.3`` becomes ``3/10``).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if type(value).__name__ == "mpq":
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, numbers.Real):
        return Fraction(repr(float(value)))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def format_rational(q):
    q = parse_rational(q)
    return f"{q.numerator}/{q.denominator}"


def to_mpq(value):
    if isinstance(value, Fraction):
        return gmpy2.mpq(value.numerator, value.denominator)
    return gmpy2.mpq(value)


def from_mpq(q):
    return Fraction(int(q.numerator), int(q.denominator))


def as_array(values, scalar):
    """Array of Fractions (object dtype) or float64 depending on ``scalar``."""
    if scalar == RATIONAL:
        arr = np.asarray(values, dtype=object)
        flat = [parse_rational(v) for v in arr.ravel()]
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = flat if flat else []
        return out
    if scalar == FLOAT:
        return np.asarray(values, dtype=np.float64)
    raise ValueError(f"unknown scalar backend {scalar!r}")


def fraction_array(shape, fill=0):
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(fill))
    return out


def rref(rows, ncols=None):
    """Reduced row echelon form over the rationals.

    Returns ``(matrix, pivots)`` where ``matrix`` holds only the nonzero rows
    as lists of ``mpq`` and ``pivots`` lists their pivot columns.
    """
    mat = [[to_mpq(v) for v in row] for row in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        piv = mat[r][c]
        prow = [v / piv for v in mat[r]]
        mat[r] = prow
        nz = [j for j in range(ncols) if prow[j] != 0]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                row = mat[i]
                for j in nz:
                    row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rank(rows):
    return len(rref(rows)[1]) if len(rows) else 0


def independent_rows(rows):
    """Indices of a maximal linearly independent subset of ``rows``.

    Rows are scanned in order and kept when they raise the rank, so the
    first occurrence of every dependent family survives.
    """
    basis = []  # (pivot column, reduced row) pairs
    keep = []
    for idx, row in enumerate(rows):
        vec = [to_mpq(v) for v in row]
        for col, brow in basis:
            f = vec[col]
            if f != 0:
                for j, bv in enumerate(brow):
                    if bv != 0:
                        vec[j] -= f * bv
        col = next((j for j, v in enumerate(vec) if v != 0), None)
        if col is None:
            continue
        piv = vec[col]
        vec = [v / piv for v in vec]
        # keep earlier basis rows reduced in the new pivot column
        for k, (bc, brow) in enumerate(basis):
            f = brow[col]
            if f != 0:
                basis[k] = (bc, [b - f * v for b, v in zip(brow, vec)])
        basis.append((col, vec))
        keep.append(idx)
    return keep


def nullspace(rows, ncols):
    """Basis of the right nullspace as a list of Fraction vectors."""
    mat, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fcol in free:
        vec = [gmpy2.mpq(0)] * ncols
        vec[fcol] = gmpy2.mpq(1)
        for row, pc in zip(mat, pivots):
            vec[pc] = -row[fcol]
        basis.append([from_mpq(v) for v in vec])
    return basis


def solve_square(matrix, rhs):
    """Solve a nonsingular square system exactly; returns Fractions."""
    n = len(matrix)
    aug = [list(matrix[i]) + [rhs[i]] for i in range(n)]
    mat, pivots = rref(aug, n + 1)
    if pivots != list(range(n)):
        raise np.linalg.LinAlgError("singular system")
    return [from_mpq(mat[i][n]) for i in range(n)]


def inverse(matrix):
    """Exact inverse of a nonsingular square matrix (list of Fraction rows)."""
    n = len(matrix)
    aug = [list(matrix[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    mat, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise np.linalg.LinAlgError("singular matrix")
    return [[from_mpq(v) for v in mat[i][n:]] for i in range(n)]


def integer_row(row):
    """Scale a rational row to coprime integers (sign preserved)."""
    from math import gcd, lcm

    fr = [parse_rational(v) for v in row]
    den = lcm(*[f.denominator for f in fr]) if fr else 1
    ints = [int(f * den) for f in fr]
    g = gcd(*ints) if ints else 0
    return [v // g for v in ints] if g > 1 else ints
