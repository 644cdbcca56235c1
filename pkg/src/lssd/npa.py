"""Level "1+MN" moment relaxation of two-player games and a first-order SDP solver.

Monomials are products of Alice projectors ``M_x(a)`` (one per input ``a``
and output ``x``) and Bob projectors ``N_y(b)``.  A monomial is stored as a
pair of letter tuples ``(alice, bob)``, each letter ``(output, input)``.
The moment matrix entry ``G[u, v]`` stands for ``<psi| u^T v |psi>``; entries
whose words agree after commutation, idempotence, orthogonality and
reversal (real formulation) are identified.

Completeness ``sum_x M_x(a) = 1`` is imposed in :class:`MomentSdp` as
explicit linear rows.  The solver instead works in the equivalent basis
that drops the last output of every measurement (``M_last = 1 - sum M``),
where only entry identifications remain and the affine projection is a
class average.  The full and reduced moment matrices are related by
``G = T G_r T^T`` with ``T`` of full column rank, so both are PSD together.
"""
from dataclasses import dataclass, field
import itertools

import numpy as np
from scipy.sparse import csr_matrix

from .errors import DomainError

ZERO = -1
ONE = 0


# -- monomials and words -----------------------------------------------------------

def _reduce_side(letters):
    """Reduce a product of one party's projectors; ``None`` when it vanishes."""
    out = []
    for x, a in letters:
        if out and out[-1][1] == a:
            if out[-1][0] != x:
                return None
            continue
        out.append((x, a))
    return tuple(out)


def canonical_word(alice, bob):
    """Canonical key of ``<psi| alice bob |psi>`` or ``None`` when it is zero."""
    ra = _reduce_side(alice)
    rb = _reduce_side(bob)
    if ra is None or rb is None:
        return None
    return min((ra, rb), (ra[::-1], rb[::-1]))


@dataclass(frozen=True)
class MonomialIndex:
    """Identity, ``M_x(a)``, ``N_y(b)`` and ``M_x(a) N_y(b)`` in x-major order."""
    x_sizes: tuple
    inputs_a: int
    inputs_b: int
    monomials: tuple = field(init=False)

    def __post_init__(self):
        xa, xb = self.x_sizes
        ms = [((), ())]
        ms += [(((x, a),), ()) for x in range(xa) for a in range(self.inputs_a)]
        ms += [((), ((y, b),)) for y in range(xb) for b in range(self.inputs_b)]
        ms += [(((x, a),), ((y, b),)) for x in range(xa) for a in range(self.inputs_a)
               for y in range(xb) for b in range(self.inputs_b)]
        object.__setattr__(self, "monomials", tuple(ms))

    def __len__(self):
        return len(self.monomials)

    def position(self, mono):
        return self._lookup()[mono]

    def _lookup(self):
        cache = self.__dict__.get("_pos")
        if cache is None:
            cache = {m: i for i, m in enumerate(self.monomials)}
            object.__setattr__(self, "_pos", cache)
        return cache

    def label(self, i):
        alice, bob = self.monomials[i]
        parts = [f"M{x}({a})" for x, a in alice] + [f"N{y}({b})" for y, b in bob]
        return "".join(parts) or "1"


def moment_dimension(x_size, inputs_a, inputs_b):
    return 1 + x_size * inputs_a + x_size * inputs_b + x_size * x_size * inputs_a * inputs_b


def entry_classes(index):
    """Class label per entry: ``ZERO``, ``ONE`` (only ``G[0, 0]``) or ``1, 2, ...``.

    Labels of nonzero words are numbered by first occurrence in row-major
    order.  Returns ``(labels, words)`` with ``words[k]`` the word of class ``k``.
    """
    n = len(index)
    mons = index.monomials
    labels = np.empty((n, n), dtype=np.int64)
    ids = {((), ()): ONE}
    words = [((), ())]
    for i, (ua, ub) in enumerate(mons):
        for j, (va, vb) in enumerate(mons):
            w = canonical_word(ua[::-1] + va, ub[::-1] + vb)
            if w is None:
                labels[i, j] = ZERO
                continue
            k = ids.get(w)
            if k is None:
                k = ids[w] = len(words)
                words.append(w)
            labels[i, j] = k
    return labels, words


# -- SDP data ------------------------------------------------------------------------

@dataclass
class MomentSdp:
    """``max <H, G>`` over PSD ``G`` with ``constraints @ vec(G) = rhs``.

    ``constraints`` is sparse over the row-major flattened ``dim x dim``
    entries and only references entries with ``i <= j``.  ``reduced_*``
    hold the equivalent problem in the last-output-free basis.
    """
    index: MonomialIndex
    objective: np.ndarray
    classes: np.ndarray
    constraints: csr_matrix
    rhs: np.ndarray
    reduced_index: MonomialIndex
    reduced_objective: np.ndarray
    reduced_classes: np.ndarray
    transform: np.ndarray

    @property
    def dim(self):
        return len(self.index)

    @property
    def reduced_dim(self):
        return len(self.reduced_index)

    def residual(self, g):
        """Max violation of the equality rows by a full moment matrix."""
        g = np.asarray(g, dtype=np.float64)
        return float(np.max(np.abs(self.constraints @ g.ravel() - self.rhs), initial=0.0))

    def value(self, g):
        return float(np.sum(self.objective * g))


def _letter_expansion(letter, last):
    """``M_x`` as ``[(coef, letter or None)]`` in the basis without output ``last``."""
    x, a = letter
    if x != last:
        return [(1.0, letter)]
    return [(1.0, None)] + [(-1.0, (xx, a)) for xx in range(last)]


def _transform(index, reduced):
    t = np.zeros((len(index), len(reduced)))
    for i, (ua, ub) in enumerate(index.monomials):
        last_a = index.x_sizes[0] - 1
        last_b = index.x_sizes[1] - 1
        opts_a = [_letter_expansion(l, last_a) for l in ua] or [[(1.0, None)]]
        opts_b = [_letter_expansion(l, last_b) for l in ub] or [[(1.0, None)]]
        for (ca, la), (cb, lb) in itertools.product(opts_a[0], opts_b[0]):
            mono = ((la,) if la else (), (lb,) if lb else ())
            t[i, reduced.position(mono)] += ca * cb
    return t


def _completeness_rows(index, labels):
    """Deduplicated completeness rows as ``{class: coef}`` dicts (class ``ONE`` is the rhs)."""
    mons = index.monomials
    n = len(mons)
    xa, xb = index.x_sizes
    seen = set()
    rows = []
    for i, (ua, ub) in enumerate(mons):
        swaps = []
        if ua:
            a = ua[0][1]
            swaps.append(([index.position((((x, a),), ub)) for x in range(xa)], index.position(((), ub))))
        if ub:
            b = ub[0][1]
            swaps.append(([index.position((ua, ((y, b),))) for y in range(xb)], index.position((ua, ()))))
        for group, rest in swaps:
            if group[0] != i:
                continue  # one row per group of outputs
            for j in range(n):
                coef = {}
                for r in group:
                    k = labels[r, j]
                    if k != ZERO:
                        coef[k] = coef.get(k, 0.0) + 1.0
                k = labels[rest, j]
                if k != ZERO:
                    coef[k] = coef.get(k, 0.0) - 1.0
                coef = {k: c for k, c in coef.items() if c != 0.0}
                if not coef:
                    continue
                key = tuple(sorted(coef.items()))
                if key not in seen:
                    seen.add(key)
                    rows.append(coef)
    return rows


def _constraint_matrix(labels, comp_rows):
    n = labels.shape[0]
    iu, ju = np.triu_indices(n)
    flat = iu * n + ju
    lab = labels[iu, ju]
    order = np.argsort(lab, kind="stable")
    lab_sorted = lab[order]
    flat_sorted = flat[order]
    starts = np.searchsorted(lab_sorted, np.arange(lab.max() + 1))
    rep = flat_sorted[starts]  # first upper-triangle entry of each class
    data, cols, rptr, rhs = [], [], [0], []

    def add(entries, b):
        for c, v in entries:
            cols.append(c)
            data.append(v)
        rptr.append(len(cols))
        rhs.append(b)

    for pos, k in zip(flat_sorted, lab_sorted):
        if k == ZERO:
            add([(pos, 1.0)], 0.0)
        elif k == ONE:
            add([(pos, 1.0)], 1.0)
        elif pos != rep[k]:
            add([(pos, 1.0), (rep[k], -1.0)], 0.0)
    for coef in comp_rows:
        b = -coef.pop(ONE, 0.0)
        add([(rep[k], c) for k, c in sorted(coef.items())], b)
    mat = csr_matrix((data, cols, rptr), shape=(len(rhs), n * n))
    return mat, np.array(rhs)


def build_1mn(g):
    """Level "1+MN" relaxation of a two-player game table ``P(x, a, b)``.

    ``H(M_x(a), N_x(b)) = H(N_x(b), M_x(a)) = P(x, a, b) / 2`` so that
    ``<H, G>`` is the winning probability of the behavior read off ``G``.
    """
    if g.num_players != 2:
        raise DomainError(f"the moment relaxation needs 2 players, got {g.num_players}")
    x, na, nb = g.probs.shape
    index = MonomialIndex((x, x), na, nb)
    labels, _ = entry_classes(index)
    p = np.asarray(g.probs, dtype=np.float64)
    h = np.zeros((len(index), len(index)))
    for xx in range(x):
        for a in range(na):
            for b in range(nb):
                i = index.position((((xx, a),), ()))
                j = index.position(((), ((xx, b),)))
                h[i, j] = h[j, i] = 0.5 * p[xx, a, b]
    mat, rhs = _constraint_matrix(labels, _completeness_rows(index, labels))
    reduced = MonomialIndex((x - 1, x - 1), na, nb)
    t = _transform(index, reduced)
    red_labels, _ = entry_classes(reduced)
    return MomentSdp(index, h, labels, mat, rhs, reduced, t.T @ h @ t, red_labels, t)


def strategy_moments(sdp, alice, bob):
    """Rank-one moment matrix of deterministic maps ``alice[a]``, ``bob[b]``."""
    vec = np.empty(sdp.dim)
    for i, (ua, ub) in enumerate(sdp.index.monomials):
        val = 1.0
        for x, a in ua:
            val *= float(alice[a] == x)
        for y, b in ub:
            val *= float(bob[b] == y)
        vec[i] = val
    return np.outer(vec, vec)


# -- eigen-decomposition -------------------------------------------------------------

def _round_robin(n):
    """``n - 1`` rounds of ``n / 2`` disjoint pairs covering all pairs (``n`` even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        p = np.array(players[: n // 2])
        q = np.array(players[n // 2:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol=1e-14, max_sweeps=50):
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix by cyclic Jacobi.

    Each round rotates ``n / 2`` disjoint index pairs at once (round-robin
    ordering), so a sweep is ``n - 1`` vectorized rounds.
    """
    a = np.array(a, dtype=np.float64)
    n0 = a.shape[0]
    if a.shape != (n0, n0):
        raise ValueError("jacobi_eigh needs a square matrix")
    n = n0 + (n0 % 2)
    work = np.zeros((n, n))
    work[:n0, :n0] = (a + a.T) / 2
    v = np.eye(n)
    scale = max(np.abs(work).max(), 1e-300)
    rounds = _round_robin(n) if n > 1 else []
    for _ in range(max_sweeps):
        off = np.abs(work - np.diag(np.diag(work))).max()
        if off <= tol * scale:
            break
        for p, q in rounds:
            apq = work[p, q]
            app = work[p, p]
            aqq = work[q, q]
            active = np.abs(apq) > 1e-300
            with np.errstate(divide="ignore", invalid="ignore"):
                zeta = np.where(active, (aqq - app) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            t = np.where(active, np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            cp, cq = work[:, p].copy(), work[:, q].copy()
            work[:, p] = c * cp - s * cq
            work[:, q] = s * cp + c * cq
            rp, rq = work[p, :].copy(), work[q, :].copy()
            work[p, :] = c[:, None] * rp - s[:, None] * rq
            work[q, :] = s[:, None] * rp + c[:, None] * rq
            work[p, q] = work[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    w = np.diag(work)[:n0].copy()
    vec = v[:n0, :n0] if n == n0 else _drop_padding(v, w, n0)
    order = np.argsort(w, kind="stable")
    return w[order], vec[:, order]


def _drop_padding(v, w, n0):
    # the padded coordinate stays decoupled; its eigenvector is the last basis vector
    keep = [k for k in range(v.shape[1]) if abs(v[n0, k]) < 0.5]
    return v[:n0, keep][:, :n0]


# -- solver --------------------------------------------------------------------------

@dataclass
class SdpResult:
    """``bound`` is a dual value plus a margin for the dual residual.

    It upper-bounds the relaxation optimum whenever ``G`` stays in the
    feasible set, whose entries all lie in ``[-1, 1]``.
    """
    bound: float
    objective: float
    primal_residual: float
    constraint_residual: float
    psd_residual: float
    margin: float
    iterations: int
    converged: bool
    moments: np.ndarray = field(repr=False, default=None)

    @property
    def residual(self):
        return max(self.primal_residual, self.constraint_residual, self.psd_residual)


class _ClassAverager:
    def __init__(self, labels):
        self.labels = labels.ravel()
        self.size = labels.shape
        self.offset = self.labels + 1  # ZERO -> 0, ONE -> 1
        self.counts = np.bincount(self.offset).astype(np.float64)
        self.counts[self.counts == 0] = 1.0

    def means(self, w):
        return np.bincount(self.offset, weights=w.ravel(), minlength=len(self.counts)) / self.counts

    def project(self, w):
        """Nearest matrix in the affine set (class constant, zeros, ``G00 = 1``)."""
        m = self.means(w)
        m[0] = 0.0
        m[1] = 1.0
        return m[self.offset].reshape(self.size)

    def direction(self, w):
        """Projection onto the linear directions of the affine set, and the per-class means."""
        m = self.means(w)
        m[:2] = 0.0
        return m[self.offset].reshape(self.size), m


def _psd_part(w, eig):
    vals, vecs = eig(w)
    pos = np.maximum(vals, 0.0)
    return (vecs * pos) @ vecs.T, vals


def solve_sdp(sdp, tol=1e-6, rho=None, max_iter=100000, eig="numpy", check_every=50):
    """Maximize ``<H, G>`` over the relaxation by ADMM in the reduced basis.

    Alternates the class-averaging projection with projection onto the
    PSD cone (``eig="numpy"`` uses LAPACK, ``eig="jacobi"`` the cyclic Jacobi
    routine).  Stops when the combined primal and dual residual is below ``tol``
    and reports a bound derived from the scaled dual variable.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    eigf = np.linalg.eigh if eig == "numpy" else jacobi_eigh
    h = sdp.reduced_objective
    avg = _ClassAverager(sdp.reduced_classes)
    n = h.shape[0]
    if rho is None:
        rho = max(np.abs(h).max(), 1e-3)
    z = np.zeros((n, n))
    z[0, 0] = 1.0
    u = np.zeros((n, n))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = avg.project(z - u + h / rho)
        z_old = z
        z, _ = _psd_part(g + u, eigf)
        u = u + g - z
        if it % check_every == 0:
            prim = np.abs(g - z).max()
            dual = rho * np.abs(z - z_old).max()
            if max(prim, dual) < tol:
                full = sdp.transform @ z @ sdp.transform.T
                if sdp.residual(full) < tol:
                    converged = True
                    break
    return _certify(sdp, avg, h, g, z, u, rho, it, converged, eigf)


def _certify(sdp, avg, h, g, z, u, rho, it, converged, eigf):
    s, _ = _psd_part(-rho * u, eigf)  # dual slack, PSD by construction
    dual_dir, means = avg.direction(h + s)
    counts = avg.counts.copy()
    counts[:2] = 0.0
    margin = float(np.sum(np.abs(means) * counts))
    bound = float(h[0, 0] + s[0, 0]) + margin
    full = sdp.transform @ z @ sdp.transform.T
    vals = np.linalg.eigvalsh(full)
    return SdpResult(
        bound=bound,
        objective=float(np.sum(h * z)),
        primal_residual=float(np.abs(g - z).max()),
        constraint_residual=sdp.residual(full),
        psd_residual=float(max(0.0, -vals[0])),
        margin=margin,
        iterations=it,
        converged=converged,
        moments=full,
    )


def npa_bound(g, tol=1e-6, **kw):
    return solve_sdp(build_1mn(g), tol=tol, **kw)


# -- text dump -----------------------------------------------------------------------

def dump_sdp(sdp, fh):
    """Write the full problem in a sparse text format.

    Lines: ``dim N``; ``objective K`` followed by ``K`` lines ``i j h_ij``
    (upper triangle, ``<H, G> = sum_{i<=j} w_ij G_ij`` with ``w_ij = 2 h_ij``
    off the diagonal); ``constraints R`` followed by ``R`` lines
    ``rhs t i1 j1 c1 ... it jt ct`` meaning ``sum c G_ij = rhs``.
    Indices are zero-based in monomial order.
    """
    n = sdp.dim
    fh.write(f"dim {n}\n")
    iu, ju = np.nonzero(np.triu(sdp.objective))
    fh.write(f"objective {len(iu)}\n")
    for i, j in zip(iu, ju):
        fh.write(f"{i} {j} {float(sdp.objective[i, j])!r}\n")
    mat = sdp.constraints
    fh.write(f"constraints {mat.shape[0]}\n")
    for r in range(mat.shape[0]):
        lo, hi = mat.indptr[r], mat.indptr[r + 1]
        terms = " ".join(f"{c // n} {c % n} {v:g}" for c, v in zip(mat.indices[lo:hi], mat.data[lo:hi]))
        fh.write(f"{sdp.rhs[r]:g} {hi - lo} {terms}\n")
