"""Relabeling symmetries of games and behaviors.

A symmetry is an output relabeling ``pi`` shared by all players, one input
relabeling ``sigma_i`` per player and a player permutation ``tau``.  It maps
the game index ``(x, a_1..a_m)`` to ``(pi[x], sigma_1[a_tau(1)], ...)`` and
the behavior index ``(x_1..x_m, a_1..a_m)`` to
``(pi[x_tau(1)], ..., sigma_1[a_tau(1)], ...)``.  These maps preserve the
no-signalling polytope, and when they also fix ``P`` they fix the winning
probability, so an optimum can be averaged over the generated group.
"""
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .rational import RATIONAL


@dataclass(frozen=True)
class Relabeling:
    out_perm: tuple
    in_perms: tuple
    party_perm: tuple

    @property
    def num_players(self):
        return len(self.party_perm)

    def game_index_map(self, shape):
        """Flat permutation ``p`` with ``P'[i] = P[p[i]]``."""
        idx = np.indices(shape).reshape(len(shape), -1)
        m = self.num_players
        new = [np.asarray(self.out_perm)[idx[0]]]
        for i in range(m):
            new.append(np.asarray(self.in_perms[i])[idx[1 + self.party_perm[i]]])
        return np.ravel_multi_index(tuple(new), shape)

    def behavior_index_map(self, shape):
        idx = np.indices(shape).reshape(len(shape), -1)
        m = self.num_players
        pi = np.asarray(self.out_perm)
        new = [pi[idx[self.party_perm[i]]] for i in range(m)]
        for i in range(m):
            new.append(np.asarray(self.in_perms[i])[idx[m + self.party_perm[i]]])
        return np.ravel_multi_index(tuple(new), shape)


def _base_power(size):
    """Largest ``n`` and matching ``k`` with ``k**n == size`` (``n >= 2`` or ``None``)."""
    for n in range(int(np.log2(size)) if size > 1 else 0, 1, -1):
        k = round(size ** (1.0 / n))
        for kk in (k - 1, k, k + 1):
            if kk >= 2 and kk ** n == size:
                return kk, n
    return None


def _slot_map(k, n, fn):
    """Permutation of ``range(k**n)`` acting digitwise (slot ``s`` is digit ``s``)."""
    out = []
    for v in range(k ** n):
        digits = [(v // k ** s) % k for s in range(n)]
        new = fn(digits)
        out.append(sum(d * k ** s for s, d in enumerate(new)))
    return tuple(out)


def candidate_symmetries(x_size, input_sizes):
    """Generators worth testing against a game of the given shape.

    Player transpositions, and when the referee and input alphabets
    coincide: joint relabelings of all alphabets, plus slot swaps and
    per-slot symbol swaps for alphabets of size ``k**n``.
    """
    m = len(input_sizes)
    ident_x = tuple(range(x_size))
    ident_in = tuple(tuple(range(s)) for s in input_sizes)
    ident_party = tuple(range(m))
    cands = []
    for i in range(m - 1):
        if input_sizes[i] == input_sizes[i + 1]:
            tau = list(ident_party)
            tau[i], tau[i + 1] = tau[i + 1], tau[i]
            cands.append(Relabeling(ident_x, ident_in, tuple(tau)))
    if all(s == x_size for s in input_sizes):
        joint = []
        bp = _base_power(x_size)
        if bp is not None:
            k, n = bp
            for s in range(n - 1):
                def swap(d, s=s):
                    d = list(d)
                    d[s], d[s + 1] = d[s + 1], d[s]
                    return d
                joint.append(_slot_map(k, n, swap))
            for s in range(n):
                def flip(d, s=s):
                    d = list(d)
                    d[s] = {0: 1, 1: 0}.get(d[s], d[s])
                    return d
                joint.append(_slot_map(k, n, flip))
                if k > 2:
                    def cyc(d, s=s):
                        d = list(d)
                        d[s] = (d[s] + 1) % k
                        return d
                    joint.append(_slot_map(k, n, cyc))
        joint.append(tuple([1, 0] + list(range(2, x_size))))
        if x_size > 2:
            joint.append(tuple(list(range(1, x_size)) + [0]))
        for perm in joint:
            cands.append(Relabeling(perm, (perm,) * m, ident_party))
    return cands


def game_symmetries(g, candidates=None):
    """Candidates that leave the game table unchanged (exactly, or within 1e-12)."""
    if candidates is None:
        candidates = candidate_symmetries(g.x_size, g.input_sizes)
    flat = g.flat()
    out = []
    for s in candidates:
        moved = flat[s.game_index_map(g.probs.shape)]
        if g.scalar == RATIONAL:
            same = bool((moved == flat).all())
        else:
            same = np.allclose(moved, flat, atol=1e-12, rtol=0)
        if same:
            out.append(s)
    return out


def orbits(size, perms):
    """Orbit label per element under the group generated by ``perms``.

    Labels are numbered by first occurrence, so orbit 0 holds element 0.
    """
    if not perms:
        return np.arange(size)
    src = np.concatenate([np.arange(size)] * len(perms))
    dst = np.concatenate([np.asarray(p) for p in perms])
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(size, size))
    _, labels = connected_components(graph, directed=True, connection="weak")
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    relabel = np.empty(len(order), dtype=np.int64)
    relabel[order] = np.arange(len(order))
    return relabel[labels]


def group_closure(perms, limit=100000):
    """All elements of the permutation group generated by ``perms`` (as tuples)."""
    if not perms:
        return []
    ident = tuple(range(len(perms[0])))
    seen = {ident}
    frontier = [ident]
    gens = [np.asarray(p) for p in perms]
    while frontier:
        nxt = []
        for el in frontier:
            arr = np.asarray(el)
            for g in gens:
                comp = tuple(arr[g].tolist())
                if comp not in seen:
                    seen.add(comp)
                    nxt.append(comp)
                    if len(seen) > limit:
                        raise ValueError("symmetry group larger than the closure limit")
        frontier = nxt
    return sorted(seen)


