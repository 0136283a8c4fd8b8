"""Brute-force reference computations that share no code with the library."""
from itertools import product

import numpy as np


def cells_of(mask):
    return [tuple(c) for c in np.argwhere(mask)]


def measurable_subsets(support, pi):
    """All subsets F of the support cells with F a union of pi-traces."""
    cells = cells_of(support)
    out = []
    for bits in product([0, 1], repeat=len(cells)):
        F = {c for c, b in zip(cells, bits) if b}
        ok = True
        for c in cells:
            for d in cells:
                if pi[c] == pi[d] and ((c in F) != (d in F)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(frozenset(F))
    return out


def atoms_of_algebra(support, events):
    """Partition of the support cells into the atoms of an event algebra."""
    cells = cells_of(support)
    groups = {}
    for c in cells:
        key = tuple(c in F for F in events)
        groups.setdefault(key, set()).add(c)
    return {frozenset(g) for g in groups.values()}


def brute_intersection_blocks(support, piA, piB):
    a = set(measurable_subsets(support, piA))
    b = set(measurable_subsets(support, piB))
    return atoms_of_algebra(support, sorted(a & b, key=sorted))


def blocks_as_sets(blocks):
    """Block label grid (-1 off support) to a set of frozensets of cells."""
    out = {}
    for c in cells_of(blocks >= 0):
        out.setdefault(int(blocks[c]), set()).add(c)
    return {frozenset(v) for v in out.values()}


def unions(pi):
    labels = sorted(set(np.asarray(pi).ravel().tolist()))
    for bits in product([0, 1], repeat=len(labels)):
        chosen = {l for l, b in zip(labels, bits) if b}
        yield np.isin(pi, list(chosen))


def brute_condition(support, piA, piB, conclusion):
    """Direct double loop over sigma(piA) x sigma(piB) with support arithmetic."""
    def null(E):
        return not (E & support).any()

    for A in unions(piA):
        for B in unions(piB):
            if null(A & B) and null(~A & ~B):
                if not conclusion(A, B):
                    return False
    return True


def plain_intersection_events(piA, piB):
    """Events measurable for both partitions (no completion)."""
    a = {tuple(E.ravel()) for E in unions(piA)}
    return [E for E in unions(piB) if tuple(E.ravel()) in a]


def ae_equal(support, E, F):
    return not ((E ^ F) & support).any()


def rectangle_scan(support):
    """First (U, V) with P(UxV) = P(U^c x V^c) = 0 and positive marginals."""
    m, n = support.shape
    for ub in product([False, True], repeat=m):
        u = np.array(ub)
        for vb in product([False, True], repeat=n):
            v = np.array(vb)
            if support[np.ix_(u, v)].any() or support[np.ix_(~u, ~v)].any():
                continue
            if support[u].any() and support[:, v].any():
                return u, v
    return None
