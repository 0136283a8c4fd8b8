"""k-component joints and the systematic-scan Gibbs sampler.

The relevant sub-sigma-fields are ``A_i = sigma(all coordinates but i)``,
generated by the fibers along axis i.  On a finite space the completions
``A_i`` meet only in null sets exactly when the support is connected under
single-coordinate moves; :func:`oracle_d_trivial` checks that claim by brute
force and the test suite keeps the two in lockstep.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np

from ._unionfind import UnionFind
from .errors import BudgetExceeded, InvariantViolation, JointError
from .kernel import GibbsKernel
from .sigma import _block_masks, _mask_of, block_unions, common_coarsening
from .space import FiniteJoint

THEOREM_32_BUDGET_BITS = 24
D_TRIVIAL_MAX_CELLS = 16


@dataclass(frozen=True, eq=False)
class KJoint:
    weights: np.ndarray
    prob: np.ndarray
    support: np.ndarray

    @property
    def shape(self):
        return self.prob.shape

    @property
    def k(self):
        return self.prob.ndim

    def __repr__(self):
        return f"KJoint(shape={self.shape}, support={int(self.support.sum())} cells)"


def build_kjoint(weights, shape: Optional[Sequence[int]] = None) -> KJoint:
    """Validate a k-dimensional weight tensor (or a flat list plus ``shape``)."""
    w = np.array(weights, dtype=float)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape) or w.size != int(np.prod(shape)):
            raise JointError(f"shape error: {w.size} weights for shape {shape}")
        w = w.reshape(shape)
    if w.ndim < 2 or w.size == 0:
        raise JointError(f"shape error: need k >= 2 axes, got shape {w.shape}")
    if np.any(~np.isfinite(w) | (w < 0)):
        raise JointError("invalid weight: entries must be finite and >= 0")
    total = w.sum()
    if not total > 0:
        raise JointError("empty distribution: all weights are zero")
    w.setflags(write=False)
    prob = w / total
    prob.setflags(write=False)
    support = w > 0
    support.setflags(write=False)
    return KJoint(weights=w, prob=prob, support=support)


def embed(J: FiniteJoint) -> KJoint:
    return build_kjoint(J.weights)


def fiber_partition(shape, axis: int) -> np.ndarray:
    """Partition generating ``sigma(all coordinates but axis)``."""
    idx = np.indices(shape)
    others = [idx[d] for d in range(len(shape)) if d != axis]
    if not others:
        return np.zeros(shape, dtype=int)
    return np.ravel_multi_index(others, [shape[d] for d in range(len(shape)) if d != axis])


def hamming_atoms(KJ: KJoint) -> np.ndarray:
    """Components of the support under single-coordinate moves (-1 off support)."""
    cells = [tuple(c) for c in np.argwhere(KJ.support)]
    uf = UnionFind(len(cells))
    for axis in range(KJ.k):
        first = {}
        for n, c in enumerate(cells):
            key = c[:axis] + c[axis + 1:]
            if key in first:
                uf.union(first[key], n)
            else:
                first[key] = n
    atoms = np.full(KJ.shape, -1, dtype=int)
    for c, lab in zip(cells, uf.labels(range(len(cells)))):
        atoms[c] = lab
    return atoms


@dataclass(frozen=True, eq=False)
class KAdmissibility:
    admissible: bool
    atoms: np.ndarray
    atom_count: int
    witness: Optional[tuple] = None


def check_k_admissible(KJ: KJoint) -> KAdmissibility:
    """Admissible iff the support is one Hamming component.

    When it is not, the witness is the pair of masks of atoms 0 and 1.
    """
    atoms = hamming_atoms(KJ)
    count = int(atoms.max()) + 1
    witness = (atoms == 0, atoms == 1) if count > 1 else None
    return KAdmissibility(count == 1, atoms, count, witness)


def oracle_theorem_32(KJ: KJoint, partitions: Sequence) -> bool:
    """Exhaustive check of the k-field null-set condition.

    For all ``A_i`` in ``sigma(partitions[i])`` with
    ``P(cap A_i) + P(cap A_i^c) = 1``, some ``A_i`` must be a.s. equal to an
    event of ``cap_i sigma(partitions[i])``.
    """
    partitions = [np.asarray(p) for p in partitions]
    if len(partitions) < 2 or any(p.shape != KJ.shape for p in partitions):
        raise JointError("shape error: need k >= 2 partitions matching the joint")
    masks = [_block_masks(p) for p in partitions]
    if sum(len(m) for m in masks) > THEOREM_32_BUDGET_BITS:
        raise BudgetExceeded("budget exceeded: too many event tuples to enumerate")
    S = _mask_of(KJ.support)
    d_traces = {D & S for D in block_unions(_block_masks(common_coarsening(*partitions)))}
    # collapse each sigma-field to its distinct traces on the support
    trace_sets = [sorted({A & S for A in block_unions(m)}) for m in masks]

    def search(i, inter, comp_inter, chosen):
        if (inter | comp_inter) != S:
            return True  # hypothesis already fails on this branch
        if i == len(trace_sets):
            return any(a in d_traces for a in chosen)
        for a in trace_sets[i]:
            if not search(i + 1, inter & a, comp_inter & (S & ~a), chosen + [a]):
                return False
        return True

    return search(0, S, S, [])


def oracle_d_trivial(KJ: KJoint) -> bool:
    """Enumerate every event and test membership in all completed ``A_i``.

    ``F`` is in the completion of ``A_i`` iff ``F & support`` takes every
    axis-i fiber's support cells wholly or not at all.
    """
    n_cells = KJ.support.size
    if n_cells > D_TRIVIAL_MAX_CELLS:
        raise BudgetExceeded(f"budget exceeded: {n_cells} cells > {D_TRIVIAL_MAX_CELLS}")
    S = _mask_of(KJ.support)
    fibers = []
    for axis in range(KJ.k):
        for f in _block_masks(fiber_partition(KJ.shape, axis)):
            if f & S:
                fibers.append(f & S)
    bits = [1 << k for k in range(n_cells) if (S >> k) & 1]
    for sub in range(1, (1 << len(bits)) - 1):
        F = 0
        for k, b in enumerate(bits):
            if (sub >> k) & 1:
                F |= b
        if all((F & f) in (0, f) for f in fibers):
            return False
    return True


def _coordinate_update(KJ: KJoint, axis: int):
    """Matrix resampling one coordinate from its full conditional; zero rows where undefined."""
    shape = KJ.shape
    N = KJ.prob.size
    T = np.zeros((N, N))
    defined = np.zeros(N, dtype=bool)
    flat_prob = KJ.prob.ravel()
    fibers = _fibers(shape, axis)
    for cells in fibers:
        w = flat_prob[cells]
        total = w.sum()
        if total > 0:
            T[np.ix_(cells, cells)] = (w / total)[None, :]
            defined[cells] = True
    return T, defined


def _fibers(shape, axis):
    pi = fiber_partition(shape, axis).ravel()
    groups = {}
    for k, b in enumerate(pi.tolist()):
        groups.setdefault(b, []).append(k)
    return [np.array(g) for g in groups.values()]


def build_k_kernel(KJ: KJoint, scan_order: Optional[Sequence[int]] = None) -> GibbsKernel:
    """Systematic-scan kernel: resample axes in ``scan_order`` (0-based).

    The default order is last axis first, down to axis 0, which for ``k = 2``
    is the Y-then-X sweep of :func:`gibbsgate.kernel.build_kernel`.  States
    are the cells where the first update's conditional is defined.
    """
    k = KJ.k
    order = list(range(k - 1, -1, -1)) if scan_order is None else [int(a) for a in scan_order]
    if sorted(order) != list(range(k)):
        raise JointError(f"scan_order must be a permutation of 0..{k - 1}")
    N = KJ.prob.size
    M = np.eye(N)
    first_defined = None
    for axis in order:
        T, defined = _coordinate_update(KJ, axis)
        if first_defined is None:
            first_defined = defined
        M = M @ T
    live = np.nonzero(first_defined)[0]
    K = M[np.ix_(live, live)]
    if not np.allclose(K.sum(axis=1), 1.0, atol=1e-12, rtol=0):
        raise InvariantViolation("scan reached a state with an undefined conditional")
    K.setflags(write=False)
    states = tuple(tuple(int(c) for c in np.unravel_index(i, KJ.shape)) for i in live)
    target = KJ.prob.ravel()[live]
    return GibbsKernel(states=states, matrix=K, target=target, order="".join(map(str, order)))


def all_fiber_partitions(shape):
    return [fiber_partition(shape, a) for a in range(len(shape))]


def uniform_supports(shape):
    """Every nonempty support pattern on ``shape`` with uniform mass."""
    n = int(np.prod(shape))
    for bits in product([0, 1], repeat=n):
        if any(bits):
            yield build_kjoint(np.array(bits, dtype=float).reshape(shape))
