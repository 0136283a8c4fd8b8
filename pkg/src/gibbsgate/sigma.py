"""Sub-sigma-fields modulo null sets on finite product spaces.

A finite sub-sigma-field is generated by a partition, stored as an integer grid
of block ids (dense from 0).  Its completion ``sigma(G u N)`` is the trace of
that partition on the support: an event ``E`` is measurable iff ``E & support``
is a union of traced blocks.

The exhaustive checkers encode events as Python ints, bit ``k`` standing for
the ``k``-th cell in row-major order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._unionfind import UnionFind
from .errors import BudgetExceeded, JointError
from .space import (
    FiniteJoint,
    Rectangle,
    check_event,
    conditional_alpha,
    conditional_beta,
    positive_rows,
)

PAIR_BUDGET_BITS = 20
RECTANGLE_BUDGET = 24


# --------------------------------------------------------------------------
# partitions


def canonical_partition(labels) -> np.ndarray:
    """Relabel block ids densely, in order of first appearance (row-major)."""
    labels = np.asarray(labels)
    flat = labels.ravel()
    out = np.empty(flat.shape, dtype=int)
    seen = {}
    for k, lab in enumerate(flat.tolist()):
        out[k] = seen.setdefault(lab, len(seen))
    return out.reshape(labels.shape)


def row_partition(shape) -> np.ndarray:
    """Partition generating sigma(X): one block per row."""
    m, n = shape
    return np.repeat(np.arange(m), n).reshape(m, n)


def column_partition(shape) -> np.ndarray:
    """Partition generating sigma(Y): one block per column."""
    m, n = shape
    return np.tile(np.arange(n), m).reshape(m, n)


def trivial_partition(shape) -> np.ndarray:
    return np.zeros(shape, dtype=int)


def discrete_partition(shape) -> np.ndarray:
    return np.arange(int(np.prod(shape))).reshape(shape)


def common_coarsening(*partitions) -> np.ndarray:
    """Finest partition coarser than every argument.

    Its blocks generate the plain set-algebra intersection of the
    sigma-fields generated by the arguments.
    """
    shape = np.shape(partitions[0])
    uf = UnionFind(int(np.prod(shape)))
    for pi in partitions:
        pi = np.asarray(pi)
        if pi.shape != shape:
            raise JointError("shape error: partitions have different shapes")
        first = {}
        for k, b in enumerate(pi.ravel().tolist()):
            if b in first:
                uf.union(first[b], k)
            else:
                first[b] = k
    return np.array(uf.labels(range(len(uf.parent))), dtype=int).reshape(shape)


# --------------------------------------------------------------------------
# completed sigma-fields


@dataclass(frozen=True, eq=False)
class CompletedSigma:
    """A sub-sigma-field modulo P-null sets.

    ``blocks`` holds a dense block id for every support cell and -1 elsewhere.
    """

    base: FiniteJoint
    blocks: np.ndarray

    @property
    def block_count(self):
        return int(self.blocks.max()) + 1 if self.blocks.size else 0

    def block_masks(self):
        return [self.blocks == b for b in range(self.block_count)]

    def is_measurable(self, E) -> bool:
        E = check_event(self.base, E) & self.base.support
        for b in range(self.block_count):
            inside = E[self.blocks == b]
            if inside.any() and not inside.all():
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, CompletedSigma):
            return NotImplemented
        return np.array_equal(self.base.support, other.base.support) and np.array_equal(
            self.blocks, other.blocks
        )

    def __repr__(self):
        return f"CompletedSigma(blocks={self.block_count})"


def _trace(support, labels):
    """Canonical block ids for support cells, -1 off support."""
    out = np.full(support.shape, -1, dtype=int)
    seen = {}
    for idx in zip(*np.nonzero(support)):
        out[idx] = seen.setdefault(labels[idx], len(seen))
    return out


def complete(J: FiniteJoint, pi) -> CompletedSigma:
    """Completion of the sigma-field generated by partition ``pi``."""
    pi = np.asarray(pi)
    if pi.shape != J.shape:
        raise JointError(f"shape error: partition shape {pi.shape} vs joint {J.shape}")
    return CompletedSigma(base=J, blocks=_trace(J.support, pi))


def intersect_completed(S1: CompletedSigma, S2: CompletedSigma) -> CompletedSigma:
    """Intersection of two completed sigma-fields.

    Support cells are linked when they share a block of either argument; the
    connected components are the blocks of the result.
    """
    J = S1.base
    if S2.base is not J and not (
        S1.base.shape == S2.base.shape
        and np.array_equal(S1.base.support, S2.base.support)
        and np.array_equal(S1.base.prob, S2.base.prob)
    ):
        raise JointError("base mismatch: completed sigma-fields over different joints")
    cells = list(zip(*np.nonzero(J.support)))
    index = {c: k for k, c in enumerate(cells)}
    uf = UnionFind(len(cells))
    for S in (S1, S2):
        first = {}
        for c in cells:
            b = int(S.blocks[c])
            if b in first:
                uf.union(first[b], index[c])
            else:
                first[b] = index[c]
    labels = np.full(J.shape, -1, dtype=int)
    for c, lab in zip(cells, uf.labels(range(len(cells)))):
        labels[c] = lab
    return CompletedSigma(base=J, blocks=labels)


def generated_completion(J: FiniteJoint, events) -> CompletedSigma:
    """Completion of the sigma-field generated by a list of events.

    Support cells are grouped by their membership pattern across the events.
    """
    events = [check_event(J, E) for E in events]
    if events:
        signature = np.stack(events, axis=-1)
        keys = np.empty(J.shape, dtype=object)
        for idx in np.ndindex(J.shape):
            keys[idx] = signature[idx].tobytes()
    else:
        keys = np.zeros(J.shape, dtype=int)
    return CompletedSigma(base=J, blocks=_trace(J.support, keys))


def sigma_x(J: FiniteJoint) -> CompletedSigma:
    return complete(J, row_partition(J.shape))


def sigma_y(J: FiniteJoint) -> CompletedSigma:
    return complete(J, column_partition(J.shape))


# --------------------------------------------------------------------------
# bitmask enumeration


def _mask_of(E) -> int:
    m = 0
    for k, bit in enumerate(np.asarray(E, dtype=bool).ravel().tolist()):
        if bit:
            m |= 1 << k
    return m


def _event_of(mask: int, shape) -> np.ndarray:
    n = int(np.prod(shape))
    return np.array([(mask >> k) & 1 for k in range(n)], dtype=bool).reshape(shape)


def _block_masks(pi) -> list[int]:
    pi = canonical_partition(pi)
    masks = [0] * (int(pi.max()) + 1)
    for k, b in enumerate(pi.ravel().tolist()):
        masks[b] |= 1 << k
    return masks


def block_unions(block_masks: list[int]) -> list[int]:
    """All ``2**len(block_masks)`` unions, indexed by subset bitmask."""
    out = [0] * (1 << len(block_masks))
    for s in range(1, len(out)):
        low = s & -s
        out[s] = out[s ^ low] | block_masks[low.bit_length() - 1]
    return out


def _check_pair_budget(a, b):
    if a + b > PAIR_BUDGET_BITS:
        raise BudgetExceeded(
            f"budget exceeded: 2^{a} x 2^{b} event pairs > 2^{PAIR_BUDGET_BITS}"
        )


@dataclass(frozen=True)
class ConditionResult:
    """Verdict of an exhaustive condition check.

    ``counterexample`` is a pair of events ``(A, B)`` (boolean grids) when the
    condition fails.
    """

    holds: bool
    counterexample: Optional[tuple] = None

    def __bool__(self):
        return self.holds


def _scan_condition(shape, support_mask, piA, piB, conclusion):
    """Shared scan for the null-set conditions on event pairs.

    For each B (in subset order), the hypothesis ``A & B`` null and
    ``A^c & B^c`` null pins the trace of A to ``S & ~B``; the conclusion only
    depends on traces.
    """
    a_masks, b_masks = _block_masks(piA), _block_masks(piB)
    _check_pair_budget(len(a_masks), len(b_masks))
    S = support_mask
    first_a = {}
    for A in block_unions(a_masks):
        first_a.setdefault(A & S, A)
    for B in block_unions(b_masks):
        A = first_a.get(S & ~B)
        if A is None:
            continue
        if not conclusion(A & S, B & S):
            return ConditionResult(False, (_event_of(A, shape), _event_of(B, shape)))
    return ConditionResult(True)


def _d_traces(piA, piB, S):
    return {D & S for D in block_unions(_block_masks(common_coarsening(piA, piB)))}


def check_condition_4(J: FiniteJoint, piA, piB) -> ConditionResult:
    """Null-set condition characterizing ``completion(A) & completion(B) == completion(A & B)``.

    Every A in sigma(piA), B in sigma(piB) with ``P(A & B) = P(A^c & B^c) = 0``
    must be a.s. equal to some D in ``sigma(piA) & sigma(piB)``, or B must.
    """
    S = _mask_of(J.support)
    traces = _d_traces(piA, piB, S)
    return _scan_condition(J.shape, S, piA, piB, lambda a, b: a in traces or b in traces)


def check_condition_5(J: FiniteJoint, piA, piB) -> ConditionResult:
    """Like :func:`check_condition_4` but concluding ``P(A) P(B) = 0``."""
    S = _mask_of(J.support)
    return _scan_condition(J.shape, S, piA, piB, lambda a, b: a == 0 or b == 0)


def check_condition_4star(family, piA, piB) -> ConditionResult:
    """:func:`check_condition_4` with null sets quantified over a family of measures.

    ``Q(F) = 0`` for every Q in the family iff F misses the union of the
    supports, so the scan runs against that union.
    """
    family = list(family)
    if not family:
        raise JointError("empty family")
    shape = family[0].shape
    if any(Q.shape != shape for Q in family):
        raise JointError("shape error: family members have different shapes")
    union = np.logical_or.reduce([Q.support for Q in family])
    S = _mask_of(union)
    traces = _d_traces(piA, piB, S)
    return _scan_condition(shape, S, piA, piB, lambda a, b: a in traces or b in traces)


def j_class(J: FiniteJoint, piA, piB) -> list[np.ndarray]:
    """Events ``A & B`` with ``P(A & B) + P(A^c & B^c) = 1``.

    The condition says A and B agree on the support.  Distinct events are
    returned in increasing bitmask order.
    """
    a_masks, b_masks = _block_masks(piA), _block_masks(piB)
    _check_pair_budget(len(a_masks), len(b_masks))
    S = _mask_of(J.support)
    by_trace = {}
    for A in block_unions(a_masks):
        by_trace.setdefault(A & S, []).append(A)
    found = set()
    for B in block_unions(b_masks):
        for A in by_trace.get(B & S, ()):
            found.add(A & B)
    return [_event_of(m, J.shape) for m in sorted(found)]


# --------------------------------------------------------------------------
# Gibbs admissibility: the sigma(X), sigma(Y) case


@dataclass(frozen=True, eq=False)
class AdmissibilityReport:
    """Outcome of :func:`check_gibbs_admissible`.

    ``atoms`` labels each support cell with its D-atom (-1 off support); atom
    0 contains the first support cell in row-major order.
    """

    admissible: bool
    witness: Optional[Rectangle]
    atoms: np.ndarray
    atom_count: int

    def atom_masses(self, J: FiniteJoint) -> np.ndarray:
        return np.array([J.prob[self.atoms == a].sum() for a in range(self.atom_count)])


def d_atoms(J: FiniteJoint) -> np.ndarray:
    """Connected components of the bipartite support graph, as support labels.

    Two support cells are linked when they share a row or a column.
    """
    cells = list(zip(*np.nonzero(J.support)))
    uf = UnionFind(len(cells))
    rows, cols = {}, {}
    for k, (i, j) in enumerate(cells):
        if i in rows:
            uf.union(rows[i], k)
        else:
            rows[i] = k
        if j in cols:
            uf.union(cols[j], k)
        else:
            cols[j] = k
    atoms = np.full(J.shape, -1, dtype=int)
    for c, lab in zip(cells, uf.labels(range(len(cells)))):
        atoms[c] = lab
    return atoms


def check_gibbs_admissible(J: FiniteJoint) -> AdmissibilityReport:
    """Decide whether the completed sigma(X) and sigma(Y) meet only in null sets.

    On a finite space this is connectivity of the bipartite graph whose
    vertices are the positive-marginal rows and columns and whose edges are
    the support cells.  When it is disconnected, the witness rectangle takes V
    as the columns of atom 0 and U as the positive rows outside atom 0.
    """
    atoms = d_atoms(J)
    count = int(atoms.max()) + 1
    witness = None
    if count > 1:
        first = atoms == 0
        u = positive_rows(J) & ~first.any(axis=1)
        v = first.any(axis=0)
        witness = Rectangle(u, v)
    return AdmissibilityReport(count == 1, witness, atoms, count)


def _rect_bits(J):
    """Per-row bitmask of support columns, plus positive row/col masks."""
    m, n = J.shape
    row_bits = [sum(1 << j for j in range(n) if J.support[i, j]) for i in range(m)]
    pos_rows = sum(1 << i for i in range(m) if row_bits[i])
    pos_cols = 0
    for rb in row_bits:
        pos_cols |= rb
    return row_bits, pos_rows, pos_cols


def _bits_to_bool(mask, size):
    return np.array([(mask >> k) & 1 for k in range(size)], dtype=bool)


def find_condition_6_violation(J: FiniteJoint) -> Optional[Rectangle]:
    """Brute-force scan of every rectangle ``U x V``.

    Returns the first (V ascending, then U ascending, as bitmasks) rectangle
    with ``P(U x V) = P(U^c x V^c) = 0`` and both marginals positive.
    """
    m, n = J.shape
    if m + n > RECTANGLE_BUDGET:
        raise BudgetExceeded(f"budget exceeded: {m} + {n} > {RECTANGLE_BUDGET}")
    row_bits, pos_rows, pos_cols = _rect_bits(J)
    full_rows, full_cols = (1 << m) - 1, (1 << n) - 1
    # cols_of[U] = columns charged by rows in U
    cols_of = [0] * (1 << m)
    for U in range(1, 1 << m):
        low = U & -U
        cols_of[U] = cols_of[U ^ low] | row_bits[low.bit_length() - 1]
    for V in range(1, 1 << n):
        if not V & pos_cols:
            continue
        for U in range(1, 1 << m):
            if not U & pos_rows:
                continue
            if cols_of[U] & V:  # P(U x V) > 0
                continue
            if cols_of[full_rows ^ U] & (full_cols ^ V):  # P(U^c x V^c) > 0
                continue
            return Rectangle(_bits_to_bool(U, m), _bits_to_bool(V, n))
    return None


def oracle_condition_6(J: FiniteJoint) -> bool:
    """Ground truth for :func:`check_gibbs_admissible` by exhaustive rectangle scan."""
    return find_condition_6_violation(J) is None


def witness_is_valid(J: FiniteJoint, r: Rectangle) -> bool:
    """``P(U x V) = P(U^c x V^c) = 0`` with ``P(X in U) > 0`` and ``P(Y in V) > 0``."""
    S = J.support
    return (
        not (S & r.event()).any()
        and not (S & r.complement_event()).any()
        and bool(S[r.u].any())
        and bool(S[:, r.v].any())
    )


def condition_7_values(J: FiniteJoint, r: Rectangle) -> np.ndarray:
    """``E(E(1_R | X) | Y) + E(E(1_R | Y) | X)`` on the grid (NaN where undefined)."""
    alpha = conditional_alpha(J)
    beta = conditional_beta(J)
    a, b = alpha.filled(), beta.filled()
    u = r.u.astype(float)
    v = r.v.astype(float)
    given_x = u * (a @ v)  # E(1_R | X = x)
    given_y = v * (b @ u)  # E(1_R | Y = y)
    xy = b @ given_x  # function of y
    yx = a @ given_y  # function of x
    vals = xy[None, :] + yx[:, None]
    undefined = ~np.outer(alpha.defined, beta.defined)
    return np.where(undefined, np.nan, vals)


def check_condition_7(J: FiniteJoint, r: Rectangle) -> bool:
    """Whether the two-step conditional sum is positive at every support cell."""
    vals = condition_7_values(J, r)
    return bool(np.all(vals[J.support] > 0))


def _alpha_zero_one(J):
    """Per positive row: column bitmask of the row's support."""
    m, n = J.shape
    rows = [i for i in range(m) if J.support[i].any()]
    bits = [sum(1 << j for j in range(n) if J.support[i, j]) for i in rows]
    return rows, bits


def _check_y_budget(J):
    if J.y_size > RECTANGLE_BUDGET:
        raise BudgetExceeded(f"budget exceeded: y_size {J.y_size} > {RECTANGLE_BUDGET}")


def check_condition_11(J: FiniteJoint):
    """Scan every ``V`` for ``alpha(X)(V)`` being 0-1 valued but not a.s. constant.

    ``alpha(x)(V)`` is 0 iff row x's support misses V and 1 iff it lies inside
    V, so the test is exact.  Returns ``(holds, witness_V)``.
    """
    _check_y_budget(J)
    n = J.y_size
    _, bits = _alpha_zero_one(J)
    for V in range(1, 1 << n):
        ones = [b & ~V == 0 for b in bits]
        zeros = [b & V == 0 for b in bits]
        if all(o or z for o, z in zip(ones, zeros)) and any(ones) and not all(ones):
            return False, _bits_to_bool(V, n)
    return True, None


def check_condition_12(J: FiniteJoint) -> bool:
    """``alpha(X)(V) > 0`` a.s. for every V with ``0 < P(alpha(X)(V) = 1) < 1``."""
    _check_y_budget(J)
    _, bits = _alpha_zero_one(J)
    for V in range(1, 1 << J.y_size):
        ones = [b & ~V == 0 for b in bits]
        if any(ones) and not all(ones):
            if any(b & V == 0 for b in bits):
                return False
    return True
