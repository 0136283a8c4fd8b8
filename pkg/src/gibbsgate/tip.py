"""Trivial-intersection-property (TIP) sets, communication and mixtures.

A set ``H`` of positive ``mu x nu`` mass is TIP when the measure ``Q_H``
(``mu x nu`` conditioned on H) is Gibbs-admissible.  The generators at the
bottom build finite versions of the classic counterexamples so they can be
run as tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InvariantViolation, JointError
from .sigma import RECTANGLE_BUDGET, check_gibbs_admissible
from .space import FiniteJoint, Rectangle, build_joint


@dataclass(frozen=True)
class TipReport:
    tip: bool
    components: int


@dataclass(frozen=True)
class Communication:
    """Result of :func:`communicates`.

    ``via`` is ``"i"`` (a shared column) or ``"ii"`` (a shared row) and
    ``index`` the first such column or row.
    """

    communicates: bool
    via: Optional[str] = None
    index: Optional[int] = None

    def __bool__(self):
        return self.communicates


@dataclass(frozen=True)
class UnionChainReport:
    valid: bool
    union_tip: Optional[bool]
    failed_step: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self):
        return self.valid


@dataclass(frozen=True, eq=False)
class Mixture:
    """Finite mixture ``sum_k weights[k] * components[k]``."""

    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        comps = tuple(self.components)
        if w.ndim != 1 or len(w) != len(comps) or len(comps) == 0:
            raise JointError("shape error: one positive weight per component required")
        if not np.all(w > 0) or abs(w.sum() - 1.0) > 1e-12:
            raise JointError("invalid weight: mixture weights must be positive and sum to 1")
        shape = comps[0].shape
        if any(c.shape != shape for c in comps):
            raise JointError("shape error: mixture components have different shapes")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)


def _as_event(H, shape=None):
    H = np.asarray(H, dtype=bool)
    if H.ndim != 2 or (shape is not None and H.shape != shape):
        raise JointError(f"shape error: event shape {H.shape}")
    return H


def conditioned(mu, nu, H) -> FiniteJoint:
    """``Q_H``: the product of the normalized base measures, conditioned on H."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    H = _as_event(H, (len(mu), len(nu)))
    if not H.any():
        raise JointError("empty distribution: H is mu x nu-null")
    mu0 = mu / mu.sum()
    nu0 = nu / nu.sum()
    return build_joint(np.outer(mu0, nu0) * H, mu=mu, nu=nu)


def is_tip(mu, nu, H) -> TipReport:
    report = check_gibbs_admissible(conditioned(mu, nu, H))
    return TipReport(report.admissible, report.atom_count)


def communicates(mu, nu, F, G) -> Communication:
    """Whether F and G share a column (i) or a row (ii) where both sections are nonempty.

    With strictly positive base measures, a section has positive measure iff
    it is nonempty, and the existential over a positive-measure band reduces
    to a single column or row.
    """
    F = _as_event(F, (len(mu), len(nu)))
    G = _as_event(G, F.shape)
    cols = np.nonzero(F.any(axis=0) & G.any(axis=0))[0]
    if cols.size:
        return Communication(True, "i", int(cols[0]))
    rows = np.nonzero(F.any(axis=1) & G.any(axis=1))[0]
    if rows.size:
        return Communication(True, "ii", int(rows[0]))
    return Communication(False)


def tip_union_chain(mu, nu, H_list: Sequence) -> UnionChainReport:
    """Certify that the union of ``H_list`` is TIP via consecutive communication.

    The certificate needs every member TIP and each member communicating with
    the next.  When it holds, TIP of the union is recomputed directly and a
    disagreement raises :class:`InvariantViolation`.
    """
    H_list = [_as_event(H, (len(mu), len(nu))) for H in H_list]
    if not H_list:
        raise JointError("empty list of sets")
    for k, H in enumerate(H_list):
        if not is_tip(mu, nu, H).tip:
            return UnionChainReport(False, None, k, "not TIP")
    for k in range(len(H_list) - 1):
        if not communicates(mu, nu, H_list[k], H_list[k + 1]):
            return UnionChainReport(False, None, k + 1, "no communication")
    union = np.logical_or.reduce(H_list)
    union_tip = is_tip(mu, nu, union).tip
    if not union_tip:
        raise InvariantViolation("communicating TIP chain with a non-TIP union")
    return UnionChainReport(True, True)


def corollary_37_certificate(J: FiniteJoint) -> Optional[Rectangle]:
    """Find ``(U0, V0)`` with ``(U0 x Y) u (X x V0) >= {f > 0} >= U0 x V0`` and ``P(U0 x V0) > 0``.

    Candidates are tried with V0 in decreasing bitmask order, then U0 in
    decreasing bitmask order, so the full column set and maximal row sets
    come first.  A found certificate is cross-checked against
    :func:`check_gibbs_admissible`.
    """
    m, n = J.shape
    if m + n > RECTANGLE_BUDGET:
        raise BudgetExceeded(f"budget exceeded: {m} + {n} > {RECTANGLE_BUDGET}")
    S = J.support
    row_bits = [sum(1 << j for j in range(n) if S[i, j]) for i in range(m)]
    for V in range((1 << n) - 1, 0, -1):
        for U in range((1 << m) - 1, 0, -1):
            rows = [i for i in range(m) if (U >> i) & 1]
            if any(row_bits[i] & V != V for i in rows):
                continue  # U x V not inside the support
            if any(row_bits[i] & ~V for i in range(m) if not (U >> i) & 1):
                continue  # support escapes (U x Y) u (X x V)
            cert = Rectangle(
                np.array([(U >> i) & 1 for i in range(m)], dtype=bool),
                np.array([(V >> j) & 1 for j in range(n)], dtype=bool),
            )
            if not check_gibbs_admissible(J).admissible:
                raise InvariantViolation("sandwich certificate on a non-admissible joint")
            return cert
    return None


def mixture_joint(M: Mixture) -> FiniteJoint:
    first = M.components[0]
    prob = sum(w * c.prob for w, c in zip(M.weights, M.components))
    return build_joint(prob, first.x_labels, first.y_labels, mu=first.mu, nu=first.nu)


def check_condition_9(M: Mixture) -> bool:
    """If some component gives a rectangle mass 1, every component charges it.

    A component gives ``U x V`` mass 1 iff its support lies inside, and the
    smallest such rectangle is the support's bounding box, so it is enough to
    ask every component to charge every other component's bounding box.
    """
    m, n = M.components[0].shape
    if m + n > RECTANGLE_BUDGET:
        raise BudgetExceeded(f"budget exceeded: {m} + {n} > {RECTANGLE_BUDGET}")
    for c1 in M.components:
        box = np.outer(c1.support.any(axis=1), c1.support.any(axis=0))
        if any(not (c2.support & box).any() for c2 in M.components):
            return False
    return True


def check_condition_10(M: Mixture) -> bool:
    """Every component support is TIP and every pair of supports communicates."""
    first = M.components[0]
    mu, nu = first.mu, first.nu
    supports = [c.support for c in M.components]
    if not all(is_tip(mu, nu, S).tip for S in supports):
        return False
    for a in supports:
        for b in supports:
            if not communicates(mu, nu, a, b):
                return False
    if not check_gibbs_admissible(mixture_joint(M)).admissible:
        raise InvariantViolation("TIP, pairwise communicating components but the mixture is not admissible")
    return True


# --------------------------------------------------------------------------
# counterexample generators


def gen_example_316(n: int):
    """Decreasing TIP sets whose intersection is not TIP.

    On an ``n x n`` grid with ``h = n // 2``, F is the lower-left ``h x h``
    block and G the upper-right block.  ``H_k`` joins F to a copy of G whose
    rows are extended downward by ``h - k + 1`` rows, which makes it overlap
    F's rows; the extension shrinks with k and vanishes in the intersection.

    Returns ``(H_list, intersection)``.
    """
    if n < 2:
        raise JointError("grid too small to separate two blocks (need n >= 2)")
    h = n // 2
    F = np.zeros((n, n), dtype=bool)
    F[:h, :h] = True
    H_list = []
    for k in range(1, h + 1):
        H = F.copy()
        H[h - (h - k + 1):, h:] = True
        H_list.append(H)
    G = np.zeros((n, n), dtype=bool)
    G[h:, h:] = True
    return H_list, F | G


def gen_example_317(x_size: int, I) -> FiniteJoint:
    """Uniform law on ``{(x, y): x, y in I or x, y not in I}``."""
    I = np.zeros(x_size, dtype=bool) if I is None else _row_subset(I, x_size)
    if not I.any() or I.all():
        raise JointError("degenerate I: must be a nonempty proper subset")
    support = np.outer(I, I) | np.outer(~I, ~I)
    return build_joint(support.astype(float))


def _row_subset(I, size):
    I = np.asarray(I)
    if I.dtype == bool:
        if I.shape != (size,):
            raise JointError("shape error: I mask has the wrong length")
        return I
    mask = np.zeros(size, dtype=bool)
    mask[np.asarray(I, dtype=int)] = True
    return mask


def example_317_witness(x_size: int, I) -> Rectangle:
    """The rectangle the admissibility check should report for :func:`gen_example_317`."""
    I = _row_subset(I, x_size)
    block = I if I[0] else ~I
    return Rectangle(~block, block)


def tip_with_nontip_complement():
    """A 3x3 TIP set whose complement is not TIP.

    The complement is ``{(0,0)}`` plus ``{(1,1), (1,2), (2,2)}``: two pieces
    with no shared row or column.  The set itself is linked through the cell
    ``(2, 1)``.
    """
    H = np.ones((3, 3), dtype=bool)
    for cell in [(0, 0), (1, 1), (1, 2), (2, 2)]:
        H[cell] = False
    return H
