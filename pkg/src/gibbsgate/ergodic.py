"""Convergence in total variation, aperiodicity and minorization certificates.

Total variation is taken as the sup over events, i.e. half the L1 distance.
Functions here accept any :class:`~gibbsgate.kernel.GibbsKernel`, including the
k-component kernels of :mod:`gibbsgate.kgibbs`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import BudgetExceeded
from .kernel import GibbsKernel, build_kernel
from .sigma import RECTANGLE_BUDGET
from .space import FiniteJoint, density, positive_rows, row_density

ERGODIC_TAIL = 1e-9
NOISE_FLOOR = 1e-10


@dataclass(frozen=True)
class DoeblinCertificate:
    """Rectangle with ``s 1_{UxV} <= f`` and ``f_1 <= t 1_U``.

    ``epsilon = (s / t) nu(V)`` is the minorization constant and
    ``rate_bound = 1 - epsilon`` bounds the sup-start TV distance per step.
    """

    u: np.ndarray
    v: np.ndarray
    s: float
    t: float
    epsilon: float
    rate_bound: float


@dataclass(frozen=True)
class GeometricCertificate:
    u: np.ndarray
    v: np.ndarray
    s: float
    sup_outside: float
    threshold: float


@dataclass(frozen=True, eq=False)
class TvCurve:
    """``values[k]`` is the max over start states of TV(K^(k+1)(w, .), P)."""

    values: np.ndarray

    @property
    def steps(self):
        return np.arange(1, len(self.values) + 1)

    @property
    def ergodic(self):
        return bool(self.values[-1] < ERGODIC_TAIL)


@dataclass(frozen=True, eq=False)
class ErgodicityReport:
    s0_full: bool
    aperiodic: bool
    tv_curve: np.ndarray
    fitted_rate: Optional[float]
    certificate: Optional[DoeblinCertificate]
    ergodic: bool
    spectral_rate: float


def _target(J, K: GibbsKernel):
    return K.target if J is None else K.restrict(J.prob)


def compute_s0(J, K: GibbsKernel) -> np.ndarray:
    """States whose one-step law is absolutely continuous w.r.t. P."""
    P = _target(J, K)
    charged = K.matrix > 0
    return ~np.any(charged & (P == 0)[None, :], axis=1)


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    for name, r in (("p", p), ("q", q)):
        if np.any(r < 0) or abs(r.sum() - 1.0) > 1e-9:
            raise ValueError(f"{name} is not a probability vector")
    return 0.5 * float(np.abs(p - q).sum())


def tv_curve(J, K: GibbsKernel, n_max: int) -> TvCurve:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    P = _target(J, K)
    M = np.eye(K.size)
    out = np.empty(n_max)
    for n in range(n_max):
        M = M @ K.matrix
        out[n] = 0.5 * np.abs(M - P[None, :]).sum(axis=1).max()
    return TvCurve(out)


def fitted_rate(curve) -> Optional[float]:
    """Geometric rate from a least-squares fit of log TV on the curve tail.

    Uses the second half of the values above ``NOISE_FLOOR``, where rounding
    noise (about 1e-16 per entry) stays below 1e-6 in log scale;
    None if fewer than two points remain.
    """
    values = np.asarray(getattr(curve, "values", curve))
    n = np.arange(1, len(values) + 1)
    keep = values > NOISE_FLOOR
    n, values = n[keep], values[keep]
    half = len(values) // 2
    n, values = n[half:], values[half:]
    if len(values) < 2:
        return None
    slope = np.polyfit(n, np.log(values), 1)[0]
    return float(math.exp(slope))


def spectral_rate(K: GibbsKernel) -> float:
    """Second-largest eigenvalue modulus of the kernel matrix."""
    if K.size < 2:
        return 0.0
    mods = np.sort(np.abs(np.linalg.eigvals(K.matrix)))[::-1]
    return float(min(1.0, mods[1]))


def check_aperiodic(J, K: GibbsKernel) -> bool:
    """Every closed class of the kernel's support digraph has period 1."""
    A = K.matrix > 0
    _, labels = connected_components(A, directed=True, connection="strong")
    for c in np.unique(labels):
        members = np.nonzero(labels == c)[0]
        inside = labels == c
        if np.any(A[np.ix_(members, ~inside)]):
            continue  # transient class
        if _period(A, members, inside) != 1:
            return False
    return True


def _period(A, members, inside):
    depth = {int(members[0]): 0}
    frontier = [int(members[0])]
    g = 0
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(A[u] & inside)[0].tolist():
                if v in depth:
                    g = math.gcd(g, depth[u] + 1 - depth[v])
                else:
                    depth[v] = depth[u] + 1
                    nxt.append(v)
        frontier = nxt
    return abs(g) if g else 0


def doeblin_certificate(J: FiniteJoint) -> Optional[DoeblinCertificate]:
    """Best uniform-ergodicity certificate over all rectangles.

    ``f_1`` must vanish off U and f must be positive on ``U x V``, so U is
    forced to be the set of positive rows and V ranges over columns where f
    is positive on all of them.  For a fixed ``s`` the largest admissible V is
    every column whose minimum over U is at least ``s``, so only those
    threshold sets can maximize ``epsilon = s nu(V) / t``.  Ties keep the
    lexicographically smallest ``(U, V)`` index tuples.
    """
    f = density(J)
    f1 = row_density(J)
    u = positive_rows(J)
    t = float(f1[u].max())
    col_min = np.where(u[:, None], f, np.inf).min(axis=0)
    eligible = np.nonzero(col_min > 0)[0]
    best = None
    for s in sorted(set(col_min[eligible].tolist())):
        v = np.zeros(J.y_size, dtype=bool)
        v[eligible[col_min[eligible] >= s]] = True
        eps = s / t * float(J.nu[v].sum())
        key = (-eps, tuple(np.nonzero(v)[0]))
        if best is None or key < best[0]:
            best = (key, v, s, eps)
    if best is None:
        return None
    _, v, s, eps = best
    return DoeblinCertificate(u=u.copy(), v=v, s=s, t=t, epsilon=eps, rate_bound=1.0 - eps)


def doeblin_bruteforce(J: FiniteJoint) -> Optional[float]:
    """Largest epsilon over every rectangle by exhaustive scan (test oracle)."""
    m, n = J.shape
    if m + n > RECTANGLE_BUDGET:
        raise BudgetExceeded(f"budget exceeded: {m} + {n} > {RECTANGLE_BUDGET}")
    f = density(J)
    f1 = row_density(J)
    best = None
    for U in range(1, 1 << m):
        u = np.array([(U >> i) & 1 for i in range(m)], dtype=bool)
        if np.any(f1[~u] > 0):
            continue
        t = f1[u].max()
        for V in range(1, 1 << n):
            v = np.array([(V >> j) & 1 for j in range(n)], dtype=bool)
            s = f[np.ix_(u, v)].min()
            if s <= 0:
                continue
            eps = s / t * J.nu[v].sum()
            best = eps if best is None else max(best, eps)
    return best


def check_geometric_hypotheses(J: FiniteJoint, u, v) -> Optional[GeometricCertificate]:
    """Test one rectangle against the geometric-ergodicity hypotheses.

    With ``s = min f`` over ``U x V``: ``s > 0``, ``f = 0`` on ``U^c x V^c`` and
    ``sup f`` over ``U^c x V`` strictly below ``s mu(U) / mu(U^c)`` (an empty
    ``U^c`` makes the bound infinite).
    """
    u = np.asarray(u, dtype=bool)
    v = np.asarray(v, dtype=bool)
    if not u.any() or not v.any():
        return None
    f = density(J)
    s = float(f[np.ix_(u, v)].min())
    if s <= 0:
        return None
    if np.any(J.support[np.ix_(~u, ~v)]):
        return None
    outside = f[np.ix_(~u, v)]
    sup_out = float(outside.max()) if outside.size else 0.0
    mu_uc = float(J.mu[~u].sum())
    threshold = math.inf if mu_uc == 0 else s * float(J.mu[u].sum()) / mu_uc
    if not sup_out < threshold:
        return None
    return GeometricCertificate(u=u, v=v, s=s, sup_outside=sup_out, threshold=threshold)


def geometric_hypotheses(J: FiniteJoint) -> Optional[GeometricCertificate]:
    """First rectangle (U, then V, ascending bitmask) meeting the hypotheses."""
    m, n = J.shape
    if m + n > RECTANGLE_BUDGET:
        raise BudgetExceeded(f"budget exceeded: {m} + {n} > {RECTANGLE_BUDGET}")
    for U in range(1, 1 << m):
        u = np.array([(U >> i) & 1 for i in range(m)], dtype=bool)
        for V in range(1, 1 << n):
            v = np.array([(V >> j) & 1 for j in range(n)], dtype=bool)
            cert = check_geometric_hypotheses(J, u, v)
            if cert is not None:
                return cert
    return None


def analyze(J: FiniteJoint, n_max: int = 200, with_certificate: bool = True) -> ErgodicityReport:
    K = build_kernel(J)
    curve = tv_curve(J, K, n_max)
    cert = doeblin_certificate(J) if with_certificate else None
    return ErgodicityReport(
        s0_full=bool(compute_s0(J, K).all()),
        aperiodic=check_aperiodic(J, K),
        tv_curve=curve.values,
        fitted_rate=fitted_rate(curve),
        certificate=cert,
        ergodic=curve.ergodic,
        spectral_rate=spectral_rate(K),
    )
