"""Finite product probability spaces.

A :class:`FiniteJoint` is a probability on ``X x Y`` with ``X = {0..m-1}`` and
``Y = {0..n-1}``, stored as an ``m x n`` grid.  Row index is the X coordinate,
column index the Y coordinate.  Events are boolean grids of the same shape.

Support is decided by strict positivity of the raw weights, never by a
threshold: every condition checked downstream is a statement about null sets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import JointError

NORMALIZATION_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteJoint:
    """Normalized joint distribution on a finite product space.

    Attributes
    ----------
    weights : ndarray (m, n)
        Raw nonnegative input weights.
    prob : ndarray (m, n)
        ``weights / weights.sum()``.
    mu, nu : ndarray
        Strictly positive base measures on X and Y (counting by default).
    support : ndarray of bool (m, n)
        True exactly where the raw weight is > 0.
    """

    weights: np.ndarray
    prob: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    support: np.ndarray
    x_labels: tuple
    y_labels: tuple

    @property
    def shape(self):
        return self.prob.shape

    @property
    def x_size(self):
        return self.prob.shape[0]

    @property
    def y_size(self):
        return self.prob.shape[1]

    def __repr__(self):
        return f"FiniteJoint(shape={self.shape}, support={int(self.support.sum())} cells)"


@dataclass(frozen=True)
class Rectangle:
    """The event ``U x V`` given by boolean vectors over X and Y."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u, bool))
        object.__setattr__(self, "v", _frozen(self.v, bool))

    def event(self):
        return np.outer(self.u, self.v)

    def complement_event(self):
        """The event ``U^c x V^c``."""
        return np.outer(~self.u, ~self.v)

    def __eq__(self, other):
        if not isinstance(other, Rectangle):
            return NotImplemented
        return np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash((self.u.tobytes(), self.v.tobytes()))


@dataclass(frozen=True, eq=False)
class Conditional:
    """Regular conditional distribution on a finite space.

    ``rows[i]`` is the law of the conditioned coordinate given the conditioning
    coordinate equals ``i``.  Rows whose conditioning point has zero marginal
    are undefined; they hold NaN and are marked False in ``defined``.
    """

    rows: np.ndarray
    defined: np.ndarray

    def filled(self, value=0.0):
        """Rows with undefined entries replaced by ``value``."""
        return np.where(self.defined[:, None], self.rows, value)


def build_joint(
    weights,
    x_labels: Sequence[str] | None = None,
    y_labels: Sequence[str] | None = None,
    mu=None,
    nu=None,
) -> FiniteJoint:
    """Validate and normalize a weight grid.

    Raises
    ------
    JointError
        ``"shape error"`` for ragged or non-2D input and label/base-measure
        length mismatches, ``"invalid weight"`` for negative or non-finite
        entries, ``"empty distribution"`` when every weight is zero.
    """
    try:
        w = np.array(weights, dtype=float)
    except (ValueError, TypeError) as exc:
        raise JointError(f"shape error: {exc}") from None
    if w.ndim != 2 or w.shape[0] == 0 or w.shape[1] == 0:
        raise JointError(f"shape error: expected a nonempty 2D grid, got shape {w.shape}")
    bad = ~np.isfinite(w) | (w < 0)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise JointError(f"invalid weight at ({i}, {j}): {w[i, j]!r}")
    total = w.sum()
    if not total > 0:
        raise JointError("empty distribution: all weights are zero")
    m, n = w.shape
    mu = _base_measure(mu, m, "mu")
    nu = _base_measure(nu, n, "nu")
    x_labels = _labels(x_labels, m, "x")
    y_labels = _labels(y_labels, n, "y")
    return FiniteJoint(
        weights=_frozen(w),
        prob=_frozen(w / total),
        mu=mu,
        nu=nu,
        support=_frozen(w > 0, bool),
        x_labels=x_labels,
        y_labels=y_labels,
    )


def _base_measure(values, size, name):
    if values is None:
        return _frozen(np.ones(size))
    a = np.array(values, dtype=float)
    if a.shape != (size,):
        raise JointError(f"shape error: {name} has shape {a.shape}, expected ({size},)")
    if not (np.all(np.isfinite(a)) and np.all(a > 0)):
        raise JointError(f"invalid weight: {name} must be strictly positive and finite")
    return _frozen(a)


def _labels(labels, size, prefix):
    if labels is None:
        return tuple(f"{prefix}{i}" for i in range(size))
    labels = tuple(str(s) for s in labels)
    if len(labels) != size:
        raise JointError(f"shape error: {len(labels)} {prefix}_labels for {size} entries")
    return labels


def with_base_measures(J: FiniteJoint, mu=None, nu=None) -> FiniteJoint:
    """Same weights and labels, different base measures."""
    return build_joint(J.weights, J.x_labels, J.y_labels, mu=mu, nu=nu)


def marginal_x(J: FiniteJoint) -> np.ndarray:
    return J.prob.sum(axis=1)


def marginal_y(J: FiniteJoint) -> np.ndarray:
    return J.prob.sum(axis=0)


def positive_rows(J: FiniteJoint) -> np.ndarray:
    """Rows of positive X-marginal (decided on the support mask)."""
    return J.support.any(axis=1)


def positive_cols(J: FiniteJoint) -> np.ndarray:
    return J.support.any(axis=0)


def conditional_alpha(J: FiniteJoint) -> Conditional:
    """Law of Y given X = x, one row per x."""
    return _conditional(J.prob, positive_rows(J))


def conditional_beta(J: FiniteJoint) -> Conditional:
    """Law of X given Y = y, one row per y."""
    return _conditional(J.prob.T, positive_cols(J))


def _conditional(grid, defined):
    rows = np.full(grid.shape, np.nan)
    sums = grid[defined].sum(axis=1, keepdims=True)
    rows[defined] = grid[defined] / sums
    rows.setflags(write=False)
    return Conditional(rows=rows, defined=_frozen(defined, bool))


def density(J: FiniteJoint) -> np.ndarray:
    """Density of P with respect to ``mu x nu``."""
    return J.prob / np.outer(J.mu, J.nu)


def row_density(J: FiniteJoint) -> np.ndarray:
    """``f_1(x) = sum_y f(x, y) nu(y)``, which equals ``P(X = x) / mu(x)``."""
    return density(J) @ J.nu


def check_event(J: FiniteJoint, E) -> np.ndarray:
    E = np.asarray(E, dtype=bool)
    if E.shape != J.shape:
        raise JointError(f"shape error: event shape {E.shape} does not match joint {J.shape}")
    return E


def event_prob(J: FiniteJoint, E) -> float:
    E = check_event(J, E)
    return float(J.prob[E].sum())


def is_null(J: FiniteJoint, E) -> bool:
    """``P(E) == 0``, decided exactly on the support mask."""
    return not np.any(check_event(J, E) & J.support)


def product_joint(p, q, mu=None, nu=None) -> FiniteJoint:
    """The independent coupling ``p (x) q``."""
    return build_joint(np.outer(p, q), mu=mu, nu=nu)
