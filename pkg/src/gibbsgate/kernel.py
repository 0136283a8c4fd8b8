"""Exact two-component Gibbs transition operator and alternating projections.

One sweep from ``(x, y)`` draws ``y* ~ alpha(x)`` and then ``x* ~ beta(y*)``,
so ``K((x, y), (x', y')) = alpha(x)(y') * beta(y')(x')``.  The state space is
every cell whose row has positive X-marginal (listed in row-major order);
off-support cells in those rows are legal start states and follow the same
formula.

``order="xy"`` gives the sweep that updates X first; its state space is the
cells with positive Y-marginal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sigma import d_atoms
from .space import (
    FiniteJoint,
    conditional_alpha,
    conditional_beta,
    positive_cols,
    positive_rows,
)


@dataclass(frozen=True, eq=False)
class GibbsKernel:
    """Row-stochastic matrix over an ordered list of states.

    ``target`` is P restricted to the states, the stationary law.
    """

    states: tuple
    matrix: np.ndarray
    target: np.ndarray
    order: str = "yx"

    @property
    def size(self):
        return len(self.states)

    def index(self, state):
        return self.states.index(tuple(state))

    def restrict(self, values):
        """Read a grid (or tensor) at the kernel states."""
        values = np.asarray(values)
        return np.array([values[s] for s in self.states])


def build_kernel(J: FiniteJoint, order: str = "yx") -> GibbsKernel:
    a = conditional_alpha(J).filled()
    b = conditional_beta(J).filled()
    m, n = J.shape
    if order == "yx":
        live = positive_rows(J)
        states = tuple((i, j) for i in range(m) for j in range(n) if live[i])
        xs = np.array([s[0] for s in states])
        ys = np.array([s[1] for s in states])
        # K[s, t] = alpha(x_s)(y_t) * beta(y_t)(x_t)
        K = a[xs][:, ys] * b[ys, xs][None, :]
    elif order == "xy":
        live = positive_cols(J)
        states = tuple((i, j) for i in range(m) for j in range(n) if live[j])
        xs = np.array([s[0] for s in states])
        ys = np.array([s[1] for s in states])
        # K[s, t] = beta(y_s)(x_t) * alpha(x_t)(y_t)
        K = b[ys][:, xs] * a[xs, ys][None, :]
    else:
        raise ValueError(f"order must be 'yx' or 'xy', not {order!r}")
    K.setflags(write=False)
    target = np.array([J.prob[s] for s in states])
    return GibbsKernel(states=states, matrix=K, target=target, order=order)


def kernel_power(K: GibbsKernel, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be >= 0")
    return np.linalg.matrix_power(K.matrix, n)


# --------------------------------------------------------------------------
# alternating conditional expectations


def expect_given_y(J: FiniteJoint, phi) -> np.ndarray:
    """``E(phi | sigma(Y))`` as a grid; NaN on columns of zero Y-marginal."""
    phi = np.where(J.support, phi, 0.0)
    py = J.prob.sum(axis=0)
    live = positive_cols(J)
    out = np.full(J.shape[1], np.nan)
    out[live] = (J.prob * phi).sum(axis=0)[live] / py[live]
    return np.broadcast_to(out, J.shape).copy()


def expect_given_x(J: FiniteJoint, phi) -> np.ndarray:
    """``E(phi | sigma(X))`` as a grid; NaN on rows of zero X-marginal."""
    phi = np.where(J.support, phi, 0.0)
    px = J.prob.sum(axis=1)
    live = positive_rows(J)
    out = np.full(J.shape[0], np.nan)
    out[live] = (J.prob * phi).sum(axis=1)[live] / px[live]
    return np.broadcast_to(out[:, None], J.shape).copy()


@dataclass(frozen=True, eq=False)
class IterateTrace:
    """``steps[n]`` is the n-th alternating conditional expectation.

    With ``first="y"`` odd steps condition on sigma(Y) and even steps on
    sigma(X); ``first="x"`` swaps them.
    """

    steps: list
    first: str = "y"

    def sigma_of(self, n):
        """Which coordinate step ``n >= 1`` conditions on."""
        odd = n % 2 == 1
        return self.first if odd else ("x" if self.first == "y" else "y")


def bc_iterates(J: FiniteJoint, phi, n_max: int, first: str = "y") -> IterateTrace:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != J.shape:
        raise ValueError(f"observable shape {phi.shape} does not match joint {J.shape}")
    if first not in ("x", "y"):
        raise ValueError("first must be 'x' or 'y'")
    steps = [phi.copy()]
    project = {"y": expect_given_y, "x": expect_given_x}
    other = "x" if first == "y" else "y"
    for n in range(1, n_max + 1):
        which = first if n % 2 == 1 else other
        steps.append(project[which](J, steps[-1]))
    return IterateTrace(steps=steps, first=first)


def verify_theorem_41(J: FiniteJoint, phi, n_max: int, first: str = "y") -> float:
    """Max over support states and ``1 <= n <= n_max`` of ``|K^n phi - phi_2n|``.

    ``first="y"`` pairs with the Y-then-X sweep, ``first="x"`` with the
    X-then-Y sweep.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    K = build_kernel(J, order="yx" if first == "y" else "xy")
    trace = bc_iterates(J, phi, 2 * n_max, first=first)
    on_support = np.array([J.support[s] for s in K.states])
    v = K.restrict(np.where(J.support, phi, 0.0))
    worst = 0.0
    for n in range(1, n_max + 1):
        v = K.matrix @ v
        ref = K.restrict(trace.steps[2 * n])
        worst = max(worst, float(np.max(np.abs(v - ref)[on_support])))
    return worst


def limit_conditional_d(J: FiniteJoint, phi) -> np.ndarray:
    """``E(phi | D)``: the P-mean of phi over each D-atom.

    Defined on support cells, and extended to every cell whose row (or,
    failing that, column) has positive mass, since each such line lies in a
    single atom.  NaN elsewhere.
    """
    phi = np.asarray(phi, dtype=float)
    atoms = d_atoms(J)
    means = []
    for a in range(int(atoms.max()) + 1):
        cells = atoms == a
        means.append(float((J.prob[cells] * phi[cells]).sum() / J.prob[cells].sum()))
    row_atom = [int(r[r >= 0][0]) if (r >= 0).any() else -1 for r in atoms]
    col_atom = [int(c[c >= 0][0]) if (c >= 0).any() else -1 for c in atoms.T]
    out = np.full(J.shape, np.nan)
    for i, j in np.ndindex(J.shape):
        a = row_atom[i] if row_atom[i] >= 0 else col_atom[j]
        if a >= 0:
            out[i, j] = means[a]
    return out


def corollary_21_distance(J: FiniteJoint, phi, n_budget: int, first: str = "y"):
    """Sup-norm over support of ``phi_n - int phi dP`` for ``n = 0..n_budget``."""
    phi = np.asarray(phi, dtype=float)
    target = float((J.prob * phi).sum())
    trace = bc_iterates(J, phi, n_budget, first=first)
    return np.array([np.max(np.abs(s[J.support] - target)) for s in trace.steps])


def check_corollary_21(J: FiniteJoint, phi, tolerance: float, n_budget: int, first: str = "y") -> bool:
    """Whether the alternating iterates reach ``int phi dP`` within ``n_budget`` projections.

    The plain intersection ``sigma(X) & sigma(Y)`` is trivial, so its
    conditional expectation is the constant ``int phi dP``.  Stops at the
    first iterate within ``tolerance`` on the support.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    phi = np.asarray(phi, dtype=float)
    if phi.shape != J.shape:
        raise ValueError(f"observable shape {phi.shape} does not match joint {J.shape}")
    target = float((J.prob * phi).sum())
    project = {"y": expect_given_y, "x": expect_given_x}
    order = (first, "x" if first == "y" else "y")
    step = phi
    for n in range(n_budget + 1):
        if n > 0:
            step = project[order[(n - 1) % 2]](J, step)
        if np.max(np.abs(step[J.support] - target)) <= tolerance:
            return True
    return False
