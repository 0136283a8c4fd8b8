"""Small named joints used throughout the docs and tests."""
import numpy as np

from .kgibbs import build_kjoint
from .space import build_joint


def fixture_a():
    """L-shaped support ``{(0,0), (0,1), (1,1)}``, mass 1/3 each: admissible."""
    return build_joint([[1, 1], [0, 1]])


def fixture_b():
    """Diagonal support, mass 1/2 each: two atoms, not admissible."""
    return build_joint([[1, 0], [0, 1]])


def lower_triangle(n=3):
    """Uniform on ``{(x, y): y <= x}``."""
    return build_joint(np.tril(np.ones((n, n))))


def cube_diagonal():
    """``{(0,0,0), (1,1,1)}`` in ``{0,1}^3``."""
    w = np.zeros((2, 2, 2))
    w[0, 0, 0] = w[1, 1, 1] = 1
    return build_kjoint(w)


def cube_staircase():
    """``(0,0,0) - (0,0,1) - (0,1,1) - (1,1,1)``: one flip at a time."""
    w = np.zeros((2, 2, 2))
    for c in [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)]:
        w[c] = 1
    return build_kjoint(w)
