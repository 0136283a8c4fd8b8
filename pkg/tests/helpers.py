"""Random instance generators shared by the test modules."""
import numpy as np

from gibbsgate.space import build_joint


def random_weights(rng, max_rows=5, max_cols=5, dropout=None):
    """Weights in [0.1, 1] with a random fraction of cells zeroed."""
    m = int(rng.integers(1, max_rows + 1))
    n = int(rng.integers(1, max_cols + 1))
    p = rng.uniform(0.0, 0.7) if dropout is None else dropout
    w = rng.uniform(0.1, 1.0, (m, n)) * (rng.random((m, n)) >= p)
    if not w.any():
        w[rng.integers(m), rng.integers(n)] = 1.0
    return w


def block_weights(rng, max_rows=8, max_cols=8):
    """Rows and columns split into groups; mass only inside each group's block.

    Whenever two or more groups receive rows and columns the joint has that
    many atoms, which gives the suites a steady supply of inadmissible cases.
    """
    m = int(rng.integers(2, max_rows + 1))
    n = int(rng.integers(2, max_cols + 1))
    groups = int(rng.integers(1, 4))
    rg = rng.integers(0, groups, m)
    cg = rng.integers(0, groups, n)
    w = rng.uniform(0.1, 1.0, (m, n)) * (rg[:, None] == cg[None, :])
    w *= rng.random((m, n)) >= rng.uniform(0.0, 0.2)
    if not w.any():
        w[0, 0] = 1.0
    return w


def mixed_joint(rng, max_size=8):
    """The randomized suite: dense, block-structured or sparse small joints."""
    kind = int(rng.integers(3))
    if kind == 0:
        w = random_weights(rng, max_size, max_size, dropout=rng.uniform(0.0, 0.3))
    elif kind == 1:
        w = block_weights(rng, max_size, max_size)
    else:
        w = random_weights(rng, 4, 4)
    return build_joint(w)


def random_joint(rng, max_rows=5, max_cols=5):
    return build_joint(random_weights(rng, max_rows, max_cols))


def uniform_support_joints(shape=(3, 3)):
    """Every nonempty 0/1 support pattern on ``shape`` with uniform mass."""
    m, n = shape
    for bits in range(1, 1 << (m * n)):
        w = np.array([(bits >> k) & 1 for k in range(m * n)], dtype=float).reshape(shape)
        yield build_joint(w)
