"""JSON documents for joints, observables and event lists.

Joint::

    {"x_labels": ["a", "b"], "y_labels": ["u", "v"],
     "weights": [[1, 1], [0, 1]], "mu": [1, 1], "nu": [1, 1]}

Labels, ``mu`` and ``nu`` are optional.  A k-component joint replaces the
grid by ``"shape": [2, 2, 2]`` and a flat row-major ``"weights"`` list.
An observable is ``{"values": grid}`` and an event list is
``{"sets": [grid, ...]}`` with 0/1 or boolean grids.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import JointError
from .kgibbs import KJoint, build_kjoint
from .space import FiniteJoint, build_joint


class InputError(Exception):
    """A file could not be read or does not describe a valid object."""


def _load(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def loads(text: str, name: str = "<input>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{name}:1:1: expected a JSON object at top level")
    return doc


def _numeric_grid(value, where, ndim=2):
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a list")
    for i, row in enumerate(value):
        if ndim == 2:
            if not isinstance(row, list):
                raise InputError(f"{where}[{i}]: expected a list")
            for j, x in enumerate(row):
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise InputError(f"{where}[{i}][{j}]: expected a number, got {x!r}")
        elif isinstance(row, bool) or not isinstance(row, (int, float)):
            raise InputError(f"{where}[{i}]: expected a number, got {row!r}")
    if ndim == 2 and len({len(r) for r in value}) > 1:
        raise InputError(f"{where}: rows have different lengths (shape error)")
    return value


def joint_from_doc(doc: dict, name: str = "<input>") -> FiniteJoint:
    if "weights" not in doc:
        raise InputError(f"{name}: missing field 'weights'")
    weights = _numeric_grid(doc["weights"], f"{name}: weights")
    mu = _numeric_grid(doc["mu"], f"{name}: mu", 1) if "mu" in doc else None
    nu = _numeric_grid(doc["nu"], f"{name}: nu", 1) if "nu" in doc else None
    try:
        return build_joint(weights, doc.get("x_labels"), doc.get("y_labels"), mu=mu, nu=nu)
    except JointError as exc:
        raise InputError(f"{name}: weights: {exc}") from None


def read_joint(path) -> FiniteJoint:
    return joint_from_doc(_load(path), str(path))


def read_kjoint(path) -> KJoint:
    doc = _load(path)
    name = str(path)
    if "shape" not in doc or "weights" not in doc:
        raise InputError(f"{name}: k-component input needs 'shape' and 'weights'")
    shape = doc["shape"]
    if not isinstance(shape, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in shape):
        raise InputError(f"{name}: shape: expected a list of integers")
    weights = _numeric_grid(doc["weights"], f"{name}: weights", 1)
    try:
        return build_kjoint(weights, shape)
    except JointError as exc:
        raise InputError(f"{name}: {exc}") from None


def read_observable(path, shape) -> np.ndarray:
    doc = _load(path)
    values = _numeric_grid(doc.get("values"), f"{path}: values")
    arr = np.array(values, dtype=float)
    if arr.shape != tuple(shape):
        raise InputError(f"{path}: values: shape error, {arr.shape} vs joint {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: values: entries must be finite")
    return arr


def read_sets(path, shape) -> list:
    doc = _load(path)
    sets = doc.get("sets")
    if not isinstance(sets, list) or not sets:
        raise InputError(f"{path}: sets: expected a nonempty list of grids")
    out = []
    for k, grid in enumerate(sets):
        if not isinstance(grid, list) or not all(isinstance(r, list) for r in grid):
            raise InputError(f"{path}: sets[{k}]: expected a grid")
        arr = np.array(grid)
        if arr.shape != tuple(shape) or not np.all((arr == 0) | (arr == 1)):
            raise InputError(f"{path}: sets[{k}]: expected a {tuple(shape)} grid of 0/1")
        out.append(arr.astype(bool))
    return out


def joint_to_doc(J: FiniteJoint) -> dict:
    return {
        "x_labels": list(J.x_labels),
        "y_labels": list(J.y_labels),
        "weights": J.weights.tolist(),
        "mu": J.mu.tolist(),
        "nu": J.nu.tolist(),
    }


def dumps_joint(J: FiniteJoint) -> str:
    return json.dumps(joint_to_doc(J), indent=2) + "\n"
