import json
import hashlib
import numbers
from pathlib import Path

import numpy as np


def get_package_root() -> Path:
    return Path(__file__).parent.parent


def data_path(name) -> Path:
    """Path of a file bundled in PaulSim/fields/data."""
    return get_package_root().joinpath('fields', 'data', name)


def check_rng(seed):
    """Turn seed into a np.random.Generator instance

    Parameters
    ----------
    seed : None, int or instance of Generator
        If seed is None, return the Generator using the OS entropy.
        If seed is an int, return a new Generator instance seeded with seed.
        If seed is already a Generator instance, return it.
        Otherwise raise ValueError.
    """
    if seed is None:
        return np.random.default_rng()
    if isinstance(seed, numbers.Integral):
        return np.random.default_rng(np.random.SeedSequence(seed))
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if isinstance(seed, np.random.Generator):
        return seed
    raise ValueError('%r cannot be used to seed a numpy.random.Generator' % (seed,))


def canonical_json(obj) -> str:
    """Key-sorted, whitespace-free JSON used for hashing configs."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()


def as_points(points):
    """Coerce a point or a batch of points to a float array of shape (n, 3)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError('points must have shape (3,) or (n, 3), got %s' % (points.shape,))
    return points


def rotation_matrix(axis, angle):
    """Right-handed rotation by `angle` (rad) about `axis`, via Rodrigues' formula."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K
