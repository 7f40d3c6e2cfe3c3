"""Shared builders and independent oracles for the test suite.

The oracles here (permutation enumeration, finite differences) deliberately
avoid every code path they are used to check.
"""

import itertools

import numpy as np
import pytest

from h2sw import (
    EUCLIDEAN,
    LORENTZ,
    SPHERE,
    JointCloud,
    SpaceSpec,
    lorentz_exp_basepoint,
)


def random_block(rng, n, spec):
    if spec.kind == EUCLIDEAN:
        return rng.standard_normal((n, spec.dim))
    if spec.kind == SPHERE:
        v = rng.standard_normal((n, spec.dim))
        return v / np.linalg.norm(v, axis=1, keepdims=True)
    if spec.kind == LORENTZ:
        return lorentz_exp_basepoint(0.7 * rng.standard_normal((n, spec.dim)))
    raise ValueError(spec.kind)


def random_cloud(rng, n, specs, uniform=True):
    blocks = tuple(random_block(rng, n, s) for s in specs)
    weights = None
    if not uniform:
        w = rng.random(n) + 0.1
        weights = w / w.sum()
    return JointCloud(blocks, tuple(specs), weights)


R3S2 = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3))
R2S1 = (SpaceSpec(EUCLIDEAN, 2), SpaceSpec(SPHERE, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# --- independent oracles ------------------------------------------------------

_PERM_CACHE = {}


def all_permutations(n):
    if n not in _PERM_CACHE:
        _PERM_CACHE[n] = np.array(list(itertools.permutations(range(n))))
    return _PERM_CACHE[n]


def perm_min_w1d(a, b, p):
    """Exact uniform 1-d W_p^p by enumerating every matching."""
    perms = all_permutations(len(a))
    costs = np.mean(np.abs(np.asarray(a)[None, :] - np.asarray(b)[perms]) ** p, axis=1)
    return float(costs.min())


def perm_min_cost(C):
    """Exact assignment cost (averaged over n) by enumerating every matching."""
    C = np.asarray(C)
    n = C.shape[0]
    perms = all_permutations(n)
    costs = C[np.arange(n)[None, :], perms].sum(axis=1) / n
    return float(costs.min())


def central_fd(f, x0, h=1e-5):
    """Central finite-difference gradient of a scalar function of a vector."""
    x0 = np.asarray(x0, dtype=np.float64)
    g = np.zeros_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xp[i] += h
        xm = x0.copy()
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


# --- deterministic toy geometries for the flow --------------------------------


def sphere_cloud(n, seed):
    """Unit-sphere positions with their own outward (radial) normals."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return JointCloud((pts, pts.copy()), R3S2)


def cube_cloud(n, seed, half=4.0):
    """Cube-surface positions with outward face normals, seeded uniform draw."""
    rng = np.random.default_rng(seed)
    faces = rng.integers(0, 6, size=n)
    uv = rng.uniform(-half, half, size=(n, 2))
    pts = np.empty((n, 3))
    nrm = np.zeros((n, 3))
    for i, f in enumerate(faces):
        axis, neg = divmod(f, 2)
        sign = -1.0 if neg else 1.0
        others = [a for a in range(3) if a != axis]
        pts[i, axis] = sign * half
        pts[i, others[0]], pts[i, others[1]] = uv[i]
        nrm[i, axis] = sign
    return JointCloud((pts, nrm), R3S2)
