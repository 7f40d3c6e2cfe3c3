"""Coordinate spaces, joint point clouds, direction samples, and ground metrics.

A joint cloud is a discrete distribution whose supports are tuples of K
coordinate blocks, each block living on its own space (Euclidean, unit
sphere, or the Lorentz model of hyperbolic space). Everything here is
immutable after construction and pure given an explicit numpy Generator,
so evaluation is safe from many threads as long as each thread owns its
rng stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

EUCLIDEAN = "euclidean"
SPHERE = "sphere"
LORENTZ = "lorentz"
_KINDS = (EUCLIDEAN, SPHERE, LORENTZ)

WEIGHT_TOL = 1e-9
SPHERE_TOL = 1e-9
# The quadratic constraint amplifies input rounding, so the Lorentz check
# is looser than the sphere check.
LORENTZ_TOL = 1e-6


@dataclass(frozen=True)
class SpaceSpec:
    """Descriptor of one marginal space.

    ``dim`` is the intrinsic parameter of the family: Euclidean ``d`` lives in
    R^d, Sphere ``d`` is S^{d-1} embedded in R^d, and Lorentz ``d`` is the
    hyperboloid sheet L^d embedded in R^{d+1}.
    """

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown space kind {self.kind!r}; expected one of {_KINDS}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValidationError(f"space dimension must be a positive integer, got {self.dim!r}")

    @property
    def ambient_dim(self) -> int:
        """Number of coordinates a point of this space occupies."""
        return self.dim + 1 if self.kind == LORENTZ else self.dim


def _as_matrix(block, name):
    # always copy: stored arrays are frozen, the caller's must stay writable
    arr = np.array(block, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-d array, got shape {arr.shape}")
    return arr


def validate_block(points: np.ndarray, spec: SpaceSpec, name: str = "block") -> None:
    """Check that every row of ``points`` lies on ``spec``'s space."""
    if points.shape[1] != spec.ambient_dim:
        raise ValidationError(
            f"{name}: expected {spec.ambient_dim} coordinates for {spec.kind} "
            f"dim={spec.dim}, got {points.shape[1]}"
        )
    if not np.all(np.isfinite(points)):
        raise ValidationError(f"{name}: non-finite coordinates")
    if spec.kind == SPHERE:
        norms = np.linalg.norm(points, axis=1)
        bad = np.abs(norms - 1.0) > SPHERE_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValidationError(f"{name}: row {i} has norm {norms[i]:.12g}, not a unit vector")
    elif spec.kind == LORENTZ:
        q = lorentz_inner(points, points)
        bad = np.abs(q + 1.0) > LORENTZ_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValidationError(
                f"{name}: row {i} has Minkowski norm {q[i]:.12g}, expected -1"
            )
        if np.any(points[:, 0] <= 0):
            i = int(np.argmax(points[:, 0] <= 0))
            raise ValidationError(f"{name}: row {i} has x0 <= 0, not on the upper sheet")


@dataclass(frozen=True)
class JointCloud:
    """Discrete distribution with K per-marginal coordinate blocks.

    Parameters
    ----------
    blocks : list of ndarray
        Block k has shape (n, specs[k].ambient_dim).
    specs : list of SpaceSpec
        One per block.
    weights : ndarray, optional
        n nonnegative weights summing to 1. Omitted means uniform.
    validate : bool
        Skip invariant checks when False (used internally for off-manifold
        intermediates such as finite-difference probes and raw Euler steps).
    """

    blocks: tuple
    specs: tuple
    weights: np.ndarray = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        blocks = tuple(_as_matrix(b, f"block {k}") for k, b in enumerate(self.blocks))
        specs = tuple(self.specs)
        if len(blocks) == 0:
            raise ValidationError("a joint cloud needs at least one block")
        if len(blocks) != len(specs):
            raise ValidationError(f"{len(blocks)} blocks but {len(specs)} specs")
        n = blocks[0].shape[0]
        if n < 1:
            raise ValidationError("a joint cloud needs at least one support")
        if self.weights is None:
            weights = np.full(n, 1.0 / n)
        else:
            weights = np.array(self.weights, dtype=np.float64, copy=True)
        if self.validate:
            for k, (b, s) in enumerate(zip(blocks, specs)):
                if b.shape[0] != n:
                    raise ValidationError(f"block {k} has {b.shape[0]} rows, expected {n}")
                validate_block(b, s, name=f"block {k}")
            if weights.shape != (n,):
                raise ValidationError(f"weights shape {weights.shape}, expected ({n},)")
            if np.any(weights < 0):
                raise ValidationError("weights must be nonnegative")
            if abs(float(weights.sum()) - 1.0) > WEIGHT_TOL:
                raise ValidationError(f"weights sum to {weights.sum():.12g}, expected 1")
        for b in blocks:
            b.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def num_marginals(self) -> int:
        return len(self.blocks)

    @property
    def is_uniform(self) -> bool:
        return bool(np.max(np.abs(self.weights - 1.0 / self.n)) <= 1e-12)

    def concat(self) -> np.ndarray:
        """All blocks side by side, shape (n, sum of ambient dims)."""
        return np.hstack(self.blocks)

    def same_specs(self, other: "JointCloud") -> bool:
        return self.specs == other.specs

    def replace_blocks(self, blocks, validate: bool = True) -> "JointCloud":
        return JointCloud(tuple(blocks), self.specs, self.weights, validate=validate)


@dataclass(frozen=True)
class DirectionSample:
    """One slice: a direction per marginal plus mixing weights on S^{K-1}."""

    thetas: tuple
    psi: np.ndarray

    def __post_init__(self):
        thetas = tuple(np.array(t, dtype=np.float64, copy=True) for t in self.thetas)
        psi = np.array(self.psi, dtype=np.float64, copy=True)
        if len(thetas) != psi.shape[0]:
            raise ValidationError(f"{len(thetas)} thetas but psi has {psi.shape[0]} entries")
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise ValidationError(f"psi norm {np.linalg.norm(psi):.15g}, expected 1")
        for t in thetas:
            t.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "psi", psi)


def sample_unit_sphere(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from S^{dim-1} in R^dim via normalized Gaussians."""
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def great_circle_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Geodesic distance on the unit sphere, arccos of the clamped inner product."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    for name, w in (("u", u), ("v", v)):
        if abs(np.linalg.norm(w) - 1.0) > 1e-6:
            raise ValidationError(f"{name} is not a unit vector (norm {np.linalg.norm(w):.9g})")
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


def lorentz_inner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minkowski bilinear form -x0*y0 + sum_i xi*yi, broadcasting over rows."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise ValidationError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    prod = x * y
    return prod[..., 1:].sum(axis=-1) - prod[..., 0]


def lorentz_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Geodesic distance on the Lorentz model, arccosh(max(1, -<x,y>_L)).

    Identical points return exactly 0; arccosh would otherwise amplify
    last-ulp rounding of the bilinear form into ~1e-8.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    for name, w in (("x", x), ("y", y)):
        if abs(float(lorentz_inner(w, w)) + 1.0) > LORENTZ_TOL or w[0] <= 0:
            raise ValidationError(f"{name} is not a valid Lorentz point")
    if np.array_equal(x, y):
        return 0.0
    return float(np.arccosh(np.maximum(1.0, -lorentz_inner(x, y))))


def lorentz_basepoint(dim: int) -> np.ndarray:
    """(1, 0, ..., 0) in R^{dim+1}."""
    e = np.zeros(dim + 1)
    e[0] = 1.0
    return e


def lorentz_exp_basepoint(u: np.ndarray) -> np.ndarray:
    """Exponential map at the basepoint for tangent rows u in R^d.

    Returns points (cosh|u|, sinh|u| u/|u|) on L^d; u = 0 maps to the
    basepoint itself.
    """
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    norms = np.linalg.norm(u, axis=1, keepdims=True)
    out = np.empty((u.shape[0], u.shape[1] + 1))
    out[:, :1] = np.cosh(norms)
    safe = np.where(norms > 0, norms, 1.0)
    out[:, 1:] = np.sinh(norms) * u / safe
    return out


def lorentz_project(points: np.ndarray) -> np.ndarray:
    """Rescale rows back onto the hyperboloid sheet, keeping x0 > 0.

    Raises if a row has drifted outside the cone where rescaling is defined.
    """
    points = np.asarray(points, dtype=np.float64)
    q = -lorentz_inner(points, points)
    if np.any(q <= 0) or np.any(points[..., 0] <= 0):
        raise ValidationError("point left the upper light cone; cannot rescale to the hyperboloid")
    return points / np.sqrt(q)[..., None]
