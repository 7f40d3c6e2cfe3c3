"""Defining functions and the slicing transforms built from them.

Four scalar projector families are implemented: the inner product, the
circular distance-to-scaled-direction, odd-degree homogeneous polynomials,
and the Busemann horospherical projection on the Lorentz model. A
hierarchical slice applies one projector per marginal block and mixes the
per-marginal scalars with weights psi on the unit sphere; the flat
(non-hierarchical) slice applies a single projector to the concatenated
joint coordinates.

``hhrt_project`` / ``grt_project`` are the per-direction reference paths;
the ``batch_*`` kernels evaluate all Monte Carlo directions at once and are
verified against the reference in the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import ConfigurationError, SingularGradientError, ValidationError
from .geometry import (
    LORENTZ,
    DirectionSample,
    JointCloud,
    SpaceSpec,
    lorentz_basepoint,
    sample_unit_sphere,
)
from .ot1d import Projected1D


@dataclass(frozen=True)
class Linear:
    """g(x, theta) = <x, theta> with theta on the unit sphere."""


@dataclass(frozen=True)
class Circular:
    """g(x, theta) = ||x - r*theta||_2 with theta on the unit sphere, r > 0."""

    r: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValidationError(f"circular radius must be positive, got {self.r}")


@dataclass(frozen=True)
class OddPolynomial:
    """g(x, theta) = sum over |alpha| = m of theta_alpha x^alpha, m odd.

    The monomial basis enumerates multi-indices of total degree m in
    lexicographic order; theta indexes that ordering and lives on the unit
    sphere of the corresponding dimension.
    """

    m: int = 3

    def __post_init__(self):
        if self.m < 1 or self.m % 2 == 0:
            raise ValidationError(f"polynomial degree must be odd and >= 1, got {self.m}")


@dataclass(frozen=True)
class BusemannLorentz:
    """g(x, theta) = log(-<x, b + theta>_L) with b the basepoint and theta
    a unit tangent vector at b, i.e. theta = (0, u) with ||u|| = 1."""


DefiningFunction = Union[Linear, Circular, OddPolynomial, BusemannLorentz]


@lru_cache(maxsize=None)
def monomial_exponents(num_vars: int, degree: int) -> np.ndarray:
    """All exponent vectors of total degree ``degree`` over ``num_vars``
    variables, lexicographically ascending; shape (M, num_vars)."""
    exps = set()
    for combo in itertools.combinations_with_replacement(range(num_vars), degree):
        e = [0] * num_vars
        for j in combo:
            e[j] += 1
        exps.add(tuple(e))
    out = np.array(sorted(exps), dtype=np.int64)
    out.setflags(write=False)
    return out


def theta_dim(g: DefiningFunction, spec: SpaceSpec) -> int:
    """Dimension of the direction parameter for ``g`` on ``spec``."""
    if isinstance(g, (Linear, Circular)):
        return spec.ambient_dim
    if isinstance(g, OddPolynomial):
        return monomial_exponents(spec.ambient_dim, g.m).shape[0]
    if isinstance(g, BusemannLorentz):
        if spec.kind != LORENTZ:
            raise ConfigurationError("the Busemann projector requires a Lorentz block")
        return spec.ambient_dim
    raise ConfigurationError(f"unknown defining function {g!r}")


def sample_theta(g: DefiningFunction, spec: SpaceSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw of a direction parameter for ``g`` on ``spec``."""
    if isinstance(g, BusemannLorentz):
        if spec.kind != LORENTZ:
            raise ConfigurationError("the Busemann projector requires a Lorentz block")
        u = sample_unit_sphere(spec.dim, rng)
        return np.concatenate([[0.0], u])
    return sample_unit_sphere(theta_dim(g, spec), rng)


def sample_direction(specs, gs, rng: np.random.Generator) -> DirectionSample:
    """One hierarchical slice: per-marginal thetas plus mixing weights psi.

    For a single marginal the mixing weight is fixed to (1,): inside
    W_p with c(x,y) = |x - y| the sign of psi is unobservable, and a
    deterministic choice keeps equal-seed runs identical.
    """
    specs, gs = _check_marginals(specs, gs)
    thetas = tuple(sample_theta(g, s, rng) for g, s in zip(gs, specs))
    K = len(specs)
    psi = np.array([1.0]) if K == 1 else sample_unit_sphere(K, rng)
    return DirectionSample(thetas, psi)


def _check_marginals(specs, gs):
    specs = tuple(specs)
    gs = tuple(gs)
    if len(specs) < 1:
        raise ConfigurationError("need at least one marginal")
    if len(specs) != len(gs):
        raise ConfigurationError(f"{len(specs)} specs but {len(gs)} defining functions")
    for g, s in zip(gs, specs):
        theta_dim(g, s)  # raises on unsupported pairings
    return specs, gs


def validate_direction(direction: DirectionSample, specs, gs) -> None:
    """Check every theta against its defining function's parameter constraint."""
    specs, gs = _check_marginals(specs, gs)
    if len(direction.thetas) != len(specs):
        raise ValidationError(
            f"direction has {len(direction.thetas)} thetas for {len(specs)} marginals"
        )
    for k, (t, g, s) in enumerate(zip(direction.thetas, gs, specs)):
        if t.shape != (theta_dim(g, s),):
            raise ValidationError(
                f"theta {k}: shape {t.shape}, expected ({theta_dim(g, s)},)"
            )
        if abs(np.linalg.norm(t) - 1.0) > 1e-9:
            raise ValidationError(f"theta {k}: norm {np.linalg.norm(t):.12g}, expected 1")
        if isinstance(g, BusemannLorentz) and abs(t[0]) > 1e-12:
            raise ValidationError(f"theta {k}: not tangent at the basepoint (t[0] = {t[0]:.3g})")


def _check_vector(x, dim, what):
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (dim,):
        raise ValidationError(f"{what}: expected {dim} coordinates, got shape {x.shape}")
    return x


def defining_value(g: DefiningFunction, x: np.ndarray, theta: np.ndarray) -> float:
    """Scalar projection g(x, theta) of a single coordinate block."""
    x = np.asarray(x, dtype=np.float64).ravel()
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if isinstance(g, Linear):
        theta = _check_vector(theta, x.size, "linear theta")
        return float(x @ theta)
    if isinstance(g, Circular):
        theta = _check_vector(theta, x.size, "circular theta")
        val = float(np.linalg.norm(x - g.r * theta))
        assert val <= np.linalg.norm(x) + g.r + 1e-9
        return val
    if isinstance(g, OddPolynomial):
        E = monomial_exponents(x.size, g.m)
        theta = _check_vector(theta, E.shape[0], "polynomial theta")
        return float(theta @ np.prod(x[None, :] ** E, axis=1))
    if isinstance(g, BusemannLorentz):
        theta = _check_vector(theta, x.size, "Busemann theta")
        s = lorentz_basepoint(x.size - 1) + theta
        arg = x[0] * s[0] - x[1:] @ s[1:]
        if arg <= 0:
            raise ValidationError(
                f"Busemann argument {arg:.6g} <= 0; point is not on the upper sheet"
            )
        return float(np.log(arg))
    raise ConfigurationError(f"unknown defining function {g!r}")


def defining_gradient(
    g: DefiningFunction, x: np.ndarray, theta: np.ndarray, lenient: bool = False
) -> np.ndarray:
    """Gradient of g(x, theta) with respect to x, in the ambient coordinates."""
    x = np.asarray(x, dtype=np.float64).ravel()
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if isinstance(g, Linear):
        return _check_vector(theta, x.size, "linear theta").copy()
    if isinstance(g, Circular):
        theta = _check_vector(theta, x.size, "circular theta")
        d = x - g.r * theta
        nd = np.linalg.norm(d)
        if nd == 0.0:
            if lenient:
                return np.zeros_like(x)
            raise SingularGradientError("circular gradient is undefined at x = r*theta")
        return d / nd
    if isinstance(g, OddPolynomial):
        E = monomial_exponents(x.size, g.m)
        theta = _check_vector(theta, E.shape[0], "polynomial theta")
        grad = np.zeros_like(x)
        for j in range(x.size):
            Ej = E[:, j]
            expo = E.copy()
            expo[:, j] = np.maximum(Ej - 1, 0)
            grad[j] = theta @ (Ej * np.prod(x[None, :] ** expo, axis=1))
        return grad
    if isinstance(g, BusemannLorentz):
        theta = _check_vector(theta, x.size, "Busemann theta")
        s = lorentz_basepoint(x.size - 1) + theta
        arg = x[0] * s[0] - x[1:] @ s[1:]
        if arg <= 0:
            raise ValidationError(
                f"Busemann argument {arg:.6g} <= 0; point is not on the upper sheet"
            )
        grad = -s / arg
        grad[0] = s[0] / arg
        return grad
    raise ConfigurationError(f"unknown defining function {g!r}")


def hhrt_project(cloud: JointCloud, direction: DirectionSample, gs) -> Projected1D:
    """Hierarchical slice of a joint cloud along one direction sample.

    Support i maps to sum over marginals k of psi_k * g_k(x_ik, theta_k);
    weights are carried through unchanged. This is the literal per-support
    composition of the per-marginal projectors and serves as the reference
    implementation for the vectorized estimator path.
    """
    gs = tuple(gs)
    if cloud.num_marginals != len(gs) or cloud.num_marginals != len(direction.thetas):
        raise ConfigurationError(
            f"cloud has {cloud.num_marginals} marginals, got {len(gs)} defining "
            f"functions and {len(direction.thetas)} thetas"
        )
    psi = direction.psi
    values = np.zeros(cloud.n)
    for k, (block, g, theta) in enumerate(zip(cloud.blocks, gs, direction.thetas)):
        values += psi[k] * np.array([defining_value(g, row, theta) for row in block])
    return Projected1D(values, cloud.weights)


def grt_project(cloud: JointCloud, theta: np.ndarray, g: DefiningFunction) -> Projected1D:
    """Flat slice: one defining function applied to the concatenated coordinates."""
    X = cloud.concat()
    values = np.array([defining_value(g, row, theta) for row in X])
    return Projected1D(values, cloud.weights)


# --- vectorized kernels ------------------------------------------------------

# Direct-difference tensors are chunked to keep peak memory near this many
# floats; chunking does not change results (elementwise ops only).
_CHUNK_BUDGET = 20_000_000


def batch_values(g: DefiningFunction, X: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """g(x_i, theta_l) for every support row and direction row, shape (n, L)."""
    X = np.asarray(X, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    if isinstance(g, Linear):
        return X @ thetas.T
    if isinstance(g, Circular):
        n, d = X.shape
        L = thetas.shape[0]
        out = np.empty((n, L))
        step = max(1, _CHUNK_BUDGET // max(1, n * d))
        for lo in range(0, L, step):
            D = X[:, None, :] - g.r * thetas[None, lo : lo + step, :]
            out[:, lo : lo + step] = np.linalg.norm(D, axis=2)
        return out
    if isinstance(g, OddPolynomial):
        E = monomial_exponents(X.shape[1], g.m)
        P = np.prod(X[:, None, :] ** E[None, :, :], axis=2)
        return P @ thetas.T
    if isinstance(g, BusemannLorentz):
        S = lorentz_basepoint(X.shape[1] - 1)[None, :] + thetas
        arg = np.outer(X[:, 0], S[:, 0]) - X[:, 1:] @ S[:, 1:].T
        if np.any(arg <= 0):
            raise ValidationError("Busemann argument <= 0 for some support/direction pair")
        return np.log(arg)
    raise ConfigurationError(f"unknown defining function {g!r}")


def weighted_gradient_sum(
    g: DefiningFunction,
    X: np.ndarray,
    thetas: np.ndarray,
    coeff: np.ndarray,
    lenient: bool = False,
) -> np.ndarray:
    """sum over directions l of coeff[i, l] * grad_x g(x_i, theta_l), shape (n, d).

    ``coeff`` already folds in the mixing weight and the 1-d transport
    gradient, so this is the support-coordinate gradient of a weighted sum
    of sliced losses.
    """
    X = np.asarray(X, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    coeff = np.asarray(coeff, dtype=np.float64)
    if isinstance(g, Linear):
        return coeff @ thetas
    if isinstance(g, Circular):
        n, d = X.shape
        L = thetas.shape[0]
        out = np.zeros((n, d))
        step = max(1, _CHUNK_BUDGET // max(1, n * d))
        for lo in range(0, L, step):
            D = X[:, None, :] - g.r * thetas[None, lo : lo + step, :]
            norms = np.linalg.norm(D, axis=2)
            sing = norms == 0.0
            if np.any(sing):
                if not lenient:
                    raise SingularGradientError(
                        "circular gradient is undefined at x = r*theta"
                    )
                norms = np.where(sing, 1.0, norms)
                D = np.where(sing[:, :, None], 0.0, D)
            out += np.einsum("il,ild->id", coeff[:, lo : lo + step], D / norms[:, :, None])
        return out
    if isinstance(g, OddPolynomial):
        n, d = X.shape
        E = monomial_exponents(d, g.m)
        W = coeff @ thetas  # (n, M)
        out = np.zeros((n, d))
        for j in range(d):
            Ej = E[:, j]
            expo = E.copy()
            expo[:, j] = np.maximum(Ej - 1, 0)
            mono = np.prod(X[:, None, :] ** expo[None, :, :], axis=2)  # (n, M)
            out[:, j] = np.sum(W * (Ej[None, :] * mono), axis=1)
        return out
    if isinstance(g, BusemannLorentz):
        S = lorentz_basepoint(X.shape[1] - 1)[None, :] + thetas
        arg = np.outer(X[:, 0], S[:, 0]) - X[:, 1:] @ S[:, 1:].T
        if np.any(arg <= 0):
            raise ValidationError("Busemann argument <= 0 for some support/direction pair")
        G = -S.copy()
        G[:, 0] = S[:, 0]
        return (coeff / arg) @ G
    raise ConfigurationError(f"unknown defining function {g!r}")
