"""Closed-form one-dimensional Wasserstein distance and its gradient.

The ground metric is c(x, y) = |x - y|; all functions return the p-th
power W_p^p, which is what the sliced estimators average. Uniform
equal-size inputs take the sorting fast path; anything else goes through
the merged quantile functions of both CDFs, which is exact for discrete
distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ValidationError


@dataclass(frozen=True)
class Projected1D:
    """A 1-d empirical distribution: support values with matching weights."""

    values: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if values.size < 1:
            raise ValidationError("a 1-d distribution needs at least one support")
        if self.weights is None:
            weights = np.full(values.size, 1.0 / values.size)
        else:
            weights = np.array(self.weights, dtype=np.float64, copy=True).ravel()
            if weights.shape != values.shape:
                raise ValidationError(
                    f"{weights.size} weights for {values.size} values"
                )
            if np.any(weights < 0):
                raise ValidationError("weights must be nonnegative")
            if abs(float(weights.sum()) - 1.0) > 1e-9:
                raise ValidationError(f"weights sum to {weights.sum():.12g}, expected 1")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def is_uniform(self) -> bool:
        return bool(np.max(np.abs(self.weights - 1.0 / self.n)) <= 1e-12)


def _check_p(p) -> float:
    p = float(p)
    if p < 1:
        raise ValidationError(f"order p must be >= 1, got {p}")
    return p


def quantile(dist: Projected1D, z: float) -> float:
    """Left-continuous generalized inverse CDF at level z.

    Returns the smallest support value whose cumulative weight reaches z;
    duplicate values are merged by summing their weights first.
    """
    z = float(z)
    if not 0.0 <= z <= 1.0:
        raise ValidationError(f"quantile level must lie in [0, 1], got {z}")
    vals, inverse = np.unique(dist.values, return_inverse=True)
    cum = np.cumsum(np.bincount(inverse, weights=dist.weights))
    idx = int(np.searchsorted(cum, z, side="left"))
    return float(vals[min(idx, vals.size - 1)])


def _sorted_with_weights(dist: Projected1D):
    order = np.argsort(dist.values, kind="stable")
    return dist.values[order], dist.weights[order]


def _pp_uniform(a_sorted: np.ndarray, b_sorted: np.ndarray, p: float, axis=0):
    d = np.abs(a_sorted - b_sorted)
    return np.mean(d if p == 1.0 else d**p, axis=axis)


def _pp_general(av, aw, bv, bw, p: float) -> float:
    # Exact integral of |Fa^-1(z) - Fb^-1(z)|^p over the merged CDF breakpoints.
    ca = np.cumsum(aw)
    cb = np.cumsum(bw)
    qs = np.sort(np.concatenate([ca, cb]), kind="stable")
    ia = np.minimum(np.searchsorted(ca, qs, side="left"), av.size - 1)
    ib = np.minimum(np.searchsorted(cb, qs, side="left"), bv.size - 1)
    deltas = np.diff(qs, prepend=0.0)
    diff = np.abs(av[ia] - bv[ib])
    return float(np.sum(deltas * (diff if p == 1.0 else diff**p)))


def wasserstein_1d(a: Projected1D, b: Projected1D, p: float = 2.0) -> float:
    """W_p^p between two 1-d empirical distributions (closed form)."""
    p = _check_p(p)
    if a.n == b.n and a.is_uniform and b.is_uniform:
        return float(_pp_uniform(np.sort(a.values, kind="stable"), np.sort(b.values, kind="stable"), p))
    av, aw = _sorted_with_weights(a)
    bv, bw = _sorted_with_weights(b)
    return _pp_general(av, aw, bv, bw, p)


def wasserstein_1d_grad(a: Projected1D, b: Projected1D, p: float = 2.0) -> np.ndarray:
    """Gradient of W_p^p with respect to a's support values.

    Only the uniform equal-size case is supported: the sorted matching pairs
    rank i of a with rank i of b, and exact ties contribute a zero subgradient.
    """
    p = _check_p(p)
    if a.n != b.n or not (a.is_uniform and b.is_uniform):
        raise ConfigurationError(
            "gradient requires uniform weights and equal support counts"
        )
    return grad_pp_uniform_batch(a.values[:, None], b.values[:, None], p)[:, 0]


# --- batch kernels over direction columns -----------------------------------
#
# The Monte Carlo estimators project a cloud along L directions at once and
# feed (n, L) arrays through these kernels; column l is one slice.


def pp_uniform_batch(A: np.ndarray, B: np.ndarray, p: float) -> np.ndarray:
    """Column-wise W_p^p for uniform equal-size samples, shape (L,)."""
    return _pp_uniform(np.sort(A, axis=0, kind="stable"), np.sort(B, axis=0, kind="stable"), float(p))


def pp_general_batch(A, aw, B, bw, p: float) -> np.ndarray:
    """Column-wise W_p^p for arbitrary weights via merged quantiles, shape (L,)."""
    p = float(p)
    n, L = A.shape
    m = B.shape[0]
    ia = np.argsort(A, axis=0, kind="stable")
    ib = np.argsort(B, axis=0, kind="stable")
    As = np.take_along_axis(A, ia, axis=0)
    Bs = np.take_along_axis(B, ib, axis=0)
    ca = np.cumsum(aw[ia], axis=0)
    cb = np.cumsum(bw[ib], axis=0)
    qs = np.sort(np.concatenate([ca, cb], axis=0), axis=0, kind="stable")
    # searchsorted is 1-d only; shifting each column into its own band of the
    # real line lets one flat call handle all columns at once.
    offs = 2.0 * np.arange(L)
    idx_a = np.searchsorted((ca + offs).T.ravel(), (qs + offs).T.ravel(), side="left")
    idx_b = np.searchsorted((cb + offs).T.ravel(), (qs + offs).T.ravel(), side="left")
    idx_a = np.minimum(idx_a.reshape(L, n + m).T - np.arange(L) * n, n - 1)
    idx_b = np.minimum(idx_b.reshape(L, n + m).T - np.arange(L) * m, m - 1)
    qa = np.take_along_axis(As, idx_a, axis=0)
    qb = np.take_along_axis(Bs, idx_b, axis=0)
    deltas = np.diff(qs, axis=0, prepend=0.0)
    diff = np.abs(qa - qb)
    return np.sum(deltas * (diff if p == 1.0 else diff**p), axis=0)


def pp_batch(A, aw, B, bw, p: float) -> np.ndarray:
    """Column-wise W_p^p, dispatching to the fast path when possible."""
    n, m = A.shape[0], B.shape[0]
    if (
        n == m
        and np.max(np.abs(aw - 1.0 / n)) <= 1e-12
        and np.max(np.abs(bw - 1.0 / m)) <= 1e-12
    ):
        return pp_uniform_batch(A, B, p)
    return pp_general_batch(A, aw, B, bw, p)


def grad_pp_uniform_batch(A: np.ndarray, B: np.ndarray, p: float) -> np.ndarray:
    """Column-wise gradient of W_p^p with respect to A, shape (n, L)."""
    p = float(p)
    n = A.shape[0]
    ia = np.argsort(A, axis=0, kind="stable")
    ib = np.argsort(B, axis=0, kind="stable")
    diff = np.take_along_axis(A, ia, axis=0) - np.take_along_axis(B, ib, axis=0)
    if p == 2.0:
        g_sorted = (2.0 / n) * diff
    elif p == 1.0:
        g_sorted = (1.0 / n) * np.sign(diff)
    else:
        g_sorted = (p / n) * np.abs(diff) ** (p - 1.0) * np.sign(diff)
    grad = np.empty_like(A)
    np.put_along_axis(grad, ia, g_sorted, axis=0)
    return grad
