"""Pairwise comparison of dataset collections on a shared product space.

Builds symmetric cost matrices under any implemented distance (sliced
estimators or the exact joint Wasserstein) and scores an estimator matrix
against the exact reference through the max-normalized entrywise error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .exact_ot import joint_wasserstein
from .geometry import lorentz_exp_basepoint
from .sliced import EstimatorConfig, estimate

EXACT = "exact"


@dataclass(frozen=True)
class DatasetCollection:
    names: tuple
    clouds: tuple

    def __post_init__(self):
        names = tuple(self.names)
        clouds = tuple(self.clouds)
        if len(names) != len(clouds):
            raise ValidationError(f"{len(names)} names for {len(clouds)} clouds")
        if len(set(names)) != len(names):
            raise ValidationError("dataset names must be unique")
        specs = clouds[0].specs
        for name, c in zip(names, clouds):
            if c.specs != specs:
                raise ValidationError(f"dataset {name!r} lives on a different space list")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "clouds", clouds)

    def __len__(self):
        return len(self.clouds)


def cost_matrix(collection: DatasetCollection, distance, exact_p: float = 2.0) -> np.ndarray:
    """Symmetric zero-diagonal matrix of pairwise distances.

    ``distance`` is either an :class:`EstimatorConfig` or the string
    ``"exact"`` (which uses order ``exact_p``). Each unordered pair is
    evaluated once under its own seed (derived from the config seed and the
    pair), which makes the matrix symmetric by construction and the whole
    computation reproducible. Entries are distances, i.e. p-th roots of the
    estimated/exact powers.
    """
    if len(collection) < 2:
        raise ValidationError("need at least two datasets to compare")
    N = len(collection)
    M = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            mu, nu = collection.clouds[i], collection.clouds[j]
            if distance == EXACT:
                pp, _ = joint_wasserstein(mu, nu, p=exact_p)
                M[i, j] = M[j, i] = pp ** (1.0 / exact_p)
            elif isinstance(distance, EstimatorConfig):
                cfg = replace(distance, seed=distance.seed + i * N + j)
                M[i, j] = M[j, i] = estimate(mu, nu, cfg) ** (1.0 / cfg.p)
            else:
                raise ValidationError(f"unknown distance {distance!r}")
    return M


def relative_error(C: np.ndarray, C_ref: np.ndarray, aggregate: str = "sum") -> float:
    """Aggregated |C/max(C) - C_ref/max(C_ref)| over off-diagonal entries.

    Max-normalization makes the score invariant to positive rescaling of
    either matrix. ``aggregate`` is "sum" or "mean".
    """
    C = np.asarray(C, dtype=np.float64)
    C_ref = np.asarray(C_ref, dtype=np.float64)
    if C.shape != C_ref.shape or C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValidationError(f"matrix shapes {C.shape} and {C_ref.shape} do not match")
    if not (C.max() > 0 and C_ref.max() > 0):
        raise ValidationError("relative error is undefined for all-zero matrices")
    diff = np.abs(C / C.max() - C_ref / C_ref.max())
    off = ~np.eye(C.shape[0], dtype=bool)
    if aggregate == "sum":
        return float(diff[off].sum())
    if aggregate == "mean":
        return float(diff[off].mean())
    raise ValidationError(f"unknown aggregate {aggregate!r}; expected 'sum' or 'mean'")


def nearest_neighbor_rows(C: np.ndarray) -> np.ndarray:
    """Per-row argmin over off-diagonal entries of a cost matrix."""
    C = np.asarray(C, dtype=np.float64)
    masked = C + np.where(np.eye(C.shape[0], dtype=bool), np.inf, 0.0)
    return masked.argmin(axis=1)


def embed_labels_lorentz(labels, num_classes: int, dim: int, scale: float = 1.0) -> np.ndarray:
    """Push integer class labels onto L^dim through the basepoint exponential map.

    Class c gets a tangent prototype of norm ``scale``: the one-hot direction
    scale * e_c when num_classes <= dim, otherwise ``num_classes`` evenly
    spaced directions on the first two tangent coordinates. Intended for
    synthetic feature-label experiments; real pipelines should supply
    pre-embedded coordinates.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if num_classes < 1 or np.any(labels < 0) or np.any(labels >= num_classes):
        raise ValidationError("labels must lie in [0, num_classes)")
    prototypes = np.zeros((num_classes, dim))
    if num_classes <= dim:
        prototypes[np.arange(num_classes), np.arange(num_classes)] = scale
    elif dim >= 2:
        angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
        prototypes[:, 0] = scale * np.cos(angles)
        prototypes[:, 1] = scale * np.sin(angles)
    else:
        raise ValidationError(f"cannot spread {num_classes} classes in a 1-d tangent space")
    return lorentz_exp_basepoint(prototypes[labels])
