"""Monte Carlo sliced-distance estimators over joint clouds.

Four families share one pipeline: draw L direction samples, project both
clouds to one dimension per direction, average the closed-form W_p^p.

* ``sw`` / ``gsw`` slice the concatenated joint coordinates with a single
  defining function (the inner product for sw).
* ``h2sw`` slices each marginal with its own defining function and mixes
  the per-marginal scalars with random weights psi on S^{K-1}.
* ``chsw`` is the fixed-psi variant of the same pipeline.

Directions come from counter-based substreams keyed by (seed, direction
index), so results are reproducible and independent of evaluation order;
estimates are symmetric in their two arguments because both sides share
one direction stream. All estimators return the p-th power; take
``value ** (1/p)`` (or use :func:`root`) for the distance itself.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, ValidationError
from .geometry import EUCLIDEAN, JointCloud, SpaceSpec, sample_unit_sphere
from .ot1d import grad_pp_uniform_batch, pp_batch
from .projections import (
    Linear,
    batch_values,
    sample_theta,
    theta_dim,
    weighted_gradient_sum,
)

FAMILIES = ("sw", "gsw", "h2sw", "chsw")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EstimatorConfig:
    """Configuration shared by every sliced estimator.

    ``gs`` holds one defining function per marginal for h2sw/chsw and a
    single defining function (applied to the concatenated coordinates) for
    sw/gsw. ``fixed_psi`` is the chsw mixing vector, unit norm.
    """

    family: str
    gs: tuple = None
    L: int = 100
    p: float = 2.0
    seed: int = 0
    fixed_psi: np.ndarray = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.L < 1:
            raise ConfigurationError(f"projection count must be >= 1, got {self.L}")
        if not float(self.p) >= 1:
            raise ConfigurationError(f"order p must be >= 1, got {self.p}")
        gs = self.gs
        if gs is None:
            if self.family in ("sw",):
                gs = (Linear(),)
            else:
                raise ConfigurationError(f"family {self.family!r} needs defining functions")
        elif not isinstance(gs, (tuple, list)):
            gs = (gs,)
        gs = tuple(gs)
        if self.family in ("sw", "gsw") and len(gs) != 1:
            raise ConfigurationError(f"family {self.family!r} takes a single defining function")
        if self.family == "sw" and not all(isinstance(g, Linear) for g in gs):
            raise ConfigurationError("sw always slices with the inner product")
        fixed_psi = self.fixed_psi
        if self.family == "chsw":
            if fixed_psi is None:
                raise ConfigurationError("chsw needs fixed_psi")
            fixed_psi = np.array(fixed_psi, dtype=np.float64, copy=True).ravel()
            if abs(np.linalg.norm(fixed_psi) - 1.0) > 1e-9:
                raise ConfigurationError(
                    f"fixed_psi norm {np.linalg.norm(fixed_psi):.12g}, expected 1"
                )
            fixed_psi.setflags(write=False)
        elif fixed_psi is not None:
            raise ConfigurationError("fixed_psi is only meaningful for chsw")
        object.__setattr__(self, "gs", gs)
        object.__setattr__(self, "fixed_psi", fixed_psi)


def default_fixed_psi(num_marginals: int) -> np.ndarray:
    """Equal-mixing chsw weights (1/sqrt(K), ..., 1/sqrt(K))."""
    return np.full(num_marginals, 1.0 / np.sqrt(num_marginals))


def direction_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based substream for one direction: Philox keyed by (seed, index)."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _joint_spec(cloud: JointCloud) -> SpaceSpec:
    if cloud.num_marginals == 1:
        return cloud.specs[0]
    return SpaceSpec(EUCLIDEAN, cloud.concat().shape[1])


def _check_pair(mu: JointCloud, nu: JointCloud, cfg: EstimatorConfig):
    if not mu.same_specs(nu):
        raise ConfigurationError("the two clouds live on different space lists")
    if cfg.family in ("h2sw", "chsw"):
        if len(cfg.gs) != mu.num_marginals:
            raise ConfigurationError(
                f"{len(cfg.gs)} defining functions for {mu.num_marginals} marginals"
            )
        for g, s in zip(cfg.gs, mu.specs):
            theta_dim(g, s)
        if cfg.family == "chsw" and cfg.fixed_psi.size != mu.num_marginals:
            raise ConfigurationError(
                f"fixed_psi has {cfg.fixed_psi.size} entries for {mu.num_marginals} marginals"
            )
    else:
        theta_dim(cfg.gs[0], _joint_spec(mu))


def _sample_hier_directions(specs, gs, L, seed, fixed_psi=None):
    """Theta matrices (one (L, dim_k) block per marginal) and psi rows (L, K)."""
    K = len(specs)
    thetas = [np.empty((L, theta_dim(g, s))) for g, s in zip(gs, specs)]
    psi = np.empty((L, K))
    for l in range(L):
        rng = direction_rng(seed, l)
        for k in range(K):
            thetas[k][l] = sample_theta(gs[k], specs[k], rng)
        if fixed_psi is not None:
            psi[l] = fixed_psi
        elif K == 1:
            psi[l] = 1.0
        else:
            psi[l] = sample_unit_sphere(K, rng)
    return thetas, psi


def _sample_joint_directions(g, spec, L, seed):
    thetas = np.empty((L, theta_dim(g, spec)))
    for l in range(L):
        thetas[l] = sample_theta(g, spec, direction_rng(seed, l))
    return thetas


def _project_hier(cloud, gs, thetas, psi):
    vals = np.zeros((cloud.n, psi.shape[0]))
    for k, (block, g) in enumerate(zip(cloud.blocks, gs)):
        vals += psi[:, k][None, :] * batch_values(g, block, thetas[k])
    return vals


def _per_direction_pp(mu, nu, cfg):
    if cfg.family in ("sw", "gsw"):
        thetas = _sample_joint_directions(cfg.gs[0], _joint_spec(mu), cfg.L, cfg.seed)
        A = batch_values(cfg.gs[0], mu.concat(), thetas)
        B = batch_values(cfg.gs[0], nu.concat(), thetas)
    else:
        fixed = cfg.fixed_psi if cfg.family == "chsw" else None
        thetas, psi = _sample_hier_directions(mu.specs, cfg.gs, cfg.L, cfg.seed, fixed)
        A = _project_hier(mu, cfg.gs, thetas, psi)
        B = _project_hier(nu, cfg.gs, thetas, psi)
    return pp_batch(A, mu.weights, B, nu.weights, cfg.p)


def estimate(mu: JointCloud, nu: JointCloud, cfg: EstimatorConfig,
             return_per_direction: bool = False):
    """Monte Carlo estimate of the configured sliced distance, to the power p."""
    _check_pair(mu, nu, cfg)
    per = _per_direction_pp(mu, nu, cfg)
    value = float(np.mean(per))
    if return_per_direction:
        return value, per
    return value


def root(value_pp: float, p: float) -> float:
    """Distance from its p-th power."""
    return float(value_pp) ** (1.0 / float(p))


def _family_estimate(family):
    def op(mu, nu, cfg, return_per_direction=False):
        if cfg.family != family:
            raise ConfigurationError(f"config family {cfg.family!r}, expected {family!r}")
        return estimate(mu, nu, cfg, return_per_direction)

    op.__name__ = f"{family}_estimate"
    op.__qualname__ = op.__name__
    op.__doc__ = f"Estimate of {family.upper()}_p^p; see :func:`estimate`."
    return op


sw_estimate = _family_estimate("sw")
gsw_estimate = _family_estimate("gsw")
h2sw_estimate = _family_estimate("h2sw")
chsw_estimate = _family_estimate("chsw")


def gradient(mu: JointCloud, nu: JointCloud, cfg: EstimatorConfig,
             lenient: bool = False) -> list:
    """Gradient of :func:`estimate` with respect to mu's coordinates.

    Returns one (n, ambient_dim) array per block. Requires uniform weights
    and equal support counts; uses the same direction stream as the
    estimate for the same seed, so finite differences of ``estimate`` match
    this exactly in expectation and per sample.
    """
    _check_pair(mu, nu, cfg)
    if mu.n != nu.n or not (mu.is_uniform and nu.is_uniform):
        raise ConfigurationError("gradient requires uniform weights and equal support counts")
    if cfg.family in ("sw", "gsw"):
        g = cfg.gs[0]
        thetas = _sample_joint_directions(g, _joint_spec(mu), cfg.L, cfg.seed)
        X = mu.concat()
        A = batch_values(g, X, thetas)
        B = batch_values(g, nu.concat(), thetas)
        coeff = grad_pp_uniform_batch(A, B, cfg.p) / cfg.L
        flat = weighted_gradient_sum(g, X, thetas, coeff, lenient=lenient)
        out, col = [], 0
        for s in mu.specs:
            out.append(flat[:, col : col + s.ambient_dim])
            col += s.ambient_dim
        return out
    fixed = cfg.fixed_psi if cfg.family == "chsw" else None
    thetas, psi = _sample_hier_directions(mu.specs, cfg.gs, cfg.L, cfg.seed, fixed)
    A = _project_hier(mu, cfg.gs, thetas, psi)
    B = _project_hier(nu, cfg.gs, thetas, psi)
    dpp = grad_pp_uniform_batch(A, B, cfg.p)
    out = []
    for k, (block, g) in enumerate(zip(mu.blocks, cfg.gs)):
        coeff = dpp * psi[:, k][None, :] / cfg.L
        out.append(weighted_gradient_sum(g, block, thetas[k], coeff, lenient=lenient))
    return out


def h2sw_gradient(mu, nu, cfg, lenient: bool = False) -> list:
    """Gradient of the h2sw estimate; see :func:`gradient`."""
    if cfg.family != "h2sw":
        raise ConfigurationError(f"config family {cfg.family!r}, expected 'h2sw'")
    return gradient(mu, nu, cfg, lenient=lenient)


def mc_std(mu: JointCloud, nu: JointCloud, cfg: EstimatorConfig, repeats: int) -> float:
    """Sample standard deviation of the estimate across consecutive seeds."""
    if repeats < 2:
        raise ValidationError(f"repeats must be >= 2, got {repeats}")
    vals = [estimate(mu, nu, replace(cfg, seed=cfg.seed + r)) for r in range(repeats)]
    return float(np.std(vals, ddof=1))


def standard_error(per_direction: np.ndarray) -> float:
    """Monte Carlo standard error of the mean of per-direction W_p^p values."""
    per = np.asarray(per_direction, dtype=np.float64)
    if per.size < 2:
        return 0.0
    return float(np.std(per, ddof=1) / np.sqrt(per.size))
