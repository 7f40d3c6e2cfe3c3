"""Euler gradient flow deforming one joint cloud toward another.

Each step moves every support against the sliced-loss gradient scaled by
step_size * n (the empirical measure carries 1/n weights, so this is the
per-point step), then re-projects manifold blocks: sphere rows are
renormalized, Lorentz rows rescaled back onto the hyperboloid. Progress is
logged at checkpoints as the exact joint Wasserstein cost next to the
running sliced loss; instances over the exact-solver guard fall back to a
high-L sliced estimate, flagged per record.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateStepError, ResourceGuardError, ValidationError
from .exact_ot import joint_wasserstein
from .geometry import LORENTZ, SPHERE, JointCloud, lorentz_project
from .sliced import EstimatorConfig, estimate, gradient

FALLBACK_L = 1024


@dataclass(frozen=True)
class FlowConfig:
    estimator: EstimatorConfig
    step_size: float = 0.01
    steps: int = 1000
    checkpoint_every: int = 100
    reseed_per_step: bool = True

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValidationError(f"step size must be positive, got {self.step_size}")
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        if not 1 <= self.checkpoint_every <= self.steps:
            raise ValidationError(
                f"checkpoint_every must lie in [1, steps], got {self.checkpoint_every}"
            )


@dataclass(frozen=True)
class Checkpoint:
    """One logged step: exact joint W_p^p (or its flagged fallback) and loss."""

    step: int
    exact_w: float
    loss: float
    exact: bool = True


@dataclass(frozen=True)
class FlowTrace:
    checkpoints: tuple
    final_cloud: JointCloud

    def __post_init__(self):
        steps = [c.step for c in self.checkpoints]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValidationError("checkpoint step indices must be strictly increasing")


def _step_seed(cfg: FlowConfig, step_index: int) -> int:
    return cfg.estimator.seed + step_index if cfg.reseed_per_step else cfg.estimator.seed


def euler_step(state: JointCloud, target: JointCloud, cfg: FlowConfig,
               step_index: int = 0) -> JointCloud:
    """One explicit Euler step of the sliced-loss flow, with re-projection."""
    est = replace(cfg.estimator, seed=_step_seed(cfg, step_index))
    grads = gradient(state, target, est, lenient=True)
    n = state.n
    new_blocks = []
    for block, g, spec in zip(state.blocks, grads, state.specs):
        if not np.any(g):
            # an untouched block needs no re-projection (and renormalizing
            # would perturb last ulps, breaking exact fixed points)
            new_blocks.append(block)
            continue
        moved = block - cfg.step_size * n * g
        if spec.kind == SPHERE:
            norms = np.linalg.norm(moved, axis=1, keepdims=True)
            if np.any(norms < 1e-15):
                raise DegenerateStepError(
                    "a sphere row collapsed to zero norm; the step size is far too large"
                )
            moved = moved / norms
        elif spec.kind == LORENTZ:
            try:
                moved = lorentz_project(moved)
            except ValidationError as exc:
                raise DegenerateStepError(
                    f"a Lorentz row left the hyperboloid's cone: {exc}"
                ) from exc
        new_blocks.append(moved)
    return state.replace_blocks(new_blocks)


def _checkpoint(state, target, cfg, step_index) -> Checkpoint:
    est = replace(cfg.estimator, seed=_step_seed(cfg, step_index))
    loss = estimate(state, target, est)
    try:
        exact_w, _ = joint_wasserstein(state, target, p=cfg.estimator.p)
        return Checkpoint(step_index, exact_w, loss, exact=True)
    except ResourceGuardError:
        fallback = replace(est, L=max(FALLBACK_L, est.L))
        return Checkpoint(step_index, estimate(state, target, fallback), loss, exact=False)


def deform(source: JointCloud, target: JointCloud, cfg: FlowConfig) -> FlowTrace:
    """Run the full flow, logging checkpoints (step 0 included) along the way."""
    if not source.same_specs(target):
        raise ValidationError("source and target live on different space lists")
    if source.n != target.n or not (source.is_uniform and target.is_uniform):
        raise ValidationError("the flow requires uniform weights and equal support counts")
    state = source
    records = [_checkpoint(state, target, cfg, 0)]
    for t in range(1, cfg.steps + 1):
        state = euler_step(state, target, cfg, step_index=t - 1)
        if t % cfg.checkpoint_every == 0 or t == cfg.steps:
            records.append(_checkpoint(state, target, cfg, t))
    return FlowTrace(tuple(records), state)
