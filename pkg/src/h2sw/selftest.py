"""Randomized self-check suites exposed through the CLI.

Each suite re-derives expected values from an independent route (permutation
enumeration, finite differences, Monte Carlo rates) and checks the library
against it on freshly drawn instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .exact_ot import joint_wasserstein, mixed_cost_matrix
from .geometry import (
    EUCLIDEAN,
    LORENTZ,
    SPHERE,
    JointCloud,
    SpaceSpec,
    lorentz_exp_basepoint,
)
from .ot1d import Projected1D, wasserstein_1d
from .projections import BusemannLorentz, Circular, Linear, OddPolynomial
from .sliced import EstimatorConfig, estimate, gradient, mc_std


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: int
    failed: int
    detail: str

    @property
    def ok(self) -> bool:
        return self.failed == 0


def _perm_w1d(a: np.ndarray, b: np.ndarray, p: float) -> float:
    best = np.inf
    for perm in itertools.permutations(range(a.size)):
        cost = float(np.mean(np.abs(a - b[list(perm)]) ** p))
        best = min(best, cost)
    return best


def _perm_joint(mu: JointCloud, nu: JointCloud, p: float) -> float:
    C = mixed_cost_matrix(mu, nu, p)
    n = mu.n
    best = np.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, float(C[np.arange(n), list(perm)].sum() / n))
    return best


def _random_cloud(rng, n, specs, uniform=True) -> JointCloud:
    blocks = []
    for s in specs:
        if s.kind == EUCLIDEAN:
            blocks.append(rng.standard_normal((n, s.dim)))
        elif s.kind == SPHERE:
            v = rng.standard_normal((n, s.dim))
            blocks.append(v / np.linalg.norm(v, axis=1, keepdims=True))
        elif s.kind == LORENTZ:
            u = 0.7 * rng.standard_normal((n, s.dim))
            blocks.append(lorentz_exp_basepoint(u))
    weights = None
    if not uniform:
        w = rng.random(n) + 0.1
        weights = w / w.sum()
    return JointCloud(tuple(blocks), tuple(specs), weights)


def suite_ot1d_bruteforce(rng, trials=100, n_max=7) -> SuiteResult:
    """Closed-form 1-d W_p^p vs permutation-enumeration optimum (uniform)."""
    passed = failed = 0
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, n_max + 1))
        p = float(rng.choice([1.0, 2.0]))
        a = rng.standard_normal(n)
        b = rng.standard_normal(n)
        got = wasserstein_1d(Projected1D(a), Projected1D(b), p)
        want = _perm_w1d(a, b, p)
        err = abs(got - want)
        worst = max(worst, err)
        if err <= 1e-10:
            passed += 1
        else:
            failed += 1
    return SuiteResult("ot1d-bruteforce", passed, failed, f"worst |diff| {worst:.3g}")


def suite_exact_bruteforce(rng, trials=50, n=6) -> SuiteResult:
    """Exact joint Wasserstein vs full permutation enumeration on R^2 x S^1."""
    specs = (SpaceSpec(EUCLIDEAN, 2), SpaceSpec(SPHERE, 2))
    passed = failed = 0
    worst = 0.0
    for _ in range(trials):
        mu = _random_cloud(rng, n, specs)
        nu = _random_cloud(rng, n, specs)
        got, plan = joint_wasserstein(mu, nu, p=2.0)
        plan.check(mu.weights, nu.weights, mixed_cost_matrix(mu, nu, 2.0))
        want = _perm_joint(mu, nu, 2.0)
        err = abs(got - want)
        worst = max(worst, err)
        if err <= 1e-9:
            passed += 1
        else:
            failed += 1
    return SuiteResult("exact-bruteforce", passed, failed, f"worst |diff| {worst:.3g}")


def suite_metric_axioms(rng, trials=50, n_max=20) -> SuiteResult:
    """Identity, symmetry, and triangle inequality of the hierarchical
    estimate under a shared direction stream on R^3 x S^2."""
    specs = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3))
    gs = (Linear(), Circular(1.0))
    passed = failed = 0
    for t in range(trials):
        n = int(rng.integers(2, n_max + 1))
        cfg = EstimatorConfig("h2sw", gs, L=20, p=2.0, seed=int(rng.integers(0, 2**31)))
        mu = _random_cloud(rng, n, specs)
        nu = _random_cloud(rng, n, specs)
        rho = _random_cloud(rng, n, specs)
        ok = estimate(mu, mu, cfg) == 0.0
        ok &= estimate(mu, nu, cfg) == estimate(nu, mu, cfg)
        d = lambda x, y: estimate(x, y, cfg) ** (1.0 / cfg.p)
        ok &= d(mu, nu) <= d(mu, rho) + d(rho, nu) + 1e-9
        ok &= estimate(mu, nu, cfg) >= 0.0
        passed += bool(ok)
        failed += not ok
    return SuiteResult("metric-axioms", passed, failed, f"{trials} triples")


def _fd_gradient(mu, nu, cfg, h=1e-5):
    grads = []
    for k, block in enumerate(mu.blocks):
        g = np.zeros_like(block)
        for i in range(block.shape[0]):
            for j in range(block.shape[1]):
                for sgn in (+1.0, -1.0):
                    blocks = [b.copy() for b in mu.blocks]
                    blocks[k][i, j] += sgn * h
                    probe = JointCloud(tuple(blocks), mu.specs, mu.weights, validate=False)
                    g[i, j] += sgn * estimate(probe, nu, cfg)
        grads.append(g / (2.0 * h))
    return grads


def _gradcheck_specs(rng):
    """One random configuration drawing from all four projector families."""
    choice = int(rng.integers(0, 4))
    if choice == 0:
        specs = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3))
        gs = (Linear(), Circular(1.0))
    elif choice == 1:
        specs = (SpaceSpec(EUCLIDEAN, 2), SpaceSpec(EUCLIDEAN, 3))
        gs = (OddPolynomial(3), Linear())
    elif choice == 2:
        specs = (SpaceSpec(EUCLIDEAN, 2), SpaceSpec(LORENTZ, 2))
        gs = (Circular(0.8), BusemannLorentz())
    else:
        specs = (SpaceSpec(SPHERE, 3), SpaceSpec(LORENTZ, 3))
        gs = (Circular(1.0), BusemannLorentz())
    return specs, gs


def suite_grad_fd(rng, trials=20) -> SuiteResult:
    """Analytic sliced gradient vs central finite differences."""
    passed = failed = 0
    worst = 0.0
    for _ in range(trials):
        specs, gs = _gradcheck_specs(rng)
        n = int(rng.integers(2, 7))
        cfg = EstimatorConfig("h2sw", gs, L=6, p=2.0, seed=int(rng.integers(0, 2**31)))
        mu = _random_cloud(rng, n, specs)
        nu = _random_cloud(rng, n, specs)
        got = gradient(mu, nu, cfg)
        want = _fd_gradient(mu, nu, cfg)
        num = sum(float(np.abs(a - b).max()) for a, b in zip(got, want))
        den = max(1e-12, max(float(np.abs(b).max()) for b in want))
        rel = num / den
        worst = max(worst, rel)
        if rel <= 1e-4:
            passed += 1
        else:
            failed += 1
    return SuiteResult("grad-fd", passed, failed, f"worst rel err {worst:.3g}")


def suite_mc_rate(rng, repeats=100, L=100) -> SuiteResult:
    """Monte Carlo error rate: quadrupling L should halve the spread."""
    specs = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3))
    gs = (Linear(), Circular(1.0))
    mu = _random_cloud(rng, 24, specs)
    nu = _random_cloud(rng, 24, specs)
    base = EstimatorConfig("h2sw", gs, L=L, p=2.0, seed=int(rng.integers(0, 2**31)))
    s1 = mc_std(mu, nu, base, repeats)
    s2 = mc_std(mu, nu, replace(base, L=4 * L), repeats)
    ratio = s1 / s2
    ok = 1.5 <= ratio <= 2.5
    return SuiteResult("mc-rate", int(ok), int(not ok), f"std ratio {ratio:.3f}")


def sample_complexity_trend(seed=0, L=200, resamples=20,
                            n_list=(250, 500, 1000, 2000, 4000), n_ref=10_000) -> dict:
    """Empirical-convergence benchmark on a fixed continuous pair.

    Two smooth distributions are pushed onto R^3 x S^2; the hierarchical
    estimate on an n-point resample is compared against the estimate on a
    fixed n_ref-point reference draw (same directions throughout, so only
    sampling error moves the numbers). Mean absolute deviations should
    shrink as n doubles.
    """
    specs = (SpaceSpec(EUCLIDEAN, 3), SpaceSpec(SPHERE, 3))
    gs = (Linear(), Circular(1.0))
    cfg = EstimatorConfig("h2sw", gs, L=L, p=2.0, seed=seed)
    rng = np.random.default_rng(seed)

    def draw_mu(n):
        x = rng.standard_normal((n, 3))
        v = rng.standard_normal((n, 3)) + np.array([2.0, 0.0, 0.0])
        return JointCloud((x, v / np.linalg.norm(v, axis=1, keepdims=True)), specs)

    def draw_nu(n):
        x = 0.5 * rng.standard_normal((n, 3)) + np.array([1.5, 1.5, 0.0])
        v = rng.standard_normal((n, 3)) + np.array([0.0, 2.0, 0.0])
        return JointCloud((x, v / np.linalg.norm(v, axis=1, keepdims=True)), specs)

    ref = estimate(draw_mu(n_ref), draw_nu(n_ref), cfg) ** (1.0 / cfg.p)
    errors = []
    for n in n_list:
        devs = [
            abs(estimate(draw_mu(n), draw_nu(n), cfg) ** (1.0 / cfg.p) - ref)
            for _ in range(resamples)
        ]
        errors.append(float(np.mean(devs)))
    decreasing = sum(b < a for a, b in zip(errors, errors[1:]))
    return {
        "n_list": list(n_list),
        "errors": errors,
        "decreasing_steps": int(decreasing),
        "total_steps": len(n_list) - 1,
    }


SUITES = {
    "ot1d-bruteforce": suite_ot1d_bruteforce,
    "exact-bruteforce": suite_exact_bruteforce,
    "metric-axioms": suite_metric_axioms,
    "grad-fd": suite_grad_fd,
    "mc-rate": suite_mc_rate,
}


def run_suites(names=None, seed=0, n=None, trials=None) -> list:
    """Run the named suites (all by default) and return their results."""
    results = []
    for name in names or SUITES:
        if name not in SUITES:
            raise ValidationError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
        rng = np.random.default_rng(seed)
        kwargs = {}
        if trials is not None and name in ("ot1d-bruteforce", "exact-bruteforce",
                                           "metric-axioms", "grad-fd"):
            kwargs["trials"] = trials
        if n is not None:
            if name == "ot1d-bruteforce":
                kwargs["n_max"] = n
            elif name == "exact-bruteforce":
                kwargs["n"] = n
            elif name == "metric-axioms":
                kwargs["n_max"] = n
        results.append(SUITES[name](rng, **kwargs))
    return results
