"""Constrained Dirichlet minimization and the finite-volume surface tensions built on it."""

from __future__ import annotations

import dataclasses
import logging
import math
import time

import numpy as np

from .grid import Configuration, CylinderDomain, EnergyModel, build_cylinder, planar_data, transfer
from .medium import FinslerMedium
from .potential import DoubleWell, TransitionProfile

log = logging.getLogger(__name__)

ARMIJO = 1e-4
STEP_MIN, STEP_MAX = 1e-12, 1e6


@dataclasses.dataclass(frozen=True)
class SolverOptions:
    """Projected Barzilai-Borwein descent settings.

    ``grad_tol`` bounds the sup norm of the projected gradient measured per
    unit volume (nodal gradient divided by the cell volume), so it does not
    drift with the grid spacing. ``energy_tol`` is the relative energy
    decrease over one sweep of ``sweep`` iterations below which the run stops.
    """

    max_iters: int = 20000
    grad_tol: float = 1e-5
    energy_tol: float = 1e-11
    sweep: int = 10
    initial_step: float = 1e-2
    smoothing: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol < 0 or self.energy_tol < 0 or self.smoothing < 0:
            raise ValueError("tolerances must be non-negative")
        if self.sweep < 1 or not self.initial_step > 0:
            raise ValueError("sweep must be >= 1 and initial_step positive")


@dataclasses.dataclass
class MinimizeResult:
    u: Configuration
    energy: float
    iters: int
    grad_norm: float
    converged: bool
    reason: str
    energies: np.ndarray

    def __iter__(self):
        # allows ``u, value = minimize(...)``
        return iter((self.u, self.energy))


def projected_grad_norm(x, g, free, scale) -> float:
    pg = x[free] - np.clip(x[free] - scale * g[free], -1.0, 1.0)
    return float(np.max(np.abs(pg), initial=0.0))


def minimize(model: EnergyModel, u0: Configuration, opts: SolverOptions = SolverOptions()) -> MinimizeResult:
    """Projected gradient descent with BB steps and halving backtracking.

    Only unpinned nodes move; each trial point is projected onto [-1, 1]
    nodewise and accepted under an Armijo test, so the accepted energies are
    non-increasing.
    """
    if u0.domain is not model.domain:
        raise ValueError("u0 lives on a different domain than the energy model")
    free = ~u0.dirichlet_mask
    scale = 1.0 / model.vol
    x = u0.values.copy()
    E, g = model.energy_grad(x)
    energies = [E]
    alpha = opts.initial_step
    gnorm = projected_grad_norm(x, g, free, scale)
    reason = "max_iters"
    it = 0
    while True:
        if gnorm <= opts.grad_tol:
            reason = "grad_tol"
            break
        if len(energies) > opts.sweep:
            prev = energies[-1 - opts.sweep]
            if prev - E <= opts.energy_tol * max(abs(E), 1e-300):
                reason = "energy_tol"
                break
        if it >= opts.max_iters:
            break
        it += 1
        while True:
            xt = x.copy()
            xt[free] = np.clip(x[free] - alpha * scale * g[free], -1.0, 1.0)
            s = xt - x
            slope = float(np.dot(g, s))
            Et, gt = model.energy_grad(xt)
            if Et <= E + ARMIJO * slope:
                break
            alpha *= 0.5
            if alpha < STEP_MIN:
                break
        if alpha < STEP_MIN or not Et <= E:
            reason = "stalled"
            break
        y = gt - g
        sy = float(np.dot(s, y))
        ss = float(np.dot(s, s))
        alpha = ss / (sy * scale) if sy > 0 else STEP_MAX
        alpha = min(max(alpha, STEP_MIN * 10), STEP_MAX)
        x, E, g = xt, Et, gt
        energies.append(E)
        gnorm = projected_grad_norm(x, g, free, scale)
    converged = reason in ("grad_tol", "energy_tol")
    if not converged:
        log.warning("minimize stopped without convergence (%s) at grad norm %.3g", reason, gnorm)
    u = Configuration(u0.domain, x, u0.dirichlet_mask.copy())
    return MinimizeResult(u, E, it, gnorm, converged, reason, np.asarray(energies))


def solver_slack(opts: SolverOptions, domain: CylinderDomain) -> float:
    """``grad_tol * sqrt(node count) * spacing^(d/2)``: allowance for an inexact minimizer."""
    return opts.grad_tol * math.sqrt(domain.n_nodes) * domain.spacing ** (domain.d / 2)


@dataclasses.dataclass
class SurfaceTensionSample:
    """One solved finite-volume problem.

    ``R`` is the scale parameter of the run (cross side of a centered
    cylinder, blow-up factor for off-center cubes), ``cross_side`` the actual
    side of the cross-section, and ``normalized = value / cross_side^(d-1)``.
    """

    e: tuple
    R: float
    h: float
    kappa: float
    seed: int
    x0: tuple
    value: float
    normalized: float
    iters: int
    final_grad_norm: float
    wall_time: float
    converged: bool
    rho: float = 1.0
    cross_side: float = 0.0
    candidate: float = 0.0
    slack: float = 0.0

    @property
    def d(self) -> int:
        return len(self.e)


@dataclasses.dataclass(frozen=True)
class DomainSpec:
    R: float
    h: float
    spacing: float = 0.1
    cross_center: tuple | None = None
    frame: np.ndarray | None = None


def solve_domain(domain: CylinderDomain, x0, medium: FinslerMedium, W: DoubleWell, q: TransitionProfile,
                 opts: SolverOptions, eps: float = 1.0, warm: Configuration | None = None):
    """Minimize over ``domain`` with trace ``T_{x0} q_e`` (scaled by ``eps``).

    Returns ``(result, candidate_energy, model)``; ``warm`` seeds the interior.
    """
    model = EnergyModel(domain, medium, W, eps, opts.smoothing)
    planar = planar_data(domain, x0, q, eps)
    candidate = model.energy(planar.values)
    u0 = planar if warm is None else transfer(warm, planar)
    return minimize(model, u0, opts), candidate, model


def finite_volume_sigma(e, x0, domain_spec: DomainSpec, medium: FinslerMedium, W: DoubleWell,
                        q: TransitionProfile, opts: SolverOptions = SolverOptions(), *,
                        warm: Configuration | None = None, kappa: float = float("nan"),
                        scale_R: float | None = None, rho: float = 1.0, return_config: bool = False):
    """Minimal energy over the cylinder with the planar trace anchored at ``x0``."""
    t0 = time.perf_counter()
    e = np.atleast_1d(np.asarray(e, dtype=float))
    e = e / np.linalg.norm(e)
    x0 = np.asarray(x0, dtype=float).reshape(e.size)
    dom = build_cylinder(e, domain_spec.cross_center, domain_spec.R, domain_spec.h,
                         domain_spec.spacing, x0, domain_spec.frame)
    res, candidate, _ = solve_domain(dom, x0, medium, W, q, opts, warm=warm)
    side = dom.R if dom.d > 1 else 1.0
    sample = SurfaceTensionSample(
        e=tuple(float(v) for v in e), R=float(scale_R if scale_R is not None else side),
        h=dom.h, kappa=kappa, seed=medium.seed, x0=tuple(float(v) for v in x0),
        value=res.energy, normalized=res.energy / side ** (dom.d - 1), iters=res.iters,
        final_grad_norm=res.grad_norm, wall_time=time.perf_counter() - t0,
        converged=res.converged, rho=rho, cross_side=side, candidate=candidate,
        slack=solver_slack(opts, dom),
    )
    return (sample, res.u) if return_config else sample


def centered_sigma(e, R: float, h: float, medium: FinslerMedium, W: DoubleWell, q: TransitionProfile,
                   opts: SolverOptions = SolverOptions(), spacing: float = 0.1, **kw):
    """Centered finite-volume surface tension on ``Q(0, R) (+)_e (-h, h)``."""
    d = np.atleast_1d(e).size
    spec = DomainSpec(R, h, spacing, kw.pop("cross_center", None), kw.pop("frame", None))
    kw.setdefault("kappa", h / R if d > 1 else float("nan"))
    return finite_volume_sigma(e, np.zeros(d), spec, medium, W, q, opts, **kw)
