"""Thermodynamic-limit procedures built on the finite-volume solver.

Every sweep is a list of independent tasks (one per seed, or per seed and
direction) mapped over an optional process pool; results are gathered in
task order, so the output never depends on the schedule.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from typing import NamedTuple

import numpy as np

from .grid import Configuration, build_cylinder, cube_domain, planar_data, transfer
from .medium import FinslerMedium, MediumKind, make_medium
from .perimeter import SurfaceTensionTable, flat_interface, perimeter
from .potential import DoubleWell, TransitionProfile, c_lambda, tail_e
from .solve import (DomainSpec, SolverOptions, SurfaceTensionSample, centered_sigma, finite_volume_sigma,
                    solve_domain, solver_slack)

BOUND_SLACK = 1e-2
FLAT_CONDITION = 1e8

__all__ = [
    "Axis", "MediumSpec", "Problem", "Residual", "EnsembleStat", "SweepResult", "Extrapolation",
    "subadditive_extrapolate", "h_sweep", "r_sweep", "subadditivity_check", "off_center_check",
    "rotated_frame_check", "wulff_scan", "recovery_energy", "SurfaceTensionTable", "perimeter",
]


class Axis(str, Enum):
    H = "h"
    R = "R"
    DIAGONAL_KAPPA_R = "kappaR"


@dataclasses.dataclass(frozen=True)
class MediumSpec:
    """Recipe for a medium; ``realize(seed)`` draws one realization."""

    kind: MediumKind
    params: dict = dataclasses.field(default_factory=dict)

    def realize(self, seed: int) -> FinslerMedium:
        return make_medium(self.kind, self.params, seed)

    @property
    def bounds(self) -> tuple[float, float]:
        m = self.realize(0)
        return m.lam, m.Lam


@dataclasses.dataclass(frozen=True)
class Problem:
    """Everything a finite-volume solve needs besides the geometry."""

    medium: MediumSpec
    W: DoubleWell = dataclasses.field(default_factory=DoubleWell)
    q: TransitionProfile = dataclasses.field(default_factory=TransitionProfile)
    opts: SolverOptions = SolverOptions()
    spacing: float = 0.1


@dataclasses.dataclass
class Residual:
    """A property check ``lhs <= rhs + slack``.

    ``strict`` is the same test without slack. Soft residuals are reported
    but do not decide whether a run passes.
    """

    name: str
    lhs: float
    rhs: float
    slack: float
    hard: bool = True
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + self.slack)

    @property
    def strict(self) -> bool:
        return bool(self.lhs <= self.rhs)

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.update(passed=self.passed, strict=self.strict)
        return out


@dataclasses.dataclass
class EnsembleStat:
    param: float
    mean: float
    std: float
    n: int

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.n) if self.n > 0 else float("nan")


class Extrapolation(NamedTuple):
    limit: float
    stderr: float
    slope: float
    flagged: bool
    residuals: np.ndarray


@dataclasses.dataclass
class SweepResult:
    axis: Axis
    samples: list[SurfaceTensionSample]
    extrapolated_limit: float
    stderr: float
    residuals: list[Residual] = dataclasses.field(default_factory=list)
    ensemble: list[EnsembleStat] = dataclasses.field(default_factory=list)
    flags: list[str] = dataclasses.field(default_factory=list)
    extra: dict = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.residuals if r.hard)

    def failures(self) -> list[Residual]:
        return [r for r in self.residuals if r.hard and not r.passed]

    def as_dict(self) -> dict:
        return {
            "axis": self.axis.value,
            "extrapolated_limit": self.extrapolated_limit,
            "stderr": self.stderr,
            "passed": self.passed,
            "flags": list(self.flags),
            "ensemble": [dict(dataclasses.asdict(s), stderr=s.stderr) for s in self.ensemble],
            "residuals": [r.as_dict() for r in self.residuals],
            **self.extra,
        }


def _map(fn, tasks, jobs: int = 1) -> list:
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _unit(e) -> np.ndarray:
    e = np.atleast_1d(np.asarray(e, dtype=float))
    return e / np.linalg.norm(e)


def _stats(param, values) -> EnsembleStat:
    v = np.asarray(values, dtype=float)
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return EnsembleStat(float(param), float(v.mean()), std, int(v.size))


def _bound_residual(s: SurfaceTensionSample, C: float) -> Residual:
    area = s.cross_side ** (s.d - 1)
    return Residual("basic_bound", s.value, C * area * (1 + BOUND_SLACK), 0.0, seed=s.seed)


def subadditive_extrapolate(R, values, sigma=None) -> Extrapolation:
    """Weighted least-squares fit of ``value = a + b / R``; returns ``a`` and its stderr.

    With ``sigma`` (per-point standard errors, all positive) the covariance is
    ``(X^T W X)^{-1}``; otherwise it is estimated from the fit residuals.
    """
    R = np.asarray(R, dtype=float)
    y = np.asarray(values, dtype=float)
    if R.size < 3 or R.shape != y.shape:
        raise ValueError("need at least 3 (R, value) points")
    X = np.column_stack([np.ones_like(R), 1.0 / R])
    flagged = bool(np.linalg.cond(X) > FLAT_CONDITION)
    known = sigma is not None and np.all(np.asarray(sigma, dtype=float) > 0)
    if known:
        sig = np.asarray(sigma, dtype=float)
        w = 1.0 / sig**2
    else:
        w = np.ones_like(y)
    A = X.T @ (w[:, None] * X)
    try:
        cov = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        return Extrapolation(float("nan"), float("inf"), float("nan"), True, np.full_like(y, np.nan))
    coef = cov @ (X.T @ (w * y))
    res = y - X @ coef
    if not known:
        dof = R.size - 2
        cov = cov * float(res @ res) / dof
    return Extrapolation(float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), float(coef[1]), flagged, res)


# ---------------------------------------------------------------- h-sweeps

def _h_chain(task):
    e, R, h_list, seed, problem = task
    m = problem.medium.realize(seed)
    d = e.size
    out = []
    prev = None
    for h in h_list:
        spec = DomainSpec(R, h, problem.spacing)
        cold, u_cold = finite_volume_sigma(e, np.zeros(d), spec, m, problem.W, problem.q, problem.opts,
                                           kappa=h / R, return_config=True)
        best, u = cold, u_cold
        if prev is not None:
            warm, u_warm = finite_volume_sigma(e, np.zeros(d), spec, m, problem.W, problem.q, problem.opts,
                                               warm=prev, kappa=h / R, return_config=True)
            if warm.value < cold.value:
                best, u = warm, u_warm
        out.append(best)
        prev = u
    return out


def h_sweep(e, R: float, h_list, problem: Problem, seeds=(0,), jobs: int = 1) -> SweepResult:
    """Centered values over increasing heights, one warm-started chain per seed.

    Each height keeps the lower of a cold solve and one warm-started from the
    previous height's minimizer extended by planar data.
    """
    e = _unit(e)
    h_list = [float(h) for h in h_list]
    if any(b <= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be increasing")
    d = e.size
    area = R ** (d - 1) if d > 1 else 1.0
    lam, Lam = problem.medium.bounds
    C = c_lambda(problem.q, problem.W, Lam)
    tails = [tail_e(problem.q, problem.W, Lam, h) for h in h_list]
    chains = _map(_h_chain, [(e, R, h_list, int(s), problem) for s in seeds], jobs)
    samples, residuals = [], []
    for chain in chains:
        samples.extend(chain)
        residuals.extend(_bound_residual(s, C) for s in chain)
        for i in range(len(chain)):
            for j in range(i + 1, len(chain)):
                # h_j > h_i: value(h_j) <= value(h_i) + R^{d-1} e(h_i)
                slack = max(chain[i].slack, chain[j].slack)
                residuals.append(Residual("h_monotonicity", chain[j].value, chain[i].value + area * tails[i],
                                          slack, seed=chain[i].seed))
    ensemble = [_stats(h, [c[k].normalized for c in chains]) for k, h in enumerate(h_list)]
    last = ensemble[-1]
    flags = [f"seed {s.seed} h={s.h:g} did not converge" for s in samples if not s.converged]
    if not all(r.passed for r in residuals):
        flags.append("h-monotonicity or bound violated beyond slack")
    samples.sort(key=lambda s: (s.h, s.seed))
    return SweepResult(Axis.H, samples, last.mean, last.stderr, residuals, ensemble, flags,
                       extra={"bracket_upper": last.mean + tails[-1], "tail_terminal": tails[-1]})


# ---------------------------------------------------------------- R-sweeps

def _glue_parts(whole_dom, parts: list[Configuration], x0, q) -> Configuration:
    u = planar_data(whole_dom, x0, q)
    for p in parts:
        u = transfer(p, u)
    return u


def subadditivity_check(e, R: float, h: float, seed: int, problem: Problem,
                        medium: FinslerMedium | None = None, cold: SurfaceTensionSample | None = None) -> tuple[SurfaceTensionSample, list, Residual]:
    """Split ``Q(0, R)`` into ``2^{d-1}`` congruent subcubes and compare.

    The whole-cylinder value is the lower of a cold solve and one started
    from the parts' minimizers placed side by side, which is admissible
    because all parts carry the same planar trace on shared faces.
    """
    e = _unit(e)
    d = e.size
    if d < 2:
        raise ValueError("subadditivity needs d >= 2")
    m = medium if medium is not None else problem.medium.realize(seed)
    x0 = np.zeros(d)
    half = R / 2
    parts, configs = [], []
    for corner in np.ndindex(*(2,) * (d - 1)):
        center = tuple((np.asarray(corner) - 0.5) * half)
        s, u = finite_volume_sigma(e, x0, DomainSpec(half, h, problem.spacing, center), m, problem.W,
                                   problem.q, problem.opts, kappa=h / half, return_config=True)
        parts.append(s)
        configs.append(u)
    if cold is None:
        cold = finite_volume_sigma(e, x0, DomainSpec(R, h, problem.spacing), m, problem.W, problem.q,
                                   problem.opts, kappa=h / R)
    dom = build_cylinder(e, None, R, h, problem.spacing, x0)
    res, _, _ = solve_domain(dom, x0, m, problem.W, problem.q, problem.opts,
                             warm=_glue_parts(dom, configs, x0, problem.q))
    whole = cold
    if res.energy < cold.value:
        whole = dataclasses.replace(cold, value=res.energy, normalized=res.energy / R ** (d - 1),
                                    iters=res.iters, final_grad_norm=res.grad_norm, converged=res.converged)
    slack = 2 ** (d - 1) * max(p.slack for p in parts)
    r = Residual("subadditivity", whole.value, sum(p.value for p in parts), slack, seed=seed)
    return whole, parts, r


def _r_chain(task):
    e, kappa, R_list, seed, problem, warm_start, checks = task
    m = problem.medium.realize(seed)
    d = e.size
    out = []
    prev = None
    for R in R_list:
        spec = DomainSpec(R, kappa * R, problem.spacing)
        s, u = finite_volume_sigma(e, np.zeros(d), spec, m, problem.W, problem.q, problem.opts,
                                   warm=prev if warm_start else None, kappa=kappa, return_config=True)
        out.append(s)
        prev = u
    extra = []
    if checks and d > 1:
        R0 = R_list[0]
        h0 = kappa * R0
        extra.append(subadditivity_check(e, R0, h0, seed, problem, m, None if warm_start else out[0])[2])
        # halving the height at the smallest R
        half = finite_volume_sigma(e, np.zeros(d), DomainSpec(R0, h0 / 2, problem.spacing), m, problem.W,
                                   problem.q, problem.opts, kappa=kappa / 2)
        Lam = m.Lam
        extra.append(Residual("h_monotonicity", out[0].value,
                              half.value + R0 ** (d - 1) * tail_e(problem.q, problem.W, Lam, h0 / 2),
                              max(half.slack, out[0].slack), seed=seed))
    return out, extra


def _fit_ensemble(ensemble: list[EnsembleStat]) -> Extrapolation:
    n = len(ensemble)
    tail = ensemble[-max(3, math.ceil(n / 2)):]
    R = [s.param for s in tail]
    y = [s.mean for s in tail]
    sig = [s.stderr for s in tail]
    sigma = sig if all(np.isfinite(sig)) and all(v > 0 for v in sig) else None
    return subadditive_extrapolate(R, y, sigma)


def r_sweep(e, kappa: float, R_list, seeds, problem: Problem, warm_start: bool = True,
            checks: bool = True, jobs: int = 1) -> SweepResult:
    """Diagonal sweep ``h = kappa R`` over increasing ``R`` and a seed ensemble.

    The limit is the intercept of ``a + b / R`` fitted to the per-R ensemble
    means over the last half of ``R_list`` (at least three points), weighted
    by the inverse squared standard errors of the means.
    """
    e = _unit(e)
    R_list = [float(R) for R in R_list]
    if len(R_list) < 3 or any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be increasing with at least 3 entries")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("seeds must be nonempty")
    lam, Lam = problem.medium.bounds
    C = c_lambda(problem.q, problem.W, Lam)
    out = _map(_r_chain, [(e, float(kappa), R_list, s, problem, warm_start, checks) for s in seeds], jobs)
    samples, residuals = [], []
    for chain, extra in out:
        samples.extend(chain)
        residuals.extend(_bound_residual(s, C) for s in chain)
        residuals.extend(extra)
    ensemble = [_stats(R, [chain[k].normalized for chain, _ in out]) for k, R in enumerate(R_list)]
    fit = _fit_ensemble(ensemble)
    flags = [f"seed {s.seed} R={s.R:g} did not converge" for s in samples if not s.converged]
    if fit.flagged:
        flags.append("ill-conditioned extrapolation")
    tail = ensemble[-max(3, math.ceil(len(ensemble) / 2)):]
    for s, r in zip(tail, fit.residuals):
        if s.std > 0 and abs(r) > 3 * s.std:
            flags.append(f"fit residual {r:.3g} at R={s.param:g} exceeds 3 ensemble std")
    lo = min(s.mean for s in ensemble[-3:]) - 3 * fit.stderr
    hi = max(s.mean for s in ensemble[-3:]) + 3 * fit.stderr
    in_range = bool(lo <= fit.limit <= hi)
    if not in_range:
        flags.append("extrapolated limit outside the range of the last three means")
    samples.sort(key=lambda s: (s.R, s.seed))
    return SweepResult(Axis.DIAGONAL_KAPPA_R, samples, fit.limit, fit.stderr, residuals, ensemble, flags,
                       extra={"kappa": float(kappa), "slope": fit.slope, "limit_in_range": in_range})


# ------------------------------------------------------------- other cubes

def _off_center_task(task):
    e, x0, rho, R, seed, problem = task
    m = problem.medium.realize(seed)
    anchor = R * np.asarray(x0, dtype=float)
    side = R * rho
    spec = DomainSpec(side, side / 2, problem.spacing)
    s = finite_volume_sigma(e, anchor, spec, m, problem.W, problem.q, problem.opts, kappa=0.5,
                            scale_R=R, rho=rho)
    c = finite_volume_sigma(e, np.zeros(e.size), spec, m, problem.W, problem.q, problem.opts, kappa=0.5,
                            scale_R=R, rho=rho)
    return s, c


def off_center_check(e, x0, rho: float, R_list, seeds, problem: Problem, jobs: int = 1,
                     rel_tol: float = 1e-6) -> SweepResult:
    """Blown-up off-center cubes ``R Q^e(x0, rho)`` against centered cubes of the same size.

    Both sides are cold solves of the same shape, normalized by ``(R rho)^{d-1}``;
    at the largest ``R`` the ensemble means must agree within three combined
    standard errors (plus ``rel_tol`` relative, the floor for one seed).
    """
    e = _unit(e)
    if not rho > 0:
        raise ValueError("rho must be positive")
    x0 = np.asarray(x0, dtype=float).reshape(e.size)
    R_list = [float(R) for R in R_list]
    seeds = [int(s) for s in seeds]
    lam, Lam = problem.medium.bounds
    C = c_lambda(problem.q, problem.W, Lam)
    tasks = [(e, x0, float(rho), R, s, problem) for R in R_list for s in seeds]
    pairs = _map(_off_center_task, tasks, jobs)
    off = [p[0] for p in pairs]
    cen = [p[1] for p in pairs]
    residuals = [_bound_residual(s, C) for s in off + cen]
    ens_off, ens_cen = [], []
    for R in R_list:
        ens_off.append(_stats(R, [s.normalized for s in off if s.R == R]))
        ens_cen.append(_stats(R, [s.normalized for s in cen if s.R == R]))
    a, b = ens_off[-1], ens_cen[-1]
    comb = math.sqrt(a.stderr**2 + b.stderr**2)
    residuals.append(Residual("off_center_agreement", abs(a.mean - b.mean), 0.0,
                              3 * comb + rel_tol * abs(b.mean)))
    flags = [f"seed {s.seed} R={s.R:g} did not converge" for s in off + cen if not s.converged]
    limit, stderr = a.mean, a.stderr
    extra = {"centered_mean": b.mean, "centered_stderr": b.stderr, "x0": x0.tolist(), "rho": float(rho),
             "centered_ensemble": [dict(dataclasses.asdict(s), stderr=s.stderr) for s in ens_cen]}
    if len(R_list) >= 3:
        fo, fc = _fit_ensemble(ens_off), _fit_ensemble(ens_cen)
        limit, stderr = fo.limit, fo.stderr
        extra.update(centered_limit=fc.limit, centered_limit_stderr=fc.stderr)
    off.sort(key=lambda s: (s.R, s.seed))
    return SweepResult(Axis.R, off, limit, stderr, residuals, ens_off, flags, extra)


def rotated_frame_check(e, alt_frame, R: float, h: float, seed: int, problem: Problem) -> dict:
    """Same centered problem in the default frame and in ``alt_frame``; reports the gap only."""
    e = _unit(e)
    m = problem.medium.realize(seed)
    a = centered_sigma(e, R, h, m, problem.W, problem.q, problem.opts, spacing=problem.spacing)
    b = centered_sigma(e, R, h, m, problem.W, problem.q, problem.opts, spacing=problem.spacing,
                       frame=np.asarray(alt_frame, dtype=float))
    diff = abs(a.value - b.value)
    return {"value": a.value, "alt_value": b.value, "difference": diff,
            "relative": diff / max(abs(a.value), 1e-300), "samples": (a, b)}


# ------------------------------------------------------------------ Wulff

def _direction_task(task):
    e, R, h, seed, problem = task
    m = problem.medium.realize(seed)
    return centered_sigma(e, R, h, m, problem.W, problem.q, problem.opts, spacing=problem.spacing)


def _bisector_residuals(table: SurfaceTensionTable) -> list[Residual]:
    # phi(p + q) <= phi(p) + phi(q) for unit p, q = +-e_j, with phi extended one-homogeneously
    out = []
    dirs, vals, se = table.directions, table.values, table.stderr
    for i in range(len(dirs)):
        for j in range(i + 1, len(dirs)):
            for sign in (1.0, -1.0):
                s = dirs[i] + sign * dirs[j]
                n = float(np.linalg.norm(s))
                if n < 1e-12:
                    continue
                val, err = table.interpolate(s / n)
                comb = math.sqrt(se[i] ** 2 + se[j] ** 2 + (n * err) ** 2)
                out.append(Residual(f"convexity[{i},{j}{'+' if sign > 0 else '-'}]", n * val,
                                    vals[i] + vals[j], 3 * comb))
    return out


def wulff_scan(direction_count: int, R: float, h: float, seeds, problem: Problem,
               jobs: int = 1, calibration: float | None = None) -> tuple[SurfaceTensionTable, SweepResult]:
    """d = 2 scan over ``e = (cos t, sin t)``, ``t = k pi / n``.

    ``calibration`` is ``K``, the value of the same problem in the constant
    medium ``phi = |p|``; it is solved here when not given. Values must lie
    in ``[sqrt(lambda) K, sqrt(Lambda) K]``.
    """
    n = int(direction_count)
    if n < 4:
        raise ValueError("direction_count must be >= 4")
    seeds = [int(s) for s in seeds]
    angles = np.pi * np.arange(n) / n
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    tasks = [(dirs[k], float(R), float(h), s, problem) for k in range(n) for s in seeds]
    samples = _map(_direction_task, tasks, jobs)
    lam, Lam = problem.medium.bounds
    C = c_lambda(problem.q, problem.W, Lam)
    ens = []
    for k in range(n):
        ens.append(_stats(angles[k], [s.normalized for s in samples[k * len(seeds):(k + 1) * len(seeds)]]))
    table = SurfaceTensionTable(dirs, np.array([s.mean for s in ens]), np.array([s.stderr for s in ens]))
    if calibration is None:
        flat = Problem(MediumSpec(MediumKind.CONSTANT, {"value": 1.0}), problem.W, problem.q, problem.opts,
                       problem.spacing)
        calibration = _direction_task((np.array([1.0, 0.0]), float(R), float(h), 0, flat)).normalized
    K = float(calibration)
    residuals = [_bound_residual(s, C) for s in samples]
    residuals += _bisector_residuals(table)
    for k, s in enumerate(ens):
        comb = 3 * s.stderr
        residuals.append(Residual(f"band_low[{k}]", math.sqrt(lam) * K, s.mean, comb))
        residuals.append(Residual(f"band_high[{k}]", s.mean, math.sqrt(Lam) * K, comb))
    jumps = []
    for k in range(n):
        a, b = ens[k].mean, ens[(k + 1) % n].mean
        jumps.append(abs(a - b) / min(a, b))
    residuals.append(Residual("adjacent_continuity", max(jumps), 0.05, 0.0, hard=False))
    flags = [f"direction {s.e} seed {s.seed} did not converge" for s in samples if not s.converged]
    samples = sorted(samples, key=lambda s: (math.atan2(s.e[1], s.e[0]) % math.pi, s.seed))
    convex = all(r.passed for r in residuals if r.name.startswith("convexity"))
    result = SweepResult(Axis.R, samples, float(np.mean(table.values)), float(np.mean(table.stderr)),
                         residuals, ens, flags,
                         extra={"calibration_K": K, "angles": angles.tolist(), "convex": convex,
                                "max_adjacent_jump": max(jumps)})
    return table, result


# --------------------------------------------------------------- recovery

def _recovery_task(task):
    e, x0, rho, eps, seed, problem = task
    m = problem.medium.realize(seed)
    dom = cube_domain(e, x0, rho, problem.spacing * eps)
    res, candidate, _ = solve_domain(dom, x0, m, problem.W, problem.q, problem.opts, eps=eps)
    d = e.size
    area = rho ** (d - 1)
    return SurfaceTensionSample(
        e=tuple(float(v) for v in e), R=1.0 / eps, h=rho / 2, kappa=0.5, seed=seed,
        x0=tuple(float(v) for v in x0), value=res.energy, normalized=res.energy / area, iters=res.iters,
        final_grad_norm=res.grad_norm, wall_time=0.0, converged=res.converged, rho=rho, cross_side=rho,
        candidate=candidate, slack=solver_slack(problem.opts, dom))


def recovery_energy(e, x0, rho: float, eps_list, problem: Problem, seed: int = 0,
                    sigma_ref: float | None = None, jobs: int = 1, rel_tol: float = 0.02) -> SweepResult:
    """``F_eps`` minimized on ``Q^e(x0, rho)`` with the rescaled planar trace, for decreasing ``eps``.

    The grid spacing is ``problem.spacing * eps``, i.e. fixed in microscopic
    units. ``sigma_ref`` is ``phi~(e)``; when given the terminal value is
    compared with the flat-interface perimeter ``phi~(e) rho^{d-1}``.
    """
    e = _unit(e)
    d = e.size
    eps_list = [float(v) for v in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    x0 = np.asarray(x0, dtype=float).reshape(d)
    lam, Lam = problem.medium.bounds
    C = c_lambda(problem.q, problem.W, Lam)
    samples = _map(_recovery_task, [(e, x0, float(rho), eps, int(seed), problem) for eps in eps_list], jobs)
    area = rho ** (d - 1)
    residuals = [Residual("basic_bound", s.value, C * area * (1 + BOUND_SLACK), 0.0, seed=s.seed)
                 for s in samples]
    constant = problem.medium.kind == MediumKind.CONSTANT
    for a, b in zip(samples, samples[1:]):
        # the coarser problem's microscopic half height is rho / (2 eps)
        t = area * tail_e(problem.q, problem.W, Lam, rho / 2 * a.R)
        residuals.append(Residual("recovery_monotonicity", b.value, a.value + t, max(a.slack, b.slack),
                                  hard=constant, seed=a.seed))
    extra = {"eps": eps_list}
    if sigma_ref is not None:
        table = SurfaceTensionTable.isotropic(float(sigma_ref), d)
        target = perimeter(table, flat_interface(e, x0, rho), None)
        extra["perimeter"] = target
        residuals.append(Residual("recovery_terminal", abs(samples[-1].value - target), 0.0,
                                  rel_tol * target))
    flags = [f"eps={1 / s.R:g} did not converge" for s in samples if not s.converged]
    ensemble = [EnsembleStat(s.R, s.normalized, 0.0, 1) for s in samples]
    return SweepResult(Axis.R, samples, samples[-1].value, 0.0, residuals, ensemble, flags, extra)
