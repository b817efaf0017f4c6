"""Cut-off gluing of two configurations with best-shell selection.

Given ``u`` (trusted on ``U'``) and ``v`` (trusted on ``V``) on a common grid,
the transition region between ``U`` and ``U'`` is cut into nested shells; in
each shell ``i`` a cut-off ``psi_i`` ramps linearly from 1 to 0 and
``w_i = psi_i u + (1 - psi_i) v``. A shell's cost is the energy of ``w_i`` on
the cells it mixes, minus what ``F(u; U')`` and ``F(v; V)`` already count
there (clipped at zero per cell). The cheapest shell is kept, so its cost is
at most the average over shells, and

    F(w; U u V) <= F(u; U') + F(v; V) + cost

holds exactly on the grid.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import Configuration, EnergyModel, build_cylinder, planar_data
from .medium import FinslerMedium
from .potential import DoubleWell, TransitionProfile

MAX_SHELLS = 64


class GlueError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class Box:
    """Closed axis-aligned box in frame coordinates ``(y, t)``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise GlueError("box needs lo < hi componentwise")

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        gap = np.maximum(np.maximum(self.lo - pts, 0.0), pts - self.hi)
        return np.sqrt((gap * gap).sum(axis=1))

    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def grown(self, r: float) -> "Box":
        return Box(self.lo - r, self.hi + r)


@dataclasses.dataclass
class GlueReport:
    best_index: int
    shell_costs: np.ndarray
    shell_energies: np.ndarray
    best_cost: float
    mean_cost: float
    glued_energy: float
    F_u_Uprime: float
    F_v_V: float
    zeta: float
    C1: float
    C: float
    slack: float
    n_shells: int
    slope: float

    @property
    def decomposition_rhs(self) -> float:
        return self.F_u_Uprime + self.F_v_V + self.best_cost

    @property
    def rhs(self) -> float:
        return self.F_u_Uprime + self.F_v_V + self.C * self.zeta + self.slack

    @property
    def holds(self) -> bool:
        tol = 1e-12 * max(1.0, abs(self.rhs))
        return self.glued_energy <= self.rhs + tol and self.best_cost <= self.mean_cost + tol

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["shell_costs"] = [float(c) for c in self.shell_costs]
        out["shell_energies"] = [float(c) for c in self.shell_energies]
        out.update(rhs=self.rhs, decomposition_rhs=self.decomposition_rhs, holds=self.holds)
        return out


def default_shells(D: float, spacing: float) -> int:
    return int(min(MAX_SHELLS, max(2, math.ceil(D / (4 * spacing)))))


def fundamental_glue(m: FinslerMedium, W: DoubleWell, u: Configuration, v: Configuration,
                     U: Box, Uprime: Box, V: Box, D: float, N: int | None = None,
                     eps: float = 1.0, zeta_tol: float = 0.1) -> tuple[Configuration, GlueReport]:
    """Glue ``u`` inside ``U`` to ``v`` outside ``U'`` through the cheapest of ``N - 1`` shells.

    Nested sets ``U_i = {dist(., U) < r_i}``, ``r_i = delta + (i - 1) w``, with
    ``delta`` half a cell diagonal so every cell centred in ``U`` is untouched.
    ``zeta`` is the measure of cells in ``V`` where ``|u - v| > zeta_tol``.
    """
    dom = u.domain
    if v.domain is not dom:
        raise GlueError("u and v must share a grid")
    if D <= 2 * dom.spacing:
        raise GlueError(f"D={D} leaves no room for a shell (needs > {2 * dom.spacing})")
    if np.any(U.lo - D < Uprime.lo - 1e-12) or np.any(U.hi + D > Uprime.hi + 1e-12):
        raise GlueError("U' must contain the D-neighbourhood of U")
    axes = dom.axes()
    glo = np.array([a[0] for a in axes]) - 1e-9
    ghi = np.array([a[-1] for a in axes]) + 1e-9
    for name, box in (("U'", Uprime), ("V", V)):
        if np.any(box.lo < glo) or np.any(box.hi > ghi):
            raise GlueError(f"grid does not cover {name}")
    N = default_shells(D, dom.spacing) if N is None else int(N)
    if N < 2:
        raise GlueError("N must be >= 2")

    model = EnergyModel(dom, m, W, eps)
    base, offs, wts = dom.cell_stencil
    corner = base[:, None] + offs[None, :]
    centers = dom.cell_center_frame()
    in_U, in_Up, in_V = U.contains(centers), Uprime.contains(centers), V.contains(centers)
    in_UV = in_U | in_V

    e_u = model.cell_energies(u.values)
    e_v = model.cell_energies(v.values)
    F_u = float(np.sum(e_u[in_Up]))
    F_v = float(np.sum(e_v[in_V]))

    dist = U.distance(dom.frame_coords())
    delta = 0.5 * float(np.linalg.norm(dom.steps))
    width = (D - 2 * delta) / (N - 1)
    slope = 1.0 / width
    costs = np.empty(N - 1)
    small_w = np.empty(N - 1)
    glued = []
    diff = u.values - v.values
    big = np.max(np.abs(diff[corner]), axis=1) > zeta_tol
    shell_energy = np.empty(N - 1)
    for i in range(N - 1):
        r_next = delta + (i + 1) * width
        psi = np.clip((r_next - dist) / width, 0.0, 1.0)
        w = np.where(psi == 1.0, u.values, np.where(psi == 0.0, v.values, v.values + psi * diff))
        pc = psi[corner]
        mixed = (pc.min(axis=1) < 1.0) & (pc.max(axis=1) > 0.0)
        e_w = model.cell_energies(w)
        sel = mixed & in_UV
        # what F(u; U') and F(v; V) do not already pay for on the mixed cells
        excess = e_w - np.where(in_Up, e_u, 0.0) - np.where(in_V, e_v, 0.0)
        costs[i] = float(np.sum(np.maximum(excess[sel], 0.0)))
        shell_energy[i] = float(np.sum(e_w[sel]))
        wc = w[corner].mean(axis=1)
        small_w[i] = float(np.sum(W(wc)[mixed & in_V & ~big])) * dom.cell_volume
        glued.append((w, e_w))
    j = int(np.argmin(costs))
    w, e_w = glued[j]

    Lam, lam = m.Lam, m.lam
    cvol = dom.cell_volume
    zeta = float(np.count_nonzero(in_V & big)) * cvol
    C1 = max(eps * Lam * (2 * N / D) ** 2 / (N - 1), eps * Lam * slope**2 / (N - 1), 1.0 / (eps * (N - 1)))
    C = C1 * (4.0 + W.sup())
    small_diff2 = float(np.sum(np.mean(diff[corner] ** 2, axis=1)[in_V & in_Up & ~big])) * cvol
    slack = (2 * Lam / lam) * (F_u + F_v) / (N - 1) + C1 * small_diff2 + float(np.sum(small_w)) / (eps * (N - 1))

    report = GlueReport(
        best_index=j, shell_costs=costs, shell_energies=shell_energy, best_cost=float(costs[j]), mean_cost=float(costs.mean()),
        glued_energy=float(np.sum(e_w[in_UV])), F_u_Uprime=F_u, F_v_V=F_v, zeta=zeta, C1=C1, C=C,
        slack=slack, n_shells=N, slope=slope,
    )
    return Configuration(dom, w, u.dirichlet_mask.copy()), report


@dataclasses.dataclass
class GlueInstance:
    u: Configuration
    v: Configuration
    U: Box
    Uprime: Box
    V: Box
    D: float


def random_instance(seed: int, W: DoubleWell, q: TransitionProfile, R: float = 8.0, h: float = 4.0,
                    spacing: float = 0.1, shift: float = 0.2) -> GlueInstance:
    """Two perturbed planar configurations on a randomly oriented d = 2 cylinder.

    ``v`` is anchored ``s e`` away from ``u`` with ``|s| <= shift``; ``U`` and
    ``V`` are random boxes in frame coordinates with ``U'`` the ``D``-neighbourhood
    of ``U`` inside the grid.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, np.pi)
    e = np.array([np.cos(a), np.sin(a)])
    dom = build_cylinder(e, None, R, h, spacing, np.zeros(2))
    s = rng.uniform(-shift, shift)
    u = planar_data(dom, np.zeros(2), q)
    v = planar_data(dom, s * e, q)
    y = dom.frame_coords()
    for c in (u, v):
        k = rng.uniform(0.2, 1.0, size=2)
        bump = 0.05 * np.sin(y @ k + rng.uniform(0, 2 * np.pi))
        free = ~c.dirichlet_mask
        c.values[free] = np.clip(c.values[free] + bump[free], -1.0, 1.0)
    lo = np.array([-R / 2, -h])
    hi = np.array([R / 2, h])
    D = rng.uniform(4 * spacing, min(R, 2 * h) / 3)
    half = rng.uniform(0.5, (hi - lo) / 2 - D - spacing)
    center = rng.uniform(lo + D + half, hi - D - half)
    U = Box(center - half, center + half)
    p, r = np.sort(rng.uniform(lo, hi, size=(2, 2)), axis=0)
    V = Box(np.minimum(p, hi - 1.0), np.maximum(r, p + 1.0).clip(max=hi))
    return GlueInstance(u, v, U, U.grown(D), V, D)
