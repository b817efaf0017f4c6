"""Structured grids on e-aligned cylinders, nodal configurations and the discrete energy.

Frame coordinates of a node are ``(y, t)`` with ``y`` in the cross-section
(``d - 1`` axes) and ``t`` along ``e``; the world position is
``x0 + frame @ y + t * e``. Arrays are C-ordered with the ``t`` axis last.
"""

from __future__ import annotations

import dataclasses
import json
import os
from functools import cached_property
from itertools import product
from pathlib import Path

import numpy as np

from . import _kernels
from .medium import FinslerMedium, metric_diag
from .potential import DoubleWell, TransitionProfile

ORTHO_TOL = 1e-12


class GridError(ValueError):
    pass


def default_frame(e) -> np.ndarray:
    """Orthonormal ``(d, d-1)`` map onto the plane orthogonal to ``e``.

    In d=2 the frame is ``(e2, -e1)`` so that ``[frame | e]`` is a rotation.
    """
    e = np.asarray(e, dtype=float)
    d = e.size
    if d == 1:
        return np.zeros((1, 0))
    if d == 2:
        return np.array([[e[1]], [-e[0]]])
    # complete e using the coordinate axis least aligned with it
    k = int(np.argmin(np.abs(e)))
    a = np.zeros(3)
    a[k] = 1.0
    f1 = a - np.dot(a, e) * e
    f1 /= np.linalg.norm(f1)
    f2 = np.cross(e, f1)
    return np.column_stack([f1, f2])


def rotate_frame(frame, angle: float) -> np.ndarray:
    """Rotate a d=3 frame by ``angle`` within the plane it spans."""
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return frame @ rot


@dataclasses.dataclass(frozen=True, eq=False)
class CylinderDomain:
    """``x0 + (cross_center + Q(0, R)) (+)_e (-h, h)`` sampled on a uniform frame grid."""

    e: np.ndarray
    frame: np.ndarray
    cross_center: np.ndarray
    R: float
    h: float
    spacing: float
    x0: np.ndarray

    @property
    def d(self) -> int:
        return self.e.size

    @cached_property
    def shape(self) -> tuple[int, ...]:
        n_cross = int(round(self.R / self.spacing)) + 1
        n_t = int(round(2 * self.h / self.spacing)) + 1
        return (n_cross,) * (self.d - 1) + (n_t,)

    @cached_property
    def steps(self) -> np.ndarray:
        """Actual per-axis node spacing (extent divided by cell count)."""
        ext = [self.R] * (self.d - 1) + [2 * self.h]
        return np.array([x / (n - 1) for x, n in zip(ext, self.shape)])

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_cells(self) -> int:
        return int(np.prod([n - 1 for n in self.shape]))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))

    @property
    def cross_measure(self) -> float:
        return self.R ** (self.d - 1)

    @cached_property
    def basis(self) -> np.ndarray:
        """``[frame | e]``: maps frame coordinates to world displacements."""
        return np.column_stack([self.frame, self.e])

    def axes(self) -> list[np.ndarray]:
        out = []
        for a, n in enumerate(self.shape):
            if a < self.d - 1:
                lo = self.cross_center[a] - self.R / 2
            else:
                lo = -self.h
            out.append(lo + self.steps[a] * np.arange(n))
        return out

    def frame_coords(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def to_world(self, frame_pts) -> np.ndarray:
        return self.x0 + np.asarray(frame_pts) @ self.basis.T

    def node_world(self) -> np.ndarray:
        return self.to_world(self.frame_coords())

    def cell_center_frame(self) -> np.ndarray:
        mids = [0.5 * (a[1:] + a[:-1]) for a in self.axes()]
        grids = np.meshgrid(*mids, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def cell_centers_world(self) -> np.ndarray:
        return self.to_world(self.cell_center_frame())

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for a in range(self.d):
            idx = [slice(None)] * self.d
            idx[a] = 0
            mask[tuple(idx)] = True
            idx[a] = -1
            mask[tuple(idx)] = True
        return mask.ravel()

    @cached_property
    def cell_stencil(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(cell_base, corner_offsets, gradient_weights)`` for the kernels."""
        shape = self.shape
        strides = np.array([int(np.prod(shape[a + 1:])) for a in range(self.d)], dtype=np.int64)
        cell_idx = np.meshgrid(*[np.arange(n - 1) for n in shape], indexing="ij")
        base = sum(ci.ravel().astype(np.int64) * strides[a] for a, ci in enumerate(cell_idx))
        corners = np.array(list(product((0, 1), repeat=self.d)), dtype=np.int64)
        offs = corners @ strides
        wts = (2.0 * corners - 1.0) / self.steps[None, :] / 2 ** (self.d - 1)
        return np.ascontiguousarray(base), offs, np.ascontiguousarray(wts)


def build_cylinder(e, cross_center=None, R: float = 1.0, h: float = 1.0, spacing: float = 0.1,
                   x0=None, frame=None) -> CylinderDomain:
    e = np.atleast_1d(np.asarray(e, dtype=float))
    d = e.size
    if d not in (1, 2, 3):
        raise GridError(f"dimension {d} not in (1, 2, 3)")
    if abs(np.linalg.norm(e) - 1.0) > ORTHO_TOL:
        raise GridError("e must be a unit vector")
    if d == 1:
        R = 1.0
    if not (R > 0 and h > 0 and spacing > 0):
        raise GridError("R, h and spacing must be positive")
    limit = 2 * h if d == 1 else min(R, 2 * h)
    if spacing > limit / 4 + 1e-12:
        raise GridError(f"spacing {spacing} too coarse for extents (max {limit / 4})")
    frame = default_frame(e) if frame is None else np.asarray(frame, dtype=float).reshape(d, d - 1)
    basis = np.column_stack([frame, e])
    if np.max(np.abs(basis.T @ basis - np.eye(d))) > ORTHO_TOL:
        raise GridError("frame must be orthonormal and orthogonal to e")
    cc = np.zeros(d - 1) if cross_center is None else np.asarray(cross_center, dtype=float).reshape(d - 1)
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float).reshape(d)
    dom = CylinderDomain(e=e, frame=frame, cross_center=cc, R=float(R), h=float(h),
                         spacing=float(spacing), x0=x0)
    if min(dom.shape) < 3:
        raise GridError("each axis needs at least 3 nodes")
    return dom


def cube_domain(e, x0, rho: float, spacing: float, frame=None) -> CylinderDomain:
    """``Q^e(x0, rho) = x0 + Q(0, rho) (+)_e (-rho/2, rho/2)``."""
    return build_cylinder(e, None, rho, rho / 2, spacing, x0, frame)


@dataclasses.dataclass(eq=False)
class Configuration:
    domain: CylinderDomain
    values: np.ndarray
    dirichlet_mask: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float).ravel()
        self.dirichlet_mask = np.asarray(self.dirichlet_mask, dtype=bool).ravel()
        n = self.domain.n_nodes
        if self.values.size != n or self.dirichlet_mask.size != n:
            raise GridError(f"configuration has {self.values.size} values for {n} nodes")
        if np.any(np.abs(self.values) > 1.0):
            raise GridError("configuration values outside [-1, 1]")

    def copy(self) -> "Configuration":
        return Configuration(self.domain, self.values.copy(), self.dirichlet_mask.copy())

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.domain.shape)


def planar_data(domain: CylinderDomain, x0, q: TransitionProfile, eps: float = 1.0) -> Configuration:
    """Nodal samples of ``q(<x - x0, e> / eps)`` with the whole boundary pinned."""
    x0 = np.asarray(x0, dtype=float).reshape(domain.d)
    # <x - x0, e> = t + <anchor - x0, e>: exact on the plane when x0 is the anchor
    s = domain.frame_coords()[:, -1] + float((domain.x0 - x0) @ domain.e)
    vals = np.clip(q(s / eps), -1.0, 1.0)
    return Configuration(domain, vals, domain.boundary_mask.copy())


def transfer(old: Configuration, fill: Configuration) -> Configuration:
    """Copy ``old`` into the nodes of ``fill``'s grid that coincide with old nodes.

    Pinned nodes of ``fill`` are kept. This is the warm start of an enlarged
    domain: the previous minimizer extended by planar data.
    """
    a, b = old.domain, fill.domain
    if a.d != b.d or not (np.allclose(a.basis, b.basis) and np.allclose(a.x0, b.x0)):
        raise GridError("transfer needs a common frame and anchor")
    index = []
    for ax_new, ax_old, step in zip(b.axes(), a.axes(), a.steps):
        k = np.rint((ax_new - ax_old[0]) / step).astype(np.int64)
        ok = (k >= 0) & (k < ax_old.size)
        kk = np.clip(k, 0, ax_old.size - 1)
        ok &= np.abs(ax_old[kk] - ax_new) <= 1e-9 * step
        index.append(np.where(ok, kk, -1))
    grids = np.meshgrid(*index, indexing="ij")
    hit = np.ones(b.shape, dtype=bool)
    for g in grids:
        hit &= g >= 0
    src = np.ravel_multi_index(tuple(np.maximum(g, 0) for g in grids), a.shape)
    vals = fill.values.copy()
    take = hit.ravel() & ~fill.dirichlet_mask
    vals[take] = old.values[src.ravel()[take]]
    return Configuration(b, vals, fill.dirichlet_mask.copy())


class EnergyModel:
    """Discrete ``F_eps(u; A)`` on a fixed domain with the medium sampled once per cell."""

    def __init__(self, domain: CylinderDomain, medium: FinslerMedium, W: DoubleWell,
                 eps: float = 1.0, smoothing: float = 0.0):
        if medium.dim is not None and medium.dim != domain.d:
            raise GridError(f"medium dimension {medium.dim} does not match domain dimension {domain.d}")
        if not eps > 0:
            raise GridError("eps must be positive")
        self.domain = domain
        self.medium = medium
        self.W = W
        self.eps = float(eps)
        self.cell_base, self.offs, self.wts = domain.cell_stencil
        centers = domain.cell_centers_world() / self.eps
        diag = metric_diag(medium, centers)
        d = domain.d
        if medium.isotropic:
            self.M = diag[:, :, None] * np.eye(d)[None]
        else:
            F = domain.basis
            self.M = np.einsum("ka,ck,kb->cab", F, diag, F)
        self.M = np.ascontiguousarray(self.M)
        self.breaks, self.coeffs = W.ppoly()
        self.vol = domain.cell_volume
        # sqrt(|p|^2 + delta^2) inside an isotropic phi adds a constant c^2 delta^2 to phi^2
        self.shift = 0.0
        if smoothing > 0 and medium.isotropic:
            self.shift = 0.5 * self.eps * smoothing**2 * self.vol * float(diag[:, 0].sum())

    def _args(self):
        return (self.cell_base, self.offs, self.wts, self.M, self.vol, self.eps, self.breaks, self.coeffs)

    def energy(self, u: np.ndarray, numba=None) -> float:
        return _kernels.energy_grad(u, *self._args(), numba=numba) + self.shift

    def energy_grad(self, u: np.ndarray, numba=None) -> tuple[float, np.ndarray]:
        grad = np.zeros_like(u)
        val = _kernels.energy_grad(u, *self._args(), grad=grad, numba=numba)
        return val + self.shift, grad

    def cell_energies(self, u: np.ndarray, numba=None) -> np.ndarray:
        return _kernels.cell_energies(u, *self._args(), numba=numba)


def energy(m: FinslerMedium, W: DoubleWell, u: Configuration, eps: float = 1.0, cells=None) -> float:
    """Discrete energy of ``u``; ``cells`` (bool mask or index array) restricts the cell sum."""
    model = EnergyModel(u.domain, m, W, eps)
    if cells is None:
        return model.energy(u.values)
    return float(np.sum(model.cell_energies(u.values)[cells]))


def dump_configuration(u: Configuration, path) -> tuple[Path, Path]:
    """Write ``<path>.bin`` (little-endian float64, C order) and ``<path>.json`` metadata."""
    path = Path(path)
    dom = u.domain
    bin_path = path.with_suffix(".bin")
    meta_path = path.with_suffix(".json")
    meta = {
        "dimensions": list(dom.shape),
        "spacing": dom.steps.tolist(),
        "nominal_spacing": dom.spacing,
        "e": dom.e.tolist(),
        "frame": dom.frame.tolist(),
        "cross_center": dom.cross_center.tolist(),
        "R": dom.R,
        "h": dom.h,
        "anchor": dom.x0.tolist(),
        "dtype": "<f8",
        "order": "C",
        "dirichlet": "boundary" if np.array_equal(u.dirichlet_mask, dom.boundary_mask)
        else np.flatnonzero(u.dirichlet_mask).tolist(),
    }
    _atomic_write(bin_path, u.values.astype("<f8").tobytes())
    _atomic_write(meta_path, json.dumps(meta, indent=2).encode())
    return bin_path, meta_path


def load_configuration(path) -> Configuration:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    dom = build_cylinder(meta["e"], meta["cross_center"], meta["R"], meta["h"],
                         meta["nominal_spacing"], meta["anchor"], np.asarray(meta["frame"]))
    vals = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<f8").astype(float)
    if meta["dirichlet"] == "boundary":
        mask = dom.boundary_mask.copy()
    else:
        mask = np.zeros(dom.n_nodes, dtype=bool)
        mask[np.asarray(meta["dirichlet"], dtype=np.int64)] = True
    return Configuration(dom, vals, mask)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
