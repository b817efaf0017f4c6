"""Anisotropic perimeter of piecewise-linear interfaces under a tabulated surface tension."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import default_frame


class InterfaceError(ValueError):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class SurfaceTensionTable:
    """Estimated ``phi~`` on sampled unit directions.

    Between samples: d = 2 interpolates linearly in angle on the pi-periodic
    circle (``phi~(-e) = phi~(e)``), d = 3 takes the nearest sampled direction
    up to sign. Calling the table on any vector uses the one-homogeneous
    extension.
    """

    directions: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        se = np.zeros_like(vals) if self.stderr is None else np.atleast_1d(np.asarray(self.stderr, dtype=float))
        if dirs.shape[0] != vals.size or se.shape != vals.shape or vals.size == 0:
            raise ValueError("directions, values and stderr must have matching lengths")
        if np.any(vals <= 0) or np.any(se < 0):
            raise ValueError("values must be positive and stderr non-negative")
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "stderr", se)
        if dirs.shape[1] == 2:
            ang = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), np.pi)
            order = np.argsort(ang, kind="stable")
            object.__setattr__(self, "_angles", ang[order])
            object.__setattr__(self, "_order", order)

    @classmethod
    def isotropic(cls, sigma: float, d: int) -> "SurfaceTensionTable":
        return cls(np.eye(d)[:1], np.array([float(sigma)]))

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    def scaled(self, t: float) -> "SurfaceTensionTable":
        return SurfaceTensionTable(self.directions, t * self.values, t * self.stderr)

    def interpolate(self, e) -> tuple[float, float]:
        """``(phi~(e), stderr)`` at a unit vector ``e``."""
        e = np.asarray(e, dtype=float)
        if self.values.size == 1:
            return float(self.values[0]), float(self.stderr[0])
        if self.d == 2:
            a = math.atan2(e[1], e[0]) % math.pi
            ang = self._angles
            k = int(np.searchsorted(ang, a, side="right")) - 1
            if k < 0 or k == ang.size - 1:
                # wrap through pi
                i0, i1 = ang.size - 1, 0
                lo, hi = ang[-1], ang[0] + math.pi
                if a < ang[0]:
                    a += math.pi
            else:
                i0, i1 = k, k + 1
                lo, hi = ang[k], ang[k + 1]
            w = 0.0 if hi == lo else (a - lo) / (hi - lo)
            j0, j1 = self._order[i0], self._order[i1]
            val = (1 - w) * self.values[j0] + w * self.values[j1]
            err = (1 - w) * self.stderr[j0] + w * self.stderr[j1]
            return float(val), float(err)
        j = int(np.argmax(np.abs(self.directions @ e)))
        return float(self.values[j]), float(self.stderr[j])

    def __call__(self, p) -> float:
        p = np.asarray(p, dtype=float)
        n = float(np.linalg.norm(p))
        if n == 0.0:
            return 0.0
        return n * self.interpolate(p / n)[0]


@dataclasses.dataclass(frozen=True, eq=False)
class OrientedBox:
    """``{center + B y : |y_k| <= half[k]}`` with ``B`` orthonormal."""

    center: np.ndarray
    basis: np.ndarray
    half: np.ndarray

    def local(self, pts) -> np.ndarray:
        return (np.atleast_2d(pts) - self.center) @ self.basis

    @classmethod
    def cube(cls, e, x0, rho, frame=None) -> "OrientedBox":
        """``Q^e(x0, rho)`` as a clip region."""
        e = np.asarray(e, dtype=float)
        e = e / np.linalg.norm(e)
        F = default_frame(e) if frame is None else np.asarray(frame, dtype=float)
        B = np.column_stack([F, e]) if e.size > 1 else e.reshape(1, 1)
        return cls(np.asarray(x0, dtype=float), B, np.full(e.size, rho / 2.0))


@dataclasses.dataclass(frozen=True, eq=False)
class Points1D:
    """Interface points in d = 1 with normals +-1."""

    points: np.ndarray
    normals: np.ndarray

    def facets(self):
        for x, n in zip(np.atleast_1d(self.points), np.atleast_1d(self.normals)):
            yield np.array([n], dtype=float), np.array([[x]], dtype=float)


@dataclasses.dataclass(frozen=True, eq=False)
class Polyline2D:
    """Polygonal chain; the normal of segment ``a -> b`` is ``(dy, -dx)`` normalized.

    For a counter-clockwise closed polygon that is the outward normal.
    """

    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise InterfaceError("vertices must be an (n >= 2, 2) array")
        if np.unique(v, axis=0).shape[0] != v.shape[0]:
            raise InterfaceError("repeated vertex: chain is not a simple curve")
        object.__setattr__(self, "vertices", v)

    def segments(self):
        v = self.vertices
        ends = np.vstack([v[1:], v[:1]]) if self.closed else v[1:]
        return zip(v[: len(ends)], ends)

    def facets(self):
        for a, b in self.segments():
            t = b - a
            n = np.array([t[1], -t[0]]) / np.linalg.norm(t)
            yield n, np.vstack([a, b])


@dataclasses.dataclass(frozen=True, eq=False)
class TriSurface:
    """Triangulated surface in d = 3; normals follow the right-hand rule on ``faces``."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        f = np.asarray(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or f.ndim != 2 or f.shape[1] != 3:
            raise InterfaceError("need (n, 3) vertices and (m, 3) faces")
        if f.size and (f.min() < 0 or f.max() >= v.shape[0]):
            raise InterfaceError("face index out of range")
        area2 = np.linalg.norm(np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]]), axis=1)
        if np.any(area2 <= 0):
            raise InterfaceError("degenerate triangle")
        edges = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise InterfaceError("edge shared by more than two faces: surface is not a manifold")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    def facets(self):
        v = self.vertices
        for a, b, c in self.faces:
            n = np.cross(v[b] - v[a], v[c] - v[a])
            yield n / np.linalg.norm(n), v[[a, b, c]]


def _clip_segment(p, q, half):
    # Liang-Barsky against the box [-half, half]
    d = q - p
    t0, t1 = 0.0, 1.0
    for k in range(p.size):
        for num, den in ((p[k] + half[k], -d[k]), (half[k] - p[k], d[k])):
            if den == 0.0:
                if num < 0:
                    return 0.0
                continue
            t = num / den
            if den < 0:
                t0 = max(t0, t)
            else:
                t1 = min(t1, t)
    return max(t1 - t0, 0.0) * float(np.linalg.norm(d))


def _clip_polygon(poly, half):
    # Sutherland-Hodgman against each face of the box
    for k in range(3):
        for sgn in (1.0, -1.0):
            if len(poly) == 0:
                return poly
            out = []
            for i in range(len(poly)):
                a, b = poly[i - 1], poly[i]
                da, db = half[k] - sgn * a[k], half[k] - sgn * b[k]
                if db >= 0:
                    if da < 0:
                        out.append(a + (b - a) * (da / (da - db)))
                    out.append(b)
                elif da >= 0:
                    out.append(a + (b - a) * (da / (da - db)))
            poly = out
    return poly


def _polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    p = np.asarray(poly)
    s = np.zeros(3)
    for i in range(len(p)):
        s += np.cross(p[i - 1], p[i])
    return 0.5 * float(np.linalg.norm(s))


def _measure(pts: np.ndarray, A: OrientedBox | None) -> float:
    if pts.shape[1] == 1:
        return 1.0 if A is None or np.all(np.abs(A.local(pts)) <= A.half) else 0.0
    if pts.shape[0] == 2:
        if A is None:
            return float(np.linalg.norm(pts[1] - pts[0]))
        loc = A.local(pts)
        return _clip_segment(loc[0], loc[1], A.half)
    if A is None:
        return 0.5 * float(np.linalg.norm(np.cross(pts[1] - pts[0], pts[2] - pts[0])))
    loc = A.local(pts)
    return _polygon_area(_clip_polygon(list(loc), A.half))


def perimeter(table: SurfaceTensionTable, interface, A: OrientedBox | None = None) -> float:
    """``sum over facets of phi~(normal) * measure(facet inside A)``."""
    total = 0.0
    for n, pts in interface.facets():
        if pts.shape[1] != table.d:
            raise InterfaceError("interface and table dimensions differ")
        m = _measure(pts, A)
        if m > 0:
            total += table(n) * m
    return total


def flat_interface(e, x0, rho: float, frame=None):
    """The plane through ``x0`` with normal ``e`` restricted to ``Q^e(x0, rho)``."""
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    x0 = np.asarray(x0, dtype=float)
    if e.size == 1:
        return Points1D(np.array([x0[0]]), np.array([np.sign(e[0])]))
    F = default_frame(e) if frame is None else np.asarray(frame, dtype=float)
    r = rho / 2.0
    if e.size == 2:
        t = np.array([-e[1], e[0]])
        return Polyline2D(np.vstack([x0 - r * t, x0 + r * t]))
    f1, f2 = F[:, 0], F[:, 1]
    if np.dot(np.cross(f1, f2), e) < 0:
        f1, f2 = f2, f1
    v = np.vstack([x0 - r * f1 - r * f2, x0 + r * f1 - r * f2, x0 + r * f1 + r * f2, x0 - r * f1 + r * f2])
    return TriSurface(v, np.array([[0, 1, 2], [0, 2, 3]]))
