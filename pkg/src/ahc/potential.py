"""Double-well potential, boundary profile and the scalar functionals built on them."""

from __future__ import annotations

import dataclasses
import math
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

QUAD_TOL = 1e-12
TAIL_CUTOFF = 1e-14


class PotentialForm(str, Enum):
    QUARTIC = "quartic"
    CUSTOM = "custom"


class ProfileForm(str, Enum):
    TANH = "tanh"
    CUSTOM = "custom"


@dataclasses.dataclass(frozen=True, eq=False)
class DoubleWell:
    """``W(u) = scale * (1 - u^2)^2`` or a cubic spline through a table on [-1, 1]."""

    form: PotentialForm = PotentialForm.QUARTIC
    scale: float = 1.0
    table_u: np.ndarray | None = None
    table_w: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "form", PotentialForm(self.form))
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.form is PotentialForm.CUSTOM:
            if self.table_u is None or self.table_w is None:
                raise ValueError("custom potential needs table_u and table_w")
            u = np.asarray(self.table_u, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if u.ndim != 1 or u.shape != w.shape or u.size < 4:
                raise ValueError("table_u/table_w must be matching 1d arrays of length >= 4")
            if not (np.all(np.diff(u) > 0) and u[0] == -1.0 and u[-1] == 1.0):
                raise ValueError("table_u must increase from -1 to 1")
            if np.any(w < 0) or w[0] != 0.0 or w[-1] != 0.0 or np.any(w[1:-1] <= 0):
                raise ValueError("table_w must be >= 0 and vanish exactly at u = -1, 1")
            object.__setattr__(self, "_spline", CubicSpline(u, self.scale * w))

    @classmethod
    def from_table(cls, u, w) -> "DoubleWell":
        return cls(PotentialForm.CUSTOM, 1.0, np.asarray(u, float), np.asarray(w, float))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.form is PotentialForm.QUARTIC:
            return self.scale * (1.0 - u * u) ** 2
        return np.maximum(self._spline(u), 0.0)

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        if self.form is PotentialForm.QUARTIC:
            return -4.0 * self.scale * u * (1.0 - u * u)
        return self._spline(u, 1)

    def sup(self) -> float:
        """``max W`` on [-1, 1]."""
        if self.form is PotentialForm.QUARTIC:
            return self.scale
        grid = np.linspace(-1.0, 1.0, 20001)
        return float(self(grid).max())

    def ppoly(self) -> tuple[np.ndarray, np.ndarray]:
        """Piecewise polynomial ``(breaks, coeffs)`` in scipy ``PPoly`` layout.

        ``coeffs[k, i]`` multiplies ``(u - breaks[i]) ** (deg - k)``. This is the
        form the compiled kernels evaluate.
        """
        if self.form is PotentialForm.QUARTIC:
            # (1 - u^2)^2 = s^2 (2 - s)^2 with s = u + 1
            c = self.scale * np.array([[1.0], [-4.0], [4.0], [0.0], [0.0]])
            return np.array([-1.0, 1.0]), c
        return np.asarray(self._spline.x, float), np.ascontiguousarray(self._spline.c, float)


def eval_w(W: DoubleWell, u: float) -> float:
    if not -1.0 <= u <= 1.0:
        raise ValueError(f"u={u} outside [-1, 1]")
    return float(W(u))


@dataclasses.dataclass(frozen=True, eq=False)
class TransitionProfile:
    """Boundary profile ``q`` with ``q(s) -> +-1`` as ``s -> +-inf``.

    The default is ``q = tanh``. A custom profile supplies ``q`` and its
    derivative as vectorized callables.
    """

    form: ProfileForm = ProfileForm.TANH
    func: Callable | None = None
    dfunc: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "form", ProfileForm(self.form))
        if self.form is ProfileForm.CUSTOM and (self.func is None or self.dfunc is None):
            raise ValueError("custom profile needs func and dfunc")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.form is ProfileForm.TANH:
            return np.tanh(s)
        return np.clip(self.func(s), -1.0, 1.0)

    def deriv(self, s):
        s = np.asarray(s, dtype=float)
        if self.form is ProfileForm.TANH:
            return 1.0 / np.cosh(s) ** 2
        return self.dfunc(s)


def _quad(f, a, b):
    val, _ = integrate.quad(f, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=500)
    return val


def c_w(W: DoubleWell) -> float:
    """``int_{-1}^{1} sqrt(W)``."""
    return _quad(lambda u: math.sqrt(max(float(W(u)), 0.0)), -1.0, 1.0)


def sigma_1d(W: DoubleWell, phi_value: float) -> float:
    """Optimal-profile energy ``min int (phi^2 q'^2 / 2 + W(q))`` of a homogeneous medium.

    Equipartition ``phi^2 q'^2 / 2 = W(q)`` reduces it to ``phi * int sqrt(2 W)``.
    """
    if not phi_value > 0:
        raise ValueError("phi_value must be positive")
    return phi_value * _quad(lambda u: math.sqrt(2.0 * max(float(W(u)), 0.0)), -1.0, 1.0)


def _line_density(q: TransitionProfile, W: DoubleWell, Lambda_cap: float):
    def f(s):
        return 0.5 * Lambda_cap * float(q.deriv(s)) ** 2 + float(W(float(q(s))))

    return f


def _cutoff(f, start, direction):
    # first point beyond which the integrand has dropped below TAIL_CUTOFF
    step = 1.0
    s = start
    while f(s) >= TAIL_CUTOFF or f(s + direction * step) >= TAIL_CUTOFF:
        s += direction * step
        step *= 1.5
        if abs(s) > 1e6:
            raise ValueError("profile energy density does not decay")
    return s + direction * step


def tail_e(q: TransitionProfile, W: DoubleWell, Lambda_cap: float, h: float) -> float:
    """Profile energy outside the slab: ``int_{|s| > h} (Lambda q'^2 / 2 + W(q)) ds``."""
    if h < 0:
        raise ValueError("h must be non-negative")
    f = _line_density(q, W, Lambda_cap)
    total = 0.0
    for direction in (1.0, -1.0):
        a = direction * h
        b = _cutoff(f, a, direction)
        if direction * (b - a) > 0:
            lo, hi = sorted((a, b))
            total += _quad(f, lo, hi)
    return total


def c_lambda(q: TransitionProfile, W: DoubleWell, Lambda_cap: float) -> float:
    """Full-line energy of the boundary profile with the gradient weighted by ``Lambda_cap``."""
    return tail_e(q, W, Lambda_cap, 0.0)
