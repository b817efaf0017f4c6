"""Realizations of stationary Finsler metric fields.

A medium evaluates ``phi(x, p) = sqrt(p^T A(x) p)`` where ``A(x)`` is diagonal
and piecewise constant in ``x``. Isotropic cells store ``A = c^2 I`` so that
``phi(x, p) = c |p|``.

Randomness is counter based: every random quantity is a hash of
``(seed, cell index, stream)``, never a draw from a sequential generator. A
lattice shift therefore re-indexes cells instead of re-drawing them, and the
shift action ``shift(m, y)`` is exact.
"""

from __future__ import annotations

import dataclasses
import math
from enum import Enum
from itertools import product

import numpy as np

MAX_DIM = 3

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# hash stream tags
_S_OFFSET = 1
_S_VALUE = 2
_S_COUNT = 3
_S_POS = 4
_S_PVALUE = 5


class MediumError(ValueError):
    pass


class MediumKind(str, Enum):
    CONSTANT = "constant"
    PERIODIC = "periodic"
    RANDOM_CHECKERBOARD = "random_checkerboard"
    POISSON_VORONOI = "poisson_voronoi"


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_counter(seed, index, stream, extra=0):
    """splitmix64-style hash of ``(seed, index..., stream, extra)``.

    ``index`` is an integer array of shape ``(n, k)``; ``extra`` broadcasts
    against ``n``. Returns ``uint64`` of shape ``(n,)``.
    """
    index = np.atleast_2d(np.asarray(index, dtype=np.int64))
    with np.errstate(over="ignore"):
        h = np.full(index.shape[0], np.uint64(seed & 0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        h = _mix64(h + _GOLDEN * np.uint64(stream))
        for a in range(index.shape[1]):
            h = _mix64(h ^ (index[:, a].astype(np.uint64) + _GOLDEN * np.uint64(a + 1)))
        extra = np.broadcast_to(np.asarray(extra, dtype=np.int64), h.shape)
        h = _mix64(h ^ (extra.astype(np.uint64) * _M2 + np.uint64(stream)))
    return h


def hash_uniform(seed, index, stream, extra=0):
    """Uniform doubles in [0, 1) from :func:`hash_counter`."""
    h = hash_counter(seed, index, stream, extra)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclasses.dataclass(frozen=True, eq=False)
class FinslerMedium:
    """One realization of a stationary Finsler metric field.

    ``diag`` holds one row per table entry: a single column ``c^2`` for
    isotropic tables, or ``d`` columns (the diagonal of ``A``) for elliptic
    ones. ``translation`` accumulates :func:`shift`; ``offset`` is the
    per-realization random (or user supplied) origin of the lattice.
    """

    kind: MediumKind
    lam: float
    Lam: float
    seed: int
    cell_size: float
    diag: np.ndarray
    probs: np.ndarray
    offset: np.ndarray
    translation: np.ndarray
    pattern: np.ndarray | None = None
    intensity: float = 1.0

    @property
    def dim(self) -> int | None:
        """Dimension fixed by the parameter table, or None if any works."""
        if self.pattern is not None:
            return self.pattern.ndim
        if self.diag.shape[1] > 1:
            return self.diag.shape[1]
        return None

    @property
    def isotropic(self) -> bool:
        return self.diag.shape[1] == 1


def _parse_entries(values, lam, Lam):
    scalars, ellip = [], []
    for i, v in enumerate(values):
        if np.ndim(v) == 0:
            c = float(v)
            if not (math.sqrt(lam) - 1e-12 <= c <= math.sqrt(Lam) + 1e-12):
                raise MediumError(
                    f"values[{i}]={c} outside [sqrt(lambda), sqrt(Lambda_cap)]"
                    f" = [{math.sqrt(lam):.6g}, {math.sqrt(Lam):.6g}]"
                )
            scalars.append((i, c))
        else:
            a = np.asarray(v, dtype=float)
            if a.ndim != 1 or not 1 <= a.size <= MAX_DIM:
                raise MediumError(f"values[{i}] must be a scalar or a diagonal of length <= {MAX_DIM}")
            if np.any(a < lam - 1e-12) or np.any(a > Lam + 1e-12):
                raise MediumError(f"values[{i}] eigenvalues outside [lambda, Lambda_cap] = [{lam}, {Lam}]")
            ellip.append((i, a))
    if not scalars and not ellip:
        raise MediumError("empty value table")
    if not ellip:
        return np.array([[c * c] for _, c in scalars])
    d = ellip[0][1].size
    if any(a.size != d for _, a in ellip):
        raise MediumError("elliptic entries disagree on dimension")
    diag = np.empty((len(values), d))
    for i, c in scalars:
        diag[i] = c * c
    for i, a in ellip:
        diag[i] = a
    return diag


def make_medium(kind, params: dict | None = None, seed: int = 0) -> FinslerMedium:
    """Build a medium.

    ``params`` keys: ``lambda``, ``Lambda_cap``, ``cell_size`` (default 1),
    ``value`` (constant kind), ``values`` and ``probs`` (table kinds),
    ``pattern`` (periodic index array), ``intensity`` (Voronoi), ``offset``
    (periodic only; checkerboard offsets are drawn from the seed).
    """
    kind = MediumKind(kind)
    params = dict(params or {})
    lam = float(params.get("lambda", 1.0))
    Lam = float(params.get("Lambda_cap", max(lam, 1.0)))
    if not (lam > 0 and Lam > 0):
        raise MediumError("lambda and Lambda_cap must be positive")
    if lam > Lam:
        raise MediumError(f"lambda={lam} exceeds Lambda_cap={Lam}")
    cell_size = float(params.get("cell_size", 1.0))
    if not cell_size > 0:
        raise MediumError(f"cell_size must be positive, got {cell_size}")
    seed = int(seed)
    if seed < 0:
        raise MediumError("seed must be a non-negative integer")

    if kind is MediumKind.CONSTANT:
        values = [params.get("value", 1.0)]
    else:
        values = params.get("values")
        if values is None:
            raise MediumError(f"{kind.value} medium requires 'values'")
    diag = _parse_entries(values, lam, Lam)

    probs = np.asarray(params.get("probs", np.full(len(values), 1.0 / len(values))), dtype=float)
    if probs.shape != (len(values),) or np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-9):
        raise MediumError("probs must be a probability vector matching values")

    pattern = None
    offset = np.zeros(MAX_DIM)
    translation = np.zeros(MAX_DIM)
    intensity = float(params.get("intensity", 1.0))
    if kind is MediumKind.PERIODIC:
        if "pattern" not in params:
            raise MediumError("periodic medium requires 'pattern'")
        pattern = np.asarray(params["pattern"], dtype=np.int64)
        if pattern.ndim < 1 or pattern.ndim > MAX_DIM:
            raise MediumError("pattern must have 1 to 3 axes")
        if pattern.min() < 0 or pattern.max() >= len(values):
            raise MediumError("pattern indexes outside the value table")
        if not diag.shape[1] in (1, pattern.ndim):
            raise MediumError("elliptic entries disagree with pattern dimension")
        off = np.asarray(params.get("offset", np.zeros(pattern.ndim)), dtype=float)
        offset[: off.size] = off
    elif kind is MediumKind.RANDOM_CHECKERBOARD:
        offset = cell_size * hash_uniform(seed, np.arange(MAX_DIM)[:, None], _S_OFFSET)
    elif kind is MediumKind.POISSON_VORONOI:
        if not intensity > 0:
            raise MediumError("intensity must be positive")

    return FinslerMedium(
        kind=kind, lam=lam, Lam=Lam, seed=seed, cell_size=cell_size, diag=diag,
        probs=probs, offset=offset, translation=translation, pattern=pattern,
        intensity=intensity,
    )


def shift(m: FinslerMedium, y) -> FinslerMedium:
    """The shifted realization: ``eval_metric(shift(m, y), x, p) == eval_metric(m, x + y, p)``."""
    y = np.asarray(y, dtype=float).ravel()
    t = np.zeros(MAX_DIM)
    t[: y.size] = y
    return dataclasses.replace(m, translation=m.translation + t)


def _lattice_index(z, s):
    # a point on a face belongs to the lexicographically smallest adjacent cell
    return (np.ceil(z / s) - 1.0).astype(np.int64)


def _pick(m, u):
    cum = np.cumsum(m.probs)
    cum[-1] = 1.0
    return np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)


def _poisson_count(u, mean, cap=64):
    # inverse CDF of Poisson(mean) at u
    k = np.zeros(u.shape, dtype=np.int64)
    p = np.full(u.shape, math.exp(-mean))
    cdf = p.copy()
    for j in range(1, cap + 1):
        more = u >= cdf
        if not more.any():
            break
        k[more] = j
        p = p * mean / j
        cdf = cdf + p
    return k


def _voronoi_scan(m, z, radius):
    n, d = z.shape
    s = m.cell_size
    box = np.floor(z / s).astype(np.int64)
    best = np.full(n, np.inf)
    idx = np.zeros(n, dtype=np.int64)
    mean = m.intensity * s**d
    for off in product(range(-radius, radius + 1), repeat=d):
        b = box + np.asarray(off, dtype=np.int64)
        count = _poisson_count(hash_uniform(m.seed, b, _S_COUNT), mean)
        for k in range(int(count.max(initial=0))):
            live = k < count
            pos = np.empty((n, d))
            for a in range(d):
                pos[:, a] = (b[:, a] + hash_uniform(m.seed, b, _S_POS, k * MAX_DIM + a)) * s
            dist = np.sqrt(((pos - z) ** 2).sum(axis=1))
            better = live & (dist < best)
            if better.any():
                best[better] = dist[better]
                vi = _pick(m, hash_uniform(m.seed, b, _S_PVALUE, k))
                idx[better] = vi[better]
    lo = (box - radius) * s
    hi = (box + radius + 1) * s
    margin = np.minimum(z - lo, hi - z).min(axis=1)
    return idx, best <= margin


def _voronoi_index(m, z):
    idx = np.zeros(z.shape[0], dtype=np.int64)
    todo = np.arange(z.shape[0])
    radius = 1
    while todo.size:
        sub, ok = _voronoi_scan(m, z[todo], radius)
        idx[todo[ok]] = sub[ok]
        todo = todo[~ok]
        radius += 1
    return idx


def entry_index(m: FinslerMedium, x) -> np.ndarray:
    """Index into ``m.diag`` of the table entry governing each point of ``x`` (shape ``(n, d)``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    if d > MAX_DIM:
        raise MediumError(f"dimension {d} > {MAX_DIM}")
    if m.dim is not None and m.dim != d:
        raise MediumError(f"medium has dimension {m.dim}, points have dimension {d}")
    z = (x + m.translation[:d]) - m.offset[:d]
    if m.kind is MediumKind.CONSTANT:
        return np.zeros(x.shape[0], dtype=np.int64)
    if m.kind is MediumKind.PERIODIC:
        cell = _lattice_index(z, m.cell_size)
        per = np.asarray(m.pattern.shape)
        return m.pattern[tuple((cell % per).T)]
    if m.kind is MediumKind.RANDOM_CHECKERBOARD:
        cell = _lattice_index(z, m.cell_size)
        return _pick(m, hash_uniform(m.seed, cell, _S_VALUE))
    return _voronoi_index(m, z)


def metric_diag(m: FinslerMedium, x) -> np.ndarray:
    """Diagonal of ``A(x)``, shape ``(n, d)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rows = m.diag[entry_index(m, x)]
    return np.broadcast_to(rows, (x.shape[0], x.shape[1])).copy()


def eval_metric(m: FinslerMedium, x, p):
    """``phi(x, p)``; accepts single points or stacks of shape ``(n, d)``."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    single = x.ndim == 1 and p.ndim == 1
    x2 = np.atleast_2d(x)
    p2 = np.broadcast_to(np.atleast_2d(p), x2.shape)
    a = m.diag[entry_index(m, x2)]
    out = np.sqrt((a * p2 * p2).sum(axis=1))
    return float(out[0]) if single else out
