"""Cell-loop kernels for the discrete energy and its gradient.

Each kernel sweeps the cells of a structured grid. A cell contributes

    vol * (eps/2 * g^T M g + W(u_c) / eps)

where ``g`` is the cell-center gradient of the d-linear interpolant (frame
coordinates), ``M`` the per-cell metric expressed in the frame and ``u_c``
the corner average. The numba and numpy versions compute the same sums; the
numba loop accumulates in cell order, numpy uses pairwise summation, so the
two agree to rounding only.
"""

import numpy as np

from ._accel import HAS_NUMBA, njit


@njit
def _ppoly_nb(x, breaks, coeffs, nu):
    nb = breaks.shape[0]
    i = np.searchsorted(breaks, x, side="right") - 1
    if i < 0:
        i = 0
    elif i > nb - 2:
        i = nb - 2
    s = x - breaks[i]
    deg = coeffs.shape[0] - 1
    acc = 0.0
    if nu == 0:
        for k in range(deg + 1):
            acc = acc * s + coeffs[k, i]
    else:
        for k in range(deg):
            acc = acc * s + (deg - k) * coeffs[k, i]
    return acc


@njit
def _energy_grad_nb(u, cell_base, offs, wts, M, vol, eps, breaks, coeffs, grad, want_grad):
    ncell = cell_base.shape[0]
    nc, d = wts.shape
    inv_nc = 1.0 / nc
    g = np.empty(d)
    mg = np.empty(d)
    total = 0.0
    for c in range(ncell):
        b = cell_base[c]
        uc = 0.0
        for a in range(d):
            g[a] = 0.0
        for k in range(nc):
            v = u[b + offs[k]]
            uc += v
            for a in range(d):
                g[a] += wts[k, a] * v
        uc *= inv_nc
        quad = 0.0
        for a in range(d):
            acc = 0.0
            for bb in range(d):
                acc += M[c, a, bb] * g[bb]
            mg[a] = acc
            quad += g[a] * acc
        total += 0.5 * eps * quad + _ppoly_nb(uc, breaks, coeffs, 0) / eps
        if want_grad:
            wp = _ppoly_nb(uc, breaks, coeffs, 1) * inv_nc / eps
            for k in range(nc):
                s = wp
                for a in range(d):
                    s += eps * wts[k, a] * mg[a]
                grad[b + offs[k]] += vol * s
    return total * vol


@njit
def _cell_energies_nb(u, cell_base, offs, wts, M, vol, eps, breaks, coeffs, out):
    ncell = cell_base.shape[0]
    nc, d = wts.shape
    inv_nc = 1.0 / nc
    g = np.empty(d)
    for c in range(ncell):
        b = cell_base[c]
        uc = 0.0
        for a in range(d):
            g[a] = 0.0
        for k in range(nc):
            v = u[b + offs[k]]
            uc += v
            for a in range(d):
                g[a] += wts[k, a] * v
        uc *= inv_nc
        quad = 0.0
        for a in range(d):
            acc = 0.0
            for bb in range(d):
                acc += M[c, a, bb] * g[bb]
            quad += g[a] * acc
        out[c] = vol * (0.5 * eps * quad + _ppoly_nb(uc, breaks, coeffs, 0) / eps)


def ppoly_np(x, breaks, coeffs, nu=0):
    i = np.clip(np.searchsorted(breaks, x, side="right") - 1, 0, breaks.size - 2)
    s = x - breaks[i]
    deg = coeffs.shape[0] - 1
    acc = np.zeros_like(s)
    if nu == 0:
        for k in range(deg + 1):
            acc = acc * s + coeffs[k, i]
    else:
        for k in range(deg):
            acc = acc * s + (deg - k) * coeffs[k, i]
    return acc


def _cell_terms_np(u, cell_base, offs, wts, M, eps, breaks, coeffs):
    U = u[cell_base[:, None] + offs[None, :]]
    uc = U.mean(axis=1)
    G = U @ wts
    MG = np.einsum("cab,cb->ca", M, G)
    quad = (G * MG).sum(axis=1)
    return uc, MG, 0.5 * eps * quad + ppoly_np(uc, breaks, coeffs) / eps


def _energy_grad_np(u, cell_base, offs, wts, M, vol, eps, breaks, coeffs, grad, want_grad):
    uc, MG, dens = _cell_terms_np(u, cell_base, offs, wts, M, eps, breaks, coeffs)
    if want_grad:
        nc = offs.size
        wp = ppoly_np(uc, breaks, coeffs, 1) / (eps * nc)
        contrib = vol * (wp[:, None] + eps * (MG @ wts.T))
        idx = cell_base[:, None] + offs[None, :]
        grad += np.bincount(idx.ravel(), weights=contrib.ravel(), minlength=grad.size)
    return float(np.sum(dens) * vol)


def _cell_energies_np(u, cell_base, offs, wts, M, vol, eps, breaks, coeffs, out):
    out[:] = vol * _cell_terms_np(u, cell_base, offs, wts, M, eps, breaks, coeffs)[2]


def energy_grad(u, cell_base, offs, wts, M, vol, eps, breaks, coeffs, grad=None, numba=None):
    """Energy, plus the nodal gradient accumulated into ``grad`` when given.

    ``numba=None`` picks the configured backend; ``False`` forces numpy.
    """
    use_nb = HAS_NUMBA if numba is None else (numba and HAS_NUMBA)
    want = grad is not None
    if not want:
        grad = np.empty(0)
    fn = _energy_grad_nb if use_nb else _energy_grad_np
    return float(fn(u, cell_base, offs, wts, M, float(vol), float(eps), breaks, coeffs, grad, want))


def cell_energies(u, cell_base, offs, wts, M, vol, eps, breaks, coeffs, numba=None):
    use_nb = HAS_NUMBA if numba is None else (numba and HAS_NUMBA)
    out = np.empty(cell_base.size)
    fn = _cell_energies_nb if use_nb else _cell_energies_np
    fn(u, cell_base, offs, wts, M, float(vol), float(eps), breaks, coeffs, out)
    return out
