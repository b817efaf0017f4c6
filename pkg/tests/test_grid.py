import json
import math

import numpy as np
import pytest

from ahc.grid import (Configuration, EnergyModel, GridError, build_cylinder, cube_domain, default_frame,
                      dump_configuration, energy, load_configuration, planar_data, rotate_frame, transfer)
from ahc.medium import make_medium

from conftest import CHECKER

UNIT = make_medium("constant", {"value": 1.0}, 0)


def test_node_counts():
    d1 = build_cylinder([1.0], None, 1.0, 10.0, 0.01, [0.0])
    assert d1.n_nodes == 2001
    d2 = build_cylinder([0.0, 1.0], None, 4.0, 4.0, 0.5, [0.0, 0.0])
    assert d2.shape == (9, 17)
    d3 = build_cylinder([0.0, 0.0, 1.0], None, 2.0, 1.0, 0.25, np.zeros(3))
    assert d3.shape == (9, 9, 9)


def test_rejects_coarse_or_degenerate():
    with pytest.raises(GridError):
        build_cylinder([1.0, 0.0], None, 4.0, 4.0, 1.5, [0, 0])
    with pytest.raises(GridError):
        build_cylinder([1.0, 0.0], None, -1.0, 4.0, 0.1, [0, 0])
    with pytest.raises(GridError):
        build_cylinder([0.0, 0.0], None, 4.0, 4.0, 0.1, [0, 0])
    with pytest.raises(GridError):
        build_cylinder([1.0, 0.0], None, 4.0, 4.0, 0.1, [0, 0], frame=np.array([[1.0], [0.0]]))


def test_corner_positions_tilted():
    e = np.array([1.0, 1.0]) / math.sqrt(2)
    x0 = np.array([0.3, -1.2])
    R, h = 4.0, 3.0
    dom = build_cylinder(e, None, R, h, 0.25, x0)
    world = dom.node_world().reshape(dom.shape + (2,))
    O = dom.frame[:, 0]
    for (i, j), (sy, st) in zip([(0, 0), (0, -1), (-1, 0), (-1, -1)], [(-1, -1), (-1, 1), (1, -1), (1, 1)]):
        np.testing.assert_allclose(world[i, j], x0 + sy * (R / 2) * O + st * h * e, atol=1e-12)


@pytest.mark.parametrize("e", [[1.0, 0.0], [0.6, 0.8], [0.0, 0.0, 1.0], [1.0, 2.0, 2.0]])
def test_default_frame_orthonormal(e):
    e = np.asarray(e) / np.linalg.norm(e)
    F = default_frame(e)
    B = np.column_stack([F, e])
    np.testing.assert_allclose(B.T @ B, np.eye(e.size), atol=1e-12)


def test_rotate_frame_3d():
    e = np.array([0.0, 0.0, 1.0])
    F = rotate_frame(default_frame(e), math.pi / 6)
    np.testing.assert_allclose(F.T @ F, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(F.T @ e, 0.0, atol=1e-12)


def test_boundary_mask_is_outer_layer():
    dom = build_cylinder([1.0, 0.0], None, 2.0, 1.0, 0.25, [0, 0])
    mask = dom.boundary_mask.reshape(dom.shape)
    assert mask[0].all() and mask[-1].all() and mask[:, 0].all() and mask[:, -1].all()
    assert not mask[1:-1, 1:-1].any()


def test_planar_data(q):
    e = np.array([0.6, 0.8])
    x0 = np.array([0.5, -0.25])
    dom = build_cylinder(e, None, 4.0, 10.0, 0.25, x0)
    u = planar_data(dom, x0, q)
    t = dom.frame_coords()[:, -1]
    assert np.all(u.values[t == 0] == 0.0)
    assert np.all(u.values[t == 10.0] == pytest.approx(math.tanh(10.0)))
    assert u.dirichlet_mask.sum() == dom.boundary_mask.sum()
    # moving the anchor by s e shifts the profile by s in frame coordinates
    s = 0.75
    v = planar_data(dom, x0 + s * e, q)
    np.testing.assert_allclose(v.values, np.tanh(t - s), atol=1e-14)


def test_configuration_validation():
    dom = build_cylinder([1.0, 0.0], None, 2.0, 1.0, 0.25, [0, 0])
    with pytest.raises(GridError):
        Configuration(dom, np.full(dom.n_nodes, 1.5), dom.boundary_mask)
    with pytest.raises(GridError):
        Configuration(dom, np.zeros(3), np.zeros(3, bool))


def test_energy_of_pure_phase_is_zero(W):
    dom = build_cylinder([1.0, 0.0], None, 4.0, 4.0, 0.25, [0, 0])
    u = Configuration(dom, np.ones(dom.n_nodes), dom.boundary_mask)
    assert energy(make_medium("random_checkerboard", CHECKER, 1), W, u) == 0.0


def test_tanh_candidate_energy_1d(W, q):
    dom = build_cylinder([1.0], None, 1.0, 10.0, 0.01, [0.0])
    u = planar_data(dom, [0.0], q)
    # int (sech^4 / 2 + sech^4) = 3/2 * 4/3
    assert abs(energy(UNIT, W, u) - 2.0) < 1e-3


def test_refinement_order_1d(W, q):
    vals = []
    for sp in (0.1, 0.05, 0.025):
        dom = build_cylinder([1.0], None, 1.0, 10.0, sp, [0.0])
        vals.append(energy(UNIT, W, planar_data(dom, [0.0], q)))
    order = math.log2(abs(vals[0] - vals[1]) / abs(vals[1] - vals[2]))
    assert order >= 1.8


def test_gradient_term_scales_with_c_squared(W, q, rng):
    dom = build_cylinder([0.6, 0.8], None, 4.0, 3.0, 0.25, [0, 0])
    u = planar_data(dom, [0.1, 0.2], q)
    u.values[~u.dirichlet_mask] = rng.uniform(-1, 1, (~u.dirichlet_mask).sum())
    m3 = make_medium("constant", {"value": 3.0, "Lambda_cap": 9.0}, 0)
    W0 = EnergyModel(dom, UNIT, W)
    grad1 = energy(UNIT, W, u) - _w_term(W0, u.values)
    grad3 = energy(m3, W, u) - _w_term(W0, u.values)
    assert grad3 == pytest.approx(9 * grad1, rel=1e-12)


def _w_term(model, u):
    # energy with the medium switched off: only the potential part survives
    saved = model.M
    model.M = np.zeros_like(saved)
    try:
        return model.energy(u)
    finally:
        model.M = saved


def test_additive_over_cells(W, q, rng):
    dom = build_cylinder([1.0, 0.0], None, 4.0, 3.0, 0.25, [0, 0])
    u = planar_data(dom, [0, 0], q)
    u.values[~u.dirichlet_mask] = rng.uniform(-1, 1, (~u.dirichlet_mask).sum())
    m = make_medium("random_checkerboard", CHECKER, 4)
    full = energy(m, W, u)
    cells = np.arange(dom.n_cells)
    rng.shuffle(cells)
    parts = [energy(m, W, u, cells=c) for c in np.array_split(cells, 5)]
    assert sum(parts) == pytest.approx(full, rel=1e-12)
    assert all(p >= 0 for p in parts)


def test_frame_invariance_constant_medium(W, q):
    vals = []
    for ang in np.linspace(0, math.pi, 7):
        e = np.array([math.cos(ang), math.sin(ang)])
        dom = build_cylinder(e, None, 4.0, 4.0, 0.25, [0.3, -0.7])
        vals.append(energy(UNIT, W, planar_data(dom, [0.3, -0.7], q)))
    np.testing.assert_allclose(vals, vals[0], rtol=1e-10)


def test_eps_rescaling(W, q):
    # F_eps on a cube of side rho equals eps^{d-1} F_1 on the cube of side rho/eps
    eps = 0.25
    big = cube_domain([1.0, 0.0], [0, 0], 4.0, 0.25)
    small = cube_domain([1.0, 0.0], [0, 0], 1.0, 0.25 * eps)
    m = make_medium("random_checkerboard", CHECKER, 2)
    e1 = energy(m, W, planar_data(big, [0, 0], q))
    e2 = energy(m, W, planar_data(small, [0, 0], q, eps), eps=eps)
    assert e2 == pytest.approx(eps * e1, rel=1e-12)


def test_medium_dimension_mismatch(W, q):
    m3 = make_medium("constant", {"value": [1.0, 1.0, 1.0]}, 0)
    dom = build_cylinder([1.0, 0.0], None, 2.0, 1.0, 0.25, [0, 0])
    with pytest.raises(GridError):
        energy(m3, W, planar_data(dom, [0, 0], q))


def test_transfer_copies_coinciding_nodes(q, rng):
    small = build_cylinder([1.0, 0.0], None, 2.0, 1.0, 0.25, [0, 0])
    big = build_cylinder([1.0, 0.0], None, 4.0, 2.0, 0.25, [0, 0])
    u = planar_data(small, [0, 0], q)
    u.values[~u.dirichlet_mask] = rng.uniform(-1, 1, (~u.dirichlet_mask).sum())
    w = transfer(u, planar_data(big, [0, 0], q))
    pos_small = {tuple(np.round(p, 9)): v for p, v in zip(small.frame_coords(), u.values)}
    for p, v, pinned in zip(big.frame_coords(), w.values, w.dirichlet_mask):
        key = tuple(np.round(p, 9))
        if key in pos_small and not pinned:
            assert v == pos_small[key]


def test_dump_roundtrip(tmp_path, q):
    dom = build_cylinder([0.6, 0.8], [0.5], 4.0, 2.0, 0.25, [1.0, 2.0])
    u = planar_data(dom, [1.0, 2.0], q)
    bin_path, meta_path = dump_configuration(u, tmp_path / "u")
    raw = np.fromfile(bin_path, dtype="<f8")
    assert np.array_equal(raw, u.values)
    meta = json.loads(meta_path.read_text())
    assert meta["dimensions"] == list(dom.shape)
    v = load_configuration(tmp_path / "u")
    assert np.array_equal(v.values, u.values)
    assert np.array_equal(v.dirichlet_mask, u.dirichlet_mask)
    np.testing.assert_array_equal(v.domain.frame, dom.frame)
