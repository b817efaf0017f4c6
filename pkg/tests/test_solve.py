import math

import numpy as np
import pytest

from ahc.grid import Configuration, EnergyModel, build_cylinder, planar_data
from ahc.homogenize import MediumSpec, Problem, subadditivity_check
from ahc.medium import make_medium
from ahc.potential import c_lambda, sigma_1d, tail_e
from ahc.solve import (DomainSpec, SolverOptions, centered_sigma, finite_volume_sigma, minimize,
                       solve_domain, solver_slack)

from conftest import CHECKER

SIGMA1 = 4 * math.sqrt(2) / 3
UNIT = make_medium("constant", {"value": 1.0}, 0)


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(max_iters=0)
    with pytest.raises(ValueError):
        SolverOptions(grad_tol=-1)
    with pytest.raises(ValueError):
        SolverOptions(initial_step=0)


def test_constant_data_is_a_fixed_point(W):
    dom = build_cylinder([1.0, 0.0], None, 4.0, 2.0, 0.25, [0, 0])
    u0 = Configuration(dom, np.ones(dom.n_nodes), dom.boundary_mask.copy())
    res = minimize(EnergyModel(dom, UNIT, W), u0)
    assert res.energy == 0.0 and res.iters <= 1 and res.converged
    assert np.array_equal(res.u.values, u0.values)
    u, value = res
    assert value == 0.0


def test_one_dimensional_oracle(W, q):
    s = finite_volume_sigma([1.0], [0.0], DomainSpec(1.0, 10.0, 0.01), UNIT, W, q)
    assert abs(s.value - sigma_1d(W, 1.0)) < 0.01 * SIGMA1
    assert s.value < s.candidate  # the optimal profile beats tanh
    assert s.converged


def test_descent_invariants(W, q, rng):
    m = make_medium("random_checkerboard", CHECKER, 5)
    dom = build_cylinder([0.6, 0.8], None, 6.0, 3.0, 0.25, [0.2, 0.1])
    model = EnergyModel(dom, m, W)
    u0 = planar_data(dom, [0.2, 0.1], q)
    free = ~u0.dirichlet_mask
    u0.values[free] = np.clip(u0.values[free] + rng.normal(0, 0.3, free.sum()), -1, 1)
    res = minimize(model, u0, SolverOptions(max_iters=400))
    assert np.all(np.diff(res.energies) <= 0)
    assert np.all(np.abs(res.u.values) <= 1.0)
    assert np.array_equal(res.u.values[u0.dirichlet_mask], u0.values[u0.dirichlet_mask])
    assert res.energy <= model.energy(u0.values)


def test_max_iters_flagged_but_usable(W, q):
    dom = build_cylinder([1.0, 0.0], None, 4.0, 4.0, 0.25, [0, 0])
    res, cand, _ = solve_domain(dom, [0, 0], make_medium("random_checkerboard", CHECKER, 1), W, q,
                                SolverOptions(max_iters=3, grad_tol=0.0, energy_tol=0.0))
    assert not res.converged and res.reason == "max_iters" and res.iters == 3
    assert res.energy <= cand


def test_wrong_domain_rejected(W, q):
    a = build_cylinder([1.0, 0.0], None, 4.0, 4.0, 0.25, [0, 0])
    b = build_cylinder([1.0, 0.0], None, 4.0, 4.0, 0.25, [0, 0])
    with pytest.raises(ValueError):
        minimize(EnergyModel(a, UNIT, W), planar_data(b, [0, 0], q))


def test_two_dimensional_constant(W, q):
    s = centered_sigma([1.0, 0.0], 8.0, 8.0, UNIT, W, q)
    assert abs(s.normalized - SIGMA1) < 0.02 * SIGMA1
    assert s.value <= c_lambda(q, W, 1.0) * 8.0 * 1.01
    assert s.value <= s.candidate


def test_scaling_with_constant_medium(W, q):
    m2 = make_medium("constant", {"value": 2.0, "Lambda_cap": 4.0}, 0)
    a = centered_sigma([1.0, 0.0], 8.0, 8.0, UNIT, W, q, spacing=0.1)
    b = centered_sigma([1.0, 0.0], 8.0, 8.0, m2, W, q, spacing=0.1)
    assert b.value / 2 == pytest.approx(a.value, rel=5e-3)


def test_translation_within_plane(W, q):
    e = np.array([0.6, 0.8])
    a = finite_volume_sigma(e, [0.0, 0.0], DomainSpec(4.0, 4.0, 0.25), UNIT, W, q)
    shift = 1.7 * np.array([-e[1], e[0]])
    b = finite_volume_sigma(e, shift, DomainSpec(4.0, 4.0, 0.25), UNIT, W, q)
    assert b.value == pytest.approx(a.value, rel=1e-8)


def test_centered_is_finite_volume_at_origin(W, q):
    m = make_medium("random_checkerboard", CHECKER, 2)
    a = centered_sigma([1.0, 0.0], 4.0, 3.0, m, W, q, spacing=0.25)
    b = finite_volume_sigma([1.0, 0.0], [0.0, 0.0], DomainSpec(4.0, 3.0, 0.25), m, W, q)
    assert a.value == b.value


def test_isotropy_of_constant_medium(W, q):
    a = centered_sigma([1.0, 0.0], 4.0, 4.0, UNIT, W, q, spacing=0.25)
    b = centered_sigma([0.0, 1.0], 4.0, 4.0, UNIT, W, q, spacing=0.25)
    assert b.value == pytest.approx(a.value, rel=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_almost_decreasing_in_h(seed, W, q):
    m = make_medium("random_checkerboard", CHECKER, seed)
    R = 4.0
    low = centered_sigma([1.0, 0.0], R, 1.0, m, W, q, spacing=0.25, return_config=True)
    high = centered_sigma([1.0, 0.0], R, 3.0, m, W, q, spacing=0.25, warm=low[1])
    slack = max(low[0].slack, high.slack)
    assert high.value <= low[0].value + R * tail_e(q, W, 4.0, 1.0) + slack


@pytest.mark.parametrize("seed", [0, 3])
def test_subadditivity_small(seed):
    P = Problem(MediumSpec("random_checkerboard", CHECKER), spacing=0.25)
    whole, parts, r = subadditivity_check([1.0, 0.0], 8.0, 4.0, seed, P)
    assert len(parts) == 2 and r.passed
    assert whole.value <= sum(p.value for p in parts) + r.slack


def test_solver_slack_formula():
    dom = build_cylinder([1.0, 0.0], None, 4.0, 2.0, 0.25, [0, 0])
    opts = SolverOptions(grad_tol=1e-4)
    assert solver_slack(opts, dom) == pytest.approx(1e-4 * math.sqrt(dom.n_nodes) * 0.25)


def test_smoothing_is_a_constant_shift(W, q, rng):
    dom = build_cylinder([1.0, 0.0], None, 4.0, 2.0, 0.25, [0, 0])
    u = planar_data(dom, [0, 0], q)
    free = ~u.dirichlet_mask
    u.values[free] = rng.uniform(-1, 1, free.sum())
    v = u.values.copy()
    v[free] = rng.uniform(-1, 1, free.sum())
    a, b = EnergyModel(dom, UNIT, W), EnergyModel(dom, UNIT, W, smoothing=0.1)
    assert b.energy(u.values) - a.energy(u.values) == pytest.approx(b.energy(v) - a.energy(v), rel=1e-9)
    np.testing.assert_allclose(a.energy_grad(u.values)[1], b.energy_grad(u.values)[1])
