import dataclasses
import math

import numpy as np
import pytest

from equilib import conformal, field, params
from equilib.errors import QuadratureNonConvergent
from equilib.params import ProblemSpec

from conftest import PRE_GRID, SPEC_GRID, spec_at, spec_id
import oracles

rng = np.random.default_rng(7)


def context(spec):
    return field.FieldContext.from_params(params.solve(spec))


# -- densities --------------------------------------------------------------------


def test_density_Q_disk_is_constant():
    ctx = context(ProblemSpec(4, 4, 2.0, 0.1))
    z = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    assert np.allclose(field.density_Q(ctx, z), 4 / (math.pi * 2.0), rtol=1e-15)


def test_density_examples():
    assert field.density_Q(context(ProblemSpec(2, 1, 1.0, 0.1)), 1j) == pytest.approx(4 / math.pi)
    assert field.density_V(context(ProblemSpec(1, 1, 3.0, 0.0)), 0.3 + 0.2j) == pytest.approx(1 / (3 * math.pi))
    assert field.density_V(context(ProblemSpec(9, 7, 1.0, 0.1)), np.exp(0.3j)) == pytest.approx(81 / math.pi)


@pytest.mark.parametrize("n, d", [(9, 7), (2, 1), (3, 5), (2, 4)])
def test_density_change_of_variables(n, d):
    ctx = context(ProblemSpec(n, d, 1.3, 0.0))
    z = 0.3 * rng.standard_normal(100) + 0.3j * rng.standard_normal(100)
    lhs = field.density_V(ctx, z)
    rhs = d * np.abs(z) ** (2 * d - 2) * field.density_Q(ctx, z**d)
    assert np.allclose(lhs, rhs, rtol=1e-12)


# -- mass ----------------------------------------------------------------------------


def test_mass_unperturbed_is_one():
    ctx = context(ProblemSpec(9, 7, 1.0, 0))
    assert field.mass_contour_integral(ctx, 256) == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("spec", SPEC_GRID, ids=spec_id)
def test_mass_solved(spec):
    assert abs(field.mass_contour_integral(context(spec), 4096) - 1) <= field.TAU_MASS


@pytest.mark.parametrize("n, d", [(9, 7), (2, 1), (3, 5)])
def test_mass_critical(n, d):
    ctx = context(spec_at(n, d, 1.0))
    assert abs(field.mass_contour_integral(ctx, 2**16, tol=math.inf) - 1) <= 1e-6


def test_mass_refinement_check_raises(monkeypatch):
    # the true integrand converges at any m tried, so emulate a slowly converging rule
    monkeypatch.setattr(field, "_mass_trapezoid", lambda ctx, m: 1 + 1 / m**2)
    with pytest.raises(QuadratureNonConvergent):
        field.mass_contour_integral(context(spec_at(9, 7, 1.0)), 64, tol=1e-10)


def test_mass_critical_already_exact_at_low_order():
    ctx = context(spec_at(9, 7, 1.0))
    assert field.mass_contour_integral(ctx, 64, tol=1e-14) == pytest.approx(1, abs=1e-14)


def test_mass_node_bound():
    with pytest.raises(ValueError):
        field.mass_contour_integral(context(spec_at(9, 7, 0.5)), 16)


# -- Cauchy transform and gradient -------------------------------------------------------


@pytest.mark.parametrize("spec", PRE_GRID[::2], ids=spec_id)
def test_cauchy_transform_matches_area_quadrature(spec):
    ctx = context(spec)
    f = ctx.map
    nodes, w = oracles.area_quadrature(
        spec.n, spec.d, spec.T, lambda u: conformal.eval_f(f, u), lambda u: conformal.eval_f_prime(f, u)
    )
    assert w.sum() == pytest.approx(1, abs=1e-13)
    u = np.array([1.3, 2j, -1.1 + 0.5j, 3 * np.exp(1j)])
    z = conformal.eval_f(f, u)
    expected = np.array([oracles.cauchy_transform(nodes, w, zz) for zz in z])
    assert np.max(np.abs(field.phi_minus(ctx, u) - expected)) <= 1e-12


@pytest.mark.parametrize("spec", [spec_at(9, 7, 0.5, 1.0, 0.4), spec_at(2, 3, 0.5, 1.0, 2.0)], ids=spec_id)
def test_gradient_matches_finite_differences(spec):
    """d_z E = (dE/dx - i dE/dy)/2 with E = Q + 2U evaluated by area quadrature."""
    ctx = context(spec)
    f = ctx.map
    nodes, w = oracles.area_quadrature(
        spec.n, spec.d, spec.T, lambda u: conformal.eval_f(f, u), lambda u: conformal.eval_f_prime(f, u)
    )
    energy = lambda z: oracles.effective_potential(spec.n, spec.d, spec.T, spec.t, nodes, w, z)  # noqa: E731
    u = np.array([1.4, 2j, -1.2 + 0.5j])
    h = 1e-5
    for uu in u:
        z = conformal.eval_f(f, uu)
        dx = (energy(z + h) - energy(z - h)) / (2 * h)
        dy = (energy(z + 1j * h) - energy(z - 1j * h)) / (2 * h)
        fd = 0.5 * (dx - 1j * dy)
        assert abs(field.grad_effective_potential(ctx, uu) - fd) <= 1e-6 * abs(fd)


@pytest.mark.parametrize("spec", SPEC_GRID, ids=spec_id)
def test_gradient_vanishes_on_boundary(spec):
    ctx = context(spec)
    u = conformal.unit_circle_samples(1024)
    assert np.max(np.abs(field.grad_effective_potential(ctx, u))) <= 1e-10


def test_gradient_zero_alpha_example():
    spec = ProblemSpec(9, 7, 1.0, 0)
    ctx = context(spec)
    u = 2.0
    expected = ctx.c / conformal.eval_f(ctx.map, u) * (2 ** (18 / 7) - 1)
    assert field.grad_effective_potential(ctx, u) == pytest.approx(expected, rel=1e-14)
    assert expected != 0


@pytest.mark.parametrize("spec", SPEC_GRID[::3], ids=spec_id)
def test_bracket_form_agrees(spec):
    ctx = context(spec)
    u = conformal.ExteriorGrid(n_radii=8, n_phases=32, n_near=4).points()
    a = field.grad_effective_potential(ctx, u)
    b = field.grad_bracket_form(ctx, u)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


# -- effective potential along rays -------------------------------------------------


def test_increment_vanishes_at_boundary():
    ctx = context(spec_at(9, 7, 0.5))
    vals = field.effective_potential_increment(ctx, np.exp(0.3j), [1.0, 1 + 1e-6])
    assert vals[0] == 0.0
    assert abs(vals[1]) < 1e-9


@pytest.mark.parametrize("n", [1, 3, 9])
def test_disk_increment_closed_form(n):
    T = 1.7
    ctx = context(ProblemSpec(n, n, T, 0))
    s = np.array([1.01, 1.1, 2.0, 4.0, 8.0])
    got = field.effective_potential_increment(ctx, np.exp(0.9j), s)
    assert np.allclose(got, s**2 - 1 - 2 * np.log(s), rtol=1e-9, atol=1e-12)
    assert np.all(got > 0)


@pytest.mark.parametrize("spec", SPEC_GRID[::4], ids=spec_id)
def test_increments_positive(spec):
    inc = field.ray_increments(context(spec), 64, (1.1, 2.0, 4.0))
    assert np.all(inc > 0)


def test_path_independence():
    ctx = context(spec_at(2, 3, 1.5, 1.0, 1.0))
    a, b = 1.2 + 0.1j, -0.4 + 2.5j
    direct = field.effective_potential_path(ctx, np.array([a, b]))
    detour = field.effective_potential_path(ctx, np.array([a, 3 + 0j, 3 + 3j, b]))
    assert direct == pytest.approx(detour, abs=1e-10)


def test_increment_rejects_bad_s():
    ctx = context(spec_at(9, 7, 0.5))
    with pytest.raises(ValueError):
        field.effective_potential_increment(ctx, 1.0, [2.0, 1.5])
    with pytest.raises(ValueError):
        field.effective_potential_increment(ctx, 1.0, 0.5)


# -- verification ---------------------------------------------------------------------


@pytest.mark.parametrize("spec", [ProblemSpec(3, 3, 1.0, 0.4), spec_at(9, 7, 0.5), spec_at(9, 7, 1.3), spec_at(2, 1, 1.0)], ids=spec_id)
def test_verify_passes(spec):
    rep = field.verify(context(spec))
    assert rep.passed, rep
    assert rep.as_dict()["pass"] is True


def test_verify_with_threads_matches_serial():
    ctx = context(spec_at(9, 7, 0.5))
    grid = field.VerifyGrid(n_rays=8)
    assert field.verify(ctx, grid, workers=1) == field.verify(ctx, grid, workers=4)


def test_corrupted_alpha_fails():
    p = params.solve(spec_at(9, 7, 0.5))
    bad = dataclasses.replace(p, alpha=1.2 * p.alpha)
    rep = field.verify(field.FieldContext.from_params(bad))
    assert not rep.passed
    assert rep.min_inequality_margin < 0
