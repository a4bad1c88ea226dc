import math

import numpy as np
import pytest

from equilib import conformal, geometry, oracle, params
from equilib.errors import AtomHit
from equilib.oracle import AtomicMeasure
from equilib.params import ProblemSpec

from conftest import gas_run, t_cr
from oracles import radius_polynomial_roots

rng = np.random.default_rng(99)


# -- Coulomb gas ------------------------------------------------------------------


def test_energy_delta_matches_direct_difference():
    spec = ProblemSpec(9, 7, 1.0, 0.2)
    z = oracle.initial_positions(spec, 64, seed=3)
    dz = 1e-3 * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
    direct = oracle.gas_energy(spec, z + dz) - oracle.gas_energy(spec, z)
    assert oracle.gas_energy_delta(spec, z, dz) == pytest.approx(direct, rel=1e-9)


def test_gradient_matches_finite_differences():
    spec = ProblemSpec(3, 2, 1.0, 0.3 - 0.1j)
    z = oracle.initial_positions(spec, 32, seed=1)
    grad = oracle.gas_gradient(spec, z)
    h = 1e-6
    for k in (0, 7, 31):
        e = np.zeros(32, dtype=complex)
        e[k] = h
        dx = oracle.gas_energy_delta(spec, z - e, 2 * e) / (2 * h)
        dy = oracle.gas_energy_delta(spec, z - 1j * e, 2j * e) / (2 * h)
        # gas_gradient returns 2 dE/d(conj z) = dE/dx + i dE/dy
        assert grad[k] == pytest.approx(dx + 1j * dy, rel=1e-6)


def test_disk_particles_stay_inside():
    ens = oracle.minimize_gas(ProblemSpec(1, 1, 1.0, 0), 64, seed=0)
    assert ens.converged
    assert np.max(np.abs(ens.positions)) <= 1 + 0.15


def test_disk_centre_from_pushforward():
    # particles sample mu_V; z -> z^n pushes them onto the disk centred at conj(t)
    for seed in range(2):
        ens = gas_run(3, 3, 1.0, 0.4 + 0j, 256, seed)
        assert abs(np.mean(ens.positions**3) - 0.4) <= 0.05


def test_energy_trace_non_increasing():
    ens = gas_run(9, 7, 1.0, complex(0.5 * t_cr(9, 7)), 256, 0)
    trace = np.array(ens.energy_trace)
    assert np.all(np.diff(trace) <= 0)
    assert trace[-1] < trace[0]
    assert ens.energy == pytest.approx(oracle.gas_energy(ens.spec, ens.positions), rel=1e-13)


def test_deterministic_rerun():
    spec = ProblemSpec(9, 7, 1.0, 0.1)
    a = oracle.minimize_gas(spec, 64, seed=5)
    b = oracle.minimize_gas(spec, 64, seed=5)
    assert np.array_equal(a.positions, b.positions)
    assert a.energy_trace == b.energy_trace


def test_unconverged_run_is_flagged():
    ens = oracle.minimize_gas(ProblemSpec(9, 7, 1.0, 0.1), 64, seed=0, max_iter=3)
    assert not ens.converged and ens.iterations == 3


def test_particle_count_bounds():
    with pytest.raises(ValueError):
        oracle.minimize_gas(ProblemSpec(1, 1, 1.0, 0), 8)


@pytest.mark.parametrize("seed", range(5))
def test_disk_coverage(seed):
    spec = ProblemSpec(1, 1, 1.0, 0)
    curve = conformal.sample_boundary(conformal.rotated_map(params.solve(spec)), 1024)
    assert oracle.support_coverage(gas_run(1, 1, 1.0, 0j, 256, seed), curve, 0.02) >= 0.98


def test_post_critical_single_component_coverage():
    spec = ProblemSpec(2, 1, 1.0, 2.0)
    curve = conformal.sample_boundary(conformal.rotated_map(params.solve(spec)), 1024)
    ens = gas_run(2, 1, 1.0, 2 + 0j, 256, 0)
    assert oracle.support_coverage(ens, curve, 0.02) >= 0.95
    centroid = np.mean(ens.positions)
    assert geometry.winding_number(curve.components[0], [centroid])[0] == 1
    assert geometry.winding_number(curve.components[0], [0])[0] == 0


def test_coverage_needs_fine_boundary():
    spec = ProblemSpec(1, 1, 1.0, 0)
    curve = conformal.sample_boundary(conformal.rotated_map(params.solve(spec)), 256)
    with pytest.raises(ValueError):
        oracle.support_coverage(gas_run(1, 1, 1.0, 0j, 256, 0), curve, 0.02)


def test_cluster_count_on_synthetic_blobs():
    centres = 3 * np.exp(2j * np.pi * np.arange(5) / 5)
    pts = (centres[:, None] + 0.1 * (rng.random((5, 40)) - 0.5)).ravel()
    assert oracle.count_clusters(pts, 1.0) == 5
    assert oracle.count_clusters(pts[:1], 1.0) == 1


def test_distance_to_support_inside_is_zero():
    spec = ProblemSpec(1, 1, 1.0, 0)
    curve = conformal.sample_boundary(conformal.rotated_map(params.solve(spec)), 1024)
    d = oracle.distance_to_support(curve, [0, 0.5j, 2.0])
    assert d[0] == 0 and d[1] == 0
    assert d[2] == pytest.approx(1.0, abs=1e-5)


# -- atomic measures -----------------------------------------------------------------


def test_rotation_by_one_is_identity():
    mu = AtomicMeasure.random(rng, 10)
    rot = oracle.rotated_measure(mu, 1)
    assert np.allclose(rot.positions, mu.positions, rtol=1e-15, atol=0)
    assert np.array_equal(rot.weights, mu.weights)


def test_single_atom_four_roots():
    rot = oracle.rotated_measure(AtomicMeasure(np.array([1.0]), np.array([1.0])), 4)
    assert np.allclose(np.sort_complex(rot.positions), np.sort_complex(np.array([1, 1j, -1, -1j])), atol=1e-15)
    assert np.allclose(rot.weights, 0.25)
    assert rot.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_weight_preserved():
    mu = AtomicMeasure.random(rng, 7)
    assert oracle.rotated_measure(mu, 5).weights.sum() == pytest.approx(1.0, abs=1e-14)


def test_log_potential_example():
    mu = AtomicMeasure(np.array([0.0]), np.array([1.0]))
    assert oracle.log_potential_atomic(mu, math.e) == pytest.approx(-1.0, abs=1e-15)


def test_atom_hit():
    mu = AtomicMeasure(np.array([0.5j]), np.array([1.0]))
    with pytest.raises(AtomHit):
        oracle.log_potential_atomic(mu, 0.5j)
    with pytest.raises(AtomHit):
        oracle.cauchy_transform_atomic(mu, 0.5j)


def test_atomic_measure_validation():
    with pytest.raises(ValueError):
        AtomicMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        AtomicMeasure(np.array([0.0]), np.array([-1.0]))


# -- radius scan ------------------------------------------------------------------------


def test_scan_two_roots_bracket_alpha():
    roots = oracle.scan_radius_roots(ProblemSpec(2, 1, 1.0, 0.5))
    assert len(roots) == 2
    (r_lo, a_lo), (r_hi, a_hi) = roots
    assert r_lo < r_hi
    assert a_lo > 1 > a_hi
    assert [r_lo, r_hi] == pytest.approx(list(radius_polynomial_roots(0.5)), rel=1e-12)


def test_scan_unique_root_for_upper_degrees():
    assert len(oracle.scan_radius_roots(ProblemSpec(2, 3, 1.0, 0.1))) == 1


def test_scan_small_t_limits():
    spec = ProblemSpec(2, 1, 1.0, 1e-6)
    (r_lo, _), (r_hi, _) = oracle.scan_radius_roots(spec)
    assert r_lo < 1e-3
    assert r_hi == pytest.approx(0.5**0.25, rel=1e-10)


def test_scan_rejects_degenerate_degrees():
    with pytest.raises(ValueError):
        oracle.scan_radius_roots(ProblemSpec(3, 3, 1.0, 0.1))
