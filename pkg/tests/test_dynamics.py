import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tnut import geometry as geo
from tnut.dynamics import (
    PhasePoint,
    admits_bound_orbits,
    angular_momentum,
    charge,
    conserved_set,
    energy,
    geodesic_rhs,
    hamiltonian,
    integrate,
    integrate_batch,
    poisson_bracket,
    runge_lenz,
    sample_phase,
    theta_range,
    velocities,
)
from tnut.geometry import MetricParams
from tnut.suites import levi_civita

from conftest import admissible_params, spherical_points

momenta = st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4)


@given(p=admissible_params(), x=spherical_points())
def test_zero_momentum(p, x):
    ph = (*x, 0.0, 0.0, 0.0, 0.0)
    assert hamiltonian(p, ph) == 0.0
    dx, dp = geodesic_rhs(p, ph)
    assert np.all(dx == 0.0) and np.all(dp == 0.0)


@given(p=admissible_params(), x=spherical_points(), m=momenta)
def test_hamiltonian_matches_inverse_metric(p, x, m):
    ginv = geo.extended_metric_inverse(p, x)
    m = np.array(m)
    H = hamiltonian(p, (*x, *m))
    assert H == pytest.approx(0.5 * m @ ginv @ m, rel=1e-12, abs=1e-14)
    assert hamiltonian(p, (*x, *(2 * m))) == pytest.approx(4 * H, rel=1e-13, abs=1e-14)


@given(p=admissible_params(allow_a_zero=True), x=spherical_points(), m=momenta)
def test_energy_equals_hamiltonian(p, x, m):
    H = hamiltonian(p, (*x, *m))
    assert conserved_set(p, (*x, *m)).E == pytest.approx(H, rel=1e-12, abs=1e-14)


@given(p=admissible_params(), x=spherical_points(), m=momenta)
def test_charge_is_chi_momentum(p, x, m):
    cs = conserved_set(p, (*x, *m))
    assert cs.q == pytest.approx(m[3], rel=1e-12, abs=1e-13)
    assert cs.kappa == pytest.approx(-p.a * cs.E + 0.5 * p.c * cs.q**2, rel=1e-13, abs=1e-14)


def test_charge_vanishes_when_fibre_velocity_vanishes(generic):
    x = (1.2, 0.8, 0.3, 0.0)
    # chi' + cos(theta) phi' = 0 with phi' = 1: chi' = -cos(theta)
    vel = np.array([0.2, 0.1, 1.0, -math.cos(x[1])])
    mom = geo.extended_metric(generic, x) @ vel
    assert abs(conserved_set(generic, (*x, *mom)).q) < 1e-14


def test_radial_motion_has_no_angular_momentum(generic):
    cs = conserved_set(generic, (1.5, 0.7, 2.0, 1.0, 0.8, 0.0, 0.0, 0.0))
    assert np.allclose(cs.J, 0.0, atol=1e-15)


@given(p=admissible_params(), x=spherical_points(), m=momenta)
def test_velocities_are_raised_momenta(p, x, m):
    dx, _ = geodesic_rhs(p, (*x, *m))
    raised = geo.extended_metric_inverse(p, x) @ np.array(m)
    assert np.allclose(dx, raised, rtol=1e-12, atol=1e-13)
    assert np.allclose(velocities(p, (*x, *m)), raised, rtol=1e-12, atol=1e-13)


@given(p=admissible_params(), x=spherical_points(), m=momenta)
def test_hamilton_flow_is_geodesic_flow(p, x, m):
    m = np.array(m)
    phase = (*x, *m)
    xdot, pdot = geodesic_rhs(p, phase)
    g, dg = geo.metric_jet1(geo.extended_field(p), x)
    g, dg = np.asarray(g, float), np.asarray(dg, float)
    ginv = np.linalg.inv(g)
    dginv = -np.einsum("am,emn,nb->eab", ginv, dg, ginv)
    acc = np.einsum("lmn,l,n->m", dginv, xdot, m) + ginv @ pdot
    _, _, gam = geo.christoffel_at(geo.extended_field(p), x)
    geo_acc = -np.einsum("mnl,n,l->m", np.asarray(gam, float), xdot, xdot)
    scale = max(np.max(np.abs(geo_acc)), np.max(np.abs(acc)), 1e-300)
    assert np.max(np.abs(acc - geo_acc)) / scale <= 1e-10


# brackets -----------------------------------------------------------------


def _phases(params, n, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return [sample_phase(params, rng, bound=admits_bound_orbits(params)) for _ in range(n)]


@pytest.mark.parametrize("params", [MetricParams(1, 1, 0, 1), MetricParams.standard(1.2, 0.9),
                                    MetricParams(0.7, 1.4, 1.1, 0.6)])
def test_bracket_table(params):
    for ph in _phases(params, 5, 11):
        cs = conserved_set(params, ph)
        J = np.array(cs.J, dtype=float)
        K = np.array(cs.K, dtype=float)
        for i, j in itertools.product((1, 2, 3), repeat=2):
            jj = poisson_bracket(params, angular_momentum(i), angular_momentum(j), ph)
            jk = poisson_bracket(params, angular_momentum(i), runge_lenz(j), ph)
            want_j = sum(levi_civita(i, j, k) * J[k - 1] for k in (1, 2, 3))
            want_k = sum(levi_civita(i, j, k) * K[k - 1] for k in (1, 2, 3))
            assert abs(jj - want_j) <= 1e-7 * np.max(np.abs(J))
            assert abs(jk - want_k) <= 1e-7 * np.max(np.abs(K))


def test_specific_brackets(skewed):
    for ph in _phases(skewed, 3, 5):
        K3 = conserved_set(skewed, ph).K[2]
        assert poisson_bracket(skewed, angular_momentum(1), runge_lenz(2), ph) == pytest.approx(K3, rel=1e-7)
        assert abs(poisson_bracket(skewed, angular_momentum(3), runge_lenz(3), ph)) <= 1e-12 * abs(K3)


@given(p=admissible_params(), x=spherical_points(margin=0.4), m=momenta)
def test_everything_commutes_with_hamiltonian(p, x, m):
    ph = (*x, *m)
    cs = conserved_set(p, ph)
    scale = max(1e-12, float(np.max(np.abs(np.array(cs.K + cs.J, dtype=float)))) * max(1.0, abs(cs.E)))
    for F in (charge, angular_momentum(1), angular_momentum(2), angular_momentum(3),
              runge_lenz(1), runge_lenz(2), runge_lenz(3)):
        assert abs(poisson_bracket(p, energy, F, ph)) <= 1e-9 * scale


# integration --------------------------------------------------------------


def test_zero_momentum_trajectory_is_constant(generic):
    start = PhasePoint((1.3, 0.9, 0.2, 0.1), (0.0, 0.0, 0.0, 0.0))
    traj = integrate(generic, start, 50.0)
    assert np.all(traj.states == traj.states[0])
    assert traj.tau[-1] == 50.0 and not traj.truncated


def test_integrator_arguments_validated(generic):
    start = PhasePoint((1.3, 0.9, 0.2, 0.1), (0.1, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        integrate(generic, start, 0.0)
    with pytest.raises(ValueError):
        integrate(generic, start, 1.0, tol=1e-2)
    with pytest.raises(ValueError):
        integrate(generic, start, 1.0, tol=1e-15)


def test_polar_approach_is_flagged(generic):
    # q = 0 and p_phi = 0: the orbit plane contains the axis, so theta reaches 0
    start = PhasePoint((1.0, 0.5, 0.0, 0.0), (0.0, -0.6, 0.0, 0.0))
    traj = integrate(generic, start, 20.0)
    assert traj.truncated
    assert traj.message
    assert traj.tau[-1] < 20.0
    assert np.all(np.diff(traj.tau) > 0)


@pytest.mark.parametrize("params", [MetricParams(1, 1, 0, 1), MetricParams.standard(1.0, 1.0)])
def test_drift_bound(params):
    traj = integrate_batch(params, _phases(params, 4, 3), 100.0, 1e-10)
    assert not traj.truncated
    assert max(traj.drift.values()) <= 1e-6
    assert np.all(np.diff(traj.tau) > 0)


def test_drift_shrinks_with_tolerance(generic):
    start = _phases(generic, 1, 17)
    drifts = [max(integrate_batch(generic, start, 100.0, tol).drift.values()) for tol in (1e-6, 1e-8, 1e-10)]
    assert drifts[0] > drifts[1] > drifts[2]


def test_batch_members_match_solo_runs(generic):
    starts = _phases(generic, 2, 23)
    batch = integrate_batch(generic, starts, 20.0, 1e-10)
    for k, s in enumerate(starts):
        solo = integrate(generic, s, 20.0, 1e-10)
        E0 = conserved_set(generic, s).E
        Eb = conserved_set(generic, batch.phase(-1, k)).E
        Es = conserved_set(generic, solo.phase(-1)).E
        assert Eb == pytest.approx(E0, rel=1e-8) and Es == pytest.approx(E0, rel=1e-8)


def test_sampler_keeps_orbits_off_the_poles(skewed):
    for ph in _phases(skewed, 10, 29):
        lo, hi = theta_range(skewed, ph)
        assert lo >= 0.25 and hi <= math.pi - 0.25


def test_bound_sampler_requires_bound_orbits():
    std = MetricParams.standard(1.0, 1.0)
    assert not admits_bound_orbits(std)
    with pytest.raises(ValueError):
        sample_phase(std, np.random.Generator(np.random.Philox(key=1)), bound=True)
