import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabidephase import (ModelParams, PopulationState, adiabatic_coherences, adiabatic_state,
                         dephasing_rates, diagonal_populations, effective_rhs, exact_rhs,
                         f_coefficient, fock_atom_state, integrate_effective,
                         moment_identity_residual, thermal_atom_state)

FIG1 = ModelParams(1.0, 1.0, 0.04, 0.08, 0.0)
GENERIC = ModelParams(1.0, 0.6, 0.05, 0.07, 0.02)


def vacuum(n_max):
    a = np.zeros(n_max + 1)
    a[0] = 1.0
    return PopulationState(a, np.zeros(n_max + 1))


def test_rhs_from_vacuum():
    d = effective_rhs(FIG1, vacuum(10))
    v2 = 6.389776357827476e-05
    assert d.a_diag[0] == pytest.approx(-v2, rel=1e-12)
    assert d.b_diag[1] == pytest.approx(v2, rel=1e-12)
    assert d.b_diag[0] == 0.0
    assert np.count_nonzero(d.a_diag) == 1 and np.count_nonzero(d.b_diag) == 1


def test_rhs_zero_coupling():
    p = ModelParams(1.0, 1.0, 0.0, 0.08, 0.0)
    pop = diagonal_populations(thermal_atom_state(0.5, True, 20))
    d = effective_rhs(p, pop)
    assert not d.a_diag.any() and not d.b_diag.any()


def test_rhs_literal_form_in_the_bulk():
    rng = np.random.default_rng(3)
    a, b = rng.random(12), rng.random(12)
    v1, v2 = dephasing_rates(GENERIC)
    d = effective_rhs(GENERIC, PopulationState(a, b))
    for n in range(1, 11):
        da = -((v1 + v2) * n + v2) * a[n] + v1 * n * b[n - 1] + v2 * (n + 1) * b[n + 1]
        db = -((v1 + v2) * n + v1) * b[n] + v2 * n * a[n - 1] + v1 * (n + 1) * a[n + 1]
        assert d.a_diag[n] == pytest.approx(da, rel=1e-12)
        assert d.b_diag[n] == pytest.approx(db, rel=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_reflecting_closure_conserves_probability(seed, n_max):
    rng = np.random.default_rng(seed)
    pop = PopulationState(rng.random(n_max + 1), rng.random(n_max + 1))
    d = effective_rhs(GENERIC, pop)
    assert abs(d.a_diag.sum() + d.b_diag.sum()) < 1e-15 * (1 + n_max) ** 2


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_open_closure_conserves_when_top_level_empty(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random(15), rng.random(15)
    a[-1] = b[-1] = 0.0
    d = effective_rhs(GENERIC, PopulationState(a, b), boundary="open")
    assert abs(d.a_diag.sum() + d.b_diag.sum()) < 1e-15


def test_adiabatic_coherence_single_excited_level():
    pop = PopulationState(np.zeros(5), np.eye(5)[1])
    c = adiabatic_coherences(FIG1, pop)
    g = FIG1.g
    assert c[0, 1] == pytest.approx(g / f_coefficient(FIG1, 0, 1), rel=1e-14)
    assert c[2, 1] == pytest.approx(g * np.sqrt(2) / f_coefficient(FIG1, 2, 1), rel=1e-14)
    mask = np.ones_like(c, bool)
    mask[0, 1] = mask[2, 1] = False
    assert not c[mask].any()


def test_adiabatic_coherences_trivial_cases():
    pop = diagonal_populations(thermal_atom_state(0.4, False, 30))
    assert not adiabatic_coherences(ModelParams(1, 1, 0.0, 0.1, 0.0), pop).any()
    assert not adiabatic_coherences(FIG1, PopulationState(np.zeros(4), np.zeros(4))).any()


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_adiabatic_coherences_are_stationary(seed):
    rng = np.random.default_rng(seed)
    pop = PopulationState(rng.random(9), rng.random(9))
    d = exact_rhs(GENERIC, adiabatic_state(GENERIC, pop))
    assert np.max(np.abs(d.c)) < 1e-12


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_population_flow_through_relaxed_coherences_is_the_rate_equation(seed):
    # diagonal derivative of the exact equations with stationary coherences
    rng = np.random.default_rng(seed)
    pop = PopulationState(rng.random(9), rng.random(9))
    d = exact_rhs(GENERIC, adiabatic_state(GENERIC, pop))
    eff = effective_rhs(GENERIC, pop)
    assert np.allclose(np.diag(d.a).real, eff.a_diag, rtol=1e-12, atol=1e-16)
    assert np.allclose(np.diag(d.b).real, eff.b_diag, rtol=1e-12, atol=1e-16)


def test_zero_coupling_trajectory_is_constant():
    p = ModelParams(1.0, 1.0, 0.0, 0.08, 0.0)
    pop0 = diagonal_populations(thermal_atom_state(0.3, True, 20))
    traj = integrate_effective(p, pop0, 1000.0, np.linspace(0, 1000, 11))
    for s in traj.states:
        assert np.array_equal(s.pack(), pop0.pack())
    assert np.all(moment_identity_residual(traj, p) == 0)


def test_accepts_density_state_and_drops_coherences():
    s = fock_atom_state(1, True, 8)
    s.c[0, 1] = 0.1
    traj = integrate_effective(FIG1, s, 10.0, [0.0, 10.0])
    assert traj.states[0].b_diag[1] == 1.0


def test_population_sum_conserved_over_long_run():
    traj = integrate_effective(FIG1, vacuum(40), 300 / 0.04, np.linspace(0, 300 / 0.04, 61))
    drift = max(abs(s.trace() - 1) for s in traj.states)
    assert drift < 1e-10
    # tail levels carry integrator noise at the atol scale
    assert all(s.pack().min() > -1e-9 for s in traj.states)


def test_negative_initial_population_rejected():
    a = np.zeros(5)
    a[0], a[1] = 1.01, -0.01
    with pytest.raises(ValueError):
        integrate_effective(FIG1, PopulationState(a, np.zeros(5)), 1.0)


def test_moment_identity_holds_along_effective_run():
    traj = integrate_effective(GENERIC, vacuum(30), 2000.0, np.linspace(0, 2000, 201))
    assert np.max(np.abs(moment_identity_residual(traj, GENERIC))) < 1e-8
