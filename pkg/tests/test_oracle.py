import struct

import numpy as np
import pytest

from rabidephase import (DensityState, ModelParams, ShapeMismatchError, SizeError, Tolerances,
                         build_liouvillian, compare_states, fock_atom_state, integrate_exact,
                         integrate_oracle, propagate_oracle)
from rabidephase.oracle import (benchmark_rhs, dump_liouvillian, load_liouvillian_matrix,
                                min_eigenvalue, rabi_hamiltonian, system_operators, unvec, vec)

from conftest import random_density

FIG1 = ModelParams(1.0, 1.0, 0.04, 0.08, 0.0)
GENERIC = ModelParams(1.0, 0.6, 0.05, 0.07, 0.02)


def test_basis_ordering_is_atom_fast():
    a, n, sz, sx = system_operators(2)
    assert np.array_equal(np.diag(n), [0, 0, 1, 1, 2, 2])
    assert np.array_equal(np.diag(sz), [-1, 1, -1, 1, -1, 1])
    h = rabi_hamiltonian(FIG1, 2)
    # counter-rotating element <e,1|H|g,0>
    assert h[3, 0] == pytest.approx(FIG1.g)


def test_free_evolution_generator():
    p = ModelParams(1.0, 1.3, 0.0)
    L = build_liouvillian(p, 4)
    h0 = rabi_hamiltonian(p, 4)
    eye = np.eye(h0.shape[0])
    assert np.allclose(L.matrix, -1j * (np.kron(eye, h0) - np.kron(h0.T, eye)))
    rho = np.diag(np.random.default_rng(0).random(10))
    assert np.max(np.abs(L.matrix @ vec(rho))) == 0.0


@pytest.mark.parametrize("params", [FIG1, GENERIC])
def test_trace_preserving(params):
    L = build_liouvillian(params, 6)
    assert np.max(np.abs(L.trace_functional() @ L.matrix)) < 1e-12


def test_generator_maps_hermitian_to_hermitian(rng):
    L = build_liouvillian(GENERIC, 5)
    rho = random_density(rng, 5)
    d = unvec(L.matrix @ vec(rho), L.dim)
    assert np.max(np.abs(d - d.conj().T)) < 1e-15


def test_propagate_zero_time_is_identity(rng):
    s = DensityState.from_matrix(random_density(rng, 3))
    out = propagate_oracle(build_liouvillian(FIG1, 3), s, 0.0)
    assert np.array_equal(out.pack(), s.pack()) and out is not s


def test_coherence_decay_closed_form():
    p = ModelParams(1.0, 1.0, 0.0, 0.08, 0.0)
    s0 = DensityState.zeros(3)
    s0.a[0, 0] = s0.b[0, 0] = 0.5
    s0.c[0, 0] = 0.5
    L = build_liouvillian(p, 3)
    for t in (1.0, 10.0, 50.0):
        c = propagate_oracle(L, s0, t).c[0, 0]
        assert abs(c) == pytest.approx(0.5 * np.exp(-0.08 * t), rel=1e-12)


def test_compare_states():
    g0, e0 = fock_atom_state(0, False, 3), fock_atom_state(0, True, 3)
    assert compare_states(g0, g0).max == 0.0
    dev = compare_states(g0, e0)
    assert (dev.max, dev.a, dev.b, dev.c) == (1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ShapeMismatchError):
        compare_states(g0, fock_atom_state(0, False, 4))


def test_state_truncation_must_match():
    with pytest.raises(ShapeMismatchError):
        propagate_oracle(build_liouvillian(FIG1, 3), fock_atom_state(0, False, 4), 1.0)


def test_memory_cap():
    build_liouvillian(FIG1, 12)
    with pytest.raises(SizeError):
        build_liouvillian(FIG1, 13)
    with pytest.raises(ValueError):
        build_liouvillian(FIG1, 0)


@pytest.mark.parametrize("n_max", [4, 6, 8])
def test_positivity_of_propagated_states(rng, n_max):
    L = build_liouvillian(FIG1, n_max)
    s0 = DensityState.from_matrix(random_density(rng, n_max, rank=2))
    for t in (1.0, 25.0, 250.0):
        assert min_eigenvalue(propagate_oracle(L, s0, t)) >= -1e-8


def test_rk_fallback_matches_expm(monkeypatch, rng):
    from rabidephase import oracle

    L = build_liouvillian(GENERIC, 3)
    s0 = DensityState.from_matrix(random_density(rng, 3))
    ref = propagate_oracle(L, s0, 20.0)
    monkeypatch.setattr(oracle, "EXPM_SIZE_LIMIT", 0)
    alt = propagate_oracle(L, s0, 20.0, Tolerances(1e-11, 1e-13))
    assert compare_states(ref, alt).max < 1e-9


def test_integrate_oracle_matches_pointwise_propagation():
    s0 = fock_atom_state(0, False, 5)
    grid = np.linspace(0, 100.0, 11)
    traj = integrate_oracle(FIG1, s0, 100.0, grid)
    L = build_liouvillian(FIG1, 5)
    assert compare_states(traj.states[-1], propagate_oracle(L, s0, 100.0)).max < 1e-12
    exact = integrate_exact(FIG1, s0, 100.0, grid, truncation_threshold=None)
    assert compare_states(traj.states[-1], exact.states[-1]).max < 1e-6


def test_binary_dump_layout(tmp_path):
    L = build_liouvillian(GENERIC, 2)
    path = tmp_path / "L.bin"
    dump_liouvillian(L, path)
    raw = path.read_bytes()
    D = L.matrix.shape[0]
    assert struct.unpack("<q", raw[:8]) == (D,)
    assert len(raw) == 8 + 16 * D * D
    re, im = struct.unpack("<dd", raw[8 + 16 * (D + 2): 8 + 16 * (D + 3)])
    assert complex(re, im) == L.matrix[1, 2]
    assert np.array_equal(load_liouvillian_matrix(path), L.matrix)


def test_benchmark_reports_both_engines():
    rows = benchmark_rhs(FIG1, [1, 4, 15], repeats=3, memory_cap=8 * 2**20)
    assert [r["n_max"] for r in rows] == [1, 4, 15]
    assert rows[0]["oracle_s"] is not None and rows[-1]["oracle_s"] is None
    assert rows[1]["generator_entries"] == 10**4
