import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig1_model
from embedq.dynamics import (
    InitialState,
    coherence_decay,
    diagonal_ensemble,
    evolve_mixed,
    evolve_pure,
    long_time_average,
    write_fluctuation_json,
    write_trajectory_csv,
)
from embedq.dynamics import _propagated
from embedq.ensembles import InteractionSpec
from embedq.errors import DegeneracyError, InvalidParameterError
from embedq.model import ExplicitDos, SystemSpectrum, build_bare_model, build_environment_spectrum
from embedq.spectral import diagonalize, dressed_system


@pytest.fixture(scope="module")
def small():
    bare = fig1_model(64)
    return dressed_system(bare, InteractionSpec("goe", 0.5, 1))


def test_initial_state_validation():
    with pytest.raises(InvalidParameterError):
        InitialState({0: 0.5})
    with pytest.raises(InvalidParameterError):
        InitialState({0: 1.5, 1: -0.5})
    with pytest.raises(InvalidParameterError):
        InitialState.superposition(0, 1, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        InitialState({0: 1.0}, ((2, 2, 0.1),))


def test_time_zero_is_initial_product_state(small):
    m = small.model.index(1, 30)
    traj = evolve_pure(small, m, [0.0])
    np.testing.assert_allclose(traj.states[0], [[0, 0], [0, 1]], atol=1e-12)


def test_zero_coupling_populations_constant():
    bare = fig1_model(32)
    ds = diagonalize(bare, None)
    traj = evolve_pure(ds, bare.index(0, 5), np.linspace(0, 50, 30))
    np.testing.assert_allclose(traj.populations, np.tile([1.0, 0.0], (30, 1)), atol=1e-14)


def test_mixed_is_average_of_pure(small):
    t = np.linspace(0, 30, 17)
    a, b = 10, 90
    mix = evolve_mixed(small, InitialState({a: 0.25, b: 0.75}), t)
    ref = 0.25 * evolve_pure(small, a, t).states + 0.75 * evolve_pure(small, b, t).states
    np.testing.assert_allclose(mix.states, ref, atol=1e-13)


def test_superposition_matches_outer_product(small):
    # compare against Tr_e |psi(t)><psi(t)| built from the propagated state vector
    t = np.array([0.0, 3.0, 11.0])
    m, p = small.model.index(1, 20), small.model.index(0, 41)
    am, ap = 0.6, 0.8j
    traj = evolve_mixed(small, InitialState.superposition(m, p, am, ap), t)
    psi = am * _propagated(small, m, t) + ap * _propagated(small, p, t)
    v = psi.reshape(2, 64, t.size)
    ref = np.einsum("aet,bet->tab", v, v.conj())
    np.testing.assert_allclose(traj.states, ref, atol=1e-13)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 127), st.floats(0.0, 500.0))
def test_reduced_state_is_physical(n, t):
    bare = fig1_model(64)
    ds = dressed_system(bare, InteractionSpec("goe", 0.8, 2))
    traj = evolve_mixed(ds, InitialState.superposition(n, (n + 7) % 128), [t])
    traj.state(0).check(1e-10)


def test_unitarity_and_energy_conservation(small):
    t = np.linspace(0, 400, 9)
    m = small.model.index(1, 33)
    v = _propagated(small, m, t)
    np.testing.assert_allclose(np.linalg.norm(v, axis=0), 1.0, atol=1e-12)
    h = small.hamiltonian()
    energies = np.einsum("nt,nk,kt->t", v.conj(), h, v).real
    np.testing.assert_allclose(energies, energies[0], atol=1e-12)
    assert energies[0] == pytest.approx(h[m, m], abs=1e-12)


def test_diagonal_ensemble_zero_coupling():
    bare = build_bare_model(SystemSpectrum([-1.0, 1.0]), build_environment_spectrum(ExplicitDos((0.0, 0.3, 0.55))))
    ds = diagonalize(bare, None)
    rho = diagonal_ensemble(ds, InitialState.pure(bare.index(1, 2)))
    np.testing.assert_allclose(rho.matrix, [[0, 0], [0, 1]], atol=1e-15)


def test_diagonal_ensemble_rejects_degenerate():
    # 0 + 1 and 1 + 0 coincide
    bare = build_bare_model(SystemSpectrum([0.0, 1.0]), build_environment_spectrum(ExplicitDos((0.0, 1.0))))
    ds = diagonalize(bare, None)
    with pytest.raises(DegeneracyError):
        diagonal_ensemble(ds, InitialState.pure(0))


def test_diagonal_ensemble_strong_coupling_is_global():
    bare = fig1_model(256)
    m = bare.index(1, 128)
    rhos = [
        diagonal_ensemble(dressed_system(bare, InteractionSpec("goe", 4.0, s)), InitialState.pure(m))
        for s in range(4)
    ]
    p = np.mean([r.populations for r in rhos], axis=0)
    np.testing.assert_allclose(p, [0.5, 0.5], atol=0.05)


def test_long_time_average_of_constant_trajectory():
    bare = fig1_model(16)
    ds = diagonalize(bare, None)
    traj = evolve_pure(ds, 3, np.linspace(0, 10, 11))
    state, rep = long_time_average(traj, (2.0, 8.0))
    assert rep.n_samples == 7
    np.testing.assert_allclose(rep.stds, 0.0, atol=1e-15)
    np.testing.assert_allclose(state.populations, [1.0, 0.0])
    with pytest.raises(InvalidParameterError):
        long_time_average(traj, (20.0, 30.0))


def test_relaxation_then_plateau():
    bare = fig1_model(1024)
    ds = dressed_system(bare, InteractionSpec("goe", 0.5, 0))
    traj = evolve_pure(ds, bare.index(1, 512), np.linspace(0, 200, 401))
    p1 = traj.populations[:, 1]
    early = p1[(traj.times >= 40) & (traj.times <= 100)]
    late = p1[traj.times >= 100]
    assert p1[0] == pytest.approx(1.0)
    assert abs(early.mean() - late.mean()) < 3 * late.std() + 0.01
    # the window average agrees with the dephased state
    rho = diagonal_ensemble(ds, InitialState.pure(bare.index(1, 512)))
    assert abs(late.mean() - rho.populations[1]) < 3 * late.std()


def test_superposition_and_mixture_share_long_time_populations():
    bare = fig1_model(256)
    ds = dressed_system(bare, InteractionSpec("goe", 0.5, 0))
    m, p = bare.index(1, 128), bare.index(0, 128)
    t = np.linspace(0, 200, 400)
    sup, rep = long_time_average(evolve_mixed(ds, InitialState.superposition(m, p), t), (100, 200))
    mix, _ = long_time_average(evolve_mixed(ds, InitialState({m: 0.5, p: 0.5}), t), (100, 200))
    assert np.all(np.abs(sup.populations - mix.populations) < 3 * rep.stds)


def test_coherence_decay_basics():
    bare = fig1_model(128)
    m, p = bare.index(1, 64), bare.index(0, 64)
    ds0 = diagonalize(bare, None)
    c0 = coherence_decay(ds0, (m, p, (0.6, 0.8)), np.linspace(0, 40, 50))
    np.testing.assert_allclose(c0.magnitude, 0.48, atol=1e-14)
    ds = dressed_system(bare, InteractionSpec("goe", 0.6, 0))
    c = coherence_decay(ds, (m, p, (0.6, 0.8)), np.linspace(0, 100, 200))
    assert c.magnitude[0] == pytest.approx(0.48)
    assert c.mean_magnitude < 0.2
    assert c.window == pytest.approx((50.0, 100.0))
    with pytest.raises(InvalidParameterError):
        coherence_decay(ds, (m, bare.index(1, 3), (0.6, 0.8)), [0.0])


def test_trajectory_outputs(tmp_path, small):
    traj = evolve_mixed(small, InitialState.superposition(5, 100), np.linspace(0, 5, 4))
    write_trajectory_csv(tmp_path / "t.csv", traj)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,p_0,p_1,coh_01"
    assert len(lines) == 5
    _, rep = long_time_average(traj, (0, 5))
    write_fluctuation_json(tmp_path / "f.json", rep)
    assert json.loads((tmp_path / "f.json").read_text())["n_samples"] == 4
