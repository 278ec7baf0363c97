import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig1_model
from embedq.ensembles import InteractionSpec, sample_goe, sample_interaction
from embedq.errors import InconsistentInputError, InvalidParameterError
from embedq.model import ExplicitDos, SystemSpectrum, build_bare_model, build_environment_spectrum
from embedq.spectral import (
    diagonalize,
    dressed_system,
    fgr_width,
    fourth_moment_checks,
    ldos,
    ldos_members,
    purity,
    sample_index_tuples,
    selection_rule_allows,
    transition_matrix,
    transition_rows,
    write_ldos_csv,
    write_transition_row_csv,
)


def two_level():
    return build_bare_model(SystemSpectrum([-1.0, 1.0]), build_environment_spectrum(ExplicitDos((0.0,))))


def test_two_by_two_closed_form():
    bare = two_level()
    ds = diagonalize(bare, np.array([[0.0, 0.5], [0.5, 0.0]]))
    r = math.sqrt(1.25)
    np.testing.assert_allclose(ds.lambdas, [-r, r], atol=1e-14)
    assert ds.overlaps[0, 0] ** 2 == pytest.approx((1 + 1 / r) / 2, abs=1e-14)
    assert ds.overlaps[1, 1] ** 2 == pytest.approx((1 + 1 / r) / 2, abs=1e-14)
    # largest component of each column is positive
    assert ds.overlaps[0, 0] > 0 and ds.overlaps[1, 1] > 0


def test_zero_coupling_gives_permutation():
    bare = fig1_model(16)
    ds = diagonalize(bare, None)
    a = ds.weights()
    assert set(np.unique(a)) <= {0.0, 1.0}
    assert np.array_equal(a.sum(0), np.ones(32)) and np.array_equal(a.sum(1), np.ones(32))
    np.testing.assert_array_equal(transition_matrix([ds]).entries, np.eye(32))


def brute_force_transitions(o):
    n = o.shape[0]
    p = [[0.0] * n for _ in range(n)]
    for m in range(n):
        for k in range(n):
            s = 0.0
            for i in range(n):
                s += abs(o[k, i]) ** 2 * abs(o[m, i]) ** 2
            p[m][k] = s
    return np.array(p)


def test_transition_matrix_matches_triple_loop():
    bare = fig1_model(32)
    ds = diagonalize(bare, sample_goe(64, 0.4, seed=11))
    tm = transition_matrix([ds])
    np.testing.assert_allclose(tm.entries, brute_force_transitions(ds.overlaps), atol=1e-12, rtol=0)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 24), st.floats(0.0, 3.0), st.integers(0, 10_000), st.sampled_from(["goe", "rrm"]))
def test_transition_invariants(dim_e, sigma_w, seed, kind):
    bare = fig1_model(dim_e)
    spec = InteractionSpec(kind, sigma_w, seed)
    runs = [dressed_system(bare, spec), dressed_system(bare, InteractionSpec(kind, sigma_w, seed + 1))]
    p = transition_matrix(runs).entries
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(p, p.T, atol=1e-14)
    assert p.min() >= 0
    for n in range(bare.n):
        assert 1.0 - 1e-9 <= purity(transition_matrix(runs), n) <= bare.n + 1e-9


def test_transition_rows_agree_with_full_matrix():
    bare = fig1_model(40)
    runs = [dressed_system(bare, InteractionSpec("goe", 0.5, s)) for s in range(3)]
    full = transition_matrix(runs)
    part = transition_rows(runs, [3, 50])
    np.testing.assert_allclose(part.row(50), full.row(50), atol=1e-15)
    with pytest.raises(InvalidParameterError):
        part.row(4)


def test_purity_grows_with_coupling():
    bare = fig1_model(128)
    sigmas = [0.05, 0.2, 0.8, 3.2]
    n = bare.index(1, 64)
    pur = []
    for s in sigmas:
        runs = [dressed_system(bare, InteractionSpec("rrm", s, seed)) for seed in range(4)]
        pur.append(purity(transition_matrix(runs), n))
    assert all(b > a for a, b in zip(pur, pur[1:]))


@pytest.mark.parametrize("kind", ["goe", "rrm"])
def test_eigendecomposition_accuracy(kind):
    bare = fig1_model(128)
    spec = InteractionSpec(kind, 0.7, 3, rotation_group="unitary")
    w = sample_interaction(spec, bare.bare_energies)
    ds = diagonalize(bare, w)
    h = np.diag(bare.bare_energies) + w.entries
    norm = np.linalg.norm(h, 2)
    eps = np.finfo(float).eps
    assert np.max(np.abs(ds.hamiltonian() - h)) <= 1e3 * eps * norm
    assert np.max(np.abs(ds.overlaps.conj().T @ ds.overlaps - np.eye(bare.n))) <= 1e3 * eps
    assert np.all(np.diff(ds.lambdas) >= 0)
    assert ds.is_real == (kind == "goe")


def test_diagonalize_rejects_wrong_shape():
    with pytest.raises(InconsistentInputError):
        diagonalize(fig1_model(4), np.zeros((3, 3)))


def test_runs_must_share_model():
    a = diagonalize(fig1_model(4), None)
    b = diagonalize(fig1_model(5), None)
    with pytest.raises(InconsistentInputError):
        transition_matrix([a, b])


def test_cache_round_trip(tmp_path):
    bare = fig1_model(32)
    spec = InteractionSpec("goe", 0.3, 4)
    first = dressed_system(bare, spec, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("*.npz"))) == 1
    second = dressed_system(bare, spec, cache_dir=tmp_path)
    assert first.overlaps.tobytes() == second.overlaps.tobytes()
    assert first.lambdas.tobytes() == second.lambdas.tobytes()


def test_fgr_width():
    assert fgr_width(0.5, 1000.0, 2000) == pytest.approx(math.pi * 0.25 / 2)
    with pytest.raises(InvalidParameterError):
        fgr_width(-1.0, 1.0, 1)


def test_ldos_zero_coupling_is_point_mass():
    bare = fig1_model(64)
    curve = ldos([diagonalize(bare, None)], bare.index(1, 32))
    assert curve.fit.kind == "degenerate"
    assert curve.gamma_fgr == 0.0


def test_ldos_integrates_to_one():
    bare = fig1_model(256)
    runs = [dressed_system(bare, InteractionSpec("goe", 0.3, s)) for s in range(2)]
    curve = ldos(runs, bare.index(1, 128), bundle_half_width=5)
    # every pooled bare state carries unit weight over the full spectrum
    assert curve.weights.sum() / curve.n_curves == pytest.approx(1.0, abs=1e-12)
    # the binned window holds almost all of it
    lam, w = curve.points
    assert 0.9 < w.sum() <= 1.0 + 1e-12
    assert curve.fit.kind in ("lorentzian", "gaussian")


def test_bundle_pooling_reduces_residual():
    bare = fig1_model(512)
    runs = [dressed_system(bare, InteractionSpec("goe", 0.3, s)) for s in range(3)]
    n = bare.index(1, 256)
    single = ldos(runs, n, bundle_half_width=0)
    pooled = ldos(runs, n, bundle_half_width=10)
    assert pooled.n_curves > single.n_curves
    assert pooled.fit.residual < single.fit.residual


def test_ldos_members_bundle():
    bare = fig1_model(256)
    n = bare.index(1, 128)
    assert list(ldos_members(bare, n, 0)) == [n]
    members = ldos_members(bare, n, 4)
    assert n in members
    assert 4 <= members.size <= 24


def test_selection_rules():
    assert selection_rule_allows((1, 1, 2, 2), real=False)
    assert selection_rule_allows((1, 2, 2, 1), real=False)
    assert not selection_rule_allows((1, 2, 1, 2), real=False)
    assert selection_rule_allows((1, 2, 1, 2), real=True)
    assert not selection_rule_allows((0, 1, 2, 3), real=True)


def test_fourth_moments_warn_with_few_runs():
    bare = fig1_model(8)
    runs = [dressed_system(bare, InteractionSpec("goe", 0.5, s)) for s in range(3)]
    with pytest.warns(UserWarning):
        rep = fourth_moment_checks(runs, sample_index_tuples(bare.n, 4))
    assert rep.n_runs == 3


def test_csv_writers(tmp_path):
    bare = fig1_model(32)
    runs = [dressed_system(bare, InteractionSpec("goe", 0.3, 0))]
    write_ldos_csv(tmp_path / "l.csv", ldos(runs, 40))
    write_transition_row_csv(tmp_path / "t.csv", transition_matrix(runs).row(40))
    rows = (tmp_path / "l.csv").read_text().splitlines()
    assert rows[0] == "lambda,weight" and len(rows) > 40
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0] == "n,p_bar" and len(rows) == 65


def test_goe_dressed_spectrum_is_nondegenerate():
    bare = fig1_model(512)
    ds = dressed_system(bare, InteractionSpec("goe", 0.5, 0))
    assert ds.min_gap() > 0
    # level repulsion: no gap far below the mean spacing
    assert ds.min_gap() > 1e-4 * (ds.lambdas[-1] - ds.lambdas[0]) / bare.n


def test_transition_spread_shrinks_with_environment():
    spreads = []
    for dim_e in (256, 1024):
        bare = fig1_model(dim_e)
        m = bare.index(1, dim_e // 2)
        eps = bare.bare_energies
        # final states at fixed energy offsets from eps_m, same system level
        targets = [bare.index(1, int(np.argmin(np.abs(bare.env.levels - (eps[m] - 1 + d))))) for d in (0.02, 0.05, 0.1)]
        rows = []
        for seed in range(8):
            ds = dressed_system(bare, InteractionSpec("goe", 0.5, seed))
            rows.append(transition_rows([ds], [m]).row(m)[targets])
        spreads.append(np.std(rows, axis=0, ddof=1))
    assert np.all(spreads[1] < spreads[0])
