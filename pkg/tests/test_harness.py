import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from scipy.special import voigt_profile as scipy_voigt

from embedq.errors import ConfigError, NumericalFailureError
from embedq.harness import config as cfgmod
from embedq.harness import experiments
from embedq.harness.cli import main
from embedq.model import DosEstimate
from embedq.theory import kernel_from_width, predict_equilibrium_mixed

SMALL = {
    "model": {"environment": {"dim": 48}},
    "interaction": {"sigma_w": 0.5},
    "sweep": {"sigma_w": [0.2, 0.6, 2.0], "seeds": [0, 1, 2], "dims": [16, 32]},
    "dynamics": {"t_max": 40.0, "n_times": 41, "window": [20.0, 40.0]},
    "ldos": {"bundle_half_width": 3},
}


def write_config(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def merged(**over):
    out = json.loads(json.dumps(SMALL))
    for section, values in over.items():
        out.setdefault(section, {}).update(values)
    return out


def run_cli(tmp_path, command, cfg, name="out", extra=()):
    out = tmp_path / name
    code = main([command, "--config", write_config(tmp_path / f"{name}.json", cfg), "--out", str(out), *extra])
    return code, out


def test_defaults_validate():
    cfg = cfgmod.resolve({})
    assert cfg["model"]["environment"]["dim"] == 1024
    assert cfgmod.resolve({}, paper_scale=True)["model"]["environment"]["dim"] == 4096
    grid = cfgmod.sigma_grid(cfg)
    assert len(grid) == 9 and grid[0] == pytest.approx(0.2) and grid[-1] == pytest.approx(4.0)


@pytest.mark.parametrize(
    "raw,path",
    [
        ({"interaction": {"sigma_w": -1}}, "$.interaction.sigma_w"),
        ({"model": {"environment": {"dim": "big"}}}, "$.model.environment.dim"),
        ({"bogus": 1}, "$"),
        ({"dynamics": {"window": [50, 10]}}, "$.dynamics.window"),
        ({"model": {"initial": {"system_index": 5}}}, "$.model.initial.system_index"),
    ],
)
def test_config_errors_name_the_path(raw, path):
    with pytest.raises(ConfigError) as info:
        cfgmod.resolve(raw)
    assert info.value.path == path
    assert str(info.value).startswith(path)


def test_cli_config_error_exit_code(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "dynamics", {"interaction": {"kind": "poisson"}})
    assert code == 2
    assert "$.interaction.kind" in capsys.readouterr().err
    assert main(["dynamics", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x")]) == 2


def test_config_hash_is_order_independent():
    a = cfgmod.resolve({"interaction": {"sigma_w": 0.3, "kind": "goe"}})
    b = cfgmod.resolve({"interaction": {"kind": "goe", "sigma_w": 0.3}})
    assert cfgmod.config_hash(a) == cfgmod.config_hash(b)
    c = cfgmod.resolve({"interaction": {"kind": "goe", "sigma_w": 0.31}})
    assert cfgmod.config_hash(a) != cfgmod.config_hash(c)


def test_dynamics_outputs_and_manifest(tmp_path):
    code, out = run_cli(tmp_path, "dynamics", SMALL)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    listed = set(manifest["outputs"])
    on_disk = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert listed == on_disk
    assert {"trajectory_seed0.csv", "trajectory_mean.csv", "plateau.json", "dynamics.svg"} <= listed
    rows = read_csv(out / "trajectory_mean.csv")
    assert list(rows[0]) == ["t", "p_0", "p_1", "coh_01"]
    assert float(rows[0]["p_1"]) == pytest.approx(1.0)
    ET.parse(out / "dynamics.svg")


def test_outputs_are_reproducible(tmp_path):
    _, a = run_cli(tmp_path, "crossover", SMALL, "a")
    _, b = run_cli(tmp_path, "crossover", SMALL, "b", extra=("--threads", "3"))
    for name in ("crossover.csv", "crossover_seeds.csv", "dos_env.csv", "dos_total.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_zero_coupling_trajectory_is_flat(tmp_path):
    code, out = run_cli(tmp_path, "dynamics", merged(interaction={"sigma_w": 0.0}))
    assert code == 0
    for row in read_csv(out / "trajectory_seed0.csv"):
        assert float(row["p_1"]) == pytest.approx(1.0, abs=1e-12)


def test_zero_coupling_crossover(tmp_path):
    code, out = run_cli(tmp_path, "crossover", merged(sweep={"sigma_w": [0.0]}))
    assert code == 0
    (row,) = read_csv(out / "crossover.csv")
    assert float(row["p_plateau_mean"]) == pytest.approx(1.0, abs=1e-12)
    assert row["ldos_shape"] == "degenerate"


def test_crossover_rejects_short_grid(tmp_path):
    code, _ = run_cli(tmp_path, "crossover", merged(sweep={"sigma_w": [0.1, 0.2]}))
    assert code == 2


def test_crossover_predictions_recomputable(tmp_path):
    code, out = run_cli(tmp_path, "crossover", SMALL)
    assert code == 0
    cfg = json.loads((out / "config.json").read_text())
    summary = json.loads((out / "crossover_summary.json").read_text())
    bare = cfgmod.build_bare(cfg)
    weights = {int(k): v for k, v in summary["initial_weights"].items()}
    env_rows = read_csv(out / "dos_env.csv")
    tot_rows = read_csv(out / "dos_total.csv")
    env = DosEstimate(np.array([float(r["energy"]) for r in env_rows]),
                      np.array([float(r["density"]) for r in env_rows]), summary["dos_bandwidth"]["env"])
    tot = DosEstimate(np.array([float(r["energy"]) for r in tot_rows]),
                      np.array([float(r["density"]) for r in tot_rows]), summary["dos_bandwidth"]["total"])
    (m,) = weights
    for row in read_csv(out / "crossover.csv"):
        gp = float(row["gamma_prime"])
        assert gp > 0
        p = predict_equilibrium_mixed(bare, kernel_from_width(gp / 2), weights, env, tot)
        assert p[1] == pytest.approx(float(row["p_kernel"]), abs=1e-12)
        # Voigt column against an independent Faddeeva evaluation
        x = bare.bare_energies[m] - bare.sys.levels
        v = scipy_voigt(x, 1.0, gp)
        assert v[1] / v.sum() == pytest.approx(float(row["p_voigt"]), abs=1e-4)
    svg_labels = [t.text for t in ET.parse(out / "crossover.svg").iter("{http://www.w3.org/2000/svg}text")]
    assert "Voigt prediction (fit)" in svg_labels


def test_partial_failure_is_recorded(tmp_path, monkeypatch):
    real = experiments.dressed_system

    def flaky(bare, spec, cache_dir=None):
        if spec.seed == 1:
            raise NumericalFailureError("injected", spec=spec)
        return real(bare, spec, cache_dir)

    monkeypatch.setattr(experiments, "dressed_system", flaky)
    code, out = run_cli(tmp_path, "crossover", SMALL)
    assert code == 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "partial-failure"
    assert len(manifest["failed"]) == 3
    assert all(f["cell"][1] == 1 for f in manifest["failed"])
    assert all(r["n_ok"] == "2" for r in read_csv(out / "crossover.csv"))


def test_total_failure_exit_code(tmp_path, monkeypatch):
    def broken(bare, spec, cache_dir=None):
        raise NumericalFailureError("injected", spec=spec)

    monkeypatch.setattr(experiments, "dressed_system", broken)
    code, out = run_cli(tmp_path, "dynamics", SMALL)
    assert code == 3
    assert json.loads((out / "manifest.json").read_text())["status"] == "all-failed"


def test_ldos_command(tmp_path):
    code, out = run_cli(tmp_path, "ldos", merged(interaction={"sigma_w": 0.0}))
    assert code == 0
    fits = json.loads((out / "ldos_fit.json").read_text())["fits"]
    (fit,) = fits.values()
    assert fit["degenerate"] is True
    code, out = run_cli(tmp_path, "ldos", merged(ldos={"bare_indices": [60, 70]}), "b")
    assert code == 0
    table = read_csv(out / "gamma_table.csv")
    assert [r["n"] for r in table] == ["60", "70"]
    assert all(float(r["residual"]) >= 0 for r in table)
    ET.parse(out / "ldos_n60.svg")


def test_typicality_requires_seeds_and_dims(tmp_path):
    assert run_cli(tmp_path, "typicality", SMALL, "a")[0] == 2
    assert run_cli(tmp_path, "typicality", merged(sweep={"seeds": list(range(8)), "dims": [16]}), "b")[0] == 2


def test_typicality_zero_coupling_has_no_spread(tmp_path):
    cfg = merged(interaction={"sigma_w": 0.0}, sweep={"seeds": list(range(8))})
    code, out = run_cli(tmp_path, "typicality", cfg)
    assert code == 0
    for row in read_csv(out / "typicality.csv"):
        assert float(row["p_plateau_std"]) == 0.0


def test_transitions_command(tmp_path):
    code, out = run_cli(tmp_path, "transitions", merged(interaction={"sigma_w": 0.0}))
    assert code == 0
    rows = read_csv(out / "transitions.csv")
    m = int(rows[0]["m"])
    for r in rows:
        assert float(r["p_bar"]) == (1.0 if int(r["n"]) == m else 0.0)
    code, out = run_cli(tmp_path, "transitions", SMALL, "b")
    assert code == 0
    for r in read_csv(out / "row_sums.csv"):
        assert float(r["row_sum"]) == pytest.approx(1.0, abs=1e-9)


def test_transitions_cap(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "transitions", merged(transitions={"cap": 64}))
    assert code == 2
    assert "cap" in capsys.readouterr().err


def test_csv_only_output(tmp_path):
    code, out = run_cli(tmp_path, "dynamics", merged(output={"formats": ["csv"]}))
    assert code == 0
    assert not list(out.glob("*.svg"))
