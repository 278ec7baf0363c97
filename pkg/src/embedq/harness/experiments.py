"""Experiment recipes behind the CLI subcommands.

Each recipe fans (sigma_w, seed) or (dim, seed) cells out to a thread pool,
then aggregates in fixed cell order so outputs do not depend on scheduling.
A failing cell is recorded in the manifest; it never aborts the sweep.
"""

from __future__ import annotations

import csv
import json
import logging
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..dynamics import InitialState, diagonal_ensemble, evolve_mixed, long_time_average, write_trajectory_csv
from ..errors import ConfigError, DegeneracyError, EmbedqError
from ..model import GaussianDos, dos_model_from_dict, estimate_dos
from ..spectral import (
    LdosSample,
    dressed_system,
    ldos_from_samples,
    ldos_members,
    ldos_sample,
    transition_rows,
)
from ..theory import (
    central_window_agreement,
    kernel_from_width,
    predict_equilibrium_mixed,
    predict_local_microcanonical,
    predict_transition_row,
    voigt_profile,
)
from . import config as cfgmod
from . import svg

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_ALL_FAILED, EXIT_PARTIAL = 0, 2, 3, 4


def _f(x) -> str:
    return f"{float(x):.17g}"


class Run:
    """Output directory bookkeeping: emitted files, stage timings, failures."""

    def __init__(self, command: str, cfg: dict, out_dir, threads: int = 1):
        self.command = command
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.threads = max(1, int(threads))
        self.files: list[str] = []
        self.stages: dict[str, float] = {}
        self.seeds: dict = {}
        self.failed: list[dict] = []
        self.n_cells = 0
        self.formats = set(cfg["output"]["formats"])
        self.write_json("config.json", cfg)

    def path(self, name: str) -> Path:
        if name not in self.files:
            self.files.append(name)
        return self.out / name

    def write_csv(self, name: str, header, rows) -> None:
        if "csv" not in self.formats:
            return
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_f(v) if isinstance(v, (float, np.floating)) else v for v in r])

    def write_json(self, name: str, obj) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")

    def write_svg(self, name: str, content: str) -> None:
        if "svg" in self.formats:
            svg.write(self.path(name), content)

    def stage(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.stages[name] = run.stages.get(name, 0.0) + time.perf_counter() - self.t0

        return _Timer()

    def map(self, fn, cells):
        """Evaluate ``fn(cell)`` for every cell; failures come back as ``_Failed``."""
        self.n_cells += len(cells)

        def safe(cell):
            try:
                return fn(cell)
            except EmbedqError as exc:
                return _Failed(cell, f"{type(exc).__name__}: {exc}")
            except (np.linalg.LinAlgError, FloatingPointError, MemoryError) as exc:
                return _Failed(cell, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")

        if self.threads == 1:
            results = [safe(c) for c in cells]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(safe, cells))
        for r in results:
            if isinstance(r, _Failed):
                log.warning("cell %s failed: %s", r.cell, r.error)
                self.failed.append({"cell": list(r.cell), "error": r.error})
        return results

    def finish(self) -> int:
        if not self.failed:
            status, code = "ok", EXIT_OK
        elif len(self.failed) >= self.n_cells:
            status, code = "all-failed", EXIT_ALL_FAILED
        else:
            status, code = "partial-failure", EXIT_PARTIAL
        manifest = {
            "command": self.command,
            "config_hash": cfgmod.config_hash(self.cfg),
            "code_version": __version__,
            "seeds": self.seeds,
            "stage_seconds": {k: round(v, 3) for k, v in sorted(self.stages.items())},
            "threads": self.threads,
            "outputs": sorted(self.files),
            "failed": self.failed,
            "status": status,
        }
        with open(self.out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return code


@dataclass
class _Failed:
    cell: tuple
    error: str


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


@dataclass
class CellResult:
    plateau: np.ndarray  # window-averaged populations
    temporal_std: np.ndarray
    diagonal: np.ndarray  # diagonal-ensemble populations (nan if degenerate)
    trajectory: object = None
    ldos: object = None


def _plateau_cell(bare, spec, weights, times, window, *, keep_traj=False, members=None):
    ds = dressed_system(bare, spec)
    init = InitialState(weights)
    traj = evolve_mixed(ds, init, times)
    mean_state, report = long_time_average(traj, window)
    try:
        diag = diagonal_ensemble(ds, init).populations
    except DegeneracyError:
        diag = np.full(bare.dim_s, np.nan)
    return CellResult(
        plateau=mean_state.populations,
        temporal_std=report.stds,
        diagonal=diag,
        trajectory=traj if keep_traj else None,
        ldos=ldos_sample(ds, members) if members is not None else None,
    )


def _ok(results):
    return [r for r in results if not isinstance(r, _Failed)]


def _main_index(weights: dict) -> int:
    return max(sorted(weights), key=lambda k: weights[k])


def _gaussian_env(cfg):
    dos = dos_model_from_dict(cfg["model"]["environment"]["dos"])
    return dos if isinstance(dos, GaussianDos) else None


def voigt_prediction(bare, weights: dict, env_dos: GaussianDos, gamma_prime: float) -> np.ndarray:
    """Occupations for a Gaussian environment DOS and Lorentzian pair kernel.

    The numerator integral is then a Voigt profile evaluated at
    ``eps_m - eps_s - center``; Gamma' = 0 degenerates to the Gaussian itself.
    """
    out = np.zeros(bare.dim_s)
    for m, w in sorted(weights.items()):
        em = bare.bare_energies[m]
        x = em - bare.sys.levels - env_dos.center
        num = np.asarray(voigt_profile(env_dos.sigma, gamma_prime, x), dtype=float)
        out += w * num / num.sum()
    return out


def local_micro_prediction(bare, weights, dos_env, dos_total) -> np.ndarray:
    out = np.zeros(bare.dim_s)
    for m, w in sorted(weights.items()):
        out += w * predict_local_microcanonical(bare, m, dos_env, dos_total).p
    return out


# ---------------------------------------------------------------- dynamics


def cmd_dynamics(cfg: dict, out_dir, threads: int = 1) -> int:
    run = Run("dynamics", cfg, out_dir, threads)
    bare = cfgmod.build_bare(cfg)
    weights = cfgmod.initial_weights(cfg, bare)
    times = cfgmod.time_grid(cfg)
    window = tuple(cfg["dynamics"]["window"])
    sigma_w = cfg["interaction"]["sigma_w"]
    seeds = cfg["sweep"]["seeds"]
    obs = cfg["model"]["observed_level"]
    run.seeds = {"sigma_w": sigma_w, "seeds": seeds}

    with run.stage("simulate"):
        cells = [(sigma_w, s) for s in seeds]
        results = run.map(
            lambda c: _plateau_cell(bare, cfgmod.interaction_spec(cfg, *c), weights, times, window, keep_traj=True),
            cells,
        )
    with run.stage("write"):
        ok = []
        per_seed = {}
        for (_, seed), r in zip(cells, results):
            if isinstance(r, _Failed):
                continue
            ok.append((seed, r))
            if "csv" in run.formats:
                write_trajectory_csv(run.path(f"trajectory_seed{seed}.csv"), r.trajectory)
            per_seed[str(seed)] = {
                "plateau": r.plateau,
                "temporal_std": r.temporal_std,
                "diagonal_ensemble": r.diagonal,
            }
        if ok:
            pops = np.mean([r.trajectory.populations for _, r in ok], axis=0)
            cohs = np.mean([r.trajectory.coherences for _, r in ok], axis=0)
            labels = ok[0][1].trajectory.coherence_labels()
            header = ["t"] + [f"p_{k}" for k in range(bare.dim_s)] + labels
            run.write_csv(
                "trajectory_mean.csv",
                header,
                ([t, *p, *c] for t, p, c in zip(times, pops, cohs)),
            )
            plateau = np.mean([r.plateau for _, r in ok], axis=0)
            series = [
                svg.Series(f"seed {seed}", times, r.trajectory.populations[:, obs], color="#9ecae1",
                           width=0.8, in_legend=(k == 0))
                for k, (seed, r) in enumerate(ok)
            ]
            series.append(svg.Series("seed mean", times, pops[:, obs], color="#08306b", width=2.0))
            series.append(svg.Series("window", [window[0], window[0]], [0, 1], style="dashed", color="#7f7f7f"))
            run.write_svg(
                "dynamics.svg",
                svg.line_chart(series, f"P{obs}(t), sigma_w={sigma_w:g}", "t", f"P{obs}", ylim=(0.0, 1.0)),
            )
            run.write_json(
                "plateau.json",
                {"window": list(window), "seed_mean_plateau": plateau, "per_seed": per_seed},
            )
    return run.finish()


# ---------------------------------------------------------------- crossover


def cmd_crossover(cfg: dict, out_dir, threads: int = 1) -> int:
    grid = cfgmod.sigma_grid(cfg)
    if len(grid) < 3 and not (len(grid) == 1 and grid[0] == 0):
        raise ConfigError("crossover needs a sigma_w grid with at least 3 points", "$.sweep.sigma_w")
    run = Run("crossover", cfg, out_dir, threads)
    bare = cfgmod.build_bare(cfg)
    weights = cfgmod.initial_weights(cfg, bare)
    m = _main_index(weights)
    times = cfgmod.time_grid(cfg)
    window = tuple(cfg["dynamics"]["window"])
    seeds = cfg["sweep"]["seeds"]
    obs = cfg["model"]["observed_level"]
    members = ldos_members(bare, m, cfg["ldos"]["bundle_half_width"])
    run.seeds = {"sigma_w": grid, "seeds": seeds}

    with run.stage("simulate"):
        cells = [(s, seed) for s in grid for seed in seeds]
        results = run.map(
            lambda c: _plateau_cell(
                bare, cfgmod.interaction_spec(cfg, *c), weights, times, window, members=members
            ),
            cells,
        )

    with run.stage("predict"):
        dos_env = estimate_dos(bare.env.levels)
        dos_total = estimate_dos(bare.bare_energies)
        env_gauss = _gaussian_env(cfg)
        p_local = local_micro_prediction(bare, weights, dos_env, dos_total)
        p_global = np.full(bare.dim_s, 1.0 / bare.dim_s)
        rows, seed_rows = [], []
        for k, s in enumerate(grid):
            chunk = results[k * len(seeds):(k + 1) * len(seeds)]
            good = _ok(chunk)
            for seed, r in zip(seeds, chunk):
                if not isinstance(r, _Failed):
                    seed_rows.append([s, seed, r.plateau[obs], r.temporal_std[obs], r.diagonal[obs]])
            if not good:
                continue
            p1 = np.array([r.plateau[obs] for r in good])
            pd = np.array([r.diagonal[obs] for r in good])
            span = 0.5 * float(good[0].ldos.lambdas[-1] - good[0].ldos.lambdas[0])
            curve = ldos_from_samples(bare, m, [r.ldos for r in good], max_span=span)
            gamma_fit = curve.fit.lorentzian_gamma
            gp = 2.0 * gamma_fit
            gp_fgr = 2.0 * curve.gamma_fgr
            if gp > 0:
                p_kernel = predict_equilibrium_mixed(bare, kernel_from_width(gamma_fit), weights, dos_env, dos_total)
            else:
                p_kernel = p_local
            pv = voigt_prediction(bare, weights, env_gauss, gp)[obs] if env_gauss else np.nan
            pv_fgr = voigt_prediction(bare, weights, env_gauss, gp_fgr)[obs] if env_gauss else np.nan
            std = float(p1.std(ddof=1)) if p1.size > 1 else 0.0
            rows.append([
                s, len(good), float(p1.mean()), std, std / np.sqrt(p1.size), float(np.nanmean(pd)),
                curve.fit.kind, gamma_fit, curve.gamma_fgr, gp, float(p_kernel[obs]), pv, pv_fgr,
                float(p_local[obs]), float(p_global[obs]),
            ])

    with run.stage("write"):
        header = [
            "sigma_w", "n_ok", "p_plateau_mean", "p_plateau_std", "p_plateau_sem", "p_diagonal_mean",
            "ldos_shape", "gamma_fit", "gamma_fgr", "gamma_prime", "p_kernel", "p_voigt", "p_voigt_fgr",
            "p_local_micro", "p_global",
        ]
        run.write_csv("crossover.csv", header, rows)
        run.write_csv(
            "crossover_seeds.csv",
            ["sigma_w", "seed", "p_plateau", "temporal_std", "p_diagonal"],
            seed_rows,
        )
        run.write_csv("dos_env.csv", ["energy", "density"], zip(dos_env.grid, dos_env.values))
        run.write_csv("dos_total.csv", ["energy", "density"], zip(dos_total.grid, dos_total.values))
        run.write_json(
            "crossover_summary.json",
            {
                "observed_level": obs,
                "initial_weights": {str(k): v for k, v in weights.items()},
                "dos_bandwidth": {"env": dos_env.bandwidth, "total": dos_total.bandwidth},
                "p_local_micro": p_local,
                "p_global": p_global,
            },
        )
        if rows:
            arr = {h: np.array([r[i] for r in rows]) for i, h in enumerate(header)}
            xs = arr["sigma_w"]
            series = [
                svg.Series("simulation", xs, arr["p_plateau_mean"].astype(float), style="markers",
                           yerr=arr["p_plateau_std"].astype(float), color="#08306b"),
                svg.Series("Voigt prediction (fit)", xs, arr["p_voigt"].astype(float), style="dashed", color="#d62728"),
                svg.Series("quadrature prediction", xs, arr["p_kernel"].astype(float), color="#ff7f0e", width=1.0),
                svg.Series("local microcanonical", xs, arr["p_local_micro"].astype(float), style="dashed", color="#2ca02c"),
                svg.Series("global microcanonical", xs, arr["p_global"].astype(float), style="dashed", color="#7f7f7f"),
            ]
            logx = bool(np.all(xs > 0))
            run.write_svg(
                "crossover.svg",
                svg.line_chart(series, f"Long-time P{obs} vs interaction strength", "sigma_w", f"P{obs}", logx=logx),
            )
    return run.finish()


# ---------------------------------------------------------------- ldos


def cmd_ldos(cfg: dict, out_dir, threads: int = 1) -> int:
    run = Run("ldos", cfg, out_dir, threads)
    bare = cfgmod.build_bare(cfg)
    weights = cfgmod.initial_weights(cfg, bare)
    indices = cfg["ldos"]["bare_indices"] or [_main_index(weights)]
    for n in indices:
        if n >= bare.n:
            raise ConfigError(f"bare index {n} out of range", "$.ldos.bare_indices")
    sigma_w = cfg["interaction"]["sigma_w"]
    seeds = cfg["sweep"]["seeds"]
    bundle = cfg["ldos"]["bundle_half_width"]
    member_sets = {n: ldos_members(bare, n, bundle) for n in indices}
    union = np.unique(np.concatenate(list(member_sets.values())))
    run.seeds = {"sigma_w": sigma_w, "seeds": seeds}

    with run.stage("diagonalize"):
        cells = [(sigma_w, s) for s in seeds]
        results = run.map(lambda c: ldos_sample(dressed_system(bare, cfgmod.interaction_spec(cfg, *c)), union), cells)
    good = _ok(results)
    with run.stage("fit"):
        fits, table = {}, []
        for n in indices:
            if not good:
                break
            pos = np.searchsorted(union, member_sets[n])
            samples = [
                LdosSample(g.lambdas, g.member_weights[pos], member_sets[n], g.sigma_w) for g in good
            ]
            span = 0.5 * float(good[0].lambdas[-1] - good[0].lambdas[0])
            curve = ldos_from_samples(bare, n, samples, max_span=span)
            fit = curve.fit
            ratio = fit.gamma / curve.gamma_fgr if curve.gamma_fgr > 0 else float("nan")
            fits[str(n)] = {
                "energy": curve.center,
                "preferred_shape": fit.kind,
                "degenerate": fit.kind == "degenerate",
                "gamma": fit.gamma,
                "shift": fit.shift,
                "residual": fit.residual,
                "lorentzian": fit.lorentzian,
                "gaussian": fit.gaussian,
                "gamma_fgr": curve.gamma_fgr,
                "gamma_over_fgr": ratio,
                "rho_at": curve.rho_at,
                "bin_width": curve.bin_width,
                "n_curves": curve.n_curves,
            }
            table.append([n, curve.center, fit.kind, fit.gamma, fit.lorentzian_gamma,
                          curve.gamma_fgr, ratio, fit.residual])
            lam, w = curve.points
            run.write_csv(f"ldos_n{n}.csv", ["lambda", "weight"], zip(lam, w))
            x = curve.bin_centers
            series = [svg.Series("LDOS", x, curve.density, style="markers", color="#08306b")]
            if fit.lorentzian:
                a, x0, g, _ = fit.lorentzian
                series.append(svg.Series(f"Lorentzian G={g:.3g}", x, a * (g / np.pi) / ((x - x0) ** 2 + g * g),
                                         color="#d62728"))
            if fit.gaussian:
                a, x0, s, _ = fit.gaussian
                series.append(svg.Series(f"Gaussian s={s:.3g}", x,
                                         a * np.exp(-0.5 * ((x - x0) / s) ** 2) / (np.sqrt(2 * np.pi) * s),
                                         style="dashed", color="#2ca02c"))
            run.write_svg(
                f"ldos_n{n}.svg",
                svg.line_chart(series, f"LDOS of bare state {n}", "lambda - eps_n", "density"),
            )
    with run.stage("write"):
        run.write_json("ldos_fit.json", {"sigma_w": sigma_w, "fits": fits})
        run.write_csv(
            "gamma_table.csv",
            ["n", "energy", "shape", "gamma", "gamma_lorentzian", "gamma_fgr", "gamma_over_fgr", "residual"],
            table,
        )
    return run.finish()


# ---------------------------------------------------------------- typicality


MIN_TYPICALITY_SEEDS = 8


def cmd_typicality(cfg: dict, out_dir, threads: int = 1) -> int:
    dims = cfg["sweep"]["dims"]
    seeds = cfg["sweep"]["seeds"]
    if len(dims) < 2:
        raise ConfigError("typicality needs at least 2 dims", "$.sweep.dims")
    if len(seeds) < MIN_TYPICALITY_SEEDS:
        raise ConfigError(f"typicality needs at least {MIN_TYPICALITY_SEEDS} seeds", "$.sweep.seeds")
    run = Run("typicality", cfg, out_dir, threads)
    sigma_w = cfg["interaction"]["sigma_w"]
    obs = cfg["model"]["observed_level"]
    times = cfgmod.time_grid(cfg)
    window = tuple(cfg["dynamics"]["window"])
    run.seeds = {"sigma_w": sigma_w, "seeds": seeds, "dims": dims}

    models = {d: cfgmod.build_bare(cfg, dim_e=d) for d in dims}
    init = {d: cfgmod.initial_weights(cfg, models[d]) for d in dims}
    with run.stage("simulate"):
        cells = [(d, s) for d in dims for s in seeds]
        results = run.map(
            lambda c: _plateau_cell(
                models[c[0]], cfgmod.interaction_spec(cfg, sigma_w, c[1]), init[c[0]], times, window
            ),
            cells,
        )
    rows, seed_rows, stds = [], [], []
    for k, d in enumerate(dims):
        chunk = results[k * len(seeds):(k + 1) * len(seeds)]
        vals = np.array([r.plateau[obs] for r in chunk if not isinstance(r, _Failed)])
        for s, r in zip(seeds, chunk):
            if not isinstance(r, _Failed):
                seed_rows.append([d, s, r.plateau[obs], r.diagonal[obs]])
        std = float(vals.std(ddof=1)) if vals.size > 1 else float("nan")
        stds.append(std)
        rows.append([d, models[d].n, int(vals.size), float(vals.mean()) if vals.size else float("nan"), std])
    decreasing = bool(all(b < a for a, b in zip(stds, stds[1:])))
    with run.stage("write"):
        run.write_csv("typicality.csv", ["dim_e", "N", "n_ok", "p_plateau_mean", "p_plateau_std"], rows)
        run.write_csv("typicality_seeds.csv", ["dim_e", "seed", "p_plateau", "p_diagonal"], seed_rows)
        run.write_json(
            "typicality_summary.json",
            {"sigma_w": sigma_w, "dims": dims, "stds": stds, "strictly_decreasing": decreasing},
        )
    return run.finish()


# ---------------------------------------------------------------- transitions


def cmd_transitions(cfg: dict, out_dir, threads: int = 1) -> int:
    bare = cfgmod.build_bare(cfg)
    cap = cfg["transitions"]["cap"]
    if bare.n > cap:
        raise ConfigError(
            f"N = {bare.n} exceeds the transition-matrix cap {cap}; lower model.environment.dim "
            "or raise transitions.cap if memory allows",
            "$.transitions.cap",
        )
    run = Run("transitions", cfg, out_dir, threads)
    weights = cfgmod.initial_weights(cfg, bare)
    rows_sel = cfg["transitions"]["rows"] or [_main_index(weights)]
    for r in rows_sel:
        if r >= bare.n:
            raise ConfigError(f"row {r} out of range", "$.transitions.rows")
    sigma_w = cfg["interaction"]["sigma_w"]
    seeds = cfg["sweep"]["seeds"]
    run.seeds = {"sigma_w": sigma_w, "seeds": seeds}
    m0 = rows_sel[0]
    members = ldos_members(bare, m0, cfg["ldos"]["bundle_half_width"])

    def cell(c):
        ds = dressed_system(bare, cfgmod.interaction_spec(cfg, *c))
        return ldos_sample(ds, members), transition_rows([ds], rows_sel).entries

    with run.stage("diagonalize"):
        results = run.map(cell, [(sigma_w, s) for s in seeds])
    good = _ok(results)
    if not good:
        return run.finish()
    with run.stage("compare"):
        p_bar = np.mean([r[1] for r in good], axis=0)
        span = 0.5 * float(good[0][0].lambdas[-1] - good[0][0].lambdas[0])
        curve = ldos_from_samples(bare, m0, [r[0] for r in good], max_span=span)
        gamma = curve.fit.lorentzian_gamma
        dos_total = estimate_dos(bare.bare_energies)
        eps = bare.bare_energies
        heat, sums, summary = [], [], {}
        for k, m in enumerate(rows_sel):
            pred = predict_transition_row(bare, kernel_from_width(gamma), m, dos_total) if gamma > 0 else None
            for n in range(bare.n):
                heat.append([m, n, eps[n], p_bar[k, n], pred[n] if pred is not None else float("nan")])
            sums.append([m, float(p_bar[k].sum())])
            entry = {"row_sum": float(p_bar[k].sum()), "return_probability": float(p_bar[k, m])}
            if pred is not None:
                entry.update(central_window_agreement(eps, p_bar[k], pred, m, 2 * gamma))
            summary[str(m)] = entry
    with run.stage("write"):
        run.write_csv("transitions.csv", ["m", "n", "eps_n", "p_bar", "p_pred"], heat)
        run.write_csv("row_sums.csv", ["m", "row_sum"], sums)
        run.write_json(
            "transitions_summary.json",
            {
                "sigma_w": sigma_w,
                "n_realizations": len(good),
                "gamma_fit": gamma,
                "gamma_fgr": curve.gamma_fgr,
                "gamma_prime": 2 * gamma,
                "rows": summary,
            },
        )
        x = eps - eps[m0]
        order = np.argsort(x)
        series = [svg.Series("p_bar", x[order], p_bar[0][order], style="markers", color="#08306b")]
        if gamma > 0:
            pred0 = predict_transition_row(bare, kernel_from_width(gamma), m0, dos_total)
            series.append(svg.Series("continuous prediction", x[order], pred0[order], color="#d62728"))
        run.write_svg("transitions.svg", svg.line_chart(series, f"Transition row m={m0}", "eps_n - eps_m", "p_bar"))
    return run.finish()


COMMANDS = {
    "dynamics": cmd_dynamics,
    "crossover": cmd_crossover,
    "ldos": cmd_ldos,
    "typicality": cmd_typicality,
    "transitions": cmd_transitions,
}
