"""Analytic predictions for the stationary occupations of the embedded system.

The central object is the pair kernel ``g = f * f`` (self-convolution of the
LDOS shape f). Occupation of system level s after starting in bare state m is

    p_s = int rho_e(e) g(eps_m - eps_s - e) de / int rho_tot(e) g(eps_m - e) de

whose denominator acts as the partition function. For g -> delta this becomes
the local microcanonical ratio rho_e(eps_m - eps_s) / rho_tot(eps_m), and for
exponential rho_e it reduces further to Boltzmann weights.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameterError, OutOfSupportError
from .model import BareModel, DosEstimate, SystemSpectrum

__all__ = [
    "ShapeFunction",
    "TransitionKernelAnalytic",
    "EquilibriumPrediction",
    "self_convolve",
    "kernel_from_width",
    "predict_transition",
    "predict_transition_row",
    "central_window_agreement",
    "predict_equilibrium",
    "predict_equilibrium_mixed",
    "predict_local_microcanonical",
    "predict_canonical",
    "local_temperature",
    "thermal_scale",
    "regime_label",
    "voigt_profile",
    "integrate_against",
    "write_prediction_csv",
    "write_prediction_json",
]

SHAPES = ("lorentzian", "gaussian")


@dataclass(frozen=True)
class ShapeFunction:
    """Unit-mass peak: Lorentzian with HWHM ``width`` or Gaussian with std ``width``."""

    kind: str
    width: float

    def __post_init__(self):
        object.__setattr__(self, "kind", self.kind.lower())
        if self.kind not in SHAPES:
            raise InvalidParameterError(f"shape kind must be one of {SHAPES}")
        if not self.width > 0:
            raise InvalidParameterError(f"shape width must be positive, got {self.width}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = self.width
        if self.kind == "lorentzian":
            return (w / np.pi) / (x * x + w * w)
        return np.exp(-0.5 * (x / w) ** 2) / (np.sqrt(2.0 * np.pi) * w)


@dataclass(frozen=True)
class TransitionKernelAnalytic:
    g: ShapeFunction
    gamma_prime: float
    f: ShapeFunction | None = None

    def __call__(self, x):
        return self.g(x)


def self_convolve(f: ShapeFunction) -> TransitionKernelAnalytic:
    """Closed-form ``f * f``: Lorentzian widths add, Gaussian ones add in quadrature."""
    if f.kind == "lorentzian":
        gp = 2.0 * f.width
    else:
        gp = np.sqrt(2.0) * f.width
    return TransitionKernelAnalytic(ShapeFunction(f.kind, gp), gp, f)


def kernel_from_width(gamma: float, kind: str = "lorentzian") -> TransitionKernelAnalytic:
    """Pair kernel for an LDOS of the given shape and width."""
    return self_convolve(ShapeFunction(kind, gamma))


def _graded_grid(center, fine, coarse, lo, hi, ratio=1.0 / 40.0):
    """Uniform ``coarse`` grid on [lo, hi] refined geometrically down to ``fine`` at ``center``."""
    base = np.linspace(lo, hi, max(2, int(np.ceil((hi - lo) / coarse)) + 1))
    if fine >= coarse:
        return base
    offs = [0.0]
    u = 0.0
    while True:
        step = max(fine, u * ratio)
        if step >= coarse:
            break
        u += step
        offs.append(u)
    offs = np.asarray(offs)
    pts = np.concatenate([center - offs[::-1], center + offs[1:]])
    pts = pts[(pts >= lo) & (pts <= hi)]
    return np.union1d(base, pts)


def integrate_against(dos: DosEstimate, g: Callable, x: float, fine: float) -> float:
    """Trapezoid estimate of ``int rho(e) g(x - e) de`` over the DOS grid.

    The grid is refined around ``e = x`` down to step ``fine`` so narrow
    kernels and their tails are resolved; rho is linearly interpolated.
    """
    grid = dos.grid
    lo, hi = float(grid[0]), float(grid[-1])
    coarse = float(np.min(np.diff(grid))) if grid.size > 1 else hi - lo
    pts = _graded_grid(x, fine, coarse, lo, hi)
    return float(np.trapezoid(dos(pts) * g(x - pts), pts))


@dataclass(frozen=True)
class EquilibriumPrediction:
    levels: np.ndarray
    p: np.ndarray
    partition_value: float
    defect: float  # sum of p before renormalisation, minus 1
    regime_label: str
    gamma_prime: float

    def as_dict(self) -> dict:
        return {float(e): float(q) for e, q in zip(self.levels, self.p)}

    def summary(self) -> dict:
        return {
            "partition_value": self.partition_value,
            "defect": self.defect,
            "regime_label": self.regime_label,
            "gamma_prime": self.gamma_prime,
            "levels": [float(x) for x in self.levels],
            "p": [float(x) for x in self.p],
        }


def _quad_step(g: TransitionKernelAnalytic) -> float:
    return g.gamma_prime / 20.0


def predict_transition(
    bare: BareModel,
    g: TransitionKernelAnalytic,
    m: int,
    n: int,
    dos: DosEstimate,
) -> float:
    """Continuous-limit average transition probability from bare state m to n."""
    eps = bare.bare_energies
    bare.split(m)
    bare.split(n)
    em = float(eps[m])
    rho = float(dos(em))
    if rho > 0 and g.gamma_prime < 3.0 / rho:
        warnings.warn(
            f"Gamma'={g.gamma_prime:.3g} is below 3 level spacings ({3 / rho:.3g}); "
            "the continuous approximation is unreliable",
            stacklevel=2,
        )
    z = integrate_against(dos, g, em, _quad_step(g))
    return float(g(em - eps[n]) / z)


def thermal_scale(dos_env, at: float) -> float:
    """Energy scale on which ln rho_e varies: 1 / max(|beta|, sqrt(|d^2 ln rho_e|)).

    At an extremum of rho_e beta vanishes and the curvature sets the scale
    (for a Gaussian DOS this is its standard deviation).
    """
    h = dos_env.bandwidth if dos_env.bandwidth > 0 else float(np.min(np.diff(dos_env.grid)))
    h = max(h, 1e-3 * (dos_env.grid[-1] - dos_env.grid[0]))
    vals = dos_env(np.array([at - h, at, at + h]))
    if np.any(vals <= 0):
        return np.inf
    lv = np.log(vals)
    beta = (lv[2] - lv[0]) / (2 * h)
    curv = (lv[2] - 2 * lv[1] + lv[0]) / (h * h)
    rate = max(abs(beta), np.sqrt(abs(curv)))
    return np.inf if rate == 0 else 1.0 / rate


def regime_label(gamma_prime: float, kt: float) -> str:
    if gamma_prime < kt / 5.0:
        return "local-microcanonical"
    if gamma_prime > kt:
        return "global"
    return "crossover"


def predict_equilibrium(
    bare: BareModel,
    g: TransitionKernelAnalytic,
    m: int,
    dos_env: DosEstimate,
    dos_total: DosEstimate,
) -> EquilibriumPrediction:
    """Stationary occupations of every system level, starting from bare state m."""
    s_m, _ = bare.split(m)
    em = float(bare.bare_energies[m])
    step = _quad_step(g)
    levels = bare.sys.levels
    num = np.array([integrate_against(dos_env, g, em - es, step) for es in levels])
    z = integrate_against(dos_total, g, em, step)
    if z <= 0:
        raise OutOfSupportError(f"partition integral vanishes at energy {em}")
    p = num / z
    total = float(p.sum())
    kt = thermal_scale(dos_env, em - levels[s_m])
    return EquilibriumPrediction(
        levels=levels.copy(),
        p=p / total,
        partition_value=z,
        defect=total - 1.0,
        regime_label=regime_label(g.gamma_prime, kt),
        gamma_prime=g.gamma_prime,
    )


def predict_equilibrium_mixed(
    bare: BareModel,
    g: TransitionKernelAnalytic,
    weights: Mapping[int, float],
    dos_env: DosEstimate,
    dos_total: DosEstimate,
) -> np.ndarray:
    """Weighted average of :func:`predict_equilibrium` over initial bare states."""
    out = np.zeros(bare.dim_s)
    for m, w in sorted(weights.items()):
        if w:
            out += w * predict_equilibrium(bare, g, m, dos_env, dos_total).p
    return out


def _support_ok(dos, e) -> bool:
    if isinstance(dos, DosEstimate):
        if e < dos.grid[0] or e > dos.grid[-1]:
            return False
    return float(dos(e)) > 0


def predict_local_microcanonical(
    bare: BareModel,
    m: int,
    dos_env,
    dos_total,
) -> EquilibriumPrediction:
    """Delta-kernel limit: p_s proportional to rho_e(eps_m - eps_s).

    ``dos_env`` and ``dos_total`` may be :class:`DosEstimate` objects or any
    callable density.
    """
    bare.split(m)
    em = float(bare.bare_energies[m])
    levels = bare.sys.levels
    targets = em - levels
    ok = [_support_ok(dos_env, e) for e in targets]
    if not any(ok):
        raise OutOfSupportError("eps_m - eps_s lies outside the environment DOS for every level")
    num = np.array([float(dos_env(e)) if k else 0.0 for e, k in zip(targets, ok)])
    z = float(dos_total(em))
    if z <= 0:
        raise OutOfSupportError(f"total DOS vanishes at {em}")
    p = num / z
    total = float(p.sum())
    return EquilibriumPrediction(levels.copy(), p / total, z, total - 1.0, "local-microcanonical", 0.0)


def predict_canonical(sys: SystemSpectrum, beta: float) -> EquilibriumPrediction:
    """Boltzmann weights exp(-beta eps_s)/Z (k_B = 1)."""
    if not np.isfinite(beta):
        raise InvalidParameterError("beta must be finite")
    expo = -beta * sys.levels
    shift = expo.max()
    w = np.exp(expo - shift)
    z = w.sum()
    with np.errstate(over="ignore"):
        zfull = float(z * np.exp(shift))
    return EquilibriumPrediction(sys.levels.copy(), w / z, zfull, 0.0, "canonical", 0.0)


def local_temperature(dos_env: DosEstimate, at: float, step: float | None = None) -> float:
    """Inverse temperature d ln rho_e / d eps by central difference."""
    h = step if step is not None else dos_env.bandwidth
    if not h or h <= 0:
        h = float(np.min(np.diff(dos_env.grid)))
    vals = dos_env(np.array([at - h, at + h]))
    if np.any(vals <= 0):
        raise OutOfSupportError(f"environment DOS vanishes near {at}")
    return float((np.log(vals[1]) - np.log(vals[0])) / (2 * h))


def _gauss(x, s):
    return np.exp(-0.5 * (x / s) ** 2) / (np.sqrt(2.0 * np.pi) * s)


def _lor(x, g):
    return (g / np.pi) / (x * x + g * g)


def _voigt_scalar(sigma, gamma, x, refine):
    # integrate over the Gaussian variable y: V(x) = int G(y) L(x - y) dy
    lo, hi = -8.0 * sigma, 8.0 * sigma
    coarse = sigma / (20.0 * refine)
    fine = min(sigma, gamma) / (20.0 * refine)
    y = _graded_grid(x, fine, coarse, lo, hi, ratio=1.0 / (100.0 * refine))
    return float(np.trapezoid(_gauss(y, sigma) * _lor(x - y, gamma), y))


def voigt_profile(sigma: float, gamma: float, x, refine: float = 1.0):
    """Convolution of a unit Gaussian (std ``sigma``) and a unit Lorentzian (HWHM ``gamma``).

    Computed by trapezoid quadrature on a grid that is uniform with step
    sigma/20 across the Gaussian and graded geometrically (each step at most
    1/100 of the distance) down to min(sigma, gamma)/20 around the Lorentzian
    peak. ``refine`` divides every step (used to check
    convergence).
    """
    if sigma < 0 or gamma < 0:
        raise InvalidParameterError("Voigt widths must be non-negative")
    if sigma == 0 and gamma == 0:
        raise InvalidParameterError("Voigt profile needs sigma > 0 or gamma > 0")
    xs = np.asarray(x, dtype=float)
    if gamma == 0:
        return _gauss(xs, sigma) if xs.ndim else float(_gauss(xs, sigma))
    if sigma == 0:
        return _lor(xs, gamma) if xs.ndim else float(_lor(xs, gamma))
    if xs.ndim == 0:
        return _voigt_scalar(sigma, gamma, float(xs), refine)
    return np.array([_voigt_scalar(sigma, gamma, float(v), refine) for v in xs.ravel()]).reshape(xs.shape)


def predict_transition_row(
    bare: BareModel,
    g: TransitionKernelAnalytic,
    m: int,
    dos: DosEstimate,
) -> np.ndarray:
    """:func:`predict_transition` for every final state n at once."""
    eps = bare.bare_energies
    bare.split(m)
    em = float(eps[m])
    z = integrate_against(dos, g, em, _quad_step(g))
    return g(em - eps) / z


def central_window_agreement(
    energies: Sequence[float],
    row: Sequence[float],
    predicted: Sequence[float],
    m: int,
    gamma_prime: float,
    n_bins: int = 12,
) -> dict:
    """Bin-averaged relative error of a transition row on |eps_n - eps_m| <= 1.5 Gamma'.

    The return term n = m is excluded: its fourth moment carries the
    ensemble's diagonal enhancement, which the continuous form ignores.
    """
    eps = np.asarray(energies, dtype=float)
    row = np.asarray(row, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    x = eps - eps[m]
    edges = np.linspace(-1.5 * gamma_prime, 1.5 * gamma_prime, n_bins + 1)
    keep = np.arange(eps.size) != m
    centers, rel = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = keep & (x >= a) & (x < b)
        if not np.any(sel):
            continue
        centers.append(0.5 * (a + b))
        rel.append(row[sel].mean() / pred[sel].mean() - 1.0)
    rel = np.asarray(rel)
    return {
        "bin_centers": [float(c) for c in centers],
        "relative_errors": [float(r) for r in rel],
        "max_abs_relative_error": float(np.max(np.abs(rel))) if rel.size else float("nan"),
        "mean_abs_relative_error": float(np.mean(np.abs(rel))) if rel.size else float("nan"),
    }


def write_prediction_csv(path, pred: EquilibriumPrediction) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps_s", "p"])
        for e, q in zip(pred.levels, pred.p):
            w.writerow([f"{e:.17g}", f"{q:.17g}"])


def write_prediction_json(path, pred: EquilibriumPrediction) -> None:
    with open(path, "w") as fh:
        json.dump(pred.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
