"""Bare spectra of the system and the environment, and density-of-states tools.

Energies are dimensionless (hbar = k_B = 1). The composite bare basis is
enumerated system-major, ``n = s * dim_e + e``, so that reshaping a state
vector to ``(dim_s, dim_e)`` exposes the tensor-product structure directly.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.stats import norm

from .errors import InvalidParameterError, OutOfSupportError

__all__ = [
    "GaussianDos",
    "ExplicitDos",
    "SystemSpectrum",
    "EnvironmentSpectrum",
    "BareModel",
    "DosEstimate",
    "build_environment_spectrum",
    "build_bare_model",
    "estimate_dos",
    "default_bandwidth",
    "mean_level_spacing",
    "write_spectrum_csv",
    "read_spectrum_csv",
]


def _as_levels(levels, name):
    arr = np.asarray(levels, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidParameterError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be finite")
    arr = np.sort(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GaussianDos:
    """Gaussian density of states with standard deviation ``sigma``."""

    sigma: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError(f"Gaussian DOS needs sigma > 0, got {self.sigma}")

    def density(self, energy, dim: int = 1):
        """Closed-form density for ``dim`` levels, in states per unit energy."""
        return dim * norm.pdf(np.asarray(energy, dtype=float), self.center, self.sigma)

    def to_dict(self):
        return {"kind": "gaussian", "sigma": self.sigma, "center": self.center}


@dataclass(frozen=True)
class ExplicitDos:
    levels: tuple

    def to_dict(self):
        return {"kind": "explicit", "levels": list(self.levels)}


DosModel = Union[GaussianDos, ExplicitDos]


def dos_model_from_dict(d: dict) -> DosModel:
    kind = d.get("kind", "gaussian").lower()
    if kind == "gaussian":
        return GaussianDos(sigma=float(d.get("sigma", 1.0)), center=float(d.get("center", 0.0)))
    if kind == "explicit":
        return ExplicitDos(levels=tuple(float(x) for x in d["levels"]))
    raise InvalidParameterError(f"unknown DOS kind {kind!r}")


@dataclass(frozen=True)
class SystemSpectrum:
    levels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "levels", _as_levels(self.levels, "system levels"))

    @property
    def dim(self) -> int:
        return self.levels.size


@dataclass(frozen=True)
class EnvironmentSpectrum:
    levels: np.ndarray
    dos_model: DosModel | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", _as_levels(self.levels, "environment levels"))

    @property
    def dim(self) -> int:
        return self.levels.size


def build_environment_spectrum(
    dos_model: DosModel,
    dim: int | None = None,
    mode: str = "quantile",
    seed: int | None = None,
) -> EnvironmentSpectrum:
    """Generate environment levels following ``dos_model``.

    ``quantile`` places level k (1-based) at the ``(k - 1/2)/dim`` quantile of
    the normalized DOS, which is deterministic. ``sampled`` draws ``dim``
    i.i.d. energies and sorts them. An :class:`ExplicitDos` is returned as-is.
    """
    if isinstance(dos_model, ExplicitDos):
        return EnvironmentSpectrum(np.asarray(dos_model.levels, dtype=float), dos_model)
    if dim is None or int(dim) != dim or dim < 2:
        raise InvalidParameterError(f"environment dimension must be an integer >= 2, got {dim}")
    dim = int(dim)
    if mode == "quantile":
        q = (np.arange(1, dim + 1) - 0.5) / dim
        levels = dos_model.center + dos_model.sigma * norm.ppf(q)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        levels = rng.normal(dos_model.center, dos_model.sigma, size=dim)
    else:
        raise InvalidParameterError(f"unknown mode {mode!r}; expected 'quantile' or 'sampled'")
    return EnvironmentSpectrum(levels, dos_model)


@dataclass(frozen=True)
class BareModel:
    """Spectra of S and E and the composite bare energies ``eps_s + eps_e``."""

    sys: SystemSpectrum
    env: EnvironmentSpectrum
    bare_energies: np.ndarray = field(repr=False)

    @property
    def dim_s(self) -> int:
        return self.sys.dim

    @property
    def dim_e(self) -> int:
        return self.env.dim

    @property
    def n(self) -> int:
        return self.bare_energies.size

    def index(self, s: int, e: int) -> int:
        if not (0 <= s < self.dim_s and 0 <= e < self.dim_e):
            raise InvalidParameterError(f"(s, e) = ({s}, {e}) out of range")
        return s * self.dim_e + e

    def split(self, n: int) -> tuple[int, int]:
        if not 0 <= n < self.n:
            raise InvalidParameterError(f"bare index {n} out of range [0, {self.n})")
        return divmod(int(n), self.dim_e)

    def energy_order(self) -> np.ndarray:
        """Bare indices sorted by energy (stable, so ties keep index order)."""
        return np.argsort(self.bare_energies, kind="stable")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray([self.dim_s, self.dim_e], dtype=np.int64).tobytes())
        h.update(self.sys.levels.tobytes())
        h.update(self.env.levels.tobytes())
        return h.hexdigest()[:16]


def build_bare_model(sys: SystemSpectrum, env: EnvironmentSpectrum) -> BareModel:
    energies = (sys.levels[:, None] + env.levels[None, :]).ravel()
    energies.setflags(write=False)
    return BareModel(sys=sys, env=env, bare_energies=energies)


@dataclass(frozen=True)
class DosEstimate:
    """Density of states sampled on a grid (states per unit energy).

    Calling the estimate interpolates linearly and returns 0 off the grid.
    """

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float

    def __call__(self, energy):
        return np.interp(energy, self.grid, self.values, left=0.0, right=0.0)

    def total(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    @classmethod
    def from_function(cls, fn, grid, bandwidth=0.0):
        """Tabulate a closed-form density (used for analytic checks)."""
        grid = np.asarray(grid, dtype=float)
        return cls(grid=grid, values=np.asarray(fn(grid), dtype=float), bandwidth=bandwidth)


def default_bandwidth(levels: Sequence[float]) -> float:
    """Five times the mean level spacing around the center of the spectrum.

    The central spacing is measured on the middle 10% of the sorted levels.
    """
    lv = np.sort(np.asarray(levels, dtype=float))
    k = lv.size
    if k < 2:
        raise InvalidParameterError("need at least 2 levels to estimate a bandwidth")
    lo, hi = int(0.45 * k), int(np.ceil(0.55 * k)) - 1
    if hi <= lo:
        lo, hi = 0, k - 1
    spacing = (lv[hi] - lv[lo]) / (hi - lo)
    if spacing <= 0:
        spacing = (lv[-1] - lv[0]) / (k - 1)
    if spacing <= 0:
        raise InvalidParameterError("all levels coincide; pass an explicit bandwidth")
    return 5.0 * spacing


def estimate_dos(
    levels: Sequence[float],
    grid: Sequence[float] | None = None,
    bandwidth: float | None = None,
    weights: Sequence[float] | None = None,
) -> DosEstimate:
    """Gaussian kernel density estimate scaled to integrate to the level count.

    Parameters
    ----------
    levels : array_like
        Energies (repeated entries count as multiplicities).
    grid : array_like, optional
        Evaluation points. Defaults to 2001 points spanning the levels padded
        by 6 bandwidths on either side.
    bandwidth : float, optional
        Kernel standard deviation; defaults to :func:`default_bandwidth`.
    weights : array_like, optional
        Per-level multiplicities.
    """
    lv = np.asarray(levels, dtype=float).ravel()
    if lv.size == 0:
        raise InvalidParameterError("cannot estimate a DOS from an empty level list")
    if bandwidth is None:
        bandwidth = default_bandwidth(lv)
    if not bandwidth > 0:
        raise InvalidParameterError(f"bandwidth must be positive, got {bandwidth}")
    if grid is None:
        grid = np.linspace(lv.min() - 6 * bandwidth, lv.max() + 6 * bandwidth, 2001)
    grid = np.asarray(grid, dtype=float)
    w = np.ones_like(lv) if weights is None else np.asarray(weights, dtype=float)

    values = np.zeros_like(grid)
    chunk = max(1, 2_000_000 // max(lv.size, 1))
    for start in range(0, grid.size, chunk):
        g = grid[start:start + chunk]
        z = (g[:, None] - lv[None, :]) / bandwidth
        values[start:start + chunk] = np.exp(-0.5 * z * z) @ w
    values /= bandwidth * np.sqrt(2.0 * np.pi)
    return DosEstimate(grid=grid, values=values, bandwidth=float(bandwidth))


def mean_level_spacing(dos: DosEstimate, at: float) -> float:
    rho = float(dos(at))
    if rho <= 0:
        raise OutOfSupportError(f"density of states vanishes at {at}")
    return 1.0 / rho


def write_spectrum_csv(path, levels) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["energy"])
        for x in np.asarray(levels, dtype=float):
            w.writerow([f"{x:.17g}"])


def read_spectrum_csv(path) -> np.ndarray:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["energy"]:
        raise InvalidParameterError(f"{path}: expected header 'energy'")
    return np.array([float(r[0]) for r in rows[1:] if r], dtype=float)
