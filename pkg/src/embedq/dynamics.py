"""Exact time evolution in the dressed eigenbasis and reduced states of S.

Nothing here integrates an ODE: with the eigendecomposition at hand,
``U_t |phi_n> = sum_i exp(-i lambda_i t) <psi_i|phi_n> |psi_i>`` is evaluated
directly, so every time point is exact to rounding.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegeneracyError, InvalidParameterError
from .spectral import DressedSystem

__all__ = [
    "InitialState",
    "ReducedState",
    "Trajectory",
    "FluctuationReport",
    "CoherenceSeries",
    "evolve_pure",
    "evolve_mixed",
    "diagonal_ensemble",
    "long_time_average",
    "coherence_decay",
    "write_trajectory_csv",
    "write_fluctuation_json",
]

_TIME_CHUNK = 64


@dataclass(frozen=True)
class InitialState:
    """Diagonal weights on bare states plus optional coherence test terms.

    ``off_diagonal`` holds ``(m, p, amplitude)`` triples, each adding
    ``amplitude |phi_m><phi_p| + h.c.`` to the initial density matrix.
    """

    diagonal_weights: Mapping[int, float]
    off_diagonal: tuple = ()

    def __post_init__(self):
        w = {int(k): float(v) for k, v in dict(self.diagonal_weights).items()}
        if any(v < 0 for v in w.values()):
            raise InvalidParameterError("initial weights must be non-negative")
        total = sum(w.values())
        if abs(total - 1.0) > 1e-10:
            raise InvalidParameterError(f"initial weights sum to {total}, expected 1")
        object.__setattr__(self, "diagonal_weights", w)
        terms = []
        for m, p, a in self.off_diagonal:
            if m == p:
                raise InvalidParameterError("off-diagonal term needs m != p")
            terms.append((int(m), int(p), complex(a)))
        object.__setattr__(self, "off_diagonal", tuple(terms))

    @classmethod
    def pure(cls, m: int) -> "InitialState":
        return cls({m: 1.0})

    @classmethod
    def superposition(cls, m: int, p: int, a_m: complex = 2 ** -0.5, a_p: complex = 2 ** -0.5):
        """``a_m|phi_m> + a_p|phi_p>`` written as weights plus one coherence term."""
        norm = abs(a_m) ** 2 + abs(a_p) ** 2
        if abs(norm - 1.0) > 1e-10:
            raise InvalidParameterError("superposition amplitudes must be normalized")
        return cls({m: abs(a_m) ** 2, p: abs(a_p) ** 2}, ((m, p, a_m * np.conj(a_p)),))


@dataclass(frozen=True)
class ReducedState:
    matrix: np.ndarray
    time: float | None = None

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def check(self, tol: float = 1e-10) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise AssertionError("reduced state is not Hermitian")
        if abs(np.trace(m) - 1) > tol:
            raise AssertionError(f"trace {np.trace(m)} != 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -tol:
            raise AssertionError("reduced state has a negative eigenvalue")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray = field(repr=False)  # (T, dim_s, dim_s)

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("tii->ti", self.states))

    @property
    def coherences(self) -> np.ndarray:
        """|rho_s[a, b]| for a < b, columns ordered (0,1), (0,2), ..., (1,2), ..."""
        a, b = np.triu_indices(self.states.shape[1], k=1)
        return np.abs(self.states[:, a, b])

    def coherence_labels(self) -> list:
        a, b = np.triu_indices(self.states.shape[1], k=1)
        return [f"coh_{i}{j}" for i, j in zip(a, b)]

    def state(self, k: int) -> ReducedState:
        return ReducedState(self.states[k], float(self.times[k]))


def _propagated(ds: DressedSystem, n: int, times: np.ndarray) -> np.ndarray:
    """Bare-basis components of U_t|phi_n> for all t, shape (N, T)."""
    c = np.conj(ds.overlaps[n])
    phases = np.exp(-1j * np.outer(ds.lambdas, times))
    return ds.overlaps @ (c[:, None] * phases)


def _reduced_from_vectors(left, right, dim_s, dim_e) -> np.ndarray:
    """Tr_e |left><right| for each time column, shape (T, dim_s, dim_s)."""
    t = left.shape[1]
    lv = left.reshape(dim_s, dim_e, t)
    rv = right.reshape(dim_s, dim_e, t)
    return np.einsum("aet,bet->tab", lv, rv.conj())


def _check_index(ds: DressedSystem, n: int) -> None:
    if not 0 <= n < ds.n:
        raise InvalidParameterError(f"bare index {n} out of range [0, {ds.n})")


def evolve_mixed(ds: DressedSystem, init: InitialState, times: Sequence[float]) -> Trajectory:
    """Reduced dynamics of a (possibly mixed) initial state, by linearity."""
    times = np.asarray(times, dtype=float)
    if not np.all(np.isfinite(times)):
        raise InvalidParameterError("times must be finite")
    for n in init.diagonal_weights:
        _check_index(ds, n)
    for m, p, _ in init.off_diagonal:
        _check_index(ds, m)
        _check_index(ds, p)
    bare = ds.model
    out = np.zeros((times.size, bare.dim_s, bare.dim_s), dtype=complex)
    for start in range(0, times.size, _TIME_CHUNK):
        tt = times[start:start + _TIME_CHUNK]
        cache = {}

        def vec(n):
            if n not in cache:
                cache[n] = _propagated(ds, n, tt)
            return cache[n]

        acc = out[start:start + tt.size]
        for n, w in sorted(init.diagonal_weights.items()):
            if w:
                v = vec(n)
                acc += w * _reduced_from_vectors(v, v, bare.dim_s, bare.dim_e)
        for m, p, a in init.off_diagonal:
            term = a * _reduced_from_vectors(vec(m), vec(p), bare.dim_s, bare.dim_e)
            acc += term + np.conj(np.swapaxes(term, 1, 2))
    return Trajectory(times=times, states=out)


def evolve_pure(ds: DressedSystem, m: int, times: Sequence[float]) -> Trajectory:
    """Reduced dynamics starting from the bare product state ``|phi_m>``."""
    _check_index(ds, m)
    return evolve_mixed(ds, InitialState.pure(m), times)


def _require_nondegenerate(ds: DressedSystem) -> None:
    span = ds.lambdas[-1] - ds.lambdas[0]
    if ds.n > 1 and ds.min_gap() <= 1e-12 * span:
        raise DegeneracyError(
            f"dressed spectrum is degenerate (min gap {ds.min_gap():.3g}, span {span:.3g})"
        )


def diagonal_ensemble(ds: DressedSystem, init: InitialState) -> ReducedState:
    """Infinite-time dephased reduced state: only the i = j terms survive."""
    _require_nondegenerate(ds)
    o = ds.overlaps
    q = np.zeros(ds.n, dtype=complex)
    for n, w in init.diagonal_weights.items():
        _check_index(ds, n)
        q += w * np.abs(o[n]) ** 2
    for m, p, a in init.off_diagonal:
        # <psi_i| (a|m><p| + h.c.) |psi_i>
        term = a * np.conj(o[m]) * o[p]
        q += term + np.conj(term)
    bare = ds.model
    psi = o.reshape(bare.dim_s, bare.dim_e, ds.n)
    rho = np.einsum("i,aei,bei->ab", q, psi, psi.conj())
    if ds.is_real and not init.off_diagonal:
        rho = rho.real.astype(complex)
    return ReducedState(rho, np.inf)


@dataclass(frozen=True)
class FluctuationReport:
    window: tuple
    n_samples: int
    means: np.ndarray
    stds: np.ndarray

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "n_samples": self.n_samples,
            "means": [float(x) for x in self.means],
            "stds": [float(x) for x in self.stds],
        }


def long_time_average(traj: Trajectory, window: tuple) -> tuple[ReducedState, FluctuationReport]:
    """Time-uniform mean of rho_s over ``window`` and the temporal spread of populations."""
    t0, t1 = window
    sel = (traj.times >= t0) & (traj.times <= t1)
    if not np.any(sel):
        raise InvalidParameterError(f"window {window} contains no time samples")
    states = traj.states[sel]
    pops = np.real(np.einsum("tii->ti", states))
    mean = states.mean(axis=0)
    report = FluctuationReport((float(t0), float(t1)), int(sel.sum()), pops.mean(axis=0), pops.std(axis=0))
    return ReducedState(mean, None), report


@dataclass(frozen=True)
class CoherenceSeries:
    times: np.ndarray
    values: np.ndarray  # complex rho_s[s_m, s_p](t)
    window: tuple
    mean_value: complex  # time average of the complex element over the window
    mean_magnitude: float  # time average of |rho_s[s_m, s_p]| over the window

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def long_time_average(self) -> float:
        return abs(self.mean_value)


def coherence_decay(
    ds: DressedSystem,
    superposition: tuple,
    times: Sequence[float],
    window: tuple | None = None,
) -> CoherenceSeries:
    """System coherence created by ``a_m|phi_m> + a_p|phi_p>`` versus time.

    ``superposition`` is ``(m, p, (a_m, a_p))``; m and p must differ in their
    system factor so the prepared state carries a coherence of S. The window
    defaults to the second half of ``times``.
    """
    m, p, (a_m, a_p) = superposition
    if m == p:
        raise InvalidParameterError("coherence_decay needs m != p")
    s_m, _ = ds.model.split(m)
    s_p, _ = ds.model.split(p)
    if s_m == s_p:
        raise InvalidParameterError("m and p share the same system state; no system coherence")
    init = InitialState.superposition(m, p, a_m, a_p)
    traj = evolve_mixed(ds, init, times)
    values = traj.states[:, s_m, s_p]
    t = traj.times
    if window is None:
        window = (t[0] + 0.5 * (t[-1] - t[0]), t[-1])
    sel = (t >= window[0]) & (t <= window[1])
    if not np.any(sel):
        raise InvalidParameterError(f"window {window} contains no time samples")
    return CoherenceSeries(
        times=t,
        values=values,
        window=(float(window[0]), float(window[1])),
        mean_value=complex(values[sel].mean()),
        mean_magnitude=float(np.abs(values[sel]).mean()),
    )


def write_trajectory_csv(path, traj: Trajectory) -> None:
    pops = traj.populations
    cohs = traj.coherences
    ds = pops.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"p_{k}" for k in range(ds)] + traj.coherence_labels())
        for k, t in enumerate(traj.times):
            w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in pops[k]] + [f"{x:.17g}" for x in cohs[k]])


def write_fluctuation_json(path, report: FluctuationReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
