"""Dressed eigenbasis, overlaps, local density of states and transition probabilities.

Because the bare Hamiltonian is diagonal in the product basis, the overlap
``<phi_n|psi_i>`` is simply component ``n`` of dressed eigenvector ``i``; the
overlap matrix ``O`` below is the eigenvector matrix itself.
"""

from __future__ import annotations

import csv
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import curve_fit

from .ensembles import InteractionMatrix, InteractionSpec, sample_interaction
from .errors import InconsistentInputError, InvalidParameterError, NumericalFailureError
from .model import BareModel, estimate_dos

__all__ = [
    "DressedSystem",
    "LdosFit",
    "LdosCurve",
    "TransitionMatrix",
    "FourthMomentEntry",
    "FourthMomentReport",
    "diagonalize",
    "dressed_system",
    "ldos",
    "ldos_members",
    "ldos_sample",
    "ldos_from_samples",
    "LdosSample",
    "fgr_width",
    "transition_matrix",
    "transition_rows",
    "purity",
    "fourth_moment_checks",
    "selection_rule_allows",
    "sample_index_tuples",
    "write_ldos_csv",
    "write_transition_row_csv",
]


@dataclass(frozen=True)
class DressedSystem:
    lambdas: np.ndarray = field(repr=False)
    overlaps: np.ndarray = field(repr=False)
    model: BareModel = field(repr=False)
    spec: InteractionSpec | None = None

    @property
    def n(self) -> int:
        return self.lambdas.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.overlaps)

    def weights(self) -> np.ndarray:
        """|O[n][i]|^2."""
        o = self.overlaps
        return o * o if self.is_real else (o.real ** 2 + o.imag ** 2)

    def min_gap(self) -> float:
        return float(np.min(np.diff(self.lambdas))) if self.n > 1 else np.inf

    def hamiltonian(self) -> np.ndarray:
        """Reconstruct H = O diag(lambda) O^dagger."""
        o = self.overlaps
        return (o * self.lambdas[None, :]) @ o.conj().T


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    pivot = vecs[idx, np.arange(vecs.shape[1])]
    phase = np.conj(pivot) / np.abs(pivot)
    if not np.iscomplexobj(vecs):
        phase = phase.real
    return vecs * phase[None, :]


def diagonalize(bare: BareModel, w: InteractionMatrix | np.ndarray | None) -> DressedSystem:
    """Full dense eigendecomposition of ``diag(bare_energies) + W``.

    Eigenvector phases are fixed so the largest-magnitude component of each
    column is real and positive.
    """
    spec = getattr(w, "spec", None)
    entries = getattr(w, "entries", w)
    n = bare.n
    if entries is None:
        h = np.zeros((n, n))
    else:
        h = np.array(entries, copy=True)
        if h.shape != (n, n):
            raise InconsistentInputError(f"W has shape {h.shape}, expected {(n, n)}")
    h[np.diag_indices(n)] += bare.bare_energies
    try:
        lam, vecs = scipy.linalg.eigh(h, driver="evd", overwrite_a=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(f"eigensolver failed: {exc}", spec=spec) from exc
    vecs = _fix_phases(vecs)
    lam.setflags(write=False)
    vecs.setflags(write=False)
    return DressedSystem(lambdas=lam, overlaps=vecs, model=bare, spec=spec)


def _cache_path(bare: BareModel, spec: InteractionSpec, cache_dir) -> Path:
    return Path(cache_dir) / f"{bare.fingerprint()}_{spec.fingerprint()}.npz"


def dressed_system(bare: BareModel, spec: InteractionSpec, cache_dir=None) -> DressedSystem:
    """Sample W from ``spec`` and diagonalize, reusing an on-disk cache if set.

    The cache directory defaults to ``$EMBEDQ_CACHE``; without it nothing is
    cached.
    """
    cache_dir = cache_dir or os.environ.get("EMBEDQ_CACHE")
    if cache_dir:
        path = _cache_path(bare, spec, cache_dir)
        if path.exists():
            with np.load(path) as data:
                lam, vecs = data["lambdas"], data["overlaps"]
            lam.setflags(write=False)
            vecs.setflags(write=False)
            return DressedSystem(lam, vecs, bare, spec)
    ds = diagonalize(bare, sample_interaction(spec, bare.bare_energies))
    if cache_dir:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, lambdas=ds.lambdas, overlaps=ds.overlaps)
        os.replace(tmp, path)
    return ds


def fgr_width(sigma_w: float, rho_at: float, n: int) -> float:
    """Fermi-golden-rule LDOS width pi * sigma_w^2 * rho / N."""
    if sigma_w < 0 or rho_at < 0 or n <= 0:
        raise InvalidParameterError("fgr_width needs non-negative sigma_w, rho and positive N")
    return float(np.pi * sigma_w ** 2 * rho_at / n)


def _lorentzian(x, a, x0, g):
    return a * (g / np.pi) / ((x - x0) ** 2 + g ** 2)


def _gaussian(x, a, x0, s):
    return a * np.exp(-0.5 * ((x - x0) / s) ** 2) / (np.sqrt(2 * np.pi) * s)


@dataclass(frozen=True)
class LdosFit:
    kind: str  # "lorentzian", "gaussian" or "degenerate"
    gamma: float
    shift: float
    residual: float
    lorentzian: tuple | None = None  # (amplitude, shift, HWHM, rms residual)
    gaussian: tuple | None = None  # (amplitude, shift, std, rms residual)

    @property
    def lorentzian_gamma(self) -> float:
        return self.lorentzian[2] if self.lorentzian else 0.0


@dataclass(frozen=True)
class LdosCurve:
    """LDOS of bare state ``n`` as a density in the dressed energy.

    ``offsets``/``weights`` hold every pooled |O[k][i]|^2 at ``lambda_i - eps_k``;
    the binned density integrates to 1.
    """

    center: float
    offsets: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    n_curves: int
    bin_centers: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    bin_width: float
    fit: LdosFit
    gamma_fgr: float
    rho_at: float

    @property
    def points(self):
        return self.center + self.bin_centers, self.density * self.bin_width


def _fit_ldos(x, y, bin_width, guess) -> LdosFit:
    peak = float(y.max()) * bin_width if y.size else 1.0
    if y.size < 5 or peak > 0.95 or np.count_nonzero(y) < 3:
        return LdosFit("degenerate", 0.0, 0.0, 0.0)
    guess = max(guess, bin_width)
    x0 = float(x[np.argmax(y)])
    fits = {}
    for name, fn in (("lorentzian", _lorentzian), ("gaussian", _gaussian)):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                p, _ = curve_fit(fn, x, y, p0=[1.0, x0, guess], maxfev=20000)
        except RuntimeError:
            continue
        p[2] = abs(p[2])
        res = float(np.sqrt(np.mean((fn(x, *p) - y) ** 2)))
        fits[name] = (float(p[0]), float(p[1]), float(p[2]), res)
    if not fits:
        return LdosFit("degenerate", 0.0, 0.0, np.inf)
    best = min(fits, key=lambda k: fits[k][3])
    a, x0, g, res = fits[best]
    return LdosFit(best, g, x0, res, fits.get("lorentzian"), fits.get("gaussian"))


def ldos_members(bare: BareModel, n: int, bundle_half_width: float = 0) -> np.ndarray:
    """Bare states within ``bundle_half_width`` mean level spacings of ``eps_n``."""
    bare.split(n)
    if bundle_half_width <= 0:
        return np.array([n])
    eps = bare.bare_energies
    rho = float(estimate_dos(eps)(eps[n]))
    spacing = 1.0 / max(rho, 1e-300)
    return np.flatnonzero(np.abs(eps - eps[n]) <= bundle_half_width * spacing)


@dataclass(frozen=True)
class LdosSample:
    """What one realisation contributes to an LDOS: its spectrum and the
    |O[k][i]|^2 rows of the pooled bare states ``members``."""

    lambdas: np.ndarray = field(repr=False)
    member_weights: np.ndarray = field(repr=False)
    members: np.ndarray = field(repr=False)
    sigma_w: float


def ldos_sample(ds: DressedSystem, members: Sequence[int]) -> LdosSample:
    members = np.asarray(members, dtype=int)
    o = ds.overlaps[members]
    sigma_w = ds.spec.sigma_w if ds.spec is not None else 0.0
    return LdosSample(ds.lambdas.copy(), np.abs(o) ** 2, members, sigma_w)


def ldos_from_samples(
    bare: BareModel,
    n: int,
    samples: Sequence[LdosSample],
    max_span: float | None = None,
) -> LdosCurve:
    """Pool per-realisation samples into a binned, fitted LDOS curve.

    Each pooled bare state k is recentred on its own energy, so offsets are
    ``lambda_i - eps_k``. The bin width is ``max(D, Gamma_FGR/10)`` and the
    curve covers ten FGR widths (at least 40 bins) per side, clipped to
    ``max_span``. The FGR width uses the dressed DOS of the first sample at
    ``eps_n``.
    """
    if not samples:
        raise InvalidParameterError("ldos needs at least one realisation")
    eps = bare.bare_energies
    eps_n = float(eps[n])
    d_spacing = 1.0 / max(float(estimate_dos(eps)(eps_n)), 1e-300)
    rho = float(estimate_dos(samples[0].lambdas)(eps_n))
    gamma_fgr = fgr_width(samples[0].sigma_w, rho, bare.n)

    offsets, weights = [], []
    for smp in samples:
        for k, row in zip(smp.members, smp.member_weights):
            offsets.append(smp.lambdas - eps[k])
            weights.append(row)
    offsets = np.concatenate(offsets)
    weights = np.concatenate(weights)
    n_curves = sum(s.members.size for s in samples)

    bin_width = max(d_spacing, gamma_fgr / 10.0)
    half = max(10.0 * gamma_fgr, 40.0 * bin_width)
    if max_span is not None:
        half = min(half, max_span)
    nb = max(1, int(round(2 * half / bin_width)))
    edges = (np.arange(nb + 1) - nb / 2) * bin_width
    hist, _ = np.histogram(offsets, bins=edges, weights=weights)
    density = hist / (n_curves * bin_width)
    centers = 0.5 * (edges[1:] + edges[:-1])
    fit = _fit_ldos(centers, density, bin_width, gamma_fgr)
    return LdosCurve(
        center=eps_n,
        offsets=offsets,
        weights=weights,
        n_curves=n_curves,
        bin_centers=centers,
        density=density,
        bin_width=bin_width,
        fit=fit,
        gamma_fgr=gamma_fgr,
        rho_at=rho,
    )


def ldos(
    runs: Sequence[DressedSystem],
    n: int,
    bundle_half_width: float = 0,
    max_span: float | None = None,
) -> LdosCurve:
    """Ensemble-averaged LDOS of bare state ``n`` with Lorentzian/Gaussian fits.

    Bare states within ``bundle_half_width`` mean level spacings of ``eps_n``
    are pooled. Each run's dressed eigenvalues stand in for their ensemble
    means; see :func:`ldos_from_samples` for binning.
    """
    if not runs:
        raise InvalidParameterError("ldos needs at least one run")
    _check_runs(runs)
    bare = runs[0].model
    members = ldos_members(bare, n, bundle_half_width)
    return ldos_from_samples(bare, n, [ldos_sample(r, members) for r in runs], max_span)


@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray = field(repr=False)
    n_realizations: int
    rows: np.ndarray | None = field(default=None, repr=False)

    def row(self, m: int) -> np.ndarray:
        if self.rows is None:
            return self.entries[m]
        hit = np.flatnonzero(self.rows == m)
        if hit.size == 0:
            raise InvalidParameterError(f"row {m} was not computed")
        return self.entries[hit[0]]

    def diagonal(self, n: int) -> float:
        return float(self.row(n)[n])


def _check_runs(runs):
    if not runs:
        raise InvalidParameterError("need at least one realization")
    fp = runs[0].model.fingerprint()
    for r in runs[1:]:
        if r.model is not runs[0].model and r.model.fingerprint() != fp:
            raise InconsistentInputError("all runs must share the same bare model")


def transition_matrix(runs: Sequence[DressedSystem]) -> TransitionMatrix:
    """Average over runs of sum_i |O[n][i]|^2 |O[m][i]|^2, exact per run."""
    _check_runs(runs)
    acc = None
    for r in runs:
        a = r.weights()
        p = a @ a.T
        acc = p if acc is None else acc + p
    return TransitionMatrix(acc / len(runs), len(runs))


def transition_rows(runs: Sequence[DressedSystem], rows: Sequence[int]) -> TransitionMatrix:
    """Selected rows of :func:`transition_matrix` without forming all N^2 entries."""
    _check_runs(runs)
    rows = np.asarray(rows, dtype=int)
    acc = None
    for r in runs:
        a = r.weights()
        p = a[rows] @ a.T
        acc = p if acc is None else acc + p
    return TransitionMatrix(acc / len(runs), len(runs), rows=rows)


def purity(tm: TransitionMatrix, n: int) -> float:
    """1 / p_bar(n -> n): effective number of dressed states in bare state n."""
    p = tm.diagonal(n)
    if p <= 0:
        raise NumericalFailureError(f"return probability of state {n} is {p}")
    return 1.0 / p


def selection_rule_allows(t, real: bool) -> bool:
    """Whether E[sum_i O_ni O*_mi O_pi O*_qi] may be non-zero.

    Complex overlaps pair (n=m, p=q) or (n=q, m=p); real ones also pair n=p, m=q.
    """
    n, m, p, q = t
    ok = (n == m and p == q) or (n == q and m == p)
    return ok or (real and n == p and m == q)


@dataclass(frozen=True)
class FourthMomentEntry:
    indices: tuple
    mean: complex
    stderr: float
    allowed: bool

    @property
    def z(self) -> float:
        return abs(self.mean) / self.stderr if self.stderr > 0 else np.inf

    @property
    def consistent_with_zero(self) -> bool:
        return self.z <= 4.0


@dataclass
class FourthMomentReport:
    entries: list
    n_runs: int

    @property
    def disallowed_vanish(self) -> bool:
        return all(e.consistent_with_zero for e in self.entries if not e.allowed)

    @property
    def allowed_nonzero(self) -> bool:
        return all(not e.consistent_with_zero for e in self.entries if e.allowed)

    @property
    def passed(self) -> bool:
        return self.disallowed_vanish and self.allowed_nonzero


def fourth_moment_checks(runs: Sequence[DressedSystem], sample: Sequence[tuple]) -> FourthMomentReport:
    """Estimate sum_i E[O_ni O*_mi O_pi O*_qi] for each sampled 4-tuple."""
    _check_runs(runs)
    if len(runs) < 20:
        warnings.warn(f"only {len(runs)} runs; selection-rule statistics are weak", stacklevel=2)
    real = all(r.is_real for r in runs)
    sample = [tuple(int(x) for x in t) for t in sample]
    vals = np.empty((len(runs), len(sample)), dtype=complex)
    for k, r in enumerate(runs):
        o = r.overlaps
        for j, (n, m, p, q) in enumerate(sample):
            vals[k, j] = np.sum(o[n] * np.conj(o[m]) * o[p] * np.conj(o[q]))
    mean = vals.mean(axis=0)
    r_ = len(runs)
    if r_ > 1:
        se = np.sqrt(np.sum(np.abs(vals - mean) ** 2, axis=0) / (r_ - 1) / r_)
    else:
        se = np.full(len(sample), np.inf)
    entries = [
        FourthMomentEntry(t, complex(mean[j]), float(se[j]), selection_rule_allows(t, real))
        for j, t in enumerate(sample)
    ]
    return FourthMomentReport(entries, r_)


def sample_index_tuples(n: int, count: int, seed: int = 0) -> list:
    """A mix of disallowed (all-distinct) and allowed (paired) index 4-tuples."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        out.append(tuple(int(x) for x in rng.choice(n, 4, replace=False)))
    for _ in range(count):
        a, b = (int(x) for x in rng.choice(n, 2, replace=False))
        out.append((a, a, b, b))
        out.append((a, b, b, a))
    return out


def write_ldos_csv(path, curve: LdosCurve) -> None:
    lam, w = curve.points
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["lambda", "weight"])
        for x, y in zip(lam, w):
            wr.writerow([f"{x:.17g}", f"{y:.17g}"])


def write_transition_row_csv(path, row: Sequence[float]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "p_bar"])
        for k, p in enumerate(row):
            wr.writerow([k, f"{p:.17g}"])
