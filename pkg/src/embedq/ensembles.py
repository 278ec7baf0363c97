"""Random interaction Hamiltonians W.

Every sampler returns a centred matrix (Tr W = 0) whose spectrum variance
Tr(W W^dagger)/N equals ``sigma_w**2``. GOE and WBRM draws are rescaled after
sampling so the normalisation is exact for each realisation, not only on
average. Random numbers come from Philox streams keyed by ``(seed, row)``, so
a matrix is a pure function of its spec whatever order the rows are filled in.
"""

from __future__ import annotations

import hashlib
import json
import struct
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "InteractionSpec",
    "InteractionMatrix",
    "sample_goe",
    "sample_wbrm",
    "sample_haar_rotation",
    "sample_rrm",
    "sample_interaction",
    "bimodal_spectrum",
    "dump_matrix",
    "load_matrix",
]

KINDS = ("goe", "wbrm", "rrm")
GROUPS = ("orthogonal", "unitary")


@dataclass(frozen=True)
class InteractionSpec:
    kind: str = "goe"
    sigma_w: float = 0.0
    seed: int = 0
    band_half_width: int | None = None
    rrm_spectrum: tuple | None = None
    rotation_group: str = "orthogonal"

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise InvalidParameterError(f"unknown interaction kind {self.kind!r}")
        if not self.sigma_w >= 0:
            raise InvalidParameterError(f"sigma_w must be non-negative, got {self.sigma_w}")
        if kind == "wbrm" and (self.band_half_width is None or self.band_half_width < 1):
            raise InvalidParameterError("WBRM needs band_half_width >= 1")
        if self.rotation_group not in GROUPS:
            raise InvalidParameterError(f"rotation_group must be one of {GROUPS}")
        if self.rrm_spectrum is not None:
            object.__setattr__(self, "rrm_spectrum", tuple(float(x) for x in self.rrm_spectrum))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "sigma_w": self.sigma_w, "seed": self.seed}
        if self.kind == "wbrm":
            d["band_half_width"] = self.band_half_width
        if self.kind == "rrm":
            d["rotation_group"] = self.rotation_group
            if self.rrm_spectrum is not None:
                d["rrm_spectrum"] = list(self.rrm_spectrum)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionSpec":
        return cls(
            kind=d.get("kind", "goe"),
            sigma_w=float(d.get("sigma_w", 0.0)),
            seed=int(d.get("seed", 0)),
            band_half_width=d.get("band_half_width"),
            rrm_spectrum=d.get("rrm_spectrum"),
            rotation_group=d.get("rotation_group", "orthogonal"),
        )

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class InteractionMatrix:
    entries: np.ndarray = field(repr=False)
    spec: InteractionSpec

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def variance(self) -> float:
        """Spectrum variance Tr(W W^dagger)/N."""
        return float(np.sum(np.abs(self.entries) ** 2) / self.n)


def _row_rng(seed: int, row: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(row)])))


def _normalize(w: np.ndarray, sigma_w: float) -> np.ndarray:
    n = w.shape[0]
    w[np.diag_indices(n)] -= np.trace(w).real / n
    var = np.sum(np.abs(w) ** 2) / n
    if sigma_w == 0 or var == 0:
        return np.zeros_like(w)
    w *= sigma_w / np.sqrt(var)
    return w


def _freeze(w: np.ndarray) -> np.ndarray:
    w.setflags(write=False)
    return w


def sample_goe(n: int, sigma_w: float, seed: int = 0) -> InteractionMatrix:
    """Real symmetric Gaussian matrix, normalised to Tr(W^2)/n = sigma_w^2.

    Off-diagonal entries have variance sigma_w^2/n, diagonal ones 2 sigma_w^2/n,
    before the exact centring and rescaling.
    """
    if n < 2:
        raise InvalidParameterError(f"GOE dimension must be >= 2, got {n}")
    spec = InteractionSpec(kind="goe", sigma_w=sigma_w, seed=seed)
    w = np.zeros((n, n))
    if sigma_w == 0:
        return InteractionMatrix(_freeze(w), spec)
    scale = sigma_w / np.sqrt(n)
    for r in range(n):
        row = _row_rng(seed, r).standard_normal(n - r) * scale
        row[0] *= np.sqrt(2.0)
        w[r, r:] = row
        w[r + 1:, r] = row[1:]
    return InteractionMatrix(_freeze(_normalize(w, sigma_w)), spec)


def sample_wbrm(
    bare_energies: Sequence[float],
    sigma_w: float,
    band_half_width: int,
    seed: int = 0,
) -> InteractionMatrix:
    """Wigner band random matrix with a flat variance profile inside the band.

    The band is defined on energy ranks: entry (n, m) is drawn iff
    ``|rank(n) - rank(m)| <= band_half_width``; everything else is exactly 0.
    """
    energies = np.asarray(bare_energies, dtype=float)
    n = energies.size
    spec = InteractionSpec(kind="wbrm", sigma_w=sigma_w, seed=seed, band_half_width=band_half_width)
    b = int(band_half_width)
    if b >= n:
        warnings.warn(
            f"band_half_width={b} >= N={n}: the band covers the full matrix (GOE-like)",
            stacklevel=2,
        )
        b = n - 1
    w_rank = np.zeros((n, n))
    if sigma_w > 0:
        for r in range(n):
            hi = min(n, r + b + 1)
            row = _row_rng(seed, r).standard_normal(hi - r)
            row[0] *= np.sqrt(2.0)
            w_rank[r, r:hi] = row
            w_rank[r + 1:hi, r] = row[1:]
    order = np.argsort(energies, kind="stable")
    w = np.empty_like(w_rank)
    w[np.ix_(order, order)] = w_rank
    return InteractionMatrix(_freeze(_normalize(w, sigma_w)), spec)


def sample_haar_rotation(n: int, group: str = "orthogonal", seed: int = 0) -> np.ndarray:
    """Haar-distributed orthogonal or unitary matrix.

    QR of a Ginibre matrix, with the columns of Q multiplied by the phases of
    diag(R) so the decomposition is unique and the result Haar distributed.
    """
    if n < 1:
        raise InvalidParameterError(f"rotation dimension must be >= 1, got {n}")
    if group not in GROUPS:
        raise InvalidParameterError(f"group must be one of {GROUPS}")
    z = np.empty((n, n), dtype=float if group == "orthogonal" else complex)
    for r in range(n):
        rng = _row_rng(seed, r)
        if group == "orthogonal":
            z[r] = rng.standard_normal(n)
        else:
            z[r] = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    q, r_ = np.linalg.qr(z)
    d = np.diagonal(r_)
    ph = d / np.abs(d)
    return q * ph[None, :]


def bimodal_spectrum(n: int, sigma_w: float) -> np.ndarray:
    """Half +sigma_w, half -sigma_w (n even); odd n gets one 0 to stay centred
    and the magnitudes are scaled so the variance is still sigma_w^2."""
    half = n // 2
    q = np.concatenate([np.full(half, sigma_w), np.full(half, -sigma_w)])
    if n % 2:
        q = np.concatenate([q, [0.0]])
        if half:
            q *= np.sqrt(n / (2 * half))
    return q


def sample_rrm(
    rrm_spectrum: Sequence[float],
    group: str = "orthogonal",
    seed: int = 0,
) -> InteractionMatrix:
    """Randomly rotated matrix ``U diag(Q) U^dagger`` with U Haar distributed."""
    q = np.asarray(rrm_spectrum, dtype=float).ravel()
    if q.size == 0:
        raise InvalidParameterError("RRM spectrum must be non-empty")
    mean = q.mean()
    if abs(mean) > 1e-12 * max(1.0, float(np.max(np.abs(q)))):
        warnings.warn(f"RRM spectrum has mean {mean:.3g}; recentring", stacklevel=2)
        q = q - mean
    sigma_w = float(np.sqrt(np.mean(q * q)))
    spec = InteractionSpec(
        kind="rrm", sigma_w=sigma_w, seed=seed, rrm_spectrum=tuple(q), rotation_group=group
    )
    u = sample_haar_rotation(q.size, group, seed)
    w = (u * q[None, :]) @ u.conj().T
    w = 0.5 * (w + w.conj().T)
    return InteractionMatrix(_freeze(w), spec)


def sample_interaction(spec: InteractionSpec, bare_energies: Sequence[float]) -> InteractionMatrix:
    """Dispatch on ``spec.kind``; the dimension is taken from ``bare_energies``."""
    energies = np.asarray(bare_energies, dtype=float)
    n = energies.size
    if spec.kind == "goe":
        return sample_goe(n, spec.sigma_w, spec.seed)
    if spec.kind == "wbrm":
        return sample_wbrm(energies, spec.sigma_w, spec.band_half_width, spec.seed)
    q = np.asarray(spec.rrm_spectrum) if spec.rrm_spectrum is not None else bimodal_spectrum(n, spec.sigma_w)
    if q.size != n:
        raise InvalidParameterError(f"RRM spectrum length {q.size} != N = {n}")
    out = sample_rrm(q, spec.rotation_group, spec.seed)
    # keep the caller's spec (the sampler's copy carries the explicit spectrum)
    return InteractionMatrix(out.entries, spec)


_MAGIC = b"EMBQW001"


def dump_matrix(path, w: InteractionMatrix) -> None:
    """Write W as: magic, N (uint64), complex flag (uint8), 16-char spec hash,
    then row-major float64 data (real part, then imaginary part if complex)."""
    a = np.ascontiguousarray(w.entries)
    is_complex = np.iscomplexobj(a)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QB", a.shape[0], int(is_complex)))
        fh.write(w.spec.fingerprint().encode("ascii"))
        fh.write(a.real.astype("<f8").tobytes())
        if is_complex:
            fh.write(a.imag.astype("<f8").tobytes())


def load_matrix(path) -> tuple[np.ndarray, str]:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise InvalidParameterError(f"{path}: not an embedq matrix dump")
        n, is_complex = struct.unpack("<QB", fh.read(9))
        spec_hash = fh.read(16).decode("ascii")
        re = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
        if is_complex:
            im = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
            return re + 1j * im, spec_hash
        return re.copy(), spec_hash
