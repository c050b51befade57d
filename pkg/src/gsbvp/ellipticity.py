"""Strong-ellipticity classification and the natural spectrum of gamma . zeta.

The problem is strongly elliptic iff |zeta| I - i gamma.zeta is positive
definite for every zeta != 0. The symbol is homogeneous of degree one, so it
suffices to scan unit directions. Scanning is sampling-based: a Violated
region narrower than the sample spacing can be missed, which is recorded in
the report's ``coverage`` note.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundarySetup, hermitian_symbol, require_valid, tangential_symbol
from .errors import ZeroCovector
from .numerics import direction_samples
from .spectral import POSDEF_TOL

DEFAULT_SAMPLES = 512
BORDERLINE_BAND = 1e-9
CLUSTER_TOL = 1e-8


class Classification(str, enum.Enum):
    STRONGLY_ELLIPTIC = "StronglyElliptic"
    BORDERLINE = "Borderline"
    VIOLATED = "Violated"


@dataclass(frozen=True)
class EllipticityReport:
    classification: Classification
    min_margin: float
    worst_direction: np.ndarray
    samples_used: int
    band: float = BORDERLINE_BAND
    coverage: str = ""

    @property
    def strongly_elliptic(self) -> bool:
        return self.classification is Classification.STRONGLY_ELLIPTIC

    @property
    def nu_max(self) -> float:
        """Largest |eigenvalue| of i gamma.theta over sampled unit theta."""
        return 1.0 - self.min_margin


@dataclass(frozen=True)
class Branch:
    nu: float
    mult: int


@dataclass(frozen=True)
class NaturalSpectrum:
    zero_mult: int
    branches: tuple = field(default_factory=tuple)
    isotropic: bool = True

    @property
    def dim_v(self) -> int:
        return self.zero_mult + 2 * sum(b.mult for b in self.branches)

    @property
    def nu_max(self) -> float:
        return max((b.nu for b in self.branches), default=0.0)

    @classmethod
    def from_pairs(cls, zero_mult, pairs, isotropic=True):
        """Build from ``[(nu, mult), ...]``; handy for synthetic spectra."""
        br = tuple(sorted((Branch(float(n), int(d)) for n, d in pairs), key=lambda b: b.nu))
        return cls(int(zero_mult), br, isotropic)


def classify_margin(margin: float, band: float = BORDERLINE_BAND) -> Classification:
    band = max(band, POSDEF_TOL)
    if margin > band:
        return Classification.STRONGLY_ELLIPTIC
    if margin >= -band:
        return Classification.BORDERLINE
    return Classification.VIOLATED


def _symbol_eigenvalues(setup: BoundarySetup, dirs: np.ndarray) -> np.ndarray:
    h = hermitian_symbol(setup, dirs)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    return np.linalg.eigvalsh(h)


def check_strong_ellipticity(
    setup: BoundarySetup,
    n_samples: int = DEFAULT_SAMPLES,
    band: float = BORDERLINE_BAND,
) -> EllipticityReport:
    require_valid(setup)
    n = setup.n_tangential
    dirs = direction_samples(n, n_samples)
    # smallest eigenvalue of I - i gamma.theta is 1 - largest eigenvalue of i gamma.theta
    top = _symbol_eigenvalues(setup, dirs)[:, -1]
    margins = 1.0 - top
    # sequential min-fold in sample order; ties resolve to the first sample
    k = int(np.argmin(margins))
    margin = float(margins[k])
    coverage = (
        "exhaustive (m = 2)"
        if n == 1
        else f"sampled {len(dirs)} unit directions; violated regions narrower than the spacing may be missed"
    )
    return EllipticityReport(
        classify_margin(margin, band), margin, dirs[k].copy(), len(dirs), band, coverage
    )


def sufficient_condition(setup: BoundarySetup, zeta) -> bool:
    """|zeta|^2 I + (gamma.zeta)^2 > 0."""
    return sufficient_margin(setup, zeta) > POSDEF_TOL


def sufficient_margin(setup: BoundarySetup, zeta) -> float:
    z = np.asarray(zeta, dtype=float)
    norm2 = float(np.dot(z, z))
    if norm2 == 0.0:
        raise ZeroCovector("the sufficient condition needs a non-zero covector")
    g = tangential_symbol(setup, z)
    m = norm2 * setup.identity() + g @ g
    m = 0.5 * (m + m.conj().T)
    return float(np.linalg.eigvalsh(m)[0])


def _cluster(values: np.ndarray, tol: float) -> list[tuple[float, int]]:
    out: list[list] = []
    for v in np.sort(values):
        if out and abs(v - out[-1][0] / out[-1][1]) <= tol:
            out[-1][0] += v
            out[-1][1] += 1
        else:
            out.append([v, 1])
    return [(s / c, c) for s, c in out]


def spectrum_at(setup: BoundarySetup, direction, tol: float = CLUSTER_TOL) -> NaturalSpectrum:
    """Cluster the eigenvalues of i gamma.theta at one unit direction."""
    ev = _symbol_eigenvalues(setup, np.atleast_2d(direction))[0]
    zero = int(np.sum(np.abs(ev) <= tol))
    pos = _cluster(ev[ev > tol], tol)
    return NaturalSpectrum.from_pairs(zero, pos, True)


def natural_spectrum(
    setup: BoundarySetup,
    n_samples: int = 64,
    iso_tol: float = 1e-8,
) -> NaturalSpectrum:
    """Spectrum {0 (d0), +-nu_k (d_k)} of i gamma.theta on unit directions.

    ``isotropic`` is False when the sorted eigenvalues vary with the direction
    by more than ``iso_tol``; the branches then describe the worst direction
    (smallest ellipticity margin) only.
    """
    require_valid(setup)
    dirs = direction_samples(setup.n_tangential, n_samples)
    ev = _symbol_eigenvalues(setup, dirs)
    spread = float(np.max(np.ptp(ev, axis=0))) if len(ev) > 1 else 0.0
    isotropic = spread <= iso_tol
    worst = int(np.argmax(ev[:, -1]))
    spec = spectrum_at(setup, dirs[worst])
    if isotropic and spec.dim_v != setup.dim_v:
        # unpaired spectrum cannot be isotropic under theta -> -theta
        isotropic = False
    return NaturalSpectrum(spec.zero_mult, spec.branches, isotropic)
