"""Leading-order parametrix near the boundary.

Everything is written in the scaled distance z = r / sqrt(t). The
tangential momentum integral is split into a direction average and a radial
integral; for every direction theta the Hermitian symbol i gamma.theta is
diagonalized and the p- and omega-integrals are done in closed form with the
scaled complementary error function erfcx. The remaining one-dimensional
radial integrals go to adaptive Gauss-Kronrod quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .boundary import BoundarySetup, hermitian_symbol, require_valid
from .ellipticity import NaturalSpectrum, check_strong_ellipticity
from .errors import (
    BranchCut,
    DomainError,
    IsotropyRequired,
    NonellipticDivergence,
    NotElliptic,
    QuadratureDivergence,
    ResolventPole,
    ShapeMismatch,
)
from .numerics import exact_sum, pmap, sphere_rule
from .spectral import dagger

SQRT_PI = math.sqrt(math.pi)
QUAD_LIMIT = 2 ** 15


@dataclass(frozen=True)
class ProfileConfig:
    """Quadrature controls: direction-rule order and radial tolerances."""

    order: int = 32
    epsabs: float = 1e-10
    epsrel: float = 1e-10
    limit: int = QUAD_LIMIT


DEFAULT_CONFIG = ProfileConfig()


@dataclass(frozen=True)
class ProfileSample:
    z: float
    psi: np.ndarray
    phi: np.ndarray
    j: float | None = None


@dataclass(frozen=True)
class HeatDiagonal:
    """U_0(t|x,x) = (4 pi t)^(-m/2) * bracket."""

    t: float
    r: float
    bracket: np.ndarray = field(repr=False)

    @property
    def z(self) -> float:
        return self.r / math.sqrt(self.t)


# ------------------------------------------------------------- resolvent

def resolvent_kernel(setup: BoundarySetup, lam: complex, zeta, u: float, v: float) -> np.ndarray:
    """Half-line resolvent kernel G(lambda | u, v) at tangential momentum zeta.

    G = (1/2s) {exp(-|u-v| s) I + [I - 2 pi + 2 H (s I - H)^(-1)] exp(-(u+v) s)}
    with H = i gamma.zeta and s = sqrt(|zeta|^2 - lambda) on the principal branch.
    """
    require_valid(setup)
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real >= 0.0:
        raise BranchCut(f"lambda = {lam.real} lies on the cut [0, inf)")
    if u < 0 or v < 0:
        raise ShapeMismatch("normal coordinates must be non-negative")
    z = np.asarray(zeta, dtype=float)
    s = np.sqrt(complex(np.dot(z, z)) - lam)
    h = hermitian_symbol(setup, z)
    ev = np.linalg.eigvalsh(0.5 * (h + dagger(h)))
    if np.min(np.abs(s - ev)) <= 1e-12 * max(1.0, abs(s)):
        raise ResolventPole(f"s = {s} is an eigenvalue of i gamma.zeta")
    eye = setup.identity()
    refl = eye - 2 * setup.pi + 2 * h @ np.linalg.solve(s * eye - h, eye)
    return (np.exp(-abs(u - v) * s) * eye + refl * np.exp(-(u + v) * s)) / (2 * s)


def bromwich_diagonal(
    setup: BoundarySetup,
    t: float,
    r: float,
    zeta=None,
    n_nodes: int = 32,
) -> np.ndarray:
    """Numerical inverse Laplace transform of the resolvent at u = v = r.

    Returns the one-dimensional heat kernel of the mode problem at momentum
    zeta (default zero). In w = -lambda the contour is the Weideman-Trefethen
    parabola w(u) = (N/t)(0.1309 - 0.1194 u^2 + 0.25 i u), discretized by the
    trapezoid rule with step 3/N; the error decays like exp(-1.36 N).
    """
    if zeta is None:
        zeta = np.zeros(setup.n_tangential)
    if not t > 0:
        raise ShapeMismatch("t must be positive")
    n = int(n_nodes)
    h = 3.0 / n
    scale = n / t
    vals = []
    for k in range(-n, n + 1):
        u = k * h
        w = scale * (0.1309 - 0.1194 * u * u + 0.25j * u)
        dw = scale * (-0.2388 * u + 0.25j)
        g = resolvent_kernel(setup, -w, zeta, r, r)
        vals.append(np.exp(t * w) * g * dw)
    return exact_sum(np.array(vals)) * h / (2j * math.pi)


# ------------------------------------------------------- p-integral pieces

def _scaled_g_times_gauss(z: float, rho: float, mu: float) -> float:
    """exp(-rho^2) * exp(z^2) * int_0^inf exp(-(p+z)^2 + 2 p rho mu) dp."""
    lam = rho * mu
    x = z - lam
    if x >= 0:
        return 0.5 * SQRT_PI * math.exp(-rho * rho) * special.erfcx(x)
    # erfcx(x) = 2 exp(x^2) - erfcx(-x); x^2 - rho^2 stays bounded below for |mu| < 1
    return 0.5 * SQRT_PI * (
        2.0 * math.exp(x * x - rho * rho) - math.exp(-rho * rho) * special.erfcx(-x)
    )


def _radial(fn, cfg: ProfileConfig, scale: float = 1.0) -> float:
    """int_0^inf fn(rho) d rho, split at ``scale`` to help the adaptive rule."""
    total = 0.0
    for a, b in ((0.0, scale), (scale, math.inf)):
        val, err = integrate.quad(
            fn, a, b, epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit
        )
        if not math.isfinite(val):
            raise QuadratureDivergence("radial integral is not finite")
        total += val
    return total


@lru_cache(maxsize=4096)
def _psi_radial(z: float, mu: float, n: int, cfg: ProfileConfig) -> float:
    # symmetrized over zeta -> -zeta, i.e. mu -> -mu
    def f(rho):
        return rho ** (n - 1) * 0.5 * (
            _scaled_g_times_gauss(z, rho, mu) + _scaled_g_times_gauss(z, rho, -mu)
        )

    return _radial(f, cfg, _split(z, mu))


@lru_cache(maxsize=4096)
def _phi_radial(z: float, mu: float, n: int, cfg: ProfileConfig) -> float:
    def f(rho):
        return rho ** n * 0.5 * (
            _scaled_g_times_gauss(z, rho, mu) - _scaled_g_times_gauss(z, rho, -mu)
        )

    return mu * _radial(f, cfg, _split(z, mu))


def _split(z: float, mu: float) -> float:
    # the erfcx argument changes sign at rho = z / |mu|
    if abs(mu) > 1e-12 and z > 0:
        return max(min(z / abs(mu), 50.0), 1e-3)
    return 1.0


def _key(x: float) -> float:
    return round(float(x), 12)


def _require_elliptic(setup: BoundarySetup):
    require_valid(setup)
    rep = check_strong_ellipticity(setup)
    if not rep.strongly_elliptic:
        raise NotElliptic(
            f"strong ellipticity violated (margin {rep.min_margin:.6g})", rep.min_margin
        )
    return rep


def _direction_average(setup: BoundarySetup, z: float, radial, cfg: ProfileConfig) -> np.ndarray:
    n = setup.n_tangential
    dirs, w = sphere_rule(n, cfg.order)
    h = hermitian_symbol(setup, dirs)
    lam, vec = np.linalg.eigh(0.5 * (h + dagger(h)))
    zk = _key(z)
    f = np.array([[radial(zk, _key(mu), n, cfg) for mu in row] for row in lam])
    mats = (vec * f[:, None, :]) @ dagger(vec)
    # polar measure |S^(n-1)| / pi^(n/2) = 2 / Gamma(n/2)
    return (2.0 / math.gamma(0.5 * n)) * exact_sum(mats, w)


def _check_z(z):
    z = float(z)
    if not z >= 0 or not math.isfinite(z):
        raise ShapeMismatch(f"z must be finite and non-negative, got {z}")
    return z


def psi(setup: BoundarySetup, z: float, cfg: ProfileConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Psi(z) = int dzeta/pi^((m-1)/2) int_0^inf dp exp{-|zeta|^2 - (p+z)^2 + 2ip gamma.zeta}."""
    z = _check_z(z)
    _require_elliptic(setup)
    out = math.exp(-z * z) * _direction_average(setup, z, _psi_radial, cfg)
    return 0.5 * (out + dagger(out))


def phi(setup: BoundarySetup, z: float, cfg: ProfileConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Phi(z) = -2 exp(-z^2) I - 2 dPsi/dz.

    Differentiating under the integral, d/dz of the p-integral g(z, l) is
    -exp(-z^2) - 2 l g(z, l); the exp(-z^2) pieces cancel and
    Phi = 4 <H g(z, H)> with H = i gamma.zeta.
    """
    z = _check_z(z)
    _require_elliptic(setup)
    out = 4.0 * math.exp(-z * z) * _direction_average(setup, z, _phi_radial, cfg)
    return 0.5 * (out + dagger(out))


def profile_sample(setup: BoundarySetup, z: float, with_j: bool = False,
                   cfg: ProfileConfig = DEFAULT_CONFIG) -> ProfileSample:
    ph = phi(setup, z, cfg)
    return ProfileSample(float(z), psi(setup, z, cfg), ph, float(np.trace(ph).real) if with_j else None)


def profile_sweep(setup: BoundarySetup, zs, with_j: bool = False,
                  cfg: ProfileConfig = DEFAULT_CONFIG) -> list[ProfileSample]:
    """Samples at every z, computed in parallel and returned in input order."""
    return pmap(lambda z: profile_sample(setup, z, with_j, cfg), list(zs))


def heat_diagonal(setup: BoundarySetup, t: float, r: float,
                  cfg: ProfileConfig = DEFAULT_CONFIG) -> HeatDiagonal:
    """Scale-invariant bracket I + exp(-r^2/t)(I - 2 pi) + Phi(r / sqrt t)."""
    if not t > 0:
        raise ShapeMismatch("t must be positive")
    if not r >= 0:
        raise ShapeMismatch("r must be non-negative")
    z = r / math.sqrt(t)
    eye = setup.identity()
    bracket = eye + math.exp(-z * z) * (eye - 2 * setup.pi) + phi(setup, z, cfg)
    return HeatDiagonal(float(t), float(r), bracket)


# ------------------------------------------------------------ trace profile

def _branch_integrand(nu: float, z: float, n: int):
    """Radial integrand of the scalar j(nu, z) after the omega-integral.

    The omega-integral is the residue at omega = i nu rho plus the real-line
    integral (pi a / 2) exp(-z^2)[erfcx(a - z) + erfcx(a + z)], a = nu rho.
    """

    def f(rho):
        a = nu * rho
        x = a - z
        gauss = math.exp(-rho * rho)
        if x >= 0:
            pole = -SQRT_PI * a * math.exp(-rho * rho * (1 - nu * nu) - 2 * a * z)
            line = 0.5 * SQRT_PI * a * gauss * math.exp(-z * z) * (
                special.erfcx(x) + special.erfcx(a + z)
            )
            val = pole + line
        else:
            # the growing part of erfcx(x) cancels the residue exactly
            val = 0.5 * SQRT_PI * a * gauss * math.exp(-z * z) * (
                special.erfcx(a + z) - special.erfcx(-x)
            )
        return rho ** (n - 1) * val

    return f


def _branch_j(nu: float, z: float, m: int, cfg: ProfileConfig) -> float:
    n = m - 1
    f = _branch_integrand(nu, z, n)
    split = z / nu if nu > 0 and z > 0 else 1.0
    # at nu = 1 the integrand decays only like exp(-2 rho z)
    decay = max(1.0 - nu * nu, 2 * nu * z, 1e-12)
    tail = split + 4.0 * n / decay if nu * nu >= 1 - 1e-12 else split + 10.0
    total = 0.0
    for a, b in ((0.0, split), (split, tail), (tail, math.inf)):
        val, _ = integrate.quad(f, a, b, epsabs=0.0 if a else cfg.epsabs,
                                epsrel=cfg.epsrel, limit=cfg.limit)
        total += val
    if not math.isfinite(total):
        raise QuadratureDivergence("trace-profile integral is not finite")
    return -4.0 * (2.0 / math.gamma(0.5 * n)) * total


def trace_profile_j(spectrum: NaturalSpectrum, m: int, z: float,
                    cfg: ProfileConfig = DEFAULT_CONFIG) -> float:
    """J(z) = tr Phi(z) from the natural spectrum {0 (d0), +-nu_k (d_k)}."""
    if not spectrum.isotropic:
        raise IsotropyRequired("the trace profile needs a direction-independent spectrum")
    if m < 2:
        raise ShapeMismatch("m must be >= 2")
    z = float(z)
    if not z >= 0:
        raise ShapeMismatch("z must be non-negative")
    for b in spectrum.branches:
        if b.nu > 1 + 1e-12:
            raise NonellipticDivergence(
                f"branch nu = {b.nu:.6g} > 1: the radial integral diverges for every z"
            )
        if b.nu >= 1 - 1e-12 and z == 0:
            raise NonellipticDivergence("J(0) diverges on a nu = 1 branch")
    return math.fsum(b.mult * _branch_j(b.nu, z, m, cfg) for b in spectrum.branches if b.nu > 0)


@dataclass(frozen=True)
class SingularityFit:
    fitted_coeff: float
    expected: float
    rel_err: float


def singularity_expected(d: int, m: int) -> float:
    return 2.0 * d * (m - 1) * math.gamma(0.5 * m)


def singularity_probe(spectrum: NaturalSpectrum, m: int, z_list=(0.1, 0.05, 0.025),
                      cfg: ProfileConfig = DEFAULT_CONFIG) -> SingularityFit:
    """Fit J(z) ~ C / z^m by extrapolating z^m J(z) polynomially to z = 0."""
    zs = [float(z) for z in z_list]
    if len(zs) < 2 or any(z <= 0 for z in zs) or any(a <= b for a, b in zip(zs, zs[1:])):
        raise ShapeMismatch("z_list must hold at least two positive, strictly decreasing values")
    ones = [b for b in spectrum.branches if abs(b.nu - 1.0) <= 1e-8]
    if not ones:
        raise DomainError("spectrum has no nu = 1 branch")
    d = sum(b.mult for b in ones)
    scaled = [z ** m * trace_profile_j(spectrum, m, z, cfg) for z in zs]
    # interpolating polynomial through (z, z^m J) evaluated at z = 0
    coeff = np.polynomial.polynomial.polyfit(zs, scaled, len(zs) - 1)[0]
    expected = singularity_expected(d, m)
    return SingularityFit(float(coeff), expected, abs(coeff - expected) / expected)
