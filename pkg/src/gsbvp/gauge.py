"""Boundary problems induced by linearized gauge theories.

A gauge generator R maps ghosts (fibre G, metric gamma) to fields (fibre V,
metric E). At a boundary point its leading symbol splits as

    sigma(R; xi) = nu xi_N + sum_j mu^j xi_j,

and the adjoint is nubar = gamma^(-1) nu^dag E. The induced boundary data
are pi = I - nu nubar and gamma^j = -nu nubar mu^j nubar, composed right to
left as maps on V. Everything is evaluated in orthonormal frames obtained
from Cholesky factors of the metrics, where nubar is a plain conjugate
transpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import SETUP_TOL, BoundarySetup, Violation, clifford_generators
from .ellipticity import (
    EllipticityReport,
    check_strong_ellipticity,
    sufficient_margin,
)
from .errors import (
    ClaimViolated,
    InvalidSetup,
    NormalizationFailure,
    ShapeMismatch,
    UnsupportedModel,
)
from .numerics import direction_samples
from .spectral import dagger

CLAIM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaugeSymbol:
    """Boundary restriction of the leading symbol of a gauge generator.

    ``indefinite_metric`` admits a non-degenerate indefinite field metric
    (the DeWitt metric of gravity is one); the frame is then built from a
    positive metric that agrees with E on the range of nu.
    """

    dim_v: int
    dim_g: int
    nu: np.ndarray
    mu: tuple
    e_metric: np.ndarray
    g_metric: np.ndarray
    indefinite_metric: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        dv, dg = int(self.dim_v), int(self.dim_g)
        if dg < 1 or dv <= dg:
            raise ShapeMismatch(f"need dim_v > dim_g >= 1, got ({dv}, {dg})")
        nu = _mat(self.nu, (dv, dg), "nu")
        mu = tuple(_mat(x, (dv, dg), f"mu[{j}]") for j, x in enumerate(self.mu))
        if not mu:
            raise ShapeMismatch("need at least one tangential symbol (m >= 2)")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "e_metric", _mat(self.e_metric, (dv, dv), "e_metric"))
        object.__setattr__(self, "g_metric", _mat(self.g_metric, (dg, dg), "g_metric"))

    @property
    def m(self) -> int:
        return len(self.mu) + 1

    def nubar(self) -> np.ndarray:
        return np.linalg.solve(self.g_metric, dagger(self.nu) @ self.e_metric)

    def scaled(self, mu_factor: float) -> "GaugeSymbol":
        """Copy with every tangential symbol multiplied by ``mu_factor``."""
        return GaugeSymbol(
            self.dim_v, self.dim_g, self.nu, tuple(mu_factor * x for x in self.mu),
            self.e_metric, self.g_metric, self.indefinite_metric, self.label,
        )


def _mat(a, shape, name):
    arr = np.array(a, dtype=complex)
    if arr.shape != shape:
        raise ShapeMismatch(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatch(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class GaugeValidation:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def names(self) -> list[str]:
        return [v.name for v in self.violations]


def _herm_residual(a):
    return float(np.linalg.norm(a - dagger(a)))


def validate_gauge(sym: GaugeSymbol, tol: float = SETUP_TOL) -> GaugeValidation:
    """Metric definiteness and the normalization nubar nu = I_G, with residuals."""
    out = []
    e, g = sym.e_metric, sym.g_metric
    if _herm_residual(e) > tol * max(1.0, np.linalg.norm(e)):
        out.append(Violation("E not Hermitian", _herm_residual(e)))
    ev = np.linalg.eigvalsh(0.5 * (e + dagger(e)))
    if sym.indefinite_metric:
        if np.min(np.abs(ev)) <= tol:
            out.append(Violation("E degenerate", float(np.min(np.abs(ev)))))
    elif ev[0] <= tol:
        out.append(Violation("E not positive-definite", float(ev[0])))
    if _herm_residual(g) > tol * max(1.0, np.linalg.norm(g)):
        out.append(Violation("γ not Hermitian", _herm_residual(g)))
    gv = np.linalg.eigvalsh(0.5 * (g + dagger(g)))
    if gv[0] <= tol:
        out.append(Violation("γ not positive-definite", float(gv[0])))
    else:
        res = float(np.linalg.norm(sym.nubar() @ sym.nu - np.eye(sym.dim_g), 2))
        if res > tol:
            out.append(Violation("ν̄ν ≠ I_G", res))
    return GaugeValidation(tuple(out))


def _require_valid(sym: GaugeSymbol):
    rep = validate_gauge(sym)
    if not rep.ok:
        raise InvalidSetup("invalid gauge symbol: " + "; ".join(map(str, rep.violations)),
                           list(rep.violations))


def _frame_metric(sym: GaugeSymbol) -> np.ndarray:
    """Positive metric on V in which pi and gamma^j are (anti-)self-adjoint.

    For positive E this is E itself. Otherwise E is kept on range(nu nubar),
    where it equals nubar^dag gamma nubar and is positive, and the Euclidean
    metric is used on the complementary range of pi.
    """
    e = 0.5 * (sym.e_metric + dagger(sym.e_metric))
    if not sym.indefinite_metric:
        return e
    nb = sym.nubar()
    pi = np.eye(sym.dim_v) - sym.nu @ nb
    return dagger(nb) @ sym.g_metric @ nb + dagger(pi) @ pi


def orthonormal_symbols(sym: GaugeSymbol) -> tuple[np.ndarray, list[np.ndarray]]:
    """nu' = L_E^dag nu L_g^(-dag), and the same for every mu^j."""
    le = np.linalg.cholesky(_frame_metric(sym))
    lg = np.linalg.cholesky(0.5 * (sym.g_metric + dagger(sym.g_metric)))

    def tr(a):
        return dagger(le) @ a @ np.linalg.inv(dagger(lg))

    return tr(sym.nu), [tr(x) for x in sym.mu]


def induced_boundary_setup(sym: GaugeSymbol) -> BoundarySetup:
    """pi = I - nu nubar and gamma^j = -nu nubar mu^j nubar in the orthonormal frame."""
    _require_valid(sym)
    nu, mu = orthonormal_symbols(sym)
    proj = nu @ dagger(nu)
    pi = np.eye(sym.dim_v) - proj
    gammas = [-proj @ x @ dagger(nu) for x in mu]
    scale = max(1.0, max(np.linalg.norm(g) for g in gammas))
    for j, g in enumerate(gammas):
        res = float(np.linalg.norm(g + dagger(g)))
        if res > CLAIM_TOL * scale:
            raise ClaimViolated(f"gamma[{j}] is not anti-self-adjoint (residual {res:.3e})")
        res = max(float(np.linalg.norm(pi @ g)), float(np.linalg.norm(g @ pi)))
        if res > CLAIM_TOL * scale:
            raise ClaimViolated(f"pi gamma[{j}] != 0 (residual {res:.3e})")
    return BoundarySetup(sym.m, sym.dim_v, pi, gammas, label=f"induced({sym.label})")


@dataclass(frozen=True)
class GaugeEllipticityReport:
    induced: BoundarySetup
    report: EllipticityReport
    condition_85_margin: float
    directions: np.ndarray = field(repr=False)
    margins_85: np.ndarray = field(repr=False)
    margins_sufficient: np.ndarray = field(repr=False)


def condition_85(sym: GaugeSymbol, zeta) -> float:
    """Smallest eigenvalue of nu^dag [|zeta|^2 I - mu(zeta) mu(zeta)^dag] nu.

    This is (I - pi)[|zeta|^2 I - mu mubar](I - pi) restricted to the range
    of I - pi, written in the orthonormal frame where nu has orthonormal
    columns spanning that range.
    """
    nu, mu = orthonormal_symbols(sym)
    z = np.asarray(zeta, dtype=float)
    mz = sum(c * x for c, x in zip(z, mu))
    blk = float(z @ z) * np.eye(sym.dim_g) - dagger(nu) @ mz @ dagger(mz) @ nu
    return float(np.linalg.eigvalsh(0.5 * (blk + dagger(blk)))[0])


def gauge_ellipticity(sym: GaugeSymbol, n_samples: int = 512) -> GaugeEllipticityReport:
    """Strong-ellipticity report of the induced problem plus the direct margin test."""
    induced = induced_boundary_setup(sym)
    rep = check_strong_ellipticity(induced, n_samples)
    dirs = direction_samples(sym.m - 1, n_samples)
    m85 = np.array([condition_85(sym, d) for d in dirs])
    msuf = np.array([sufficient_margin(induced, d) for d in dirs])
    return GaugeEllipticityReport(induced, rep, float(np.min(m85)), dirs, m85, msuf)


# ------------------------------------------------------------ built-ins

def sym_tensor_basis(m: int) -> list[np.ndarray]:
    """Orthonormal basis of symmetric m x m matrices under tr(h k)."""
    out = []
    for a in range(m):
        e = np.zeros((m, m))
        e[a, a] = 1.0
        out.append(e)
    for a in range(m):
        for b in range(a + 1, m):
            e = np.zeros((m, m))
            e[a, b] = e[b, a] = 1.0 / math.sqrt(2.0)
            out.append(e)
    return out


def abelian_vector(m: int) -> GaugeSymbol:
    """Maxwell-type gauge field: V = covectors, G = scalars, sigma(R; xi) = i xi."""
    if m < 2:
        raise UnsupportedModel("abelian-vector needs m >= 2")
    eye = np.eye(m)
    nu = 1j * eye[:, [m - 1]]
    mu = tuple(1j * eye[:, [j]] for j in range(m - 1))
    return GaugeSymbol(m, 1, nu, mu, np.eye(m), np.eye(1), label=f"abelian-vector(m={m})")


GRAVITON_LAMBDA = -0.5


def graviton(m: int, lam: float = GRAVITON_LAMBDA) -> GaugeSymbol:
    """Linearized gravity: V = symmetric 2-tensors, G = covectors.

    sigma(R; xi) eps = i c (xi eps^T + eps xi^T) and E = I_sym + lam t t^T
    with t the trace functional. Then gamma^(-1) sigma(xi)^dag E sigma(xi) =
    gamma^(-1) c^2 [2 |xi|^2 I + (2 + 4 lam) xi xi^T], so the ghost operator
    is Laplace type only for lam = -1/2 (the DeWitt value); c = 1/sqrt(2)
    makes gamma = I. For m >= 3 that metric is indefinite.
    """
    if m < 3:
        raise UnsupportedModel("graviton needs m >= 3")
    lam = float(lam)
    if abs(lam + 1.0 / m) <= 1e-12:
        raise NormalizationFailure(f"lambda = -1/{m} makes the fibre metric degenerate")
    if abs(lam - GRAVITON_LAMBDA) > 1e-12:
        raise NormalizationFailure(
            f"no normalization gives a Laplace-type ghost operator for lambda = {lam}; "
            "the xi xi^T term vanishes only for lambda = -1/2"
        )
    basis = sym_tensor_basis(m)
    dv = len(basis)
    trace = np.array([np.trace(b) for b in basis])
    e_metric = np.eye(dv) + lam * np.outer(trace, trace)
    c = 1.0 / math.sqrt(2.0)
    eye = np.eye(m)

    def sigma(xi):
        cols = []
        for eps in eye:
            t = np.outer(xi, eps) + np.outer(eps, xi)
            cols.append([np.sum(b * t) for b in basis])
        return 1j * c * np.array(cols).T

    nu = sigma(eye[m - 1])
    mu = tuple(sigma(eye[j]) for j in range(m - 1))
    sym = GaugeSymbol(dv, m, nu, mu, e_metric, 2 * c * c * np.eye(m),
                      indefinite_metric=bool(np.min(np.linalg.eigvalsh(e_metric)) < 0),
                      label=f"graviton(m={m}, lambda={lam})")
    _check_laplace_type(sym)
    return sym


def _check_laplace_type(sym: GaugeSymbol, tol: float = 1e-10):
    """Verify gamma^(-1) sigma(xi)^dag E sigma(xi) = |xi|^2 I on probe covectors."""
    g_inv = np.linalg.inv(sym.g_metric)
    for xi in direction_samples(sym.m, 8):
        s = xi[-1] * sym.nu + sum(x * b for x, b in zip(xi[:-1], sym.mu))
        lhs = g_inv @ dagger(s) @ sym.e_metric @ s
        if np.linalg.norm(lhs - float(xi @ xi) * np.eye(sym.dim_g)) > tol:
            raise NormalizationFailure("ghost operator symbol is not |xi|^2 I")


BUILTIN_MODELS = ("abelian-vector", "graviton")


def builtin_model(name: str, m: int, params: dict | None = None) -> GaugeSymbol:
    params = dict(params or {})
    if name == "abelian-vector":
        if params:
            raise UnsupportedModel(f"abelian-vector takes no parameters, got {sorted(params)}")
        return abelian_vector(m)
    if name == "graviton":
        lam = params.pop("lambda", GRAVITON_LAMBDA)
        if params:
            raise UnsupportedModel(f"unknown graviton parameters {sorted(params)}")
        return graviton(m, lam)
    raise UnsupportedModel(f"unknown gauge model {name!r}; choose from {BUILTIN_MODELS}")


# -------------------------------------------------------- random symbols

def _random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def _random_metric(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a @ dagger(a) / n + 0.5 * np.eye(n)


def random_gauge_symbol(rng: np.random.Generator, m: int | None = None) -> GaugeSymbol:
    """Seeded random symbol with a Laplace-type ghost operator.

    Orthonormal-frame blocks S_a (a = 1..m, S_m = nu) with
    S_a^dag S_b + S_b^dag S_a = 2 delta_ab I_G come from one of two
    families: unit vectors of C^dim_v orthonormal over the reals
    (dim_g = 1), or stacked Clifford blocks [alpha i c_a ; beta e_a x I_G]
    with alpha^2 + beta^2 = 1. They are then mixed by a random rotation of
    the covector, random unitaries on V and G, and pulled back through
    random positive metrics.
    """
    m = int(rng.integers(2, 5)) if m is None else int(m)
    if rng.random() < 0.5:
        dv = int(rng.integers(max(2, (m + 1) // 2), max(2, (m + 1) // 2) + 3))
        dg = 1
        # orthonormal in R^(2 dv), read as complex vectors
        q = _random_orthogonal(rng, 2 * dv)[:, :m]
        blocks = [(q[:dv, a] + 1j * q[dv:, a]).reshape(dv, 1) for a in range(m)]
    else:
        c = clifford_generators(m)
        dg = c[0].shape[0]
        alpha = float(rng.uniform(0.05, 0.999))
        beta = math.sqrt(1.0 - alpha * alpha)
        dv = dg + m * dg
        blocks = []
        for a in range(m):
            top = alpha * 1j * c[a]
            bottom = beta * np.kron(np.eye(m)[:, [a]], np.eye(dg))
            blocks.append(np.vstack([top, bottom]))
    rot = _random_orthogonal(rng, m)
    blocks = [sum(rot[a, b] * blocks[b] for b in range(m)) for a in range(m)]
    u = _random_unitary(rng, dv)
    w = _random_unitary(rng, dg)
    blocks = [u @ s @ w for s in blocks]
    e = _random_metric(rng, dv)
    g = _random_metric(rng, dg)
    le = np.linalg.cholesky(e)
    lg = np.linalg.cholesky(g)
    # undo the orthonormal-frame map: S = L_E^(-dag) S' L_g^dag
    phys = [np.linalg.solve(dagger(le), s) @ dagger(lg) for s in blocks]
    return GaugeSymbol(dv, dg, phys[-1], tuple(phys[:-1]), e, g, label="random")
