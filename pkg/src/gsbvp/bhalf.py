"""The boundary heat-kernel coefficient b_{1/2} and the global A_0, A_{1/2}.

    b_{1/2} = -(sqrt(pi)/2)(I + 2 pi) + sqrt(pi) * I_G,
    I_G     = int dzeta / pi^((m-1)/2) exp(-|zeta|^2 - (gamma.zeta)^2),

with the Gaussian matrix integral I_G evaluated three ways: tensor
Gauss-Hermite, a spherical average with the radial integral done exactly,
and a truncated moment series. Closed forms cover the Abelian, Dirac-type
and pure Dirac structures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .boundary import BoundarySetup, hermitian_symbol, require_valid
from .ellipticity import check_strong_ellipticity
from .errors import (
    GSBVPError,
    NoClosedForm,
    NotElliptic,
    OrderTooHigh,
    QuadratureDivergence,
    ShapeMismatch,
)
from .numerics import exact_sum, hermite_product_rule, sphere_rule
from .spectral import dagger, matfun

SQRT_PI = math.sqrt(math.pi)
STRUCTURE_TOL = 1e-10
BRANCH_AGREEMENT = 1e-10
MAX_SERIES_ORDER = 4


class Method(str, enum.Enum):
    QUADRATURE_TENSOR = "QuadratureTensor"
    QUADRATURE_SPHERICAL = "QuadratureSpherical"
    SERIES = "Series"
    CLOSED_MIXED = "ClosedMixed"
    CLOSED_ABELIAN = "ClosedAbelian"
    CLOSED_DIRAC = "ClosedDirac"
    CLOSED_PURE_DIRAC = "ClosedPureDirac"


@dataclass(frozen=True)
class BHalfResult:
    value: np.ndarray
    trace: float
    method: Method
    err_estimate: float

    @classmethod
    def build(cls, value, method, err):
        value = 0.5 * (value + dagger(value))
        return cls(value, float(np.trace(value).real), method, float(err))


def a0(vol_m: float, dim_v: int) -> float:
    if vol_m <= 0:
        raise ShapeMismatch("volume must be positive")
    return float(vol_m) * int(dim_v)


def _frob(a) -> float:
    return float(np.linalg.norm(a))


def _require_elliptic(setup: BoundarySetup):
    rep = check_strong_ellipticity(setup)
    if not rep.strongly_elliptic:
        raise NotElliptic(
            f"strong ellipticity violated (margin {rep.min_margin:.6g})", rep.min_margin
        )
    return rep


def _assemble(setup: BoundarySetup, integral: np.ndarray) -> np.ndarray:
    eye = setup.identity()
    return -0.5 * SQRT_PI * (eye + 2 * setup.pi) + SQRT_PI * integral


# ------------------------------------------------------------ quadrature

def gaussian_integral_spherical(setup: BoundarySetup, order: int) -> np.ndarray:
    """<(I + (gamma.theta)^2)^(-(m-1)/2)> over the unit sphere."""
    n = setup.n_tangential
    dirs, w = sphere_rule(n, order)
    h = hermitian_symbol(setup, dirs)
    lam, vec = np.linalg.eigh(0.5 * (h + dagger(h)))
    base = 1.0 - lam * lam
    if np.any(base <= 0):
        raise NotElliptic("I + (gamma.theta)^2 is not positive definite on the quadrature sphere")
    f = base ** (-0.5 * n)
    vals = (vec * f[:, None, :]) @ dagger(vec)
    return exact_sum(vals, w)


def gaussian_integral_tensor(setup: BoundarySetup, order: int, width: float) -> np.ndarray:
    """Gauss-Hermite product rule after rescaling zeta = y / sqrt(width).

    ``width`` = 1 - nu_max^2 turns the growing factor exp(-(gamma.zeta)^2)
    into a bounded one at every node.
    """
    n = setup.n_tangential
    c = float(width)
    y, w = hermite_product_rule(n, order)
    h = hermitian_symbol(setup, y)
    lam, vec = np.linalg.eigh(0.5 * (h + dagger(h)))
    r2 = np.sum(y * y, axis=1)[:, None]
    with np.errstate(over="raise", invalid="raise"):
        try:
            f = np.exp((lam * lam - (1.0 - c) * r2) / c)
        except FloatingPointError as exc:
            raise QuadratureDivergence("node values overflow") from exc
    if not np.all(np.isfinite(f)):
        raise QuadratureDivergence("node values overflow")
    vals = (vec * f[:, None, :]) @ dagger(vec)
    return c ** (-0.5 * n) * exact_sum(vals, w)


def bhalf_quadrature(setup: BoundarySetup, path: str = "spherical", order: int = 40) -> BHalfResult:
    """b_{1/2} by numerical quadrature of the Gaussian matrix integral.

    ``path`` is ``"spherical"`` (exact radial integral, averaged direction
    rule) or ``"tensor"`` (Gauss-Hermite product rule, ``order`` nodes per
    axis). The error estimate compares ``order`` with ``order // 2``.
    """
    require_valid(setup)
    rep = _require_elliptic(setup)
    order = int(order)
    if order < 4:
        raise ShapeMismatch("quadrature order must be >= 4")
    if path == "spherical":
        hi = gaussian_integral_spherical(setup, order)
        lo = gaussian_integral_spherical(setup, order // 2)
        method = Method.QUADRATURE_SPHERICAL
    elif path == "tensor":
        width = max(1.0 - rep.nu_max ** 2, 1e-6)
        hi = gaussian_integral_tensor(setup, order, width)
        lo = gaussian_integral_tensor(setup, order // 2, width)
        method = Method.QUADRATURE_TENSOR
    else:
        raise ShapeMismatch(f"unknown quadrature path {path!r}")
    value = _assemble(setup, hi)
    return BHalfResult.build(value, method, SQRT_PI * _frob(hi - lo))


# ---------------------------------------------------------------- series

def series_coefficient(n: int) -> float:
    """(-1)^n (2n)! / ((n!)^2 2^(2n))."""
    return (-1) ** n * math.comb(2 * n, n) / 4 ** n


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in _compositions(n - k, parts - 1):
            yield (k,) + rest


def symmetrized_contraction(gammas, n: int) -> np.ndarray:
    """Metric-contracted symmetrized product of 2n gamma matrices.

    Averages gamma^(i1) ... gamma^(i2n) over all orderings of the index word
    (i1, i1, i2, i2, ..., in, in), then sums over i1..in. Orderings are
    enumerated as distinct words of the letter multiset; each distinct word
    stands for the same number of permutations, so the average is exact.
    """
    g = [np.asarray(x, dtype=complex) for x in gammas]
    r = len(g)
    d = g[0].shape[0]

    @lru_cache(maxsize=None)
    def word_sum(counts):
        # sum of products over all distinct words with these letter counts
        if not any(counts):
            return np.eye(d, dtype=complex)
        acc = np.zeros((d, d), dtype=complex)
        for i, c in enumerate(counts):
            if c:
                rest = counts[:i] + (c - 1,) + counts[i + 1:]
                acc = acc + g[i] @ word_sum(rest)
        return acc

    total = np.zeros((d, d), dtype=complex)
    for k in _compositions(n, r):
        tuples = math.factorial(n) // math.prod(math.factorial(x) for x in k)
        counts = tuple(2 * x for x in k)
        words = math.factorial(2 * n) // math.prod(math.factorial(x) for x in counts)
        total = total + tuples * word_sum(counts) / words
    return total


def bhalf_series(setup: BoundarySetup, n_max: int = 4) -> BHalfResult:
    """Partial sum of the moment expansion of b_{1/2} in the gamma matrices."""
    require_valid(setup)
    if n_max > MAX_SERIES_ORDER:
        raise OrderTooHigh(f"n_max = {n_max} exceeds {MAX_SERIES_ORDER}")
    if n_max < 0:
        raise ShapeMismatch("n_max must be non-negative")
    eye = setup.identity()
    acc = eye - 2 * setup.pi
    last = np.zeros_like(acc)
    for n in range(1, n_max + 1):
        last = 2 * series_coefficient(n) * symmetrized_contraction(setup.gamma, n)
        acc = acc + last
    value = 0.5 * SQRT_PI * acc
    return BHalfResult.build(value, Method.SERIES, 0.5 * SQRT_PI * _frob(last))


# ----------------------------------------------------------- closed forms

def _scale(setup):
    return max(1.0, max(_frob(g) for g in setup.gamma) ** 2)


def is_abelian(setup: BoundarySetup, tol: float = STRUCTURE_TOL) -> bool:
    g = setup.gamma
    s = _scale(setup)
    return all(
        _frob(g[i] @ g[j] - g[j] @ g[i]) <= tol * s
        for i in range(len(g))
        for j in range(i + 1, len(g))
    )


def is_dirac_type(setup: BoundarySetup, tol: float = STRUCTURE_TOL) -> bool:
    g = setup.gamma
    g2 = setup.gamma_squared() / setup.n_tangential
    s = _scale(setup)
    for i, j in product(range(len(g)), repeat=2):
        target = 2 * g2 if i == j else 0.0
        if _frob(g[i] @ g[j] + g[j] @ g[i] - target) > tol * s:
            return False
    return True


def pure_dirac_kappa(setup: BoundarySetup, tol: float = STRUCTURE_TOL) -> float | None:
    """kappa with gamma^2 = -kappa (m-1)(I - pi), or None."""
    comp = setup.complement()
    rank = float(np.trace(comp).real)
    if rank < 0.5:
        return None
    g2 = setup.gamma_squared()
    kappa = -float(np.trace(g2).real) / (setup.n_tangential * rank)
    if _frob(g2 + kappa * setup.n_tangential * comp) > tol * _scale(setup):
        return None
    return kappa


def _formula_abelian(setup):
    eye = setup.identity()
    root = matfun(eye + setup.gamma_squared(), _inv_power(0.5))
    return 0.5 * SQRT_PI * (-eye - 2 * setup.pi + 2 * root)


def _formula_dirac(setup):
    eye = setup.identity()
    n = setup.n_tangential
    root = matfun(eye + setup.gamma_squared() / n, _inv_power(0.5 * n))
    return 0.5 * SQRT_PI * (-eye - 2 * setup.pi + 2 * root)


def _formula_pure_dirac(setup, kappa):
    if kappa >= 1.0:
        raise NotElliptic(f"pure Dirac structure with kappa = {kappa:.6g} >= 1", 1.0 - math.sqrt(kappa))
    n = setup.n_tangential
    comp = setup.complement()
    return 0.5 * SQRT_PI * (-setup.pi + comp * (2 * (1.0 - kappa) ** (-0.5 * n) - 1.0))


def _inv_power(p):
    def f(x):
        if np.any(x <= 0):
            raise NotElliptic("matrix under the inverse root is not positive definite")
        return x ** (-p)
    return f


_BRANCHES = ("pure_dirac", "dirac", "abelian", "mixed")


def applicable_branches(setup: BoundarySetup) -> list[str]:
    """Closed-form branches whose structure test passes, in precedence order."""
    out = []
    dirac = is_dirac_type(setup)
    if dirac and pure_dirac_kappa(setup) is not None:
        out.append("pure_dirac")
    if dirac:
        out.append("dirac")
    if is_abelian(setup):
        out.append("abelian")
    if setup.is_gamma_zero():
        out.append("mixed")
    return out


def _evaluate_branch(setup, branch):
    if branch == "pure_dirac":
        kappa = pure_dirac_kappa(setup, tol=math.inf)
        if kappa is None:
            raise NoClosedForm("pure Dirac formula needs a non-trivial oblique sector")
        return _formula_pure_dirac(setup, kappa), Method.CLOSED_PURE_DIRAC
    if branch == "dirac":
        return _formula_dirac(setup), Method.CLOSED_DIRAC
    if branch == "abelian":
        return _formula_abelian(setup), Method.CLOSED_ABELIAN
    if branch == "mixed":
        return _formula_abelian(setup), Method.CLOSED_MIXED
    raise NoClosedForm(f"unknown branch {branch!r}")


def bhalf_closed(setup: BoundarySetup, branch: str | None = None) -> BHalfResult:
    """Closed-form b_{1/2}.

    Without ``branch`` the most specific applicable formula is used
    (gamma = 0 reports as mixed; otherwise pure Dirac > Dirac-type >
    Abelian) and every other applicable formula must agree with it. Passing
    ``branch`` forces a formula without its structure test, which is how the
    Abelian formula's failure on non-commuting gamma is exhibited.
    """
    require_valid(setup)
    _require_elliptic(setup)
    if branch is not None:
        if branch not in _BRANCHES:
            raise NoClosedForm(f"unknown branch {branch!r}")
        value, method = _evaluate_branch(setup, branch)
        return BHalfResult.build(value, method, 0.0)

    found = applicable_branches(setup)
    if not found:
        raise NoClosedForm("gamma is neither zero, commuting, nor of Dirac type")
    primary = "mixed" if "mixed" in found else found[0]
    value, method = _evaluate_branch(setup, primary)
    for other in found:
        if other == primary:
            continue
        alt, _ = _evaluate_branch(setup, other)
        gap = _frob(alt - value)
        if gap > BRANCH_AGREEMENT * max(1.0, _frob(value)):
            raise AssertionError(f"closed forms {primary} and {other} disagree by {gap:.3e}")
    return BHalfResult.build(value, method, 0.0)


# ------------------------------------------------------------------ mesh

@dataclass(frozen=True)
class BoundaryMesh:
    cells: tuple

    def __post_init__(self):
        cells = tuple((c[0], float(c[1])) for c in self.cells)
        if not cells:
            raise ShapeMismatch("mesh has no cells")
        m, d = cells[0][0].m, cells[0][0].dim_v
        for k, (s, area) in enumerate(cells):
            if s.m != m or s.dim_v != d:
                raise ShapeMismatch(f"cell {k} has (m, dim_v) = ({s.m}, {s.dim_v}), expected ({m}, {d})")
            if not area > 0:
                raise ShapeMismatch(f"cell {k} has non-positive area {area}")
        object.__setattr__(self, "cells", cells)

    @property
    def total_area(self) -> float:
        return math.fsum(a for _, a in self.cells)


def bhalf(setup: BoundarySetup, method: str = "auto", order: int = 40, n_max: int = 4) -> BHalfResult:
    """Dispatch on a method selector: auto | closed | quad | tensor | series."""
    if method == "auto":
        try:
            return bhalf_closed(setup)
        except NoClosedForm:
            return bhalf_quadrature(setup, "spherical", order)
    if method == "closed":
        return bhalf_closed(setup)
    if method in ("quad", "spherical"):
        return bhalf_quadrature(setup, "spherical", order)
    if method == "tensor":
        return bhalf_quadrature(setup, "tensor", order)
    if method == "series":
        return bhalf_series(setup, n_max)
    raise ShapeMismatch(f"unknown method {method!r}")


def a_half(mesh: BoundaryMesh, method: str = "auto", order: int = 40) -> float:
    """A_{1/2} = sum over cells of area * tr b_{1/2}, summed exactly in cell order."""
    terms = []
    for k, (setup, area) in enumerate(mesh.cells):
        try:
            res = bhalf(setup, method, order)
        except GSBVPError as exc:
            exc.args = (f"cell {k}: {exc}",) + exc.args[1:]
            raise
        terms.append(area * res.trace)
    return math.fsum(terms)
