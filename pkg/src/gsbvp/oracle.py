"""Finite-difference oracle for the frozen-coefficient heat problem.

For one tangential momentum zeta the boundary problem reduces to a system on
the half-line,

    (d_t - d_r^2 + |zeta|^2 + Q) u = 0,   pi u(0) = 0,
    (I - pi)(u'(0) + H u(0)) = 0,          H = i gamma.zeta,

truncated with a Dirichlet wall at r = L. The grid is vertex centred,
r_i = i h with h = L / n_grid, and the oblique condition enters through a
ghost point, which keeps the scheme second order and symmetric under the
weights w_0 = h/2, w_i = h. Nothing here uses the analytic profile or
b_{1/2} formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import interpolate, linalg, sparse, special
from scipy.sparse.linalg import splu

from .boundary import BoundarySetup, hermitian_symbol, require_valid
from .ellipticity import check_strong_ellipticity
from .errors import (
    CutoffTooSmall,
    FitIllConditioned,
    GridTooCoarse,
    InstabilityDetected,
    NotElliptic,
    ShapeMismatch,
)
from .numerics import exact_sum, pmap
from .spectral import as_cmatrix, dagger, range_basis

MIN_GRID = 100
MAX_DENSE_GRID = 2000
NEGATIVE_EIG_TOL = 1e-8
CN_STEPS = 2048
RANNACHER_HALF_STEPS = 4


@dataclass(frozen=True, eq=False)
class ModeProblem:
    setup: BoundarySetup
    zeta: np.ndarray
    length: float
    n_grid: int
    q_shift: np.ndarray | None = None

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.zeta, dtype=float))
        if z.shape != (self.setup.n_tangential,):
            raise ShapeMismatch(f"zeta must have {self.setup.n_tangential} components")
        object.__setattr__(self, "zeta", z)
        if not self.length > 0:
            raise ShapeMismatch("length must be positive")
        if int(self.n_grid) < MIN_GRID:
            raise GridTooCoarse(f"n_grid = {self.n_grid} < {MIN_GRID}")
        if self.q_shift is not None:
            q = as_cmatrix(self.q_shift, "q_shift")
            if q.shape != (self.setup.dim_v,) * 2:
                raise ShapeMismatch("q_shift must be dim_v x dim_v")
            object.__setattr__(self, "q_shift", q)

    @property
    def h(self) -> float:
        return self.length / self.n_grid

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(self.n_grid)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_grid, self.h)
        w[0] = 0.5 * self.h
        return w


@dataclass(frozen=True)
class ModeDiagonal:
    """Diagonal blocks K(t | r_i, r_i) of the discrete mode heat kernel."""

    r: np.ndarray
    values: np.ndarray

    def at(self, r: float) -> np.ndarray:
        """Cubic-spline interpolation of the diagonal at one point."""
        spline = interpolate.CubicSpline(self.r, self.values, axis=0)
        return spline(r)


# ------------------------------------------------------------ operators

def discrete_operator(problem: ModeProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense discrete operator A, weights W and the unknown-to-fibre map.

    Unknowns are the oblique-sector components of u_0 followed by full
    fibre vectors u_1 .. u_{N-1}. Returns ``(A, w, basis0)``; W A is
    Hermitian for a valid setup.
    """
    s = problem.setup
    d = s.dim_v
    n = problem.n_grid
    h = problem.h
    b0 = range_basis(s.complement())
    k = b0.shape[1]
    hmat = hermitian_symbol(s, problem.zeta)
    zz = float(problem.zeta @ problem.zeta)
    q = problem.q_shift if problem.q_shift is not None else np.zeros((d, d), dtype=complex)
    size = k + (n - 1) * d
    a = np.zeros((size, size), dtype=complex)
    eye = np.eye(d)

    def sl(i):
        return slice(0, k) if i == 0 else slice(k + (i - 1) * d, k + i * d)

    # boundary row from the ghost point u_{-1} = u_1 + 2 h H u_0
    a[sl(0), sl(0)] = dagger(b0) @ ((2 * eye - 2 * h * hmat) / h ** 2 + zz * eye + q) @ b0
    if n > 1:
        a[sl(0), sl(1)] = -2.0 / h ** 2 * dagger(b0)
    for i in range(1, n):
        a[sl(i), sl(i)] = (2.0 / h ** 2 + zz) * eye + q
        a[sl(i), sl(i - 1)] = -eye / h ** 2 @ (b0 if i == 1 else eye)
        if i + 1 < n:
            a[sl(i), sl(i + 1)] = -eye / h ** 2
    w = np.concatenate([np.full(k, 0.5 * h), np.full((n - 1) * d, h)])
    return a, w, b0


def _check_spectrum(lam: np.ndarray, elliptic: bool):
    lo = float(np.min(lam))
    if elliptic and lo < -NEGATIVE_EIG_TOL:
        raise InstabilityDetected(f"discrete operator has eigenvalue {lo:.3e} in the elliptic regime")


@lru_cache(maxsize=8)
def _channel_eig(c: float, n: int, h: float, robin: bool):
    """Eigenpairs of the symmetrized scalar channel operator (without |zeta|^2).

    ``robin`` selects the oblique stencil with coefficient c at r = 0;
    otherwise u_0 = 0 and the grid starts at r_1.
    """
    if robin:
        diag = np.full(n, 2.0 / h ** 2)
        diag[0] = 2.0 * (1.0 - h * c) / h ** 2
        off = np.full(n - 1, -1.0 / h ** 2)
        off[0] = -math.sqrt(2.0) / h ** 2
        w = np.full(n, h)
        w[0] = 0.5 * h
    else:
        diag = np.full(n - 1, 2.0 / h ** 2)
        off = np.full(n - 2, -1.0 / h ** 2)
        w = np.full(n - 1, h)
    lam, vec = linalg.eigh_tridiagonal(diag, off)
    # diagonal of W^(-1/2) V f(Lambda) V^T W^(1/2) / w_i = sum_k f(lam_k) v_ik^2 / w_i
    return lam, (vec * vec) / w[:, None]


def _channels(problem: ModeProblem):
    """Split the fibre into scalar channels: (coefficient c or None, projector)."""
    s = problem.setup
    out = []
    if np.trace(s.pi).real > 0.5:
        out.append((None, s.pi))
    b0 = range_basis(s.complement())
    if b0.shape[1]:
        hmat = hermitian_symbol(s, problem.zeta)
        small = dagger(b0) @ hmat @ b0
        cs, vs = np.linalg.eigh(0.5 * (small + dagger(small)))
        for c, v in zip(cs, vs.T):
            col = b0 @ v
            out.append((float(c), np.outer(col, col.conj())))
    return out


def _channel_diagonal(c, n, h, ts, zz, elliptic):
    lam, v2 = _channel_eig(round(c, 13) if c is not None else 0.0, n, h, c is not None)
    _check_spectrum(lam + zz, elliptic)
    diag = v2 @ np.exp(-np.outer(lam + zz, ts))
    if c is None:
        diag = np.vstack([np.zeros((1, len(ts))), diag])
    return diag


def mode_diagonal(problem: ModeProblem, t: float, method: str = "eig",
                  elliptic: bool | None = None) -> ModeDiagonal:
    """Diagonal blocks of exp(-t A) divided by the grid weights.

    ``method`` is ``"eig"`` (spectral decomposition; channel-decoupled
    tridiagonal solves, or a dense solve when ``q_shift`` couples the
    channels) or ``"cn"`` (Crank-Nicolson with Rannacher start-up).
    """
    if not t > 0:
        raise ShapeMismatch("t must be positive")
    s = problem.setup
    require_valid(s)
    if elliptic is None:
        elliptic = check_strong_ellipticity(s).strongly_elliptic
    if method == "cn":
        return _mode_diagonal_cn(problem, t, elliptic)
    if method != "eig":
        raise ShapeMismatch(f"unknown method {method!r}")
    if problem.q_shift is not None:
        return _mode_diagonal_dense(problem, t, elliptic)
    return ModeDiagonal(problem.grid, _mode_values(problem, [t], elliptic)[0])


def _mode_values(problem: ModeProblem, ts, elliptic: bool) -> list[np.ndarray]:
    """Channel-decoupled mode diagonals for several times at once."""
    s = problem.setup
    n, h = problem.n_grid, problem.h
    zz = float(problem.zeta @ problem.zeta)
    ts = np.asarray(ts, dtype=float)
    vals = np.zeros((len(ts), n, s.dim_v, s.dim_v), dtype=complex)
    for c, proj in _channels(problem):
        diag = _channel_diagonal(c, n, h, ts, zz, elliptic)
        vals += diag.T[:, :, None, None] * proj
    return list(vals)


def _blocks_to_fibre(diag_full: np.ndarray, problem: ModeProblem, b0: np.ndarray) -> np.ndarray:
    d = problem.setup.dim_v
    k = b0.shape[1]
    n = problem.n_grid
    out = np.zeros((n, d, d), dtype=complex)
    out[0] = b0 @ diag_full[:k, :k] @ dagger(b0)
    for i in range(1, n):
        sl = slice(k + (i - 1) * d, k + i * d)
        out[i] = diag_full[sl, sl]
    return out


def _symmetrized(a: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sw = np.sqrt(w)
    sym = sw[:, None] * a / sw[None, :]
    return 0.5 * (sym + dagger(sym)), sw


def _mode_diagonal_dense(problem: ModeProblem, t: float, elliptic: bool) -> ModeDiagonal:
    if problem.n_grid > MAX_DENSE_GRID:
        raise ShapeMismatch(f"dense path limited to n_grid <= {MAX_DENSE_GRID}")
    a, w, b0 = discrete_operator(problem)
    sym, sw = _symmetrized(a, w)
    lam, vec = linalg.eigh(sym)
    _check_spectrum(lam, elliptic)
    # kernel W^(-1/2) V exp(-t Lambda) V^dag W^(-1/2)
    kern = ((vec * np.exp(-t * lam)) @ dagger(vec)) / (sw[:, None] * sw[None, :])
    return ModeDiagonal(problem.grid, _blocks_to_fibre(kern, problem, b0))


def _mode_diagonal_cn(problem: ModeProblem, t: float, elliptic: bool) -> ModeDiagonal:
    """Independent time-stepping path: exp(-tA) applied to every grid delta."""
    a, w, b0 = discrete_operator(problem)
    _check_spectrum(linalg.eigvalsh(_symmetrized(a, w)[0]), elliptic)
    size = a.shape[0]
    eye = sparse.identity(size, dtype=complex, format="csc")
    op = sparse.csc_matrix(a)
    u = np.diag(1.0 / w).astype(complex)
    dt = t / CN_STEPS
    # Rannacher start-up: implicit Euler half steps damp the initial delta spikes
    half = splu(eye + 0.5 * dt * op)
    for _ in range(RANNACHER_HALF_STEPS):
        u = half.solve(u)
    rhs = (eye - 0.5 * dt * op).tocsr()
    for _ in range(CN_STEPS - RANNACHER_HALF_STEPS // 2):
        u = half.solve(rhs @ u)
    return ModeDiagonal(problem.grid, _blocks_to_fibre(u, problem, b0))


# ------------------------------------------------------ momentum synthesis

def _require_m2(setup: BoundarySetup):
    if setup.m != 2:
        raise ShapeMismatch("full reconstruction is implemented for m = 2 only")


def _nu_max(setup: BoundarySetup) -> float:
    h = hermitian_symbol(setup, np.array([1.0]))
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (h + dagger(h))))))


def default_zeta_grid(setup: BoundarySetup, t_min: float, t_max: float | None = None):
    """Cutoff Z = 8 / sqrt(t (1 - nu^2)) and spacing 0.5 / sqrt(t_max)."""
    t_max = t_min if t_max is None else t_max
    width = max(1.0 - _nu_max(setup) ** 2, 1e-4)
    return 8.0 / math.sqrt(t_min * width), 0.5 / math.sqrt(t_max)


def _zeta_nodes(cutoff: float, spacing: float) -> np.ndarray:
    k = int(math.ceil(cutoff / spacing))
    return spacing * np.arange(-k, k + 1)


def _synthesize(setup, ts, length, n_grid, cutoff, spacing, elliptic):
    """For each t, the ζ-integral of the mode diagonal: 4 pi t * int dzeta/2pi K."""
    nodes = _zeta_nodes(cutoff, spacing)
    w = np.full(len(nodes), spacing)
    w[0] = w[-1] = 0.5 * spacing

    def one(z):
        prob = ModeProblem(setup, np.array([z]), length, n_grid)
        return _mode_values(prob, ts, elliptic)

    per_node = pmap(one, nodes)
    out = []
    for j, t in enumerate(ts):
        stack = np.array([p[j] for p in per_node])
        out.append(4 * math.pi * t * exact_sum(stack, w) / (2 * math.pi))
    return nodes, out


def oracle_diagonal(setup: BoundarySetup, t: float, r: float, cutoff: float | None = None,
                    spacing: float | None = None, length: float | None = None,
                    n_grid: int = 1000) -> np.ndarray:
    """Bracket K = 4 pi t * U(t | r, r) from trapezoidal mode synthesis (m = 2)."""
    _require_m2(setup)
    require_valid(setup)
    rep = check_strong_ellipticity(setup)
    if not rep.strongly_elliptic:
        raise NotElliptic(f"strong ellipticity violated (margin {rep.min_margin:.6g})", rep.min_margin)
    z_def, h_def = default_zeta_grid(setup, t)
    cutoff = z_def if cutoff is None else float(cutoff)
    spacing = h_def if spacing is None else float(spacing)
    if cutoff < 8.0 / math.sqrt(t):
        raise CutoffTooSmall(f"cutoff {cutoff:.4g} < 8/sqrt(t) = {8 / math.sqrt(t):.4g}")
    length = 10.0 * math.sqrt(t) if length is None else float(length)
    if length < 8.0 * math.sqrt(t):
        raise ShapeMismatch("length must be at least 8 sqrt(t)")
    if not 0 <= r <= 0.5 * length:
        raise ShapeMismatch("r must lie in [0, length/2]")
    _, (brackets,) = _synthesize(setup, [t], length, n_grid, cutoff, spacing, True)
    return ModeDiagonal(ModeProblem(setup, [0.0], length, n_grid).grid, brackets).at(r)


def _interior_reference(ts, h, nodes, spacing):
    """Bracket of the discrete free problem on an unbounded grid of spacing h.

    The uniform-grid heat kernel diagonal is exp(-2t/h^2) I_0(2t/h^2) / h.
    """
    w = np.full(len(nodes), spacing)
    w[0] = w[-1] = 0.5 * spacing
    out = []
    for t in ts:
        zsum = math.fsum(w * np.exp(-t * nodes * nodes)) / (2 * math.pi)
        out.append(4 * math.pi * t * special.ive(0, 2 * t / h ** 2) / h * zsum)
    return out


def r_integrated_trace(setup, ts, length, n_grid, cutoff, spacing, elliptic=True):
    """D(t) = int_0^{L/2} tr(K(t, r) - K_interior) dr for each t (trapezoid rule)."""
    nodes, brackets = _synthesize(setup, ts, length, n_grid, cutoff, spacing, elliptic)
    h = length / n_grid
    ref = _interior_reference(ts, h, nodes, spacing)
    half = n_grid // 2
    wr = np.full(half + 1, h)
    wr[0] = wr[-1] = 0.5 * h
    out = []
    for k, br in zip(ref, brackets):
        tr = np.trace(br[: half + 1], axis1=1, axis2=2).real - k * setup.dim_v
        out.append(math.fsum(wr * tr))
    return out


@dataclass(frozen=True)
class OracleFit:
    estimate: float
    fit_residual: float
    intercept: float


def oracle_bhalf(setup: BoundarySetup, t_sweep, n_grid: int = 2000,
                 length: float | None = None) -> OracleFit:
    """tr b_{1/2} per unit boundary length from the small-t behaviour D(t) = c0 + c1 sqrt(t)."""
    _require_m2(setup)
    require_valid(setup)
    rep = check_strong_ellipticity(setup)
    if not rep.strongly_elliptic:
        raise NotElliptic(f"strong ellipticity violated (margin {rep.min_margin:.6g})", rep.min_margin)
    ts = [float(t) for t in t_sweep]
    if len(ts) < 2 or any(t <= 0 for t in ts):
        raise FitIllConditioned("need at least two positive times")
    if max(ts) / min(ts) < 10.0:
        raise FitIllConditioned("t_sweep must span at least one decade")
    length = 10.0 * math.sqrt(max(ts)) if length is None else float(length)
    if length < 8.0 * math.sqrt(max(ts)):
        raise ShapeMismatch("length must be at least 8 sqrt(t_max)")
    cutoff, spacing = default_zeta_grid(setup, min(ts), max(ts))
    d = r_integrated_trace(setup, ts, length, n_grid, cutoff, spacing)
    x = np.sqrt(ts)
    coef, res, *_ = np.polyfit(x, d, 1, full=True)
    resid = float(math.sqrt(res[0] / len(ts))) if len(res) else 0.0
    return OracleFit(float(coef[0]), resid, float(coef[1]))


def breakdown_probe(setup: BoundarySetup, t: float, grids=(200, 400), length: float = 8.0,
                    cutoff_factor: float = 0.5) -> list[float]:
    """r-integrated bracket near the boundary for successively finer grids.

    The momentum cutoff follows the grid, Z = cutoff_factor / h, so every
    refinement resolves more modes. Runs without the ellipticity guard; on a
    violated setup the unstable Robin states make the result grow.
    """
    _require_m2(setup)
    require_valid(setup)
    out = []
    for n in grids:
        h = length / n
        cutoff = cutoff_factor / h
        spacing = 0.5 / math.sqrt(t)
        (val,) = r_integrated_trace(setup, [t], length, n, cutoff, spacing, elliptic=False)
        out.append(val)
    return out
