"""Frozen-coefficient boundary data and its symbols.

A boundary operator is fixed at one boundary point by a projector ``pi``
(the Dirichlet sector), tangential anti-Hermitian matrices ``gamma[j]``
(one per boundary coordinate) and optional Hermitian ``s`` and ``q``. The
boundary metric is the identity, so |zeta|^2 is the Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSetup, ShapeMismatch
from .spectral import as_cmatrix, dagger

SETUP_TOL = 1e-10


@dataclass(frozen=True)
class Violation:
    name: str
    residual: float

    def __str__(self):
        return f"{self.name} (residual {self.residual:.3e})"


@dataclass(frozen=True, eq=False)
class BoundarySetup:
    m: int
    dim_v: int
    pi: np.ndarray
    gamma: tuple
    s: np.ndarray | None = None
    q: np.ndarray | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ShapeMismatch(f"manifold dimension must be an integer >= 2, got {self.m}")
        if int(self.dim_v) != self.dim_v or self.dim_v < 1:
            raise ShapeMismatch(f"fibre dimension must be an integer >= 1, got {self.dim_v}")
        d = self.dim_v
        object.__setattr__(self, "pi", _square(self.pi, d, "pi"))
        gam = tuple(_square(g, d, f"gamma[{j}]") for j, g in enumerate(self.gamma))
        if len(gam) != self.m - 1:
            raise ShapeMismatch(f"expected {self.m - 1} gamma matrices, got {len(gam)}")
        object.__setattr__(self, "gamma", gam)
        if self.s is not None:
            object.__setattr__(self, "s", _square(self.s, d, "s"))
        if self.q is not None:
            object.__setattr__(self, "q", _square(self.q, d, "q"))
        for arr in (self.pi, *self.gamma, self.s, self.q):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_tangential(self) -> int:
        return self.m - 1

    @property
    def gamma_stack(self) -> np.ndarray:
        return np.stack(self.gamma)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim_v, dtype=complex)

    def complement(self) -> np.ndarray:
        """I - pi, the projector onto the oblique (Robin) sector."""
        return self.identity() - self.pi

    def gamma_squared(self) -> np.ndarray:
        """Metric contraction sum_j gamma_j gamma_j."""
        g = self.gamma_stack
        return np.einsum("jab,jbc->ac", g, g)

    def is_gamma_zero(self, tol: float = SETUP_TOL) -> bool:
        return all(np.linalg.norm(g) <= tol for g in self.gamma)


def _square(a, d, name):
    arr = as_cmatrix(a, name)
    if arr.shape != (d, d):
        raise ShapeMismatch(f"{name} must have shape ({d}, {d}), got {arr.shape}")
    return np.array(arr)


def validate_setup(setup: BoundarySetup, tol: float = SETUP_TOL) -> list[Violation]:
    """List every violated structural invariant, in a fixed order."""
    out: list[Violation] = []
    p = setup.pi

    def check(name, residual, scale=1.0):
        if residual > tol * max(scale, 1.0):
            out.append(Violation(name, float(residual)))

    check("pi not Hermitian", np.linalg.norm(p - dagger(p)))
    check("pi not idempotent", np.linalg.norm(p @ p - p))
    for j, g in enumerate(setup.gamma):
        check(f"gamma[{j}] not anti-self-adjoint", np.linalg.norm(g + dagger(g)), np.linalg.norm(g))
        res = max(np.linalg.norm(p @ g), np.linalg.norm(g @ p))
        check(f"pi gamma[{j}] != 0", res)
    if setup.s is not None:
        s = setup.s
        check("s not Hermitian", np.linalg.norm(s - dagger(s)), np.linalg.norm(s))
        check("pi s != 0", max(np.linalg.norm(p @ s), np.linalg.norm(s @ p)))
    if setup.q is not None:
        q = setup.q
        check("q not Hermitian", np.linalg.norm(q - dagger(q)), np.linalg.norm(q))
    return out


def require_valid(setup: BoundarySetup) -> None:
    bad = validate_setup(setup)
    if bad:
        raise InvalidSetup("invalid boundary setup: " + "; ".join(map(str, bad)), bad)


def _zeta(setup, zeta) -> np.ndarray:
    z = np.asarray(zeta, dtype=float)
    if z.shape[-1] != setup.n_tangential:
        raise ShapeMismatch(
            f"covector must have {setup.n_tangential} components, got shape {z.shape}"
        )
    if not np.all(np.isfinite(z)):
        raise ShapeMismatch("covector has non-finite components")
    return z


def tangential_symbol(setup: BoundarySetup, zeta) -> np.ndarray:
    """gamma . zeta; ``zeta`` may be a single covector or a stack ``(k, m-1)``."""
    z = _zeta(setup, zeta)
    return np.tensordot(z, setup.gamma_stack, axes=([-1], [0]))


def hermitian_symbol(setup: BoundarySetup, zeta) -> np.ndarray:
    """i gamma . zeta, Hermitian for a valid setup."""
    return 1j * tangential_symbol(setup, zeta)


def graded_symbol(setup: BoundarySetup, zeta) -> np.ndarray:
    """Block matrix [[pi, 0], [i gamma.zeta, I - pi]] of order 2 dim_v."""
    d = setup.dim_v
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = setup.pi
    out[d:, :d] = hermitian_symbol(setup, zeta)
    out[d:, d:] = setup.complement()
    return out


# ---------------------------------------------------------------- models

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_J2 = np.array([[0, 1], [-1, 0]], dtype=complex)


def _embed(blocks, n_dirichlet):
    """Place the oblique-sector matrices in the top-left corner, Dirichlet last."""
    k = blocks[0].shape[0]
    d = k + n_dirichlet
    out = []
    for b in blocks:
        big = np.zeros((d, d), dtype=complex)
        big[:k, :k] = b
        out.append(big)
    pi = np.zeros((d, d), dtype=complex)
    pi[k:, k:] = np.eye(n_dirichlet)
    return out, pi


def dirichlet(dim_v: int = 1, m: int = 2) -> BoundarySetup:
    d = dim_v
    return BoundarySetup(m, d, np.eye(d), [np.zeros((d, d))] * (m - 1), label="dirichlet")


def neumann(dim_v: int = 1, m: int = 2) -> BoundarySetup:
    d = dim_v
    return BoundarySetup(m, d, np.zeros((d, d)), [np.zeros((d, d))] * (m - 1), label="neumann")


def mixed(pi, m: int = 2) -> BoundarySetup:
    p = np.asarray(pi, dtype=complex)
    d = p.shape[0]
    return BoundarySetup(m, d, p, [np.zeros((d, d))] * (m - 1), label="mixed")


def pure_skew_2d(a: float, n_dirichlet: int = 0) -> BoundarySetup:
    """m = 2, one real skew block a*[[0, 1], [-1, 0]]; i gamma has spectrum +-a."""
    blocks, pi = _embed([a * _J2], n_dirichlet)
    return BoundarySetup(2, pi.shape[0], pi, blocks, label=f"pure_skew_2d(a={a!r})")


def pauli_3d(a: float, n_dirichlet: int = 0) -> BoundarySetup:
    """m = 3 with gamma_j = i a sigma_j on a two-dimensional oblique sector."""
    blocks, pi = _embed([1j * a * _SIGMA[0], 1j * a * _SIGMA[1]], n_dirichlet)
    return BoundarySetup(3, pi.shape[0], pi, blocks, label=f"pauli_3d(a={a!r})")


def clifford_generators(n: int) -> list[np.ndarray]:
    """n mutually anticommuting Hermitian involutions of even order.

    Jordan-Wigner construction on ceil(n/2) qubits, with at least one qubit so
    the spectrum of every unit combination is {+1, -1} in equal parts.
    """
    q = max((n + 1) // 2, 1)
    eye = np.eye(2, dtype=complex)
    z = _SIGMA[2]
    gens = []
    for k in range(q):
        for s in (_SIGMA[0], _SIGMA[1]):
            factors = [z] * k + [s] + [eye] * (q - k - 1)
            g = factors[0]
            for f in factors[1:]:
                g = np.kron(g, f)
            gens.append(g)
    return gens[:n]


def pure_dirac(kappa: float, m: int, n_dirichlet: int = 0, copies: int = 1) -> BoundarySetup:
    """Dirac-type gamma with gamma^2 = -kappa (m-1) (I - pi).

    gamma_j = i sqrt(kappa) c_j for anticommuting Hermitian involutions c_j,
    repeated ``copies`` times on the oblique sector; ``n_dirichlet``
    additional Dirichlet components make up pi.
    """
    if kappa < 0:
        raise ShapeMismatch("kappa must be non-negative")
    gens = clifford_generators(m - 1)
    blocks = [np.kron(np.eye(copies), 1j * np.sqrt(kappa) * g) for g in gens]
    blocks, pi = _embed(blocks, n_dirichlet)
    return BoundarySetup(m, pi.shape[0], pi, blocks, label=f"pure_dirac(kappa={kappa!r}, m={m})")


def commuting_diagonal(entries, n_dirichlet: int = 0) -> BoundarySetup:
    """Diagonal (hence commuting) gamma_j = diag(i*entries[j]) on the oblique sector."""
    rows = [np.diag(1j * np.asarray(e, dtype=float)) for e in entries]
    blocks, pi = _embed(rows, n_dirichlet)
    return BoundarySetup(len(rows) + 1, pi.shape[0], pi, blocks, label="commuting_diagonal")


BUILTIN_SETUPS = {
    "dirichlet": dirichlet,
    "neumann": neumann,
    "mixed": mixed,
    "pure_skew_2d": pure_skew_2d,
    "pauli_3d": pauli_3d,
    "pure_dirac": pure_dirac,
    "commuting_diagonal": commuting_diagonal,
}
