import math

import numpy as np
import pytest

from gsbvp.bhalf import gaussian_integral_spherical
from gsbvp.boundary import commuting_diagonal, dirichlet, neumann, pauli_3d, pure_dirac, pure_skew_2d
from gsbvp.ellipticity import NaturalSpectrum, natural_spectrum
from gsbvp.errors import (
    BranchCut,
    DomainError,
    IsotropyRequired,
    NonellipticDivergence,
    NotElliptic,
    ResolventPole,
    ShapeMismatch,
)
from gsbvp.profile import (
    bromwich_diagonal,
    heat_diagonal,
    phi,
    profile_sweep,
    psi,
    resolvent_kernel,
    singularity_expected,
    singularity_probe,
    trace_profile_j,
)

HALF_SQRT_PI = math.sqrt(math.pi) / 2


def test_resolvent_dirichlet_neumann_examples():
    d = resolvent_kernel(dirichlet(), -1.0, [0.0], 1.0, 1.0)
    n = resolvent_kernel(neumann(), -1.0, [0.0], 1.0, 1.0)
    assert d[0, 0].real == pytest.approx((1 - math.exp(-2)) / 2)
    assert n[0, 0].real == pytest.approx((1 + math.exp(-2)) / 2)
    assert d[0, 0].real == pytest.approx(0.43233, abs=1e-5)
    assert n[0, 0].real == pytest.approx(0.56767, abs=1e-5)


def test_resolvent_branch_cut_and_pole():
    with pytest.raises(BranchCut):
        resolvent_kernel(dirichlet(), 0.5, [0.0], 0.0, 0.0)
    # s = sqrt(1 + 1.25) = 1.5 hits the eigenvalue of i gamma.zeta
    with pytest.raises(ResolventPole):
        resolvent_kernel(pure_skew_2d(1.5), -1.25, [1.0], 0.0, 0.0)
    with pytest.raises(ShapeMismatch):
        resolvent_kernel(dirichlet(), -1.0, [0.0], -1.0, 0.0)


def test_resolvent_symmetric_in_u_v():
    s = pure_skew_2d(0.5, 1)
    a = resolvent_kernel(s, -0.7 + 0.2j, [0.8], 0.3, 1.1)
    b = resolvent_kernel(s, -0.7 + 0.2j, [0.8], 1.1, 0.3)
    assert np.allclose(a, b)


@pytest.mark.parametrize("t, r", [(1.0, 0.0), (1.0, 0.7), (0.25, 0.3)])
def test_bromwich_dirichlet_neumann_exact(t, r):
    free = 1 / math.sqrt(4 * math.pi * t)
    e = math.exp(-r * r / t)
    d = bromwich_diagonal(dirichlet(), t, r)
    n = bromwich_diagonal(neumann(), t, r)
    assert d[0, 0].real == pytest.approx(free * (1 - e), abs=1e-12)
    assert n[0, 0].real == pytest.approx(free * (1 + e), abs=1e-12)


@pytest.mark.parametrize("setup", [dirichlet(2, 3), neumann(1, 2)], ids=["dirichlet", "neumann"])
def test_psi_phi_gamma_zero(setup):
    for z in (0.0, 0.5, 2.0):
        assert np.allclose(psi(setup, z), HALF_SQRT_PI * math.erfc(z) * np.eye(setup.dim_v), atol=1e-10)
        assert np.allclose(phi(setup, z), 0.0, atol=1e-10)


def test_psi_zero_matches_gaussian_integral():
    s = pauli_3d(0.5, 1)
    expected = HALF_SQRT_PI * gaussian_integral_spherical(s, 40)
    assert np.allclose(psi(s, 0.0), expected, atol=1e-10)
    assert psi(s, 0.0)[0, 0].real == pytest.approx(1.1816359006, abs=1e-9)


@pytest.mark.parametrize("setup", [pauli_3d(0.5, 1), pure_skew_2d(0.6), pure_dirac(0.3, 4, 1)], ids=lambda s: s.label)
@pytest.mark.parametrize("z", [0.2, 0.9])
def test_phi_matches_finite_difference_of_psi(setup, z):
    h = 1e-3
    dpsi = (-3 * psi(setup, z) + 4 * psi(setup, z + h) - psi(setup, z + 2 * h)) / (2 * h)
    fd = -2 * math.exp(-z * z) * setup.identity() - 2 * dpsi
    assert np.allclose(phi(setup, z), fd, atol=1e-5)


def test_profile_is_hermitian_and_commutes_with_pi():
    s = pure_skew_2d(0.7, 1)
    for sample in profile_sweep(s, [0.0, 0.3, 1.2], with_j=True):
        for a in (sample.psi, sample.phi):
            assert np.allclose(a, a.conj().T, atol=1e-14)
            assert np.linalg.norm(a @ s.pi - s.pi @ a) < 1e-10
        assert sample.j == pytest.approx(np.trace(sample.phi).real)


def test_profile_refuses_violated_setup():
    with pytest.raises(NotElliptic):
        psi(pure_skew_2d(1.5), 0.5)
    with pytest.raises(ShapeMismatch):
        phi(pauli_3d(0.5), -1.0)


@pytest.mark.parametrize("t, r", [(1.0, 0.5), (0.3, 0.1)])
def test_heat_diagonal_matches_bromwich_synthesis(t, r):
    # independent route: invert the resolvent per tangential momentum, then integrate over zeta
    s = pure_skew_2d(0.5, 1)
    cutoff = 8 / math.sqrt(t * 0.75)
    zs = np.linspace(-cutoff, cutoff, 201)
    dz = zs[1] - zs[0]
    w = np.full(len(zs), dz)
    w[0] = w[-1] = dz / 2
    vals = np.array([bromwich_diagonal(s, t, r, [z]) for z in zs])
    bracket = 4 * math.pi * t * np.tensordot(w, vals, 1) / (2 * math.pi)
    assert np.allclose(heat_diagonal(s, t, r).bracket, bracket, atol=1e-8)


def test_heat_diagonal_anchor_brackets():
    for t, r in ((1.0, 0.0), (2.0, 1.0)):
        e = math.exp(-r * r / t)
        assert np.allclose(heat_diagonal(dirichlet(), t, r).bracket, [[1 - e]], atol=1e-10)
        assert np.allclose(heat_diagonal(neumann(), t, r).bracket, [[1 + e]], atol=1e-10)
    hd = heat_diagonal(pauli_3d(0.5), 4.0, 2.0)
    assert hd.z == pytest.approx(1.0)


def test_heat_diagonal_scale_invariance():
    s = pauli_3d(0.4, 1)
    a = heat_diagonal(s, 1.0, 0.5).bracket
    b = heat_diagonal(s, 4.0, 1.0).bracket
    assert np.allclose(a, b, atol=1e-12)


def test_phi_decays_like_inverse_gaussian_tail():
    # z^2 e^{z^2} tr Phi approaches a constant at large z
    s = pauli_3d(0.5)
    vals = [z * z * math.exp(z * z) * np.trace(phi(s, z)).real for z in (4.0, 5.0, 6.0)]
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])


# ------------------------------------------------------------ trace profile

@pytest.mark.parametrize("setup", [pauli_3d(0.5, 1), pure_skew_2d(0.8), pure_dirac(0.4, 4, 1)], ids=lambda s: s.label)
@pytest.mark.parametrize("z", [0.0, 0.4, 1.5])
def test_trace_profile_equals_trace_of_phi(setup, z):
    sp = natural_spectrum(setup)
    assert trace_profile_j(sp, setup.m, z) == pytest.approx(np.trace(phi(setup, z)).real, abs=1e-9)


def test_trace_profile_refusals():
    aniso = natural_spectrum(commuting_diagonal([[0.5, -0.5], [0.1, -0.1]]))
    with pytest.raises(IsotropyRequired):
        trace_profile_j(aniso, 3, 0.5)
    with pytest.raises(NonellipticDivergence):
        trace_profile_j(NaturalSpectrum.from_pairs(0, [(1.2, 1)]), 3, 0.5)
    with pytest.raises(NonellipticDivergence):
        trace_profile_j(NaturalSpectrum.from_pairs(0, [(1.0, 1)]), 3, 0.0)
    # nu = 1 is finite away from the boundary
    assert math.isfinite(trace_profile_j(NaturalSpectrum.from_pairs(0, [(1.0, 1)]), 3, 0.5))


@pytest.mark.parametrize("d, m", [(1, 2), (2, 3), (1, 4)])
def test_singularity_coefficient(d, m):
    sp = NaturalSpectrum.from_pairs(1, [(1.0, d)])
    fit = singularity_probe(sp, m)
    assert fit.expected == pytest.approx(singularity_expected(d, m))
    assert fit.rel_err < 1e-3


def test_singularity_probe_guards():
    with pytest.raises(DomainError):
        singularity_probe(NaturalSpectrum.from_pairs(0, [(0.5, 1)]), 3)
    with pytest.raises(ShapeMismatch):
        singularity_probe(NaturalSpectrum.from_pairs(0, [(1.0, 1)]), 3, z_list=(0.05, 0.1))
