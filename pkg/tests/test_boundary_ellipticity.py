import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_valid_setup
from gsbvp.boundary import (
    BoundarySetup,
    clifford_generators,
    commuting_diagonal,
    dirichlet,
    graded_symbol,
    hermitian_symbol,
    mixed,
    neumann,
    pauli_3d,
    pure_dirac,
    pure_skew_2d,
    require_valid,
    tangential_symbol,
    validate_setup,
)
from gsbvp.ellipticity import (
    Classification,
    NaturalSpectrum,
    check_strong_ellipticity,
    classify_margin,
    natural_spectrum,
    spectrum_at,
    sufficient_condition,
    sufficient_margin,
)
from gsbvp.errors import InvalidSetup, ShapeMismatch, ZeroCovector

BUILTINS = [
    dirichlet(2, 3),
    neumann(1, 2),
    mixed(np.diag([1.0, 0.0]), 3),
    pure_skew_2d(0.5, 1),
    pauli_3d(0.5, 1),
    pure_dirac(0.3, 4, 1),
    commuting_diagonal([[0.5, -0.5], [0.3, -0.3]]),
]


@pytest.mark.parametrize("setup", BUILTINS, ids=lambda s: s.label)
def test_builtin_models_are_valid(setup):
    assert validate_setup(setup) == []


def test_shape_checks():
    with pytest.raises(ShapeMismatch):
        BoundarySetup(3, 2, np.eye(2), [np.zeros((2, 2))])
    with pytest.raises(ShapeMismatch):
        BoundarySetup(2, 2, np.eye(3), [np.zeros((2, 2))])
    with pytest.raises(ShapeMismatch):
        BoundarySetup(1, 2, np.eye(2), [])


def test_arrays_are_frozen():
    s = pauli_3d(0.5)
    with pytest.raises(ValueError):
        s.pi[0, 0] = 1.0


def test_violations_listed_in_order():
    s = BoundarySetup(2, 2, np.array([[1, 0.5], [0, 0.5]]), [np.array([[0, 1], [1, 0]])])
    names = [v.name for v in validate_setup(s)]
    assert names == [
        "pi not Hermitian",
        "pi not idempotent",
        "gamma[0] not anti-self-adjoint",
        "pi gamma[0] != 0",
    ]
    with pytest.raises(InvalidSetup) as info:
        require_valid(s)
    assert len(info.value.violations) == 4


def test_s_and_q_checks():
    s = BoundarySetup(2, 1, np.eye(1), [np.zeros((1, 1))], s=np.eye(1), q=np.array([[1j]]))
    names = [v.name for v in validate_setup(s)]
    assert names == ["pi s != 0", "q not Hermitian"]


def test_symbols():
    s = pauli_3d(0.5)
    z = np.array([0.3, -0.4])
    g = tangential_symbol(s, z)
    assert np.allclose(g, 0.3 * s.gamma[0] - 0.4 * s.gamma[1])
    h = hermitian_symbol(s, z)
    assert np.allclose(h, h.conj().T)
    stack = tangential_symbol(s, np.array([z, 2 * z]))
    assert np.allclose(stack[1], 2 * g)
    gr = graded_symbol(s, z)
    assert gr.shape == (4, 4)
    assert np.allclose(gr[2:, :2], h)
    with pytest.raises(ShapeMismatch):
        tangential_symbol(s, [1.0])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_clifford_generators_anticommute(n):
    c = clifford_generators(n)
    assert len(c) == n
    for i in range(n):
        for j in range(n):
            ac = c[i] @ c[j] + c[j] @ c[i]
            assert np.allclose(ac, 2 * np.eye(len(ac)) * (i == j))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_pure_dirac_structure(m):
    s = pure_dirac(0.4, m, n_dirichlet=2)
    assert np.allclose(s.gamma_squared(), -0.4 * (m - 1) * s.complement())


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2), st.integers(0, 2 ** 32 - 1))
def test_random_setups_valid(m, k, nd, seed):
    s = random_valid_setup(np.random.default_rng(seed), m, k + nd, nd)
    assert validate_setup(s) == []


# ------------------------------------------------------------- ellipticity

def test_classify_margin_band():
    assert classify_margin(1e-3) is Classification.STRONGLY_ELLIPTIC
    assert classify_margin(0.0) is Classification.BORDERLINE
    assert classify_margin(-1e-10) is Classification.BORDERLINE
    assert classify_margin(-1e-3) is Classification.VIOLATED


def test_dirichlet_margin_is_one():
    rep = check_strong_ellipticity(dirichlet(2, 3))
    assert rep.strongly_elliptic
    assert rep.min_margin == pytest.approx(1.0)


@pytest.mark.parametrize(
    "a, expected",
    [(0.5, Classification.STRONGLY_ELLIPTIC), (1.0, Classification.BORDERLINE), (1.5, Classification.VIOLATED)],
)
def test_pure_skew_thresholds(a, expected):
    rep = check_strong_ellipticity(pure_skew_2d(a))
    assert rep.classification is expected
    assert rep.min_margin == pytest.approx(1 - a, abs=1e-12)
    assert "exhaustive" in rep.coverage


def test_pauli_worst_direction_is_unit():
    rep = check_strong_ellipticity(pauli_3d(0.7))
    assert rep.min_margin == pytest.approx(0.3, abs=1e-12)
    assert np.linalg.norm(rep.worst_direction) == pytest.approx(1.0)


def test_sufficient_condition():
    s = pauli_3d(0.5)
    assert sufficient_condition(s, [1.0, 0.0])
    assert sufficient_margin(s, [2.0, 0.0]) == pytest.approx(4 * (1 - 0.25))
    assert not sufficient_condition(pauli_3d(1.2), [1.0, 0.0])
    with pytest.raises(ZeroCovector):
        sufficient_condition(s, [0.0, 0.0])


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1), st.floats(0.05, 2.0))
def test_sufficient_condition_agrees_with_margin_for_paired_spectra(m, seed, scale):
    # for Dirac-type gamma the spectrum of i gamma.theta is symmetric, so the
    # sufficient condition and strong ellipticity coincide
    kappa = scale ** 2 / 2
    s = pure_dirac(kappa, m)
    rep = check_strong_ellipticity(s, 64)
    theta = np.random.default_rng(seed).normal(size=m - 1)
    theta /= np.linalg.norm(theta)
    if abs(kappa - 1) > 1e-6:
        assert sufficient_condition(s, theta) == rep.strongly_elliptic


def test_natural_spectrum_pauli():
    sp = natural_spectrum(pauli_3d(0.5, n_dirichlet=1))
    assert sp.isotropic
    assert sp.zero_mult == 1
    assert len(sp.branches) == 1
    assert sp.branches[0].nu == pytest.approx(0.5)
    assert sp.branches[0].mult == 1
    assert sp.dim_v == 3


def test_natural_spectrum_detects_anisotropy():
    s = commuting_diagonal([[0.5, -0.5], [0.1, -0.1]])
    assert not natural_spectrum(s).isotropic
    at = spectrum_at(s, [1.0, 0.0])
    assert at.nu_max == pytest.approx(0.5)


def test_natural_spectrum_from_pairs():
    sp = NaturalSpectrum.from_pairs(1, [(1.0, 2), (0.3, 1)])
    assert [b.nu for b in sp.branches] == [0.3, 1.0]
    assert sp.dim_v == 7
    assert sp.nu_max == 1.0
