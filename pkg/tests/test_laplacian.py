import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracspec import get_system
from fracspec.eigen import eigh, jacobi_eigh
from fracspec.graphs import build_level
from fracspec.laplacian import assemble, level_spectrum, spectrum, verify_decimation


def sym(seed, n):
    m = np.random.default_rng(seed).standard_normal((n, n))
    return (m + m.T) / 2


@given(st.integers(0, 10**6), st.integers(1, 24))
def test_jacobi_matches_lapack(seed, n):
    a = sym(seed, n)
    res = jacobi_eigh(a)
    assert np.allclose(res.eigenvalues, np.linalg.eigvalsh(a), atol=1e-10)
    v = res.eigenvectors
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-10)
    assert np.allclose(a @ v, v * res.eigenvalues, atol=1e-9)


def test_eigh_rejects_asymmetric():
    with pytest.raises(ValueError):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("m", range(1, 6))
def test_interval_matches_cosine_formula(m):
    k = np.arange(2**m + 1)
    lam = 2 - 2 * np.cos(k * np.pi / 2**m)
    neu = level_spectrum("interval", m, "combinatorial", "neumann").all_values()
    dir_ = level_spectrum("interval", m, "combinatorial", "dirichlet").all_values()
    assert np.allclose(neu, lam, atol=1e-10)
    assert np.allclose(dir_, lam[1:-1], atol=1e-10)


def test_sg_level_one():
    neu = level_spectrum("sg", 1, "combinatorial", "neumann")
    dir_ = level_spectrum("sg", 1, "combinatorial", "dirichlet")
    assert np.allclose(neu.eigenvalues, [0, 3, 6], atol=1e-12)
    assert list(neu.multiplicities) == [1, 2, 3]
    assert np.allclose(dir_.eigenvalues, [2, 5], atol=1e-12)
    assert list(dir_.multiplicities) == [1, 2]


@pytest.mark.parametrize("name,conv", [("sg", "combinatorial"), ("sg3", "probabilistic"), ("interval", "combinatorial")])
@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_matrix_is_symmetric_psd(name, conv, bc):
    a = assemble(build_level(name, 2), conv, bc)
    assert np.allclose(a, a.T)
    assert np.linalg.eigvalsh(a).min() > -1e-12


def test_probabilistic_neumann_has_unit_kernel():
    a = assemble(build_level("sg3", 2), "probabilistic", "neumann")
    w = np.linalg.eigvalsh(a)
    assert abs(w[0]) < 1e-12 and w[1] > 1e-3
    assert w[-1] <= 2 + 1e-12


def test_spectrum_residual_and_serialisation():
    res = level_spectrum("sg", 2, "combinatorial", "neumann")
    assert res.residual < 1e-10
    assert res.dimension == build_level("sg", 2).n_vertices
    d = res.to_dict()
    assert d["multiplicities"] == [int(k) for k in res.multiplicities]
    assert res.to_csv().splitlines()[0] == "level,index,eigenvalue,multiplicity"


def test_spectrum_methods_agree():
    a = assemble(build_level("sg", 3), "combinatorial", "dirichlet")
    j = spectrum(a, method="jacobi")
    l = spectrum(a, method="lapack")
    assert np.allclose(j.eigenvalues, l.eigenvalues, atol=1e-9)
    assert list(j.multiplicities) == list(l.multiplicities)


@pytest.mark.parametrize("name,top", [("interval", 5), ("sg", 3), ("sg3", 2)])
@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_decimation_relation(name, top, bc):
    system = get_system(name)
    for m in range(1, top + 1):
        rep = verify_decimation(name, m, system, 1e-9, bc)
        assert rep.passed, rep


def test_decimation_detects_wrong_map():
    from fracspec.decimation import system_from_dict

    wrong = system_from_dict({
        "name": "wrong", "fractal": "sg", "convention": "combinatorial",
        "numerator": ["0", "4", "-1"], "denominator": ["1"], "x_r": "4", "exceptional": [],
    })
    assert not verify_decimation("sg", 2, wrong, 1e-9, "neumann").passed


def test_bad_arguments():
    g = build_level("sg", 1)
    with pytest.raises(ValueError):
        assemble(g, "random-walk")
    with pytest.raises(ValueError):
        assemble(g, bc="robin")
    with pytest.raises(ValueError):
        assemble(build_level("sg", 0), bc="dirichlet")


def test_sg3_level_zero_probabilistic():
    res = level_spectrum("sg3", 0, "probabilistic", "neumann")
    assert np.allclose(res.eigenvalues, [0, 1.5], atol=1e-12)
    assert list(res.multiplicities) == [1, 2]
