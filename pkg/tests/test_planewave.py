import numpy as np
import pytest

from pwmaxwell.material import MaterialField
from pwmaxwell.mesh import build_uniform_mesh
from pwmaxwell.planewave import basis_for_element, direction_set, polarization
from pwmaxwell.reference import _fd_curl

from helpers import UNIT_BOX


def test_direction_count_unit_norm_distinct():
    ds = direction_set(3)
    assert ds.p == 16
    d = ds.directions
    assert d.shape == (16, 3)
    assert np.max(np.abs(np.linalg.norm(d, axis=1) - 1.0)) <= 1e-14
    gram = d @ d.T
    np.fill_diagonal(gram, -2.0)
    assert gram.max() < 1.0 - 1e-8  # no repeated direction


def test_mean_direction_small():
    # near-uniform coverage: the vector mean nearly cancels
    d = direction_set(4).directions
    assert d.shape == (25, 3)
    assert np.linalg.norm(d.mean(axis=0)) < 0.2


def test_polar_levels_avoid_poles():
    d = direction_set(3).directions
    cs = sorted(set(np.round(d[:, 2], 12)))
    assert np.allclose(cs, [-0.75, -0.25, 0.25, 0.75])
    assert np.max(np.abs(d[:, 2])) < 1.0


def test_azimuths_staggered_between_levels():
    q = 3
    d = direction_set(q).directions
    step = 2 * np.pi / (q + 1)
    for m in range(q + 1):
        first = d[m * (q + 1)]
        phi = np.arctan2(first[1], first[0]) % (2 * np.pi)
        assert abs(phi - (m * step / 2) % (2 * np.pi)) <= 1e-12


def test_direction_set_deterministic():
    fresh = direction_set.__wrapped__
    a = fresh(3).directions
    b = fresh(3).directions
    assert a.tobytes() == b.tobytes()
    assert direction_set(3) is direction_set(3)  # cached
    with pytest.raises(ValueError):
        direction_set(0)


def test_polarization_orthonormal_deterministic():
    rng = np.random.default_rng(21)
    for _ in range(200):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        g = polarization(d)
        assert abs(np.linalg.norm(g) - 1.0) <= 1e-13
        assert abs(g @ d) <= 1e-13
        assert np.array_equal(g, polarization(d))
    # tie-break for d = e_z: axis 0 is the first least-aligned, G = e_z x e_x = e_y
    assert np.allclose(polarization(np.array([0.0, 0.0, 1.0])), [0.0, 1.0, 0.0])


def _basis(q=3, epsilon=1 + 1j, omega=4 * np.pi, n=2):
    mesh = build_uniform_mesh(UNIT_BOX, n)
    field = MaterialField.constant(mesh, epsilon)
    return basis_for_element(0, q, omega, field)


def test_pair_structure():
    b = _basis()
    p = (b.q + 1) ** 2
    assert b.n_functions == 2 * p
    F = b.polarizations
    d = b.directions
    assert np.max(np.abs(np.sum(np.abs(F) ** 2, axis=1) - 2.0)) <= 1e-14
    assert np.max(np.abs(np.einsum("lc,lc->l", d.astype(complex), F))) <= 1e-14
    # the two members of a pair share the direction and are conjugates
    assert np.array_equal(d[:p], d[p:])
    assert np.array_equal(F[p:], F[:p].conj())
    # d x F = +iF for the first member, -iF for the second
    dxF = np.cross(d, F)
    assert np.max(np.abs(dxF[:p] - 1j * F[:p])) <= 1e-14
    assert np.max(np.abs(dxF[p:] + 1j * F[p:])) <= 1e-14


def test_trefftz_residual_closed_form():
    """curl curl E = kappa^2 E via d x (d x F) = -F, exact up to rounding."""
    b = _basis(q=2)
    d = b.directions.astype(complex)
    F = b.polarizations
    cc = (1j * b.kappa) ** 2 * np.cross(d, np.cross(d, F))
    assert np.max(np.abs(cc - b.kappa**2 * F)) <= 1e-10 * abs(b.kappa) ** 2 * np.sqrt(2)


def test_point_value_matches_formula():
    b = _basis()
    x = np.array([[0.13, -0.21, 0.34]])
    vals = b.eval_all(x)[0]
    for l in (0, 5, 17, 31):
        expect = (np.sqrt(b.mu) * b.polarizations[l]
                  * np.exp(1j * b.kappa * (b.directions[l] @ x[0])))
        assert np.max(np.abs(vals[l] - expect)) <= 1e-14 * np.abs(expect).max()
        assert np.array_equal(b.eval_E(l, x)[0], vals[l])


def test_curl_matches_finite_differences():
    b = _basis(q=2)
    rng = np.random.default_rng(22)
    pts = rng.uniform(-0.4, 0.4, (30, 3))
    for l in (0, 4, 9, 13):
        fd = _fd_curl(lambda p: b.eval_E(l, np.atleast_2d(p)), pts, 1e-5)
        cf = b.eval_curl_E(l, pts)
        scale = np.max(np.abs(cf))
        assert np.max(np.abs(fd - cf)) <= 1e-6 * scale


def test_curl_closed_form_is_ikappa_d_cross():
    b = _basis(q=1)
    pts = np.array([[0.1, 0.2, -0.3], [-0.2, 0.0, 0.4]])
    E = b.eval_all(pts)
    C = b.eval_curl_all(pts)
    expect = 1j * b.kappa * np.cross(b.directions[None, :, :].astype(complex), E)
    assert np.max(np.abs(C - expect)) <= 1e-13 * np.max(np.abs(C))


def test_eval_entry_bounds():
    b = _basis(q=1)
    x = np.zeros((1, 3))
    with pytest.raises(IndexError):
        b.eval_E(b.n_functions, x)
    with pytest.raises(IndexError):
        b.eval_curl_E(-1, x)


def test_element_kappa_varies_with_layer():
    mesh = build_uniform_mesh(UNIT_BOX, 2)
    eps = np.full(mesh.n_elements, 1 + 1j, dtype=complex)
    eps[0] = 2 + 2j
    field = MaterialField(mesh, eps)
    b0 = basis_for_element(0, 2, 4 * np.pi, field)
    b1 = basis_for_element(1, 2, 4 * np.pi, field)
    assert abs(b0.kappa - np.sqrt(2) * b1.kappa) <= 1e-13 * abs(b0.kappa)
    # directions and polarizations are shared, only kappa differs
    assert np.array_equal(b0.directions, b1.directions)
    assert np.array_equal(b0.polarizations, b1.polarizations)
