import numpy as np
import pytest

from reconfigkf import linalg
from reconfigkf.errors import NonHermitianError, SingularMatrixError

from conftest import random_hermitian_pd, random_complex


def test_frobenius_norm_sq_matches_definition(rng):
    c = random_complex(rng, 3, 5)
    assert linalg.frobenius_norm_sq(c) == pytest.approx(
        np.linalg.norm(c, "fro") ** 2)


def test_hermitianize_idempotent(rng):
    h = random_complex(rng, 4, 4)
    hh = linalg.hermitianize(h)
    assert linalg.is_hermitian(hh)
    assert np.allclose(linalg.hermitianize(hh), hh)


def test_is_hermitian_rejects_asymmetric():
    h = np.array([[1.0, 2.0], [3.0, 1.0]], dtype=complex)
    assert not linalg.is_hermitian(h)
    assert not linalg.is_hermitian(np.zeros((2, 3)))


def test_require_hermitian_raises():
    with pytest.raises(NonHermitianError):
        linalg.require_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_eig_reconstructs(rng):
    h = random_hermitian_pd(rng, 5)
    w, v = linalg.hermitian_eig(h)
    assert np.all(np.diff(w) >= -1e-12)
    assert np.allclose((v * w) @ v.conj().T, h, atol=1e-10)
    assert np.allclose(v.conj().T @ v, np.eye(5), atol=1e-10)


def test_hermitian_eig_phase_deterministic(rng):
    h = random_hermitian_pd(rng, 4)
    _w1, v1 = linalg.hermitian_eig(h)
    # the same matrix through a different memory layout must give the
    # same eigenvectors, not just the same eigenspaces
    _w2, v2 = linalg.hermitian_eig(np.asfortranarray(h))
    assert np.allclose(v1, v2)
    for k in range(4):
        idx = int(np.argmax(np.abs(v1[:, k])))
        pivot = v1[idx, k]
        assert pivot.imag == pytest.approx(0.0, abs=1e-12)
        assert pivot.real > 0


def test_psd_sqrt_squares_back(rng):
    h = random_hermitian_pd(rng, 4)
    s = linalg.psd_sqrt(h)
    assert np.allclose(s @ s, h, atol=1e-10)
    with pytest.raises(NonHermitianError):
        linalg.psd_sqrt(np.diag([1.0, -1.0]))


def test_psd_inv_sqrt(rng):
    h = random_hermitian_pd(rng, 4)
    s = linalg.psd_inv_sqrt(h)
    assert np.allclose(s @ h @ s, np.eye(4), atol=1e-9)
    with pytest.raises(SingularMatrixError):
        linalg.psd_inv_sqrt(np.diag([1.0, 0.0]))


def test_vec_unvec_column_major():
    c = np.arange(6.0).reshape(2, 3)
    x = linalg.vec(c)
    assert np.array_equal(x, [0.0, 3.0, 1.0, 4.0, 2.0, 5.0])
    assert np.array_equal(linalg.unvec(x, 2, 3), c)
    with pytest.raises(ValueError):
        linalg.unvec(x, 3, 3)


def test_real_embedding_round_trip(rng):
    h = random_hermitian_pd(rng, 3)
    r = linalg.complex_to_real_embed(h)
    assert np.allclose(r, r.T)
    assert np.trace(r) == pytest.approx(2 * np.real(np.trace(h)))
    # PSD is preserved both ways
    assert np.linalg.eigvalsh(r)[0] >= -1e-12
    assert np.allclose(linalg.real_embed_to_complex(r), h)


def test_min_eigenvalue(rng):
    h = random_hermitian_pd(rng, 4)
    w = np.linalg.eigvalsh(h)
    assert linalg.min_eigenvalue(h) == pytest.approx(w[0])
