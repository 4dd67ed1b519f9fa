"""Dense complex linear-algebra primitives shared by the whole package.

Conventions used everywhere:

* matrices are numpy ``complex128`` (or ``float64``) 2-D arrays;
* ``vec`` stacks columns (column-major), so entry ``(i, j)`` of an
  ``L x M`` matrix lands at position ``j * L + i``;
* eigenvector phases are fixed by making the largest-magnitude component
  of each eigenvector real and positive (ties broken by lowest index),
  which makes eigendecompositions deterministic and testable.

All tolerances are relative to ``1 + ||.||_F`` so they behave across scales.
"""

import numpy as np

from .errors import NonHermitianError, SingularMatrixError

__all__ = [
    "frobenius_norm_sq",
    "hermitianize",
    "is_hermitian",
    "require_hermitian",
    "hermitian_eig",
    "psd_sqrt",
    "psd_inv_sqrt",
    "vec",
    "unvec",
    "complex_to_real_embed",
    "real_embed_to_complex",
    "min_eigenvalue",
]

HERMITIAN_RTOL = 1e-10
PSD_RTOL = 1e-8


def frobenius_norm_sq(c: np.ndarray) -> float:
    """Squared Frobenius norm, sum of |c_ij|^2."""
    return float(np.sum(np.abs(np.asarray(c)) ** 2))


def hermitianize(h: np.ndarray) -> np.ndarray:
    """Average a matrix with its conjugate transpose to kill round-off drift."""
    return 0.5 * (h + h.conj().T)


def is_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    scale = 1.0 + np.linalg.norm(h)
    return float(np.max(np.abs(h - h.conj().T))) <= rtol * scale


def require_hermitian(h: np.ndarray, what: str = "matrix") -> np.ndarray:
    h = np.asarray(h)
    if not is_hermitian(h):
        dev = float(np.max(np.abs(h - h.conj().T)))
        raise NonHermitianError(
            f"{what} is not Hermitian: max |H - H^H| = {dev:.3e}"
        )
    return hermitianize(h)


def _fix_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = int(np.argmax(np.abs(col)))  # argmax takes the lowest index on ties
        pivot = col[idx]
        if np.abs(pivot) > 0:
            v[:, k] = col * (np.abs(pivot) / pivot)
    return v


def hermitian_eig(h: np.ndarray):
    """Eigendecomposition of a Hermitian matrix with a deterministic phase.

    Returns ``(w, v)`` with eigenvalues ``w`` real ascending and ``v``
    unitary so that ``h = v @ diag(w) @ v^H``.
    """
    h = require_hermitian(h)
    w, v = np.linalg.eigh(h)
    return w, _fix_phases(v)


def min_eigenvalue(h: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix (no phase fixing needed)."""
    return float(np.linalg.eigvalsh(hermitianize(np.asarray(h)))[0])


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root S with S @ S = h."""
    w, v = hermitian_eig(h)
    scale = 1.0 + float(np.linalg.norm(h))
    if w[0] < -PSD_RTOL * scale:
        raise NonHermitianError(
            f"matrix is not PSD: min eigenvalue {w[0]:.3e}"
        )
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return hermitianize(s)


def psd_inv_sqrt(h: np.ndarray) -> np.ndarray:
    """Hermitian PD inverse square root S with S @ S = inv(h)."""
    w, v = hermitian_eig(h)
    n = h.shape[0]
    floor = 1e-12 * float(np.real(np.trace(h))) / max(n, 1)
    if w[0] < floor:
        raise SingularMatrixError(
            f"matrix is numerically singular: eigenvalue {w[0]:.3e} "
            f"below floor {floor:.3e}"
        )
    s = (v / np.sqrt(w)) @ v.conj().T
    return hermitianize(s)


def vec(c: np.ndarray) -> np.ndarray:
    """Column-major stacking of a matrix into a 1-D vector."""
    return np.asarray(c).reshape(-1, order="F")


def unvec(x: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Exact inverse of :func:`vec`."""
    x = np.asarray(x).reshape(-1)
    if x.size != rows * cols:
        raise ValueError(f"cannot unvec length {x.size} into {rows}x{cols}")
    return x.reshape((rows, cols), order="F")


def complex_to_real_embed(h: np.ndarray) -> np.ndarray:
    """Embed an n x n complex matrix as the real 2n x 2n block matrix
    ``[[Re h, -Im h], [Im h, Re h]]``.

    For Hermitian h the embedding is symmetric, is PSD iff h is PSD, and
    doubles the trace.
    """
    h = np.asarray(h)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def real_embed_to_complex(r: np.ndarray) -> np.ndarray:
    """Inverse of :func:`complex_to_real_embed`.

    Averages the two diagonal blocks and antisymmetrizes the off-diagonal
    blocks, so it is a left inverse even for slightly perturbed inputs.
    """
    r = np.asarray(r)
    n2 = r.shape[0]
    if n2 % 2 != 0 or r.shape[0] != r.shape[1]:
        raise ValueError("embedded matrix must be square with even size")
    n = n2 // 2
    a = r[:n, :n]
    b = r[:n, n:]
    c = r[n:, :n]
    d = r[n:, n:]
    return 0.5 * (a + d) + 0.5j * (c - b)
