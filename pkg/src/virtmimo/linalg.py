"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; ``as_matrix``
is the single entry point that enforces shape and finiteness.
"""

import numpy as np
import scipy.linalg as sla

from .errors import (DimensionError, IllConditionedError,
                     NotHermitianError, NotPositiveDefiniteError)

__all__ = ["as_matrix", "matmul", "hermitian", "fro_norm_sq", "solve_hpd",
           "pinv_apply", "block_diag", "HERMITIAN_TOL", "MAX_GRAM_CONDITION"]

HERMITIAN_TOL = 1e-12
MAX_GRAM_CONDITION = 1e12


def as_matrix(a, name="matrix"):
    """Return ``a`` as a 2-D complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def matmul(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by "
            f"{b.shape[0]}x{b.shape[1]}")
    return a @ b


def hermitian(a):
    return np.conj(np.asarray(a, dtype=np.complex128)).T


def fro_norm_sq(a):
    """Squared Frobenius norm (sum of squared moduli)."""
    a = np.asarray(a)
    return float(np.sum(a.real ** 2 + a.imag ** 2))


def _check_hermitian(a):
    scale = np.linalg.norm(a)
    asym = np.linalg.norm(a - a.conj().T)
    if asym > HERMITIAN_TOL * scale:
        raise NotHermitianError(
            f"matrix of shape {a.shape} is not Hermitian "
            f"(asymmetry {asym:.3e})")


def solve_hpd(a, b, ridge=0.0):
    """Solve ``(a + ridge*I) X = b`` for Hermitian positive definite systems.

    Parameters
    ----------
    a : (n, n) array
        Hermitian matrix.
    b : (n, k) array
        Right-hand side.
    ridge : float
        Non-negative diagonal loading.

    Raises
    ------
    NotPositiveDefiniteError
        If the Cholesky factorization fails; the message carries the
        smallest LDL^H pivot of the loaded matrix.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"solve_hpd needs a square matrix, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(
            f"right-hand side has {b.shape[0]} rows, matrix is {a.shape}")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    _check_hermitian(a)
    loaded = a + ridge * np.eye(a.shape[0])
    try:
        factor = sla.cho_factor(loaded, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        _, d, _ = sla.ldl(loaded, lower=True, hermitian=True)
        pivot = float(np.min(np.real(np.diag(d))))
        raise NotPositiveDefiniteError(
            f"matrix {a.shape} + {ridge:.3e}*I is not positive definite "
            f"(smallest pivot {pivot:.3e})", smallest_pivot=pivot) from None
    return sla.cho_solve(factor, b, check_finite=False)


def _equilibrated_condition(gram):
    # Row/column scaling does not hurt Cholesky accuracy, so judge the
    # conditioning of the diagonally equilibrated Gram matrix.
    s = np.sqrt(np.real(np.diag(gram)))
    if np.any(s == 0):
        return np.inf
    return float(np.linalg.cond(gram / np.outer(s, s)))


def pinv_apply(h, d):
    """Apply the Moore-Penrose inverse of a full-rank ``h`` to ``d``.

    Wide or square ``h`` uses ``h^H (h h^H)^{-1} d`` (minimum-norm
    interpolation); tall ``h`` uses ``(h^H h)^{-1} h^H d`` (least squares).
    """
    h = np.asarray(h, dtype=np.complex128)
    d = np.asarray(d, dtype=np.complex128)
    if h.shape[0] != d.shape[0]:
        raise DimensionError(
            f"h is {h.shape[0]}x{h.shape[1]} but d has {d.shape[0]} rows")
    hh = h.conj().T
    wide = h.shape[0] <= h.shape[1]
    gram = h @ hh if wide else hh @ h
    cond = _equilibrated_condition(gram)
    if cond > MAX_GRAM_CONDITION:
        raise IllConditionedError(
            f"Gram matrix of {h.shape[0]}x{h.shape[1]} channel is numerically "
            f"singular (condition {cond:.3e}); use the ridge path "
            f"(solve_hpd with ridge > 0) instead", condition=cond)
    if wide:
        return hh @ solve_hpd(gram, d)
    return solve_hpd(gram, hh @ d)


def block_diag(blocks):
    if len(blocks) == 0:
        raise ValueError("block_diag needs at least one block")
    mats = [np.asarray(b, dtype=np.complex128) for b in blocks]
    return sla.block_diag(*mats).astype(np.complex128, copy=False)
