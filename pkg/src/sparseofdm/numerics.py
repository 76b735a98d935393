"""DFT kernels, partial DFT submatrices and regularized Hermitian solves.

Convention used throughout the package: the forward transform is
unnormalized, ``X[k] = sum_n x[n] exp(-2j*pi*k*n/N)``, and the inverse carries
the ``1/N`` factor. A channel impulse response is therefore the inverse DFT
of its frequency response, and a unit-energy CIR gives a CFR of unit mean
power.
"""
from functools import lru_cache

import numpy as np
import scipy.linalg

from ._validation import check_complex_matrix, check_complex_vector, check_index_set, check_nonnegative

__all__ = [
    "SingularSystemError",
    "dft",
    "direct_dft",
    "partial_dft_matrix",
    "regularized_pinv_apply",
    "condition_number",
]

# Above this size the condition number is estimated by power iteration.
SVD_MAX_DIM = 512


class SingularSystemError(np.linalg.LinAlgError):
    """Raised when an unregularized normal-equation system is singular."""


def _is_pow2(n):
    return n > 0 and (n & (n - 1)) == 0


@lru_cache(maxsize=16)
def _bit_reversal(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx = idx >> 1
    return rev


@lru_cache(maxsize=64)
def _twiddles(m):
    return np.exp(-1j * np.pi * np.arange(m) / m)


def _fft_radix2(x):
    # iterative decimation-in-time over the last axis
    n = x.shape[-1]
    lead = x.shape[:-1]
    y = x[..., _bit_reversal(n)]
    m = 1
    while m < n:
        blocks = y.reshape(lead + (n // (2 * m), 2, m))
        even = blocks[..., 0, :]
        odd = blocks[..., 1, :] * _twiddles(m)
        y = np.concatenate((even + odd, even - odd), axis=-1).reshape(lead + (n,))
        m *= 2
    return y


def direct_dft(x, inverse=False):
    """O(N^2) transform, used for sizes that are not a power of two."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    kn = np.outer(np.arange(n), np.arange(n)) % n
    sign = 1.0 if inverse else -1.0
    w = np.exp(sign * 2j * np.pi * kn / n)
    out = x @ w.T
    return out / n if inverse else out


def dft(x, inverse=False):
    """Forward (unnormalized) or inverse (``1/N``) DFT of ``x``.

    Power-of-two lengths go through the radix-2 FFT, anything else through
    :func:`direct_dft`.
    """
    x = check_complex_vector(x, "x")
    n = x.size
    if not _is_pow2(n):
        return direct_dft(x, inverse=inverse)
    if inverse:
        # conj trick keeps a single forward kernel
        return np.conj(_fft_radix2(np.conj(x))) / n
    return _fft_radix2(x)


def partial_dft_matrix(n, row_indices, col_indices):
    """Rows/columns of the ``n``-point DFT matrix.

    Entry ``(r, c)`` is ``exp(-2j*pi*row_indices[r]*col_indices[c]/n)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rows = check_index_set(row_indices, n, "row_indices")
    cols = check_index_set(col_indices, n, "col_indices")
    # reduce the exponent mod n before scaling, keeps phases exact for large n
    kn = np.outer(rows, cols) % n
    return np.exp(-2j * np.pi * kn / n)


def regularized_pinv_apply(a, y, lam):
    """Compute ``A^H (A A^H + lam*I)^{-1} y``.

    The Cholesky factorization is taken on the smaller of the two Gram
    matrices. For ``lam > 0`` both forms are identical (push-through
    identity); at ``lam == 0`` a tall full-rank ``A`` gives the least-squares
    solution and a wide full-rank ``A`` gives the minimum-norm solution.

    Raises
    ------
    SingularSystemError
        If the Gram matrix cannot be factorized.
    """
    a = check_complex_matrix(a, "a")
    y = check_complex_vector(y, "y", length=a.shape[0])
    lam = check_nonnegative(lam, "lambda")
    rows, cols = a.shape
    ah = a.conj().T
    try:
        if cols <= rows:
            gram = ah @ a + lam * np.eye(cols)
            factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
            return scipy.linalg.cho_solve(factor, ah @ y, check_finite=False)
        gram = a @ ah + lam * np.eye(rows)
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        return ah @ scipy.linalg.cho_solve(factor, y, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"Gram matrix of {rows}x{cols} system is not positive definite at lambda={lam}"
        ) from exc


def _power_extremes(gram, n_iter=500, tol=1e-12, seed=0):
    """Largest and smallest eigenvalue of a Hermitian PSD matrix."""
    rng = np.random.default_rng(seed)
    m = gram.shape[0]
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    v /= np.linalg.norm(v)
    lam_max = 0.0
    for _ in range(n_iter):
        w = gram @ v
        new = np.real(np.vdot(v, w))
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0, 0.0
        v = w / nrm
        if abs(new - lam_max) <= tol * abs(new):
            lam_max = new
            break
        lam_max = new
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except np.linalg.LinAlgError:
        return lam_max, 0.0
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    v /= np.linalg.norm(v)
    inv_max = 0.0
    for _ in range(n_iter):
        w = scipy.linalg.cho_solve(factor, v)
        new = np.real(np.vdot(v, w))
        v = w / np.linalg.norm(w)
        if abs(new - inv_max) <= tol * abs(new):
            inv_max = new
            break
        inv_max = new
    return lam_max, (1.0 / inv_max if inv_max > 0 else 0.0)


def condition_number(a):
    """Ratio of the largest to the smallest singular value of ``a``.

    Only the ``min(rows, cols)`` singular values are considered. A zero
    smallest singular value yields ``inf``. Full SVD is used up to
    ``SVD_MAX_DIM``; larger matrices use power / inverse iteration on the
    smaller Gram matrix.
    """
    a = check_complex_matrix(a, "a")
    if max(a.shape) <= SVD_MAX_DIM:
        s = np.linalg.svd(a, compute_uv=False)
        smax, smin = s[0], s[-1]
    else:
        ah = a.conj().T
        gram = ah @ a if a.shape[1] <= a.shape[0] else a @ ah
        lmax, lmin = _power_extremes(gram)
        smax, smin = np.sqrt(max(lmax, 0.0)), np.sqrt(max(lmin, 0.0))
    if smin <= smax * np.finfo(float).eps or smin == 0.0:
        return np.inf
    return float(smax / smin)
