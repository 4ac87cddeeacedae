"""Radix-2 discrete Fourier transform for the sketch-of-outer-product pipeline.

Iterative decimation-in-time with cached bit-reversal tables and twiddle
factors. Lengths are restricted to powers of two: every sketch dimension this
package cares about is one, and the restriction keeps the transform small
enough to audit. Forward transform is unnormalized; the inverse carries the
1/n factor, so idfft(dfft(x)) == x.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_length(n: int) -> None:
    if not is_power_of_two(n):
        raise ValueError(f"transform length must be a power of two, got {n}")


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev = (rev << 1) | ((idx >> b) & 1)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(n: int) -> tuple[np.ndarray, ...]:
    # One table per butterfly stage: exp(-2i*pi*k/size) for k < size/2.
    tables = []
    size = 2
    while size <= n:
        w = np.exp(-2j * np.pi * np.arange(size // 2) / size)
        w.setflags(write=False)
        tables.append(w)
        size *= 2
    return tuple(tables)


def _fft_inplace(out: np.ndarray) -> np.ndarray:
    """Core radix-2 pass over a bit-reversed complex array of pow2 length."""
    n = out.size
    for stage, w in enumerate(_twiddles(n)):
        size = 2 << stage
        half = size >> 1
        blocks = out.reshape(-1, size)
        odd = blocks[:, half:] * w
        even = blocks[:, :half].copy()
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
    return out


def dfft(x) -> np.ndarray:
    """Forward DFT of a real signal: X_k = sum_j x_j exp(-2i*pi*jk/n).

    Returns a complex128 array of the same power-of-two length.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    _check_length(x.size)
    out = x[_bit_reversal(x.size)].astype(np.complex128)
    return _fft_inplace(out)


def idfft(X, imag_tol: float = 1e-9) -> np.ndarray:
    """Inverse DFT of a real signal's spectrum: x_j = (1/n) sum_k X_k exp(+2i*pi*jk/n).

    The spectrum must be (numerically) conjugate-symmetric; any imaginary
    residue above imag_tol raises, otherwise the residue is discarded and the
    real signal is returned.
    """
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 1:
        raise ValueError(f"expected a 1-D spectrum, got shape {X.shape}")
    n = X.size
    _check_length(n)
    out = np.conj(X)[_bit_reversal(n)]
    out = np.conj(_fft_inplace(out)) / n
    residue = float(np.max(np.abs(out.imag))) if n else 0.0
    if residue > imag_tol:
        raise ValueError(
            f"inverse transform is not real: imaginary residue {residue:.3e} "
            f"exceeds tolerance {imag_tol:.1e}"
        )
    return np.ascontiguousarray(out.real)


def complex_hadamard(X, Y) -> np.ndarray:
    """Element-wise complex product of two equal-length spectra."""
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    if X.shape != Y.shape or X.ndim != 1:
        raise ValueError(f"spectra must be 1-D with equal length, got {X.shape} and {Y.shape}")
    return X * Y
