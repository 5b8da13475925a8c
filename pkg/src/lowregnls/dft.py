"""Centered discrete Fourier transforms on uniform grids of the torus.

Samples live on the equispaced points x_n = 2*pi*n/M of (-pi, pi] and
coefficients on integer frequencies k, both indexed by the contiguous
integer window centered at zero (n, k = -(M-1)/2 .. (M-1)/2 for odd M).
The forward transform carries the 1/M factor:

    coeffs[k]  = (1/M) * sum_n samples[n] * exp(-i k x_n)
    samples[n] =         sum_k coeffs[k]  * exp(+i k x_n)

Both directions run in O(M log M) for arbitrary M; the index bookkeeping
reduces to an ifftshift/fftshift pair around numpy's standard-order FFT.
"""

from __future__ import annotations

import numpy as np

__all__ = ["index_window", "grid", "forward", "inverse"]


def index_window(m: int) -> np.ndarray:
    """Integer indices of the centered length-m window, ascending.

    For odd m this is -(m-1)/2 .. (m-1)/2; for even m, -m/2 .. m/2 - 1
    (the fftshift convention).
    """
    if m < 1:
        raise ValueError(f"window length must be >= 1, got {m}")
    return np.arange(m) - m // 2


def grid(m: int) -> np.ndarray:
    """Sample points x_n = 2*pi*n/m for n in index_window(m)."""
    return 2.0 * np.pi * index_window(m) / m


def forward(samples: np.ndarray, axis: int = -1) -> np.ndarray:
    """Samples on grid(m) -> centered Fourier coefficients, 1/m normalized."""
    a = np.asarray(samples, dtype=np.complex128)
    if a.shape[axis] < 1:
        raise ValueError("empty sample array")
    shifted = np.fft.ifftshift(a, axes=axis)
    out = np.fft.fft(shifted, axis=axis, norm="forward")
    return np.fft.fftshift(out, axes=axis)


def inverse(coeffs: np.ndarray, axis: int = -1) -> np.ndarray:
    """Centered Fourier coefficients -> samples on grid(m). Inverse of forward."""
    a = np.asarray(coeffs, dtype=np.complex128)
    if a.shape[axis] < 1:
        raise ValueError("empty coefficient array")
    shifted = np.fft.ifftshift(a, axes=axis)
    out = np.fft.ifft(shifted, axis=axis, norm="forward")
    return np.fft.fftshift(out, axes=axis)
