"""Arbitrary-length DFT and cyclic convolution through the chirp (Bluestein) trick.

Group orders like p - 1 are almost never powers of two. Writing
nk = (n^2 + k^2 - (k - n)^2) / 2 turns a length-N DFT into a linear
convolution with the chirp w(n) = exp(-i pi n^2 / N), which is carried out
with power-of-two FFTs of length >= 2N - 1.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


@lru_cache(maxsize=16)
def _chirp(n: int, inverse: bool):
    # reduce n^2 mod 2n before scaling so the phase stays exact for large n
    k = np.arange(n, dtype=np.int64)
    phase = np.pi * ((k * k) % (2 * n)) / n
    sign = 1.0 if inverse else -1.0
    w = np.exp(1j * sign * phase)
    m = _next_pow2(2 * n - 1)
    filt = np.zeros(m, dtype=np.complex128)
    filt[:n] = np.conj(w)
    filt[m - n + 1 :] = np.conj(w[1:][::-1])
    w.setflags(write=False)
    fhat = np.fft.fft(filt)
    fhat.setflags(write=False)
    return w, fhat, m


def chirp_dft(x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unnormalised DFT along the last axis.

    Forward: X[k] = sum_n x[n] exp(-2 pi i nk/N); ``inverse=True`` flips the
    sign of the exponent (no 1/N factor).
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    w, fhat, m = _chirp(n, inverse)
    a = np.fft.fft(x * w, m, axis=-1)
    y = np.fft.ifft(a * fhat, axis=-1)[..., :n]
    return y * w


def cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b)[k] = sum_j a[j] b[k - j mod N], any length N."""
    n = a.shape[-1]
    return chirp_dft(chirp_dft(a) * chirp_dft(b), inverse=True) / n


def cyclic_power(a: np.ndarray, m: int) -> np.ndarray:
    """m-fold cyclic self-convolution of ``a``."""
    n = a.shape[-1]
    return chirp_dft(chirp_dft(a) ** m, inverse=True) / n
