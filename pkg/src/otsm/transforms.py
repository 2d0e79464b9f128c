"""Unitary transforms and convolution primitives.

Both the Walsh-Hadamard matrix and the DFT matrix carry a ``1/sqrt(N)``
factor, so every transform here is unitary. With that normalization the
convolution theorems pick up a ``sqrt(N)`` factor::

    wht(dyadic_convolution(a, b)) == sqrt(N) * wht(a) * wht(b)
    dft(circular_convolution(a, b)) == sqrt(N) * dft(a) * dft(b)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_pow2(n: int) -> None:
    if not is_power_of_two(n):
        raise ValueError(f"length must be a power of two, got {n}")


def _bit_reverse(i: int, bits: int) -> int:
    out = 0
    for _ in range(bits):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


@lru_cache(maxsize=None)
def sequency_order(n: int) -> np.ndarray:
    """Natural-order Hadamard row index for each sequency index.

    Row ``k`` of the sequency-ordered Walsh matrix is row
    ``sequency_order(n)[k]`` of the Sylvester Hadamard matrix.
    """
    _check_pow2(n)
    bits = n.bit_length() - 1
    idx = np.array([_bit_reverse(k ^ (k >> 1), bits) for k in range(n)], dtype=np.intp)
    idx.setflags(write=False)
    return idx


def _sylvester(n: int) -> np.ndarray:
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


@lru_cache(maxsize=None)
def walsh_matrix(n: int) -> np.ndarray:
    """Sequency-ordered, normalized Walsh matrix ``W_N`` (read-only)."""
    _check_pow2(n)
    w = _sylvester(n)[sequency_order(n)] / np.sqrt(n)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def fourier_matrix(n: int) -> np.ndarray:
    """Normalized DFT matrix with entries ``exp(-2j*pi*k*n/N)/sqrt(N)``."""
    if n < 1:
        raise ValueError("DFT order must be positive")
    k = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    f.setflags(write=False)
    return f


def sign_changes(row: np.ndarray) -> int:
    s = np.sign(np.real(row))
    return int(np.count_nonzero(s[1:] != s[:-1]))


def fwht_natural(x: np.ndarray) -> np.ndarray:
    """Unnormalized Hadamard transform in natural order along the last axis.

    Butterfly of additions and subtractions only.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    _check_pow2(n)
    lead = x.shape[:-1]
    y = x.reshape(-1, n)
    h = 1
    while h < n:
        y = y.reshape(y.shape[0], n // (2 * h), 2, h)
        a = y[:, :, 0, :]
        b = y[:, :, 1, :]
        y = np.stack((a + b, a - b), axis=2)
        h *= 2
    return y.reshape(*lead, n)


def wht(x: np.ndarray) -> np.ndarray:
    """Sequency-ordered normalized WHT along the last axis (``W_N @ x``).

    The transform is its own inverse.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    y = fwht_natural(x)
    return y[..., sequency_order(n)] / np.sqrt(n)


def dft(x: np.ndarray) -> np.ndarray:
    """Unitary DFT along the last axis (``F_N @ x``)."""
    x = np.asarray(x)
    if x.shape[-1] == 0:
        raise ValueError("cannot transform an empty vector")
    return np.fft.fft(x, axis=-1, norm="ortho")


def idft(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft` (``F_N^H @ x``)."""
    x = np.asarray(x)
    if x.shape[-1] == 0:
        raise ValueError("cannot transform an empty vector")
    return np.fft.ifft(x, axis=-1, norm="ortho")


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"vectors must have equal length, got {a.shape} and {b.shape}")


def dyadic_convolution(a, b) -> np.ndarray:
    """``out[n] = sum_k a[k] * b[n XOR k]``."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_pair(a, b)
    _check_pow2(a.size)
    idx = np.arange(a.size)
    return b[np.bitwise_xor.outer(idx, idx)] @ a


def circular_convolution(a, b) -> np.ndarray:
    """``out[n] = sum_k a[k] * b[(n - k) mod N]``."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_pair(a, b)
    idx = np.arange(a.size)
    return b[(idx[:, None] - idx[None, :]) % a.size] @ a


@dataclass(frozen=True)
class ShufflePermutation:
    """Row-column interleaver ``P`` for an M-by-N grid.

    ``P`` sends index ``n + m*N`` (row-stacked grid) to ``m + n*M``
    (column-stacked grid), so ``A kron B == P @ (B kron A) @ P.T`` for
    ``A`` N-by-N and ``B`` M-by-M.
    """

    rows_m: int
    cols_n: int

    @property
    def size(self) -> int:
        return self.rows_m * self.cols_n

    @property
    def mapping(self) -> np.ndarray:
        """``mapping[k]`` is the source index feeding output index ``k``."""
        m, n = self.rows_m, self.cols_n
        k = np.arange(m * n)
        return (k // m) + (k % m) * n

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``P @ x``."""
        return np.asarray(x)[..., self.mapping]

    def apply_transpose(self, x: np.ndarray) -> np.ndarray:
        """``P.T @ x``."""
        x = np.asarray(x)
        out = np.empty_like(x)
        out[..., self.mapping] = x
        return out

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.size, self.size))
        p[np.arange(self.size), self.mapping] = 1.0
        return p


def perfect_shuffle(m: int, n: int) -> ShufflePermutation:
    if m < 1 or n < 1:
        raise ValueError("grid dimensions must be positive")
    return ShufflePermutation(m, n)
