"""OTSM modulator/demodulator and the OTFS, OFDM and single-carrier baselines.

OTSM, OTFS and SC share one frame structure: an ``M x N`` grid whose rows
are transformed along the second axis into the delay-time domain, then
read out column by column (``s[m + n*M] = Xt[m, n]``) with one frame-level
cyclic prefix of ``l_max + 1`` samples. They differ only in the row
transform (WHT, inverse DFT, identity). OFDM instead sends each grid
column as one OFDM symbol with its own cyclic prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transforms import dft, idft, wht

ZP_MODEMS = ("otsm", "otfs", "sc")
MODEMS = ZP_MODEMS + ("ofdm",)


@dataclass(frozen=True)
class TimeFrame:
    body: np.ndarray
    cp: np.ndarray

    @property
    def samples(self) -> np.ndarray:
        """Transmitted sample stream, prefix first."""
        return np.concatenate([self.cp, self.body])


@dataclass(frozen=True)
class ReceivedFrame:
    body: np.ndarray
    cp: np.ndarray


def to_delay_time(X: np.ndarray, modem: str) -> np.ndarray:
    """Row transform from the modem's symbol domain to delay-time."""
    if modem == "otsm":
        return wht(X)
    if modem == "otfs":
        return idft(X)
    if modem == "sc":
        return np.asarray(X, dtype=complex)
    raise ValueError(f"no delay-time transform for modem {modem!r}")


def from_delay_time(Xt: np.ndarray, modem: str) -> np.ndarray:
    if modem == "otsm":
        return wht(Xt)
    if modem == "otfs":
        return dft(Xt)
    if modem == "sc":
        return np.asarray(Xt, dtype=complex)
    raise ValueError(f"no delay-time transform for modem {modem!r}")


def vec(Xt: np.ndarray) -> np.ndarray:
    """Column-wise vectorization."""
    return np.asarray(Xt).reshape(-1, order="F")


def fold(r: np.ndarray, M: int, N: int) -> np.ndarray:
    r = np.asarray(r)
    if r.size != M * N:
        raise ValueError(f"expected {M * N} samples, got {r.size}")
    return r.reshape(N, M).T


def _zp_modulate(X, cp_len: int, modem: str) -> TimeFrame:
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError("grid must be a 2-D array")
    body = vec(to_delay_time(X, modem))
    cp = body[body.size - cp_len:] if cp_len else body[:0]
    return TimeFrame(body=body, cp=cp.copy())


def _zp_demodulate(rx: ReceivedFrame | np.ndarray, M: int, N: int, modem: str) -> np.ndarray:
    body = rx.body if isinstance(rx, ReceivedFrame) else rx
    return from_delay_time(fold(body, M, N), modem)


def otsm_modulate(X, cp_len: int = 0) -> TimeFrame:
    return _zp_modulate(X, cp_len, "otsm")


def otsm_demodulate(rx, M: int, N: int) -> np.ndarray:
    return _zp_demodulate(rx, M, N, "otsm")


def otfs_modulate(X, cp_len: int = 0) -> TimeFrame:
    return _zp_modulate(X, cp_len, "otfs")


def otfs_demodulate(rx, M: int, N: int) -> np.ndarray:
    return _zp_demodulate(rx, M, N, "otfs")


def sc_modulate(X, cp_len: int = 0) -> TimeFrame:
    return _zp_modulate(X, cp_len, "sc")


def sc_demodulate(rx, M: int, N: int) -> np.ndarray:
    return _zp_demodulate(rx, M, N, "sc")


def ofdm_modulate(X, cp_len: int) -> TimeFrame:
    """One OFDM symbol per grid column (``M`` subcarriers), each with its own CP."""
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError("grid must be a 2-D array")
    t = idft(X.T)  # (N, M)
    with_cp = np.concatenate([t[:, t.shape[1] - cp_len:], t], axis=1)
    return TimeFrame(body=with_cp.reshape(-1), cp=np.zeros(0, dtype=complex))


def ofdm_demodulate(rx, M: int, N: int, cp_len: int) -> np.ndarray:
    body = rx.body if isinstance(rx, ReceivedFrame) else np.asarray(rx)
    if body.size != N * (M + cp_len):
        raise ValueError(f"expected {N * (M + cp_len)} samples, got {body.size}")
    t = body.reshape(N, M + cp_len)[:, cp_len:]
    return dft(t).T


def modulate(X, modem: str, cp_len: int) -> TimeFrame:
    """Dispatch on modem name. For OFDM ``cp_len`` is the per-symbol prefix."""
    if modem == "ofdm":
        return ofdm_modulate(X, cp_len)
    if modem in ZP_MODEMS:
        return _zp_modulate(X, cp_len, modem)
    raise ValueError(f"unknown modem {modem!r}")


def demodulate(rx, modem: str, M: int, N: int, cp_len: int = 0) -> np.ndarray:
    if modem == "ofdm":
        return ofdm_demodulate(rx, M, N, cp_len)
    if modem in ZP_MODEMS:
        return _zp_demodulate(rx, M, N, modem)
    raise ValueError(f"unknown modem {modem!r}")
