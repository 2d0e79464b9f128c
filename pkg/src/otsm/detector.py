"""Block-wise matched filtering, Gauss-Seidel detection and single-tap equalizers.

Zero padding makes the time-domain channel block diagonal, so each block
``r_n = G_n s_n + w_n`` is solved on its own. All blocks are processed
together: arrays are shaped ``(N, ...)`` with the block index first.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import BlockChannel, DelayTimeTaps
from .frame import QamConstellation
from .modem import from_delay_time, to_delay_time


@dataclass(frozen=True)
class DetectorConfig:
    max_iters: int = 15
    relaxation: float = 1.0
    initializer: str = "zero"
    stop_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if self.initializer not in ("zero", "mmse_single_tap"):
            raise ValueError(f"unknown initializer {self.initializer!r}")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be non-negative")

    @classmethod
    def for_qam(cls, order: int, **kw) -> "DetectorConfig":
        kw.setdefault("relaxation", 1.0 if order == 4 else 0.5)
        return cls(**kw)


@dataclass(frozen=True)
class MatchedBlocks:
    """``R_n = G_n^H G_n`` in lower band storage and ``z_n = G_n^H r_n``.

    ``bands[n, d, m]`` is ``R_n[m, m - d]``; the diagonal is ``d = 0``.
    """

    bands: np.ndarray
    z: np.ndarray

    @property
    def N(self) -> int:
        return self.bands.shape[0]

    @property
    def M(self) -> int:
        return self.bands.shape[2]

    @property
    def bandwidth(self) -> int:
        return self.bands.shape[1] - 1

    @property
    def diagonal(self) -> np.ndarray:
        return self.bands[:, 0, :].real

    def dense(self) -> np.ndarray:
        N, B, M = self.bands.shape
        R = np.zeros((N, M, M), dtype=complex)
        m = np.arange(M)
        for d in range(B):
            R[:, m[d:], m[d:] - d] = self.bands[:, d, d:]
            if d:
                R[:, m[d:] - d, m[d:]] = self.bands[:, d, d:].conj()
        return R

    def lower(self) -> np.ndarray:
        """Dense ``D_n + L_n``."""
        R = self.dense()
        return np.tril(R)

    def apply(self, s: np.ndarray) -> np.ndarray:
        """``R_n s_n`` for ``s`` shaped ``(N, M)``."""
        out = self.bands[:, 0, :] * s
        M = self.M
        for d in range(1, self.bandwidth + 1):
            out[:, d:] += self.bands[:, d, d:] * s[:, : M - d]
            out[:, : M - d] += self.bands[:, d, d:].conj() * s[:, d:]
        return out

    def residual(self, s: np.ndarray) -> np.ndarray:
        """Per-block ``||z_n - R_n s_n||``."""
        return np.linalg.norm(self.z - self.apply(s), axis=1)


def matched_filter(bc: BlockChannel, r: np.ndarray) -> MatchedBlocks:
    """Banded ``G_n^H G_n`` and ``G_n^H r_n`` at ``O(N M L^2)`` cost."""
    N, L, M = bc.bands.shape
    r = np.asarray(r).reshape(N, M)
    g = bc.bands
    R = np.zeros((N, L, M), dtype=complex)
    for d in range(L):
        for j in range(d, L):
            R[:, d, d:] += g[:, j - d, d:].conj() * g[:, j, : M - d]
    z = np.zeros((N, M), dtype=complex)
    for j in range(L):
        z[:, : M - j] += g[:, j, : M - j].conj() * r[:, j:]
    return MatchedBlocks(bands=R, z=z)


def _safe_diagonal(mb: MatchedBlocks, noise_var: float) -> np.ndarray:
    diag = mb.diagonal.copy()
    bad = diag <= 1e-12 * max(1.0, float(diag.max(initial=0.0)))
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} degenerate diagonal entries regularized with the noise variance",
            RuntimeWarning,
            stacklevel=3,
        )
        diag[bad] = max(noise_var, 1e-12)
    return diag


def gs_sweep(mb: MatchedBlocks, s: np.ndarray, diag: np.ndarray | None = None) -> np.ndarray:
    """One Gauss-Seidel sweep ``s <- (D + L)^-1 (z - L^H s)`` on every block.

    ``(D + L)`` is never inverted; the sweep is a banded forward substitution.
    """
    if diag is None:
        diag = _safe_diagonal(mb, 0.0)
    N, M = mb.z.shape
    B = mb.bandwidth
    rhs = mb.z.copy()
    for d in range(1, B + 1):
        rhs[:, : M - d] -= mb.bands[:, d, d:].conj() * s[:, d:]
    out = np.zeros((N, M + B), dtype=complex)
    # coef[:, m, k] multiplies out[:, m + k], i.e. s[m - B + k]
    coef = np.zeros((N, M, B), dtype=complex)
    for d in range(1, B + 1):
        coef[:, :, B - d] = mb.bands[:, d, :]
    inv = 1.0 / diag
    for m in range(M):
        acc = (coef[:, m] * out[:, m : m + B]).sum(axis=1) if B else 0.0
        out[:, m + B] = (rhs[:, m] - acc) * inv[:, m]
    return out[:, B:]


def gauss_seidel(mb: MatchedBlocks, iters: int, init: np.ndarray | None = None) -> np.ndarray:
    """Plain Gauss-Seidel on ``R_n s_n = z_n`` without any symbol decisions."""
    s = np.zeros_like(mb.z) if init is None else np.array(init, dtype=complex)
    diag = _safe_diagonal(mb, 0.0)
    for _ in range(iters):
        s = gs_sweep(mb, s, diag)
    return s


def direct_solve(mb: MatchedBlocks) -> np.ndarray:
    """Least-squares block solution ``R_n^+ z_n`` (dense reference)."""
    R = mb.dense()
    out = np.empty_like(mb.z)
    for n in range(mb.N):
        out[n] = np.linalg.lstsq(R[n], mb.z[n], rcond=None)[0]
    return out


def blocks_to_grid(s: np.ndarray, modem: str) -> np.ndarray:
    """Time-domain block estimates ``(N, M)`` to the modem's ``M x N`` grid."""
    return from_delay_time(np.asarray(s).T, modem)


def grid_to_blocks(X: np.ndarray, modem: str) -> np.ndarray:
    return to_delay_time(X, modem).T


def decide(X_soft: np.ndarray, constellation: QamConstellation, data_mask: np.ndarray, known: np.ndarray) -> np.ndarray:
    """Slice data positions; every other position takes its known value."""
    X = np.array(known, dtype=complex)
    X[data_mask] = constellation.nearest(X_soft[data_mask])
    return X


@dataclass
class Detection:
    grid: np.ndarray  # sliced symbols
    soft: np.ndarray  # pre-decision symbol estimates from the last sweep
    s: np.ndarray  # time-domain blocks after the final update, (N, M)
    iterations: int


def gs_detect(
    mb: MatchedBlocks,
    cfg: DetectorConfig,
    constellation: QamConstellation,
    modem: str,
    data_mask: np.ndarray,
    known: np.ndarray | None = None,
    init: np.ndarray | None = None,
    noise_var: float = 0.0,
) -> Detection:
    """Gauss-Seidel detection with decision feedback.

    Each iteration runs one sweep per block, maps the blocks to the symbol
    grid, slices data positions and blends the re-modulated decision into
    the time-domain estimate with weight ``cfg.relaxation``. Stops after
    ``cfg.max_iters`` or once the relative change of the estimate drops
    below ``cfg.stop_tol``.
    """
    if known is None:
        known = np.zeros(data_mask.shape, dtype=complex)
    s = np.zeros_like(mb.z) if init is None else np.array(init, dtype=complex)
    diag = _safe_diagonal(mb, noise_var)
    delta = cfg.relaxation
    for it in range(1, cfg.max_iters + 1):
        s_gs = gs_sweep(mb, s, diag)
        soft = blocks_to_grid(s_gs, modem)
        hard = decide(soft, constellation, data_mask, known)
        s_new = (1 - delta) * s_gs + delta * grid_to_blocks(hard, modem)
        change = np.linalg.norm(s_new - s) / max(np.linalg.norm(s_new), 1e-300)
        s = s_new
        if change < cfg.stop_tol:
            break
    return Detection(grid=hard, soft=soft, s=s, iterations=it)


def single_tap_mmse(y, h, noise_var: float, es: float = 1.0) -> np.ndarray:
    """Per-bin MMSE ``conj(h) y / (|h|^2 + noise_var/es)``."""
    y = np.asarray(y)
    h = np.asarray(h)
    reg = max(noise_var / es, 1e-300)
    return np.conj(h) * y / (np.abs(h) ** 2 + reg)


def block_frequency_response(bc: BlockChannel) -> np.ndarray:
    """Per-block ``M``-bin response of the block-averaged taps, shape ``(N, M)``."""
    N, L, M = bc.bands.shape
    h = np.zeros((N, M), dtype=complex)
    for l in range(L):
        h[:, l] = bc.bands[:, l, : M - l].mean(axis=1)
    return np.fft.fft(h, axis=1)


def single_tap_blocks(bc: BlockChannel, r: np.ndarray, noise_var: float, es: float = 1.0) -> np.ndarray:
    """Single-tap MMSE on each zero-padded block in the frequency domain.

    The zero padding turns each block's linear convolution into a circular
    one, so an ``M``-point DFT diagonalizes the block-averaged channel.
    """
    N, M = bc.N, bc.M
    H = block_frequency_response(bc)
    Rf = np.fft.fft(np.asarray(r).reshape(N, M), axis=1)
    return np.fft.ifft(single_tap_mmse(Rf, H, noise_var, es), axis=1)


def ofdm_channel_gains(taps: DelayTimeTaps, M: int, N: int, cp_len: int) -> np.ndarray:
    """Per-subcarrier gain of each OFDM symbol from its time-averaged taps, ``(M, N)``.

    ``taps`` must start at ``q = 0`` and cover ``N * (M + cp_len)`` samples.
    """
    vals = taps.window(0, N * (M + cp_len))
    L = vals.shape[0]
    vals = vals.reshape(L, N, M + cp_len)[:, :, cp_len:]
    h = np.zeros((N, M), dtype=complex)
    h[:, :L] = vals.mean(axis=2).T
    return np.fft.fft(h, axis=1).T
