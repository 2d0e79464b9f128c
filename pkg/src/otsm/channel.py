"""Time-varying multipath channel: path sampling, delay-time taps, application.

Path delays are kept in sample units (``l = tau * M * delta_f``) and
Doppler shifts in cycles per frame (``kappa = nu * N * T``). The sampled
delay-time channel is::

    g[l, q] = sum_i g_i * exp(2j*pi*kappa_i*(q - l)/(N*M)) * k(l - l_i)

with ``k`` either a Kronecker delta at the rounded delay or ``sinc``.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .frame import FrameParams
from .modem import ReceivedFrame, TimeFrame
from .transforms import fourier_matrix, perfect_shuffle, walsh_matrix

SPEED_OF_LIGHT = 299_792_458.0

EVA_DELAYS_NS = (0, 30, 150, 310, 370, 710, 1090, 1730, 2510)
EVA_POWERS_DB = (0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9)

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class PathSet:
    gains: np.ndarray
    delays: np.ndarray  # sample units
    dopplers: np.ndarray  # cycles per frame

    def __len__(self):
        return len(self.gains)

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in (self.gains, self.delays, self.dopplers):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class DelayTimeTaps:
    """``values[l, j]`` is ``g[l, start + j]``."""

    values: np.ndarray
    start: int = 0

    @property
    def n_taps(self) -> int:
        return self.values.shape[0]

    def window(self, q0: int, q1: int) -> np.ndarray:
        """Taps for times ``q0 <= q < q1``."""
        a, b = q0 - self.start, q1 - self.start
        if a < 0 or b > self.values.shape[1]:
            raise ValueError(f"times [{q0}, {q1}) outside stored range")
        return self.values[:, a:b]

    def body(self, nm: int) -> np.ndarray:
        return self.window(0, nm)


def max_doppler_hz(speed_kmh: float, carrier_hz: float) -> float:
    return speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT


def sample_profile(
    params: FrameParams,
    delays_ns,
    powers_db,
    speed_kmh: float,
    rng,
    doppler: str = "one_sided",
) -> PathSet:
    """Rayleigh paths with the given power-delay profile.

    Each path draws a circularly-symmetric Gaussian gain whose variance is
    its normalized profile power, and a Doppler shift uniform on
    ``(0, nu_max)`` (``doppler="one_sided"``) or ``(-nu_max, nu_max)``
    (``"symmetric"``).
    """
    if speed_kmh < 0:
        raise ValueError("speed must be non-negative")
    rng = np.random.default_rng(rng)
    delays_s = np.asarray(delays_ns, dtype=float) * 1e-9
    power = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
    power /= power.sum()
    p = power.size
    gains = np.sqrt(power / 2) * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    nu_max = max_doppler_hz(speed_kmh, params.carrier_hz)
    if doppler == "one_sided":
        u = rng.uniform(0.0, 1.0, p)
    elif doppler == "symmetric":
        u = rng.uniform(-1.0, 1.0, p)
    else:
        raise ValueError(f"unknown doppler model {doppler!r}")
    nu = nu_max * u
    if delays_s.max(initial=0.0) * nu_max > 0.01:
        warnings.warn("channel is not under-spread (tau_max * nu_max > 0.01)", stacklevel=2)
    return PathSet(
        gains=gains,
        delays=delays_s * params.sample_rate,
        dopplers=nu * params.N * params.T,
    )


def sample_eva(params: FrameParams, speed_kmh: float, rng, doppler: str = "one_sided") -> PathSet:
    return sample_profile(params, EVA_DELAYS_NS, EVA_POWERS_DB, speed_kmh, rng, doppler)


def discretize(
    paths: PathSet,
    params: FrameParams,
    mode: str = "round_delay",
    start: int | None = None,
    length: int | None = None,
) -> DelayTimeTaps:
    """Delay-time taps for ``l = 0..l_max`` over ``start <= q < start + length``.

    By default the window covers the frame-level cyclic prefix and the body.
    """
    if start is None:
        start = -params.cp_len
    if length is None:
        length = params.N * params.M - start
    nm = params.N * params.M
    delays = np.asarray(paths.delays, dtype=float)
    if mode == "round_delay":
        delays_used = np.rint(delays)
    elif mode == "sinc":
        delays_used = delays
    else:
        raise ValueError(f"unknown discretization mode {mode!r}")
    if np.any(delays_used > params.l_max) or np.any(delays < 0):
        raise ValueError(f"path delays {delays} exceed l_max={params.l_max}")

    taps = np.arange(params.l_max + 1)
    if mode == "round_delay":
        weight = (taps[None, :] == delays_used[:, None]).astype(float)
    else:
        weight = np.sinc(taps[None, :] - delays[:, None])
    q = start + np.arange(length)
    kappa = np.asarray(paths.dopplers, dtype=float)
    # (P, L, Q)
    phase = np.exp(2j * np.pi * kappa[:, None, None] * (q[None, None, :] - taps[None, :, None]) / nm)
    values = np.einsum("p,pl,plq->lq", np.asarray(paths.gains), weight, phase)
    return DelayTimeTaps(values=values, start=start)


def identity_taps(params: FrameParams) -> DelayTimeTaps:
    one = PathSet(np.array([1.0 + 0j]), np.array([0.0]), np.array([0.0]))
    return discretize(one, params)


def convolve_time_varying(tap_values: np.ndarray, signal: np.ndarray) -> np.ndarray:
    """``r[j] = sum_l tap_values[l, j] * signal[j - l]`` with zeros before the start."""
    signal = np.asarray(signal)
    n_taps, length = tap_values.shape
    if length != signal.size:
        raise ValueError(f"taps cover {length} samples, signal has {signal.size}")
    r = tap_values[0] * signal
    for l in range(1, n_taps):
        r[l:] += tap_values[l, l:] * signal[:-l]
    return r


def awgn(shape, noise_var: float, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.sqrt(noise_var / 2.0) * w


def apply(taps: DelayTimeTaps, tx: TimeFrame, noise_var: float = 0.0, rng=None) -> ReceivedFrame:
    """Pass a frame through the channel and add white Gaussian noise.

    ``taps`` must start at ``q = -len(tx.cp)``. Prefix samples are returned
    separately in ``ReceivedFrame.cp``.
    """
    cp_len = tx.cp.size
    if taps.start != -cp_len:
        raise ValueError(f"taps start at q={taps.start}, frame prefix needs q={-cp_len}")
    sig = tx.samples
    if taps.values.shape[1] != sig.size:
        raise ValueError(f"taps cover {taps.values.shape[1]} samples, frame has {sig.size}")
    r = convolve_time_varying(taps.values, sig)
    r = r + awgn(r.shape, noise_var, rng)
    return ReceivedFrame(body=r[cp_len:], cp=r[:cp_len])


@dataclass(frozen=True)
class BlockChannel:
    """Per-block lower-banded channel matrices in band storage.

    ``bands[n, l, c]`` is entry ``(c + l, c)`` of ``G_n``, i.e. tap ``l`` at
    time ``c + l + n*M``; entries with ``c + l >= M`` are zero.
    """

    bands: np.ndarray

    @property
    def N(self) -> int:
        return self.bands.shape[0]

    @property
    def M(self) -> int:
        return self.bands.shape[2]

    @property
    def n_taps(self) -> int:
        return self.bands.shape[1]

    def blocks(self) -> np.ndarray:
        """Dense ``(N, M, M)`` stack of ``G_n``."""
        N, L, M = self.bands.shape
        G = np.zeros((N, M, M), dtype=complex)
        c = np.arange(M)
        for l in range(L):
            G[:, c[: M - l] + l, c[: M - l]] = self.bands[:, l, : M - l]
        return G

    def apply(self, s: np.ndarray) -> np.ndarray:
        """``r_n = G_n s_n`` for the column-stacked frame ``s``."""
        S = np.asarray(s).reshape(self.N, self.M)
        R = self.bands[:, 0, :] * S
        for l in range(1, self.n_taps):
            R[:, l:] += self.bands[:, l, : self.M - l] * S[:, : self.M - l]
        return R.reshape(-1)


def build_block_channel(taps: DelayTimeTaps, params: FrameParams) -> BlockChannel:
    if params.l_zp < params.l_max:
        raise ValueError("zero padding shorter than the delay spread; blocks are not independent")
    N, M = params.N, params.M
    body = taps.body(N * M)
    L = taps.n_taps
    bands = np.zeros((N, L, M), dtype=complex)
    g = body.reshape(L, N, M)  # g[l, n, m] = tap l at time m + n*M
    for l in range(L):
        bands[:, l, : M - l] = g[l, :, l:]
    return BlockChannel(bands)


def dense_time_matrix(taps: DelayTimeTaps, params: FrameParams) -> np.ndarray:
    """Full ``NM x NM`` time-domain matrix, prefix folded in as wraparound."""
    nm = params.N * params.M
    if nm > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to NM <= {DENSE_LIMIT}, got {nm}")
    body = taps.body(nm)
    G = np.zeros((nm, nm), dtype=complex)
    q = np.arange(nm)
    for l in range(taps.n_taps):
        G[q, (q - l) % nm] += body[l]
    return G


def build_delay_sequency_matrix(taps: DelayTimeTaps, params: FrameParams, modem: str = "otsm") -> np.ndarray:
    """Dense channel ``H`` acting on the row-stacked grid ``X.reshape(-1)``."""
    G = dense_time_matrix(taps, params)
    M, N = params.M, params.N
    P = perfect_shuffle(M, N).matrix()
    if modem == "otsm":
        pre = post = walsh_matrix(N)
    elif modem == "otfs":
        post = fourier_matrix(N).conj().T
        pre = fourier_matrix(N)
    elif modem == "sc":
        pre = post = np.eye(N)
    else:
        raise ValueError(f"no delay-domain matrix for modem {modem!r}")
    eye = np.eye(M)
    return np.kron(eye, pre) @ (P.T @ G @ P) @ np.kron(eye, post)


def delay_time_vector(taps: DelayTimeTaps, params: FrameParams, m: int, l: int) -> np.ndarray:
    """Tap ``l`` seen by delay row ``m`` across the ``N`` blocks."""
    if not 0 <= m < params.M or not 0 <= l < taps.n_taps:
        raise IndexError(f"(m={m}, l={l}) out of range")
    body = taps.body(params.N * params.M)
    return body[l, m + params.M * np.arange(params.N)]


def sequency_spread(taps: DelayTimeTaps, params: FrameParams, m: int, l: int):
    """Sequency spread matrix ``U = W diag(g) W`` and its first column ``u``.

    ``U[i, k] == u[i ^ k]``, so ``U @ x`` is the dyadic convolution of
    ``u`` and ``x``.
    """
    g = delay_time_vector(taps, params, m, l)
    W = walsh_matrix(params.N)
    U = (W * g) @ W
    return U, U[:, 0].copy()


def doppler_spread(taps: DelayTimeTaps, params: FrameParams, m: int, l: int):
    """Circulant Doppler spread matrix ``V = F diag(g) F^H`` and its first column."""
    g = delay_time_vector(taps, params, m, l)
    F = fourier_matrix(params.N)
    V = (F * g) @ F.conj().T
    return V, V[:, 0].copy()


def received_energy(taps: DelayTimeTaps, params: FrameParams, modem: str = "otsm") -> np.ndarray:
    """Received energy of a unit-energy symbol at each grid position ``(m, n)``.

    A symbol on row ``m`` reaches rows ``m + l`` through column ``n`` of the
    spread matrix for tap ``l``; rows past the frame end are dropped.
    """
    spread = {"otsm": sequency_spread, "otfs": doppler_spread}[modem]
    E = np.zeros((params.M, params.N))
    for m in range(params.M):
        for l in range(taps.n_taps):
            if m + l >= params.M:
                break
            S, _ = spread(taps, params, m + l, l)
            E[m] += np.sum(np.abs(S) ** 2, axis=0)
    return E
