"""Embedded-pilot channel estimation in the delay-time domain.

The pilot row of the grid becomes one time-domain pilot sample per block
(at ``m_p + n*M``) plus a copy in the cyclic prefix. Tap ``l`` is observed
``l`` samples later, which gives ``N + 1`` knots per tap spaced ``M``
samples apart. The full frame is then filled in by interpolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .channel import DelayTimeTaps, max_doppler_hz
from .frame import FrameParams, pilot_grid
from .modem import ReceivedFrame, to_delay_time


@dataclass(frozen=True)
class PilotConfig:
    beta: float
    es: float
    N: int
    l_zp: int
    data_rows: int

    @property
    def energy(self) -> float:
        """Pilot symbol energy ``beta * N * l_zp * E_s``."""
        return self.beta * self.N * self.l_zp * self.es

    @property
    def amplitude(self) -> float:
        return float(np.sqrt(self.energy))

    @property
    def ppr(self) -> float:
        """Fraction of frame energy spent on the pilot."""
        return self.beta * self.l_zp / (self.data_rows + self.beta * self.l_zp)

    @property
    def ppr_baseline(self) -> float:
        """Pilot power ratio at ``beta = 1``, ``l_zp / M``."""
        return self.l_zp / (self.data_rows + self.l_zp)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def pilot_power(params: FrameParams, beta: float = 1.0, es: float = 1.0) -> PilotConfig:
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return PilotConfig(beta=beta, es=es, N=params.N, l_zp=params.l_zp, data_rows=params.data_rows)


def pilot_time_row(params: FrameParams, amplitude: float, modem: str = "otsm") -> np.ndarray:
    """Delay-time pilot vector ``x~_{m_p}`` (one sample per block)."""
    return to_delay_time(pilot_grid(params, amplitude), modem)[params.m_p]


@dataclass(frozen=True)
class TapEstimate:
    """Knot estimates ``samples[l, k]`` at times ``knots[l, k]``.

    Knot ``k`` corresponds to block ``k - 1``; ``k = 0`` is the cyclic-prefix
    anchor. ``full`` holds the interpolated taps for ``0 <= q < N*M`` once
    :func:`interpolate` has run.
    """

    samples: np.ndarray
    knots: np.ndarray
    full: np.ndarray | None = None

    def as_taps(self) -> DelayTimeTaps:
        if self.full is None:
            raise ValueError("estimate has not been interpolated")
        return DelayTimeTaps(values=self.full, start=0)


def estimate_taps(rx: ReceivedFrame, params: FrameParams, pilot_row: np.ndarray) -> TapEstimate:
    """Divide the received pilot echoes by the transmitted pilot samples."""
    M, N, L = params.M, params.N, params.l_max + 1
    cp_len = rx.cp.size
    anchor = params.m_p - M + cp_len  # CP index holding the copied pilot
    if anchor < 0:
        raise ValueError("received frame lacks the cyclic prefix carrying the pilot copy")
    pilot_row = np.asarray(pilot_row)
    if np.any(np.abs(pilot_row) == 0):
        raise ValueError("delay-time pilot has zero samples")
    l = np.arange(L)
    n = np.arange(N)
    knots = params.m_p + l[:, None] + M * np.arange(-1, N)[None, :]
    samples = np.empty((L, N + 1), dtype=complex)
    samples[:, 1:] = rx.body[params.m_p + l[:, None] + M * n[None, :]] / pilot_row[None, :]
    samples[:, 0] = rx.cp[anchor + l] / pilot_row[-1]
    return TapEstimate(samples=samples, knots=knots)


def _linear(knots: np.ndarray, values: np.ndarray, q: np.ndarray, spacing: int) -> np.ndarray:
    # piecewise slope per segment, continued past the last knot
    slope = np.diff(values) / spacing
    seg = np.clip((q - knots[0]) // spacing, 0, slope.size - 1)
    return values[seg] + slope[seg] * (q - knots[seg])


def interpolate(est: TapEstimate, params: FrameParams, mode: str = "linear") -> TapEstimate:
    """Fill in every delay-time sample of the frame from the knot estimates."""
    if est.samples.shape[1] < 2:
        raise ValueError("interpolation needs at least two knots per tap")
    nm = params.N * params.M
    q = np.arange(nm)
    full = np.empty((est.samples.shape[0], nm), dtype=complex)
    for l in range(est.samples.shape[0]):
        k, v = est.knots[l], est.samples[l]
        if mode == "linear":
            full[l] = _linear(k, v, q, params.M)
        elif mode == "spline":
            full[l] = CubicSpline(k, v, bc_type="natural", extrapolate=True)(q)
        else:
            raise ValueError(f"unknown interpolation mode {mode!r}")
    return TapEstimate(samples=est.samples, knots=est.knots, full=full)


def nyquist_ok(speed_kmh: float, params: FrameParams) -> bool:
    """Pilot sub-sampling can resolve the Doppler when ``nu_max < delta_f / 2``."""
    return max_doppler_hz(speed_kmh, params.carrier_hz) < params.delta_f / 2


def check_subsampling(speed_kmh: float, params: FrameParams) -> None:
    if not nyquist_ok(speed_kmh, params):
        warnings.warn(
            f"maximum Doppler at {speed_kmh} km/h exceeds delta_f/2; "
            "interpolated taps will alias",
            stacklevel=2,
        )


def nmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    return float(np.sum(np.abs(estimate - truth) ** 2) / np.sum(np.abs(truth) ** 2))
