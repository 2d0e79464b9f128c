"""Frame parameters, delay-sequency grid layout and Gray-labeled QAM.

Grid layout (``M`` delay rows by ``N`` sequency columns)::

    rows 0 .. M'-1          data (M' = M - l_zp)
    rows M'.. M-1           zero padding; hosts the pilot at row m_p
                            with l_max guard rows on either side

The pilot row carries a single nonzero entry ``x_p`` at column ``n_p``.
Data symbols fill the data rows row by row (row ascending, then column).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .transforms import is_power_of_two


@dataclass(frozen=True)
class FrameParams:
    N: int = 64
    M: int = 64
    delta_f: float = 15e3
    carrier_hz: float = 4e9
    l_max: int = 3
    l_zp: int | None = None
    m_p: int | None = None
    n_p: int = 0
    qam_order: int = 4

    def __post_init__(self):
        if self.l_zp is None:
            object.__setattr__(self, "l_zp", 2 * self.l_max + 1)
        if self.m_p is None:
            object.__setattr__(self, "m_p", self.M - self.l_max - 1)
        errors = []
        if not is_power_of_two(self.N):
            errors.append(f"N must be a power of two, got {self.N}")
        if self.l_max < 0:
            errors.append("l_max must be non-negative")
        if self.l_zp < 2 * self.l_max + 1:
            errors.append(f"l_zp={self.l_zp} must be at least 2*l_max+1={2 * self.l_max + 1}")
        if self.l_zp >= self.M:
            errors.append(f"l_zp={self.l_zp} leaves no data rows for M={self.M}")
        if not (self.M - self.l_zp + self.l_max <= self.m_p <= self.M - 1 - self.l_max):
            errors.append(f"pilot row m_p={self.m_p} and its guards must lie inside the zero padding")
        if not 0 <= self.n_p < self.N:
            errors.append(f"n_p={self.n_p} outside 0..{self.N - 1}")
        if self.qam_order not in (4, 16, 64):
            errors.append(f"qam_order must be 4, 16 or 64, got {self.qam_order}")
        if self.delta_f <= 0 or self.carrier_hz <= 0:
            errors.append("delta_f and carrier_hz must be positive")
        if errors:
            raise ValueError("; ".join(errors))

    @classmethod
    def for_delay_spread(cls, N: int, M: int, max_delay_s: float, delta_f: float = 15e3, **kw):
        """Pick ``l_max`` as the smallest tap count covering ``max_delay_s``."""
        l_max = max(0, math.ceil(max_delay_s * M * delta_f - 1e-9))
        return cls(N=N, M=M, delta_f=delta_f, l_max=l_max, **kw)

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def frame_duration(self) -> float:
        return self.N * self.T

    @property
    def bandwidth(self) -> float:
        return self.M * self.delta_f

    @property
    def sample_rate(self) -> float:
        return self.M * self.delta_f

    @property
    def cp_len(self) -> int:
        return self.l_max + 1

    @property
    def data_rows(self) -> int:
        """``M'``, the number of delay rows carrying data."""
        return self.M - self.l_zp

    @property
    def n_data(self) -> int:
        return self.N * self.data_rows

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.qam_order))

    @property
    def data_mask(self) -> np.ndarray:
        mask = np.zeros((self.M, self.N), dtype=bool)
        mask[: self.data_rows] = True
        return mask


def build_grid(params: FrameParams, data=None, pilot_amplitude: float = 0.0) -> np.ndarray:
    """Place data and the embedded pilot on an ``M x N`` delay-sequency grid."""
    X = np.zeros((params.M, params.N), dtype=complex)
    if data is None:
        data = np.zeros(0, dtype=complex)
    data = np.asarray(data)
    if data.size not in (0, params.n_data):
        raise ValueError(f"expected {params.n_data} data symbols, got {data.size}")
    if data.size:
        X[: params.data_rows] = data.reshape(params.data_rows, params.N)
    X[params.m_p, params.n_p] = pilot_amplitude
    return X


def extract_data(params: FrameParams, X: np.ndarray) -> np.ndarray:
    return np.asarray(X)[: params.data_rows].reshape(-1)


def pilot_grid(params: FrameParams, pilot_amplitude: float) -> np.ndarray:
    """Grid holding only the pilot; the known part of every frame."""
    return build_grid(params, None, pilot_amplitude)


def _gray_to_binary(g: np.ndarray) -> np.ndarray:
    b = g.copy()
    shift = g >> 1
    while np.any(shift):
        b ^= shift
        shift >>= 1
    return b


@dataclass(frozen=True)
class QamConstellation:
    """Square QAM with per-axis Gray labels and unit average energy.

    For ``k = log2(Q)`` bits per symbol the first ``k/2`` bits select the
    in-phase level and the last ``k/2`` the quadrature level. Level index
    ``i`` (Gray-decoded from its bits) maps to amplitude
    ``sqrt(Q) - 1 - 2*i``, so an all-zero label sits in the first quadrant.
    Point ``j`` of :attr:`points` carries the label whose MSB-first integer
    value is ``j``.

    ====  ==================
    bits  4-QAM point (x sqrt 2)
    ====  ==================
    00    +1 +1j
    01    +1 -1j
    10    -1 +1j
    11    -1 -1j
    ====  ==================
    """

    order: int = 4

    def __post_init__(self):
        side = math.isqrt(self.order)
        if side * side != self.order or side < 2 or (side & (side - 1)):
            raise ValueError(f"unsupported QAM order {self.order}")

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @cached_property
    def labels(self) -> np.ndarray:
        """``(Q, k)`` bit table, row ``j`` is the MSB-first label of point ``j``."""
        k = self.bits_per_symbol
        j = np.arange(self.order)
        return ((j[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)

    @cached_property
    def points(self) -> np.ndarray:
        side = math.isqrt(self.order)
        half = self.bits_per_symbol // 2
        j = np.arange(self.order)
        i_gray = j >> half
        q_gray = j & (side - 1)
        amp_i = side - 1 - 2 * _gray_to_binary(i_gray)
        amp_q = side - 1 - 2 * _gray_to_binary(q_gray)
        scale = np.sqrt(2 * (self.order - 1) / 3)
        pts = (amp_i + 1j * amp_q) / scale
        pts.setflags(write=False)
        return pts

    def map(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64).reshape(-1)
        k = self.bits_per_symbol
        if bits.size % k:
            raise ValueError(f"bit count {bits.size} not divisible by {k}")
        idx = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
        return self.points[idx]

    def nearest_index(self, y) -> np.ndarray:
        y = np.asarray(y)
        d = np.abs(y[..., None] - self.points) ** 2
        return np.argmin(d, axis=-1)

    def nearest(self, y) -> np.ndarray:
        """Hard decision; ties resolve to the lowest point index."""
        return self.points[self.nearest_index(y)]

    def demap_hard(self, y) -> np.ndarray:
        return self.labels[self.nearest_index(np.asarray(y).reshape(-1))].reshape(-1)


def qam_map(bits, order: int = 4) -> np.ndarray:
    return QamConstellation(order).map(bits)


def qam_demap_hard(symbols, order: int = 4) -> np.ndarray:
    return QamConstellation(order).demap_hard(symbols)


def nearest_symbol(y, constellation: QamConstellation):
    return constellation.nearest(y)
