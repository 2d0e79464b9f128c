"""Soft QAM demapping to bit LLRs (``log P(b = 0) / P(b = 1)``)."""

from __future__ import annotations

import numpy as np

from ..frame import QamConstellation


def _distances(y, gain, constellation: QamConstellation) -> np.ndarray:
    y = np.asarray(y, dtype=complex).ravel()
    h = np.broadcast_to(np.asarray(gain, dtype=complex), y.shape)
    return np.abs(y[:, None] - h[:, None] * constellation.points[None, :]) ** 2


def soft_demap(y, gain, noise_var: float, constellation: QamConstellation) -> np.ndarray:
    """Max-log LLRs, shape ``(len(y), bits_per_symbol)``.

    For every bit the LLR is the gap between the nearest 1-labelled and the
    nearest 0-labelled point, ``(min d1 - min d0) / noise_var``, where the
    received sample is modelled as ``y = gain * x + w``.
    """
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    d = _distances(y, gain, constellation)
    labels = constellation.labels.astype(bool)  # (Q_points, bits)
    out = np.empty((d.shape[0], labels.shape[1]))
    for b in range(labels.shape[1]):
        one = labels[:, b]
        out[:, b] = d[:, one].min(axis=1) - d[:, ~one].min(axis=1)
    return out / noise_var


def exact_llr(y, gain, noise_var: float, constellation: QamConstellation) -> np.ndarray:
    """Log-sum-exp LLRs over all constellation points (reference for :func:`soft_demap`)."""
    d = -_distances(y, gain, constellation) / noise_var
    labels = constellation.labels.astype(bool)
    out = np.empty((d.shape[0], labels.shape[1]))
    for b in range(labels.shape[1]):
        one = labels[:, b]
        out[:, b] = np.logaddexp.reduce(d[:, ~one], axis=1) - np.logaddexp.reduce(d[:, one], axis=1)
    return out
