"""Bit interleaving, frame-level code layout and the detector/decoder turbo loop."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..detector import DetectorConfig, MatchedBlocks, gs_detect, grid_to_blocks
from ..frame import QamConstellation
from .demap import soft_demap
from .ldpc import ParityCheckMatrix, extract_info, ldpc_decode, ldpc_encode


@dataclass(frozen=True)
class TurboConfig:
    max_turbo_iters: int = 5
    detector_iters: int = 4
    decoder_iters: int = 25
    decode: bool = True  # False leaves only the detector, for regression checks

    def __post_init__(self):
        for name in ("max_turbo_iters", "detector_iters", "decoder_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass(frozen=True)
class Interleaver:
    size: int
    seed: int = 0

    @cached_property
    def permutation(self) -> np.ndarray:
        p = np.random.default_rng(self.seed).permutation(self.size)
        p.setflags(write=False)
        return p

    def interleave(self, x) -> np.ndarray:
        return np.asarray(x)[..., self.permutation]

    def deinterleave(self, x) -> np.ndarray:
        x = np.asarray(x)
        out = np.empty_like(x)
        out[..., self.permutation] = x
        return out


@dataclass(frozen=True, eq=False)
class CodedLayout:
    """How codewords fill the data bits of one frame.

    The frame carries ``n_bits`` coded bits: ``n_codewords`` full codewords
    followed by ``n_pad`` uncoded filler bits, all passed through one
    interleaver before QAM mapping.
    """

    code: ParityCheckMatrix
    n_bits: int
    seed: int = 0
    interleaver: Interleaver = field(init=False)

    def __post_init__(self):
        if self.n_bits < self.code.n:
            raise ValueError(f"frame holds {self.n_bits} bits, fewer than one codeword of {self.code.n}")
        object.__setattr__(self, "interleaver", Interleaver(self.n_bits, self.seed))

    @property
    def n_codewords(self) -> int:
        return self.n_bits // self.code.n

    @property
    def n_pad(self) -> int:
        return self.n_bits - self.n_codewords * self.code.n

    @property
    def n_info(self) -> int:
        return self.n_codewords * self.code.k

    def assemble(self, codewords: np.ndarray, pad: np.ndarray) -> np.ndarray:
        """Interleaved frame bits from ``(C, n)`` codewords and filler."""
        bits = np.concatenate([np.asarray(codewords, dtype=np.uint8).ravel(), np.asarray(pad, dtype=np.uint8)])
        return self.interleaver.interleave(bits)

    def encode(self, info: np.ndarray, pad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Returns ``(codewords, interleaved_bits)`` for ``(C, k)`` info bits."""
        cw = ldpc_encode(self.code, np.asarray(info).reshape(self.n_codewords, self.code.k))
        return cw, self.assemble(cw, pad)

    def split(self, frame_llr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Deinterleave and separate codeword LLRs ``(C, n)`` from filler LLRs."""
        llr = self.interleaver.deinterleave(np.asarray(frame_llr).ravel())
        cut = self.n_codewords * self.code.n
        return llr[:cut].reshape(self.n_codewords, self.code.n), llr[cut:]


@dataclass
class TurboResult:
    info: np.ndarray  # (C, k)
    codewords: np.ndarray  # (C, n) last decoder decisions
    parity_trace: list[int]  # codewords passing parity after each turbo iteration
    turbo_iters: int
    detector_iters: int
    grid: np.ndarray

    @property
    def all_parity_ok(self) -> bool:
        return bool(self.parity_trace) and self.parity_trace[-1] == self.codewords.shape[0]


def turbo_decode(
    mb: MatchedBlocks,
    layout: CodedLayout,
    cfg: TurboConfig,
    det_cfg: DetectorConfig,
    constellation: QamConstellation,
    modem: str,
    data_mask: np.ndarray,
    known: np.ndarray | None = None,
    noise_var: float = 0.0,
) -> TurboResult:
    """Iterate detection and LDPC decoding until every codeword checks out.

    Each round runs ``cfg.detector_iters`` detector iterations starting from
    the current time-domain estimate, demaps the soft symbols with a scalar
    noise model, decodes all codewords and, unless they all pass, re-encodes,
    interleaves and re-modulates the decisions to form the next starting
    estimate. The first round starts from zero.
    """
    if known is None:
        known = np.zeros(data_mask.shape, dtype=complex)
    if int(data_mask.sum()) * constellation.bits_per_symbol != layout.n_bits:
        raise ValueError("layout bit count does not match the data positions of the grid")
    inner = replace(det_cfg, max_iters=cfg.detector_iters)
    sigma2 = max(noise_var, 1e-10)
    code = layout.code
    s = np.zeros_like(mb.z)
    trace: list[int] = []
    det_total = 0
    bits = np.zeros((layout.n_codewords, code.n), dtype=np.uint8)
    for it in range(1, cfg.max_turbo_iters + 1):
        det = gs_detect(mb, inner, constellation, modem, data_mask, known, init=s, noise_var=noise_var)
        det_total += det.iterations
        if not cfg.decode:
            s = det.s
            trace.append(0)
            continue
        llr = soft_demap(det.soft[data_mask], 1.0, sigma2, constellation)
        cw_llr, pad_llr = layout.split(llr)
        dec = ldpc_decode(cw_llr, code, iters=cfg.decoder_iters)
        bits = dec.bits
        trace.append(int(dec.parity_ok.sum()))
        if dec.parity_ok.all() or it == cfg.max_turbo_iters:
            break
        frame_bits = layout.assemble(bits, (pad_llr < 0).astype(np.uint8))
        X = np.array(known, dtype=complex)
        X[data_mask] = constellation.map(frame_bits)
        s = grid_to_blocks(X, modem)
    if not cfg.decode:
        hard = constellation.demap_hard(det.grid[data_mask])
        bits, _ = layout.split(1.0 - 2.0 * hard)
        bits = (bits < 0).astype(np.uint8)
    return TurboResult(
        info=extract_info(code, bits),
        codewords=bits,
        parity_trace=trace,
        turbo_iters=it,
        detector_iters=det_total,
        grid=det.grid,
    )
