"""LDPC codes: systematic encoding by GF(2) elimination and normalized min-sum decoding.

LLRs follow ``log P(bit = 0) / P(bit = 1)``; positive values favour zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .alist import parse_alist, write_alist

MIN_SUM_SCALE = 0.75


def gf2_rref(A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    A = np.array(A, dtype=bool)
    m, n = A.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hits = np.flatnonzero(A[row:, col])
        if hits.size == 0:
            continue
        p = row + hits[0]
        if p != row:
            A[[row, p]] = A[[p, row]]
        others = np.flatnonzero(A[:, col])
        others = others[others != row]
        A[others] ^= A[row]
        pivots.append(col)
        row += 1
    return A[:row].astype(np.uint8), pivots


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    H: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=np.uint8)
        if H.ndim != 2 or not np.all((H == 0) | (H == 1)):
            raise ValueError("parity-check matrix must be a binary 2-D array")
        object.__setattr__(self, "H", H)
        if self.k < 1:
            raise ValueError("code has no information bits")

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @cached_property
    def _systematic(self):
        rref, pivots = gf2_rref(self.H)
        free = np.setdiff1d(np.arange(self.n), pivots)
        return rref[:, free], np.asarray(pivots, dtype=np.intp), free

    @property
    def rank(self) -> int:
        return len(self._systematic[1])

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_positions(self) -> np.ndarray:
        return self._systematic[2]

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.H.astype(np.int32))

    @cached_property
    def _edges(self):
        chk, var = np.nonzero(self.H)  # check-major order
        E = chk.size
        row_deg = np.bincount(chk, minlength=self.m)
        dmax = int(row_deg.max())
        slots = np.full((self.m, dmax), E, dtype=np.intp)  # E marks an empty slot
        start = np.concatenate([[0], np.cumsum(row_deg)[:-1]])
        offs = np.arange(E) - start[chk]
        slots[chk, offs] = np.arange(E)
        var_edge = sp.csr_matrix((np.ones(E), (var, np.arange(E))), shape=(self.n, E))
        return var, slots, var_edge

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        bits = np.atleast_2d(np.asarray(bits, dtype=np.int32))
        return (self.sparse @ bits.T).T % 2

    def is_codeword(self, bits: np.ndarray) -> np.ndarray:
        return ~np.any(self.syndrome(bits), axis=1)

    def to_alist(self) -> str:
        return write_alist(self.H)

    @classmethod
    def from_alist(cls, text: str, require_full_rank: bool = True) -> "ParityCheckMatrix":
        code = cls(parse_alist(text))
        if require_full_rank and code.rank < code.m:
            raise ValueError(
                f"parity part is not invertible: rank {code.rank} < {code.m} checks"
            )
        return code


def load_parity_matrix(source, require_full_rank: bool = True) -> ParityCheckMatrix:
    """Load from an alist path, or from alist text when ``source`` holds newlines."""
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        text = Path(source).read_text()
    return ParityCheckMatrix.from_alist(text, require_full_rank)


def shipped_code(name: str = "ira_672_r12") -> ParityCheckMatrix:
    """One of the alist files bundled under ``otsm/codes``."""
    text = resources.files("otsm").joinpath("codes", f"{name}.alist").read_text()
    return ParityCheckMatrix.from_alist(text)


def shipped_code_path(name: str = "ira_672_r12") -> Path:
    return Path(str(resources.files("otsm").joinpath("codes", f"{name}.alist")))


def ldpc_encode(code: ParityCheckMatrix, info_bits) -> np.ndarray:
    """Systematic encoding; ``info_bits`` shaped ``(k,)`` or ``(B, k)``."""
    info = np.asarray(info_bits, dtype=np.int64)
    single = info.ndim == 1
    info = np.atleast_2d(info)
    if info.shape[1] != code.k:
        raise ValueError(f"expected {code.k} information bits, got {info.shape[1]}")
    A, pivots, free = code._systematic
    cw = np.zeros((info.shape[0], code.n), dtype=np.uint8)
    cw[:, free] = info
    cw[:, pivots] = (info @ A.T.astype(np.int64)) % 2
    return cw[0] if single else cw


def extract_info(code: ParityCheckMatrix, codewords: np.ndarray) -> np.ndarray:
    return np.asarray(codewords)[..., code.info_positions]


@dataclass
class DecodeResult:
    bits: np.ndarray  # (B, n) hard decisions
    parity_ok: np.ndarray  # (B,)
    iterations: np.ndarray  # (B,)
    llr: np.ndarray  # (B, n) a-posteriori


def ldpc_decode(llr, code: ParityCheckMatrix, iters: int = 25, scale: float = MIN_SUM_SCALE) -> DecodeResult:
    """Flooding normalized min-sum; a codeword freezes once its syndrome is zero."""
    llr = np.atleast_2d(np.asarray(llr, dtype=float))
    B = llr.shape[0]
    if llr.shape[1] != code.n:
        raise ValueError(f"expected {code.n} LLRs per codeword, got {llr.shape[1]}")
    var, slots, var_edge = code._edges
    E = var.size
    c2v = np.zeros((B, E + 1))
    post = llr.copy()
    bits = (post < 0).astype(np.uint8)
    done = code.is_codeword(bits)
    used = np.zeros(B, dtype=int)
    final_bits = bits.copy()
    final_post = post.copy()
    for it in range(1, iters + 1):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        v2c = np.empty((active.size, E + 1))
        v2c[:, :E] = post[active][:, var] - c2v[active, :E]
        v2c[:, E] = np.inf
        msg = v2c[:, slots]  # (A, m, dmax)
        mag = np.abs(msg)
        sgn = np.where(msg < 0, -1.0, 1.0)
        parity = np.prod(sgn, axis=2, keepdims=True)
        first = np.argmin(mag, axis=2)
        two = np.partition(mag, 1, axis=2)[:, :, :2]
        out = np.broadcast_to(two[:, :, :1], mag.shape).copy()
        np.put_along_axis(out, first[:, :, None], two[:, :, 1:2], axis=2)
        out = scale * parity * sgn * np.where(np.isfinite(out), out, 0.0)
        new = np.zeros((active.size, E + 1))
        valid = slots < E
        new[:, slots[valid]] = out[:, valid]
        c2v[active] = new
        post[active] = llr[active] + (var_edge @ new[:, :E].T).T
        b = (post[active] < 0).astype(np.uint8)
        ok = code.is_codeword(b)
        used[active] = it
        final_bits[active] = b
        final_post[active] = post[active]
        done[active[ok]] = True
    return DecodeResult(bits=final_bits, parity_ok=done.copy(), iterations=used, llr=final_post)


def ira_code(n: int, k: int, col_weight: int = 3, seed: int = 0) -> ParityCheckMatrix:
    """Irregular repeat-accumulate code with a staircase parity part.

    Information columns get ``col_weight`` ones on distinct checks, chosen
    greedily to keep check degrees balanced and avoid length-4 cycles.
    The dual-diagonal parity part makes ``H`` full rank.
    """
    m = n - k
    rng = np.random.default_rng(seed)
    H = np.zeros((m, n), dtype=np.uint8)
    load = np.zeros(m)
    for j in range(k):
        rows: list[int] = []
        for _ in range(col_weight):
            best = None
            for r in rng.permutation(m):
                if r in rows:
                    continue
                # a 4-cycle would appear if r already shares a column with a chosen row
                if rows and np.any(H[r, :j] & H[rows, :j].any(axis=0)):
                    continue
                # adjacent checks share a staircase column
                if any(abs(r - q) == 1 for q in rows):
                    continue
                if best is None or load[r] < load[best]:
                    best = r
                    if load[r] <= load.min():
                        break
            if best is None:
                best = int(rng.choice([r for r in range(m) if r not in rows]))
            rows.append(best)
            load[best] += 1
        H[rows, j] = 1
    idx = np.arange(m)
    H[idx, k + idx] = 1
    H[idx[1:], k + idx[:-1]] = 1
    return ParityCheckMatrix(H)
