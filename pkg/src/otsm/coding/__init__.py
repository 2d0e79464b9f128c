"""LDPC coding, soft demapping and the turbo receiver."""

from .alist import AlistError, parse_alist, write_alist
from .demap import exact_llr, soft_demap
from .ldpc import (
    MIN_SUM_SCALE,
    DecodeResult,
    ParityCheckMatrix,
    extract_info,
    ira_code,
    ldpc_decode,
    ldpc_encode,
    load_parity_matrix,
    shipped_code,
    shipped_code_path,
)
from .turbo import CodedLayout, Interleaver, TurboConfig, TurboResult, turbo_decode

__all__ = [
    "AlistError",
    "CodedLayout",
    "DecodeResult",
    "Interleaver",
    "MIN_SUM_SCALE",
    "ParityCheckMatrix",
    "TurboConfig",
    "TurboResult",
    "exact_llr",
    "extract_info",
    "ira_code",
    "ldpc_decode",
    "ldpc_encode",
    "load_parity_matrix",
    "parse_alist",
    "shipped_code",
    "shipped_code_path",
    "soft_demap",
    "turbo_decode",
    "write_alist",
]
