"""Reader and writer for the alist sparse parity-check format.

Layout::

    n m
    max_col_degree max_row_degree
    <n column degrees>
    <m row degrees>
    n lines: 1-based row indices of each column (zero padded)
    m lines: 1-based column indices of each row (zero padded)
"""

from __future__ import annotations

import numpy as np


class AlistError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise AlistError(f"non-integer token in {line.strip()!r}", lineno) from None


def parse_alist(text: str) -> np.ndarray:
    """Parse alist text into a dense ``(m, n)`` uint8 matrix."""
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise AlistError("unexpected end of file", lines[-1][0] if lines else 1)
        lineno, ln = lines[pos]
        pos += 1
        return lineno, _ints(ln, lineno)

    lineno, head = take()
    if len(head) != 2 or min(head) < 1:
        raise AlistError("header must be 'n m' with positive sizes", lineno)
    n, m = head
    lineno, maxdeg = take()
    if len(maxdeg) != 2:
        raise AlistError("second line must hold the two maximum degrees", lineno)
    lineno, col_deg = take()
    if len(col_deg) != n:
        raise AlistError(f"expected {n} column degrees, got {len(col_deg)}", lineno)
    lineno, row_deg = take()
    if len(row_deg) != m:
        raise AlistError(f"expected {m} row degrees, got {len(row_deg)}", lineno)
    if sum(col_deg) != sum(row_deg):
        raise AlistError(f"column degrees sum to {sum(col_deg)} but row degrees to {sum(row_deg)}", lineno)
    if max(col_deg) > maxdeg[0] or max(row_deg) > maxdeg[1]:
        raise AlistError("a degree exceeds the declared maximum", lineno)

    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        lineno, idx = take()
        nz = [i for i in idx if i != 0]
        if len(nz) != col_deg[j] or any(not 1 <= i <= m for i in nz):
            raise AlistError(f"column {j + 1} entries do not match its degree {col_deg[j]}", lineno)
        H[np.array(nz) - 1, j] = 1
    for i in range(m):
        lineno, idx = take()
        nz = sorted(k for k in idx if k != 0)
        if len(nz) != row_deg[i] or any(not 1 <= k <= n for k in nz):
            raise AlistError(f"row {i + 1} entries do not match its degree {row_deg[i]}", lineno)
        if nz != list(np.flatnonzero(H[i]) + 1):
            raise AlistError(f"row {i + 1} disagrees with the column lists", lineno)
    return H


def write_alist(H: np.ndarray) -> str:
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    col_deg = H.sum(axis=0).astype(int)
    row_deg = H.sum(axis=1).astype(int)
    cmax, rmax = int(col_deg.max()), int(row_deg.max())
    out = [f"{n} {m}", f"{cmax} {rmax}", " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for j in range(n):
        idx = list(np.flatnonzero(H[:, j]) + 1)
        out.append(" ".join(map(str, idx + [0] * (cmax - len(idx)))))
    for i in range(m):
        idx = list(np.flatnonzero(H[i]) + 1)
        out.append(" ".join(map(str, idx + [0] * (rmax - len(idx)))))
    return "\n".join(out) + "\n"
