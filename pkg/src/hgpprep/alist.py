"""Text formats for parity-check matrices.

* alist (MacKay): ``n m``, max column/row weights, the column and row weight
  lists, then per-column and per-row 1-indexed supports padded with zeros.
* coordinate list: header ``rows cols`` followed by one ``r c`` line (0-indexed)
  per nonzero entry in row-major order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from hgpprep.gf2 import as_binary


def to_alist(H) -> str:
    H = as_binary(H, 2)
    m, n = H.shape
    col_sup = [np.flatnonzero(H[:, j]) + 1 for j in range(n)]
    row_sup = [np.flatnonzero(H[i]) + 1 for i in range(m)]
    max_c = max((len(c) for c in col_sup), default=0)
    max_r = max((len(r) for r in row_sup), default=0)

    def padded(sup, width):
        vals = list(sup) + [0] * (width - len(sup))
        return " ".join(str(int(x)) for x in vals)

    lines = [
        f"{n} {m}",
        f"{max_c} {max_r}",
        " ".join(str(len(c)) for c in col_sup),
        " ".join(str(len(r)) for r in row_sup),
    ]
    lines += [padded(c, max_c) for c in col_sup]
    lines += [padded(r, max_r) for r in row_sup]
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> np.ndarray:
    lines = text.splitlines()
    if len(lines) < 2:
        raise ValueError("alist: missing header")

    def ints(line):
        return [int(x) for x in line.split()]

    n, m = ints(lines[0])
    max_c, max_r = ints(lines[1])
    col_w = ints(lines[2]) if n else []
    row_w = ints(lines[3]) if m else []
    if len(col_w) != n or len(row_w) != m:
        raise ValueError("alist: weight lists do not match the header dimensions")
    body = lines[4 : 4 + n + m]
    if len(body) < n + m:
        raise ValueError("alist: truncated support lists")
    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        sup = [x for x in ints(body[j]) if x]
        if len(sup) != col_w[j] or len(sup) > max_c:
            raise ValueError(f"alist: column {j + 1} weight mismatch")
        H[np.asarray(sup, dtype=np.int64) - 1, j] = 1
    for i in range(m):
        sup = [x for x in ints(body[n + i]) if x]
        if len(sup) != row_w[i] or len(sup) > max_r:
            raise ValueError(f"alist: row {i + 1} weight mismatch")
        row = np.zeros(n, dtype=np.uint8)
        row[np.asarray(sup, dtype=np.int64) - 1] = 1
        if not np.array_equal(row, H[i]):
            raise ValueError(f"alist: row {i + 1} disagrees with the column lists")
    return H


def to_coo(H) -> str:
    H = as_binary(H, 2)
    r, c = np.nonzero(H)
    lines = [f"{H.shape[0]} {H.shape[1]}"] + [f"{i} {j}" for i, j in zip(r, c)]
    return "\n".join(lines) + "\n"


def from_coo(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    rows, cols = (int(x) for x in lines[0].split())
    H = np.zeros((rows, cols), dtype=np.uint8)
    for ln in lines[1:]:
        i, j = (int(x) for x in ln.split())
        if not (0 <= i < rows and 0 <= j < cols):
            raise ValueError(f"coordinate ({i}, {j}) out of range for {rows}x{cols}")
        if H[i, j]:
            raise ValueError(f"duplicate coordinate ({i}, {j})")
        H[i, j] = 1
    return H


def read_alist(path) -> np.ndarray:
    return from_alist(Path(path).read_text())


def write_alist(path, H) -> None:
    Path(path).write_text(to_alist(H))


def read_coo(path) -> np.ndarray:
    return from_coo(Path(path).read_text())


def write_coo(path, H) -> None:
    Path(path).write_text(to_coo(H))
