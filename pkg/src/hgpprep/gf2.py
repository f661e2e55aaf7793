"""Linear algebra over GF(2).

Matrices and vectors are plain ``uint8`` numpy arrays holding 0/1 entries.
Elimination runs on bit-packed copies (``uint64`` words, see
:func:`pack_rows`); nothing here mutates its inputs.

Kronecker convention: in ``tensor_product(A, B)`` the left factor is the
slow index, so entry ``(i*B.rows + k, j*B.cols + l)`` equals ``A[i, j]*B[k, l]``.

Tie-breaking in every minimum-weight search is lexicographic on the sorted
support (``[0, 5]`` beats ``[1, 2]``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp

from hgpprep._kernels import rref_inplace

__all__ = [
    "BudgetExceeded",
    "CosetRep",
    "as_binary",
    "block_compose",
    "block_extract",
    "identity",
    "in_image",
    "in_rowspace",
    "kernel_basis",
    "left_null_basis",
    "matmul",
    "matvec",
    "min_weight_coset_rep",
    "pack_rows",
    "rank",
    "row_basis",
    "row_reduce",
    "solve",
    "tensor_product",
    "unpack_rows",
    "weight",
    "zeros",
]

# Largest index space accepted by tensor_product (entries of the dense result).
MAX_DENSE_ENTRIES = 2**31


class BudgetExceeded(RuntimeError):
    """An exhaustive search would need more work than its budget allows."""

    def __init__(self, required: float, budget: float, what: str = "search"):
        super().__init__(
            f"{what} needs ~{required:.3g} candidate evaluations, budget is {budget:.3g}"
        )
        self.required = required
        self.budget = budget


def as_binary(a, ndim: int | None = None) -> np.ndarray:
    """Return ``a`` as a 0/1 ``uint8`` array, rejecting other values."""
    if sp.issparse(a):
        a = a.toarray()
    arr = np.asarray(a)
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    elif arr.dtype != np.uint8:
        if arr.size and (np.any(arr < 0) or np.any(arr > 1)):
            raise ValueError("binary array must contain only 0 and 1")
        arr = arr.astype(np.uint8)
    elif arr.size and arr.max() > 1:
        raise ValueError("binary array must contain only 0 and 1")
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    return arr


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.uint8)


def weight(v) -> int:
    return int(np.count_nonzero(v))


# ---------------------------------------------------------------------------
# packing


def pack_rows(M: np.ndarray, extra_cols: int = 0) -> np.ndarray:
    """Bit-pack the rows of ``M`` into ``uint64`` words.

    ``extra_cols`` reserves zeroed room for augmented columns.
    """
    M = np.ascontiguousarray(M, dtype=np.uint8)
    m, n = M.shape
    W = max(1, (n + extra_cols + 63) // 64)
    out = np.zeros((m, W * 8), dtype=np.uint8)
    if n:
        b = np.packbits(M, axis=1, bitorder="little")
        out[:, : b.shape[1]] = b
    return out.view("<u8")


def unpack_rows(P: np.ndarray, n: int) -> np.ndarray:
    P = np.ascontiguousarray(P)
    return np.unpackbits(P.view(np.uint8), axis=1, bitorder="little", count=n)


# ---------------------------------------------------------------------------
# products


def matvec(M, v) -> np.ndarray:
    """Syndrome-style product ``M v`` over GF(2)."""
    v = np.asarray(v)
    if M.shape[1] != v.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix has {M.shape[1]} columns, vector has length {v.shape[0]}"
        )
    if sp.issparse(M):
        return (np.asarray(M @ v.astype(np.int64)) & 1).astype(np.uint8)
    # uint8 wrap-around is mod 256, which preserves parity
    return (M.astype(np.uint8) @ v.astype(np.uint8)) & np.uint8(1)


def matmul(A, B) -> np.ndarray:
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    prod = sp.csr_matrix(A, dtype=np.int64) @ sp.csr_matrix(B, dtype=np.int64)
    return (prod.toarray() & 1).astype(np.uint8)


def tensor_product(A, B) -> np.ndarray:
    """Kronecker product with the left factor as the slow index."""
    A = as_binary(A, 2)
    B = as_binary(B, 2)
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if rows * cols > MAX_DENSE_ENTRIES:
        raise ValueError(f"tensor product of shape {rows}x{cols} exceeds the index space")
    return np.kron(A, B).astype(np.uint8)


def block_compose(grid) -> np.ndarray:
    """Assemble a block matrix; ``None`` or ``0`` entries are zero blocks.

    Every block row needs at least one concrete block to fix its height, and
    likewise for every block column.
    """
    nr = len(grid)
    nc = len(grid[0]) if nr else 0
    heights: list[int | None] = [None] * nr
    widths: list[int | None] = [None] * nc
    for i, row in enumerate(grid):
        if len(row) != nc:
            raise ValueError("ragged block grid")
        for j, blk in enumerate(row):
            if blk is None or (np.isscalar(blk) and blk == 0):
                continue
            h, w = np.shape(blk)
            if heights[i] is None:
                heights[i] = h
            elif heights[i] != h:
                raise ValueError(f"block ({i},{j}) has {h} rows, expected {heights[i]}")
            if widths[j] is None:
                widths[j] = w
            elif widths[j] != w:
                raise ValueError(f"block ({i},{j}) has {w} columns, expected {widths[j]}")
    if any(h is None for h in heights) or any(w is None for w in widths):
        raise ValueError("cannot infer block shapes from an all-zero block row/column")
    out = np.zeros((sum(heights), sum(widths)), dtype=np.uint8)
    r0 = 0
    for i, row in enumerate(grid):
        c0 = 0
        for j, blk in enumerate(row):
            if not (blk is None or (np.isscalar(blk) and blk == 0)):
                out[r0 : r0 + heights[i], c0 : c0 + widths[j]] = as_binary(blk, 2)
            c0 += widths[j]
        r0 += heights[i]
    return out


def block_extract(M, row_sizes, col_sizes, i: int, j: int) -> np.ndarray:
    if sum(row_sizes) != M.shape[0] or sum(col_sizes) != M.shape[1]:
        raise ValueError("block sizes do not tile the matrix")
    r0 = int(np.sum(row_sizes[:i]))
    c0 = int(np.sum(col_sizes[:j]))
    return M[r0 : r0 + row_sizes[i], c0 : c0 + col_sizes[j]].copy()


# ---------------------------------------------------------------------------
# elimination


def row_reduce(M, order=None) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form; pivots chosen by first nonzero column.

    ``order`` optionally fixes the sequence in which columns are tried.
    Returns ``(R, pivot_cols)``.
    """
    M = as_binary(M, 2)
    m, n = M.shape
    if order is None:
        order = np.arange(n, dtype=np.int64)
    A = pack_rows(M)
    piv = rref_inplace(A, np.asarray(order, dtype=np.int64), -1)
    return unpack_rows(A, n), piv


def rank(M) -> int:
    M = as_binary(M, 2)
    if M.size == 0:
        return 0
    A = pack_rows(M)
    return len(rref_inplace(A, np.arange(M.shape[1], dtype=np.int64), -1))


def kernel_basis(M) -> np.ndarray:
    """Rows form a basis of ``{v : M v = 0}``."""
    M = as_binary(M, 2)
    m, n = M.shape
    if m == 0:
        return identity(n)
    R, piv = row_reduce(M)
    free = np.setdiff1d(np.arange(n), piv)
    K = np.zeros((len(free), n), dtype=np.uint8)
    K[np.arange(len(free)), free] = 1
    if len(piv):
        K[:, piv] = R[: len(piv)][:, free].T
    return K


def left_null_basis(M) -> np.ndarray:
    return kernel_basis(as_binary(M, 2).T)


def row_basis(M) -> np.ndarray:
    """Independent rows spanning the row space of ``M`` (RREF rows)."""
    M = as_binary(M, 2)
    if M.size == 0:
        return np.zeros((0, M.shape[1]), dtype=np.uint8)
    R, piv = row_reduce(M)
    return R[: len(piv)].copy()


def solve(M, s) -> np.ndarray | None:
    """A particular solution of ``M x = s`` (free variables zero), or None."""
    M = as_binary(M, 2)
    s = as_binary(s, 1)
    m, n = M.shape
    if s.shape[0] != m:
        raise ValueError(f"dimension mismatch: {m} rows vs syndrome length {s.shape[0]}")
    A = pack_rows(M, extra_cols=1)
    A[:, n >> 6] |= s.astype(np.uint64) << np.uint64(n & 63)
    piv = rref_inplace(A, np.arange(n, dtype=np.int64), -1)
    col = ((A[:, n >> 6] >> np.uint64(n & 63)) & np.uint64(1)).astype(np.uint8)
    r = len(piv)
    if np.any(col[r:]):
        return None
    x = np.zeros(n, dtype=np.uint8)
    x[piv] = col[:r]
    return x


def in_image(M, s) -> bool:
    return solve(M, s) is not None


def in_rowspace(S, v) -> bool:
    S = as_binary(S, 2)
    if S.shape[0] == 0:
        return not np.any(v)
    return rank(np.vstack([S, as_binary(v, 1)[None, :]])) == rank(S)


# ---------------------------------------------------------------------------
# exhaustive minimum-weight searches


def _lex_key(packed_row: np.ndarray) -> tuple:
    # big-endian packed rows: larger bit string <=> lexicographically smaller support
    return tuple(-int(b) for b in packed_row)


def _pick_lex(cands: np.ndarray) -> int:
    """Index of the row with lexicographically smallest support (equal weights)."""
    if cands.shape[0] == 1:
        return 0
    keys = tuple(cands[:, j] for j in reversed(range(cands.shape[1])))
    return int(np.lexsort(keys)[-1])


def _span_table(B: np.ndarray) -> np.ndarray:
    """All 2^k combinations of the packed rows of ``B`` (row 0 is the zero vector)."""
    T = np.zeros((1, B.shape[1]), dtype=np.uint8)
    for b in B:
        T = np.concatenate([T, T ^ b])
    return T


def affine_minimum(offset, basis, budget: float = 2**24, exclude_zero: bool = False):
    """Minimum-weight vector of ``offset + span(basis)``.

    ``basis`` rows must be linearly independent. With ``exclude_zero`` the
    trivial combination is skipped (used for minimum distances). Returns
    ``(vector, weight)``, or ``(None, inf)`` when nothing qualifies.
    """
    offset = as_binary(offset, 1)
    basis = as_binary(basis, 2).reshape(-1, offset.shape[0])
    n = offset.shape[0]
    k = basis.shape[0]
    if 2.0**k > budget:
        raise BudgetExceeded(2.0**k, budget, "coset enumeration")
    off = np.packbits(offset, bitorder="big")
    B = np.packbits(basis, axis=1, bitorder="big") if k else np.zeros((0, off.shape[0]), np.uint8)
    lo = min(k, 16)
    low = _span_table(B[:lo])
    high = _span_table(B[lo:])
    best_w = np.inf
    best = None
    for h, hv in enumerate(high):
        cand = low ^ (off ^ hv)
        w = np.bitwise_count(cand).sum(axis=1, dtype=np.int64)
        if exclude_zero and h == 0:
            w[0] = np.iinfo(np.int64).max
        wmin = w.min()
        if wmin == np.iinfo(np.int64).max or wmin > best_w:
            continue
        rows = cand[w == wmin]
        pick = rows[_pick_lex(rows)]
        if wmin < best_w or _lex_key(pick) < _lex_key(best):
            best_w, best = wmin, pick.copy()
    if best is None:
        return None, np.inf
    return np.unpackbits(best, bitorder="big", count=n), int(best_w)


def ball_search(H, target, max_weight: int, budget: float = 2e7, nonzero=None):
    """Smallest-weight ``e`` with ``H e = target`` by enumerating weights 0..max_weight.

    ``nonzero`` (optional matrix ``L``) additionally demands ``L e != 0``.
    Combinations are visited in lexicographic order, so the first hit is
    the lexicographically smallest support at the minimal weight. Returns
    the vector or ``None`` if no solution of weight <= ``max_weight`` exists.
    """
    H = as_binary(H, 2)
    target = as_binary(target, 1)
    n = H.shape[1]
    cols = pack_rows(H.T.copy())
    tgt = pack_rows(target[None, :])[0]
    lcols = pack_rows(as_binary(nonzero, 2).T.copy()) if nonzero is not None else None
    spent = 0
    chunk = 1 << 16
    for w in range(0, max_weight + 1):
        if w == 0:
            if not tgt.any() and lcols is None:
                return np.zeros(n, dtype=np.uint8)
            continue
        spent += comb(n, w)
        if spent > budget:
            raise BudgetExceeded(spent, budget, f"weight-{w} ball search")
        it = itertools.combinations(range(n), w)
        while True:
            flat = np.fromiter(
                itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64
            )
            if flat.size == 0:
                break
            combos = flat.reshape(-1, w)
            acc = cols[combos[:, 0]].copy()
            for t in range(1, w):
                acc ^= cols[combos[:, t]]
            hit = np.all(acc == tgt, axis=1)
            if lcols is not None and hit.any():
                lacc = lcols[combos[:, 0]].copy()
                for t in range(1, w):
                    lacc ^= lcols[combos[:, t]]
                hit &= np.any(lacc != 0, axis=1)
            idx = np.flatnonzero(hit)
            if idx.size:
                e = np.zeros(n, dtype=np.uint8)
                e[combos[idx[0]]] = 1
                return e
    return None


@dataclass(frozen=True)
class CosetRep:
    """Result of :func:`min_weight_coset_rep`; ``exact`` is False for heuristic bounds."""

    vector: np.ndarray
    weight: int
    exact: bool


def min_weight_coset_rep(v, S, budget: float = 2**24, exhaustive: bool = True) -> CosetRep:
    """Minimum-weight member of ``v + rowspace(S)`` (the reduced weight of ``v``).

    In heuristic mode (``exhaustive=False``) a greedy single-row descent gives
    an upper bound, flagged ``exact=False``.
    """
    v = as_binary(v, 1)
    S = as_binary(S, 2).reshape(-1, v.shape[0])
    basis = row_basis(S)
    if exhaustive:
        vec, w = affine_minimum(v, basis, budget=budget)
        return CosetRep(vec, w, True)
    cur = v.copy()
    improved = True
    while improved:
        improved = False
        for row in basis:
            cand = cur ^ row
            if weight(cand) < weight(cur):
                cur = cand
                improved = True
    return CosetRep(cur, weight(cur), False)
