"""Syndrome decoders: min-sum BP, OSD-CS, metacheck and single-shot wrappers, exact oracles.

Decoder objects cache the Tanner graph, the bit-packed matrix and its rank,
so the per-call cost is one BP run plus, when BP fails, one elimination.
They hold scratch buffers and are not thread-safe; build one per worker.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from hgpprep import gf2
from hgpprep._kernels import minsum_bp, rref_inplace
from hgpprep.gf2 import BudgetExceeded, as_binary


@dataclass(frozen=True)
class BpConfig:
    """Min-sum BP settings. ``channel_prior`` is a scalar or per-column array."""

    max_iters: int = 20
    channel_prior: float | np.ndarray | None = None
    variant: str = "min_sum"
    schedule: str = "flooding"
    llr_clip: float = 30.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.variant != "min_sum":
            raise ValueError(f"unsupported BP variant {self.variant!r}")
        if self.schedule != "flooding":
            raise ValueError(f"unsupported BP schedule {self.schedule!r}")
        if self.llr_clip <= 0:
            raise ValueError("llr_clip must be positive")


@dataclass(frozen=True)
class OsdConfig:
    """Ordered-statistics post-processing.

    ``method="osd_cs"`` is the combination sweep: OSD-0, every single flip
    over the first ``depth`` non-pivot positions in reliability order, and
    every pair among them. ``"osd0"`` skips the sweep.
    """

    depth: int = 20
    method: str = "osd_cs"

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("OSD depth must be >= 0")
        if self.method not in ("osd_cs", "osd0"):
            raise ValueError(f"unknown OSD method {self.method!r}")


@dataclass
class DecodeResult:
    correction: np.ndarray
    converged: bool
    soft_reliabilities: np.ndarray
    iterations: int = 0
    osd_used: bool = False


def _llr(p: np.ndarray) -> np.ndarray:
    return np.log((1.0 - p) / p)


def _prior_vector(prior, n: int) -> np.ndarray:
    if prior is None:
        raise ValueError("a channel prior is required")
    p = np.broadcast_to(np.asarray(prior, dtype=float), (n,)).copy()
    if np.any(p < 0) or np.any(p >= 0.5):
        raise ValueError("channel priors must lie in [0, 1/2)")
    return p


class BpOsdDecoder:
    """BP+OSD decoder for a fixed matrix and channel prior.

    Columns whose prior is exactly 0 are excluded from the search, so they
    are never part of a correction.
    """

    def __init__(self, H, prior, bp: BpConfig | None = None, osd: OsdConfig | None = OsdConfig()):
        self.bp = bp or BpConfig()
        self.osd = osd
        H = as_binary(H, 2)
        self.m, self.n = H.shape
        p = _prior_vector(prior if prior is not None else self.bp.channel_prior, self.n)
        self.active = np.flatnonzero(p > 0)
        Ha = np.ascontiguousarray(H[:, self.active])
        self.H = Ha
        self.full_H = H
        self.llr = _llr(p[self.active])
        rows, cols = np.nonzero(Ha)
        self.chk_ptr = np.searchsorted(rows, np.arange(self.m + 1)).astype(np.int64)
        self.edge_var = cols.astype(np.int64)
        by_var = np.argsort(cols, kind="stable")
        self.var_edge = by_var.astype(np.int64)
        self.var_ptr = np.searchsorted(cols[by_var], np.arange(Ha.shape[1] + 1)).astype(np.int64)
        self.packed = gf2.pack_rows(Ha, extra_cols=1)
        self.rank = gf2.rank(Ha)
        self._hard = np.zeros(Ha.shape[1], np.uint8)
        self._post = np.zeros(Ha.shape[1])

    def _expand(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n, np.uint8)
        out[self.active] = x
        return out

    def _expand_soft(self, x: np.ndarray) -> np.ndarray:
        out = np.full(self.n, np.inf)
        out[self.active] = x
        return out

    def bp_only(self, s) -> DecodeResult:
        s = as_binary(s, 1)
        if s.shape[0] != self.m:
            raise ValueError(f"syndrome length {s.shape[0]} != {self.m} checks")
        if not s.any():
            return DecodeResult(np.zeros(self.n, np.uint8), True, self._expand_soft(self.llr.copy()), 0)
        its, ok = minsum_bp(
            self.chk_ptr, self.edge_var, self.var_ptr, self.var_edge, s, self.llr,
            self.bp.max_iters, self.bp.llr_clip, self._hard, self._post,
        )
        return DecodeResult(self._expand(self._hard.copy()), bool(ok), self._expand_soft(self._post.copy()), its)

    def decode(self, s) -> DecodeResult:
        res = self.bp_only(s)
        if res.converged or self.osd is None:
            return res
        x = self.osd_solve(as_binary(s, 1), res.soft_reliabilities[self.active])
        return DecodeResult(self._expand(x), False, res.soft_reliabilities, res.iterations, True)

    def osd_solve(self, s: np.ndarray, reliab: np.ndarray) -> np.ndarray:
        """OSD on the active columns given posterior LLRs (low = likely flipped)."""
        na = self.H.shape[1]
        order = np.argsort(reliab, kind="stable").astype(np.int64)
        A = self.packed.copy()
        idx = np.flatnonzero(s)
        A[idx, na >> 6] |= np.uint64(1) << np.uint64(na & 63)
        piv = rref_inplace(A, order, self.rank)
        sbit = ((A[:, na >> 6] >> np.uint64(na & 63)) & np.uint64(1)).astype(np.uint8)
        if sbit[self.rank :].any():
            raise ValueError("syndrome is not in the image of H; repair it before OSD")
        rhs = sbit[: self.rank]
        x = np.zeros(na, np.uint8)
        x[piv] = rhs
        if self.osd.method == "osd_cs" and self.osd.depth > 0:
            is_piv = np.zeros(na, bool)
            is_piv[piv] = True
            free = order[~is_piv[order]][: self.osd.depth]
            if free.size:
                x = self._sweep(A[: self.rank], piv, rhs, free, x)
        if np.any(gf2.matvec(self.H, x) != s):
            raise AssertionError("OSD produced an invalid correction")
        return x

    def _sweep(self, R, piv, rhs, free, x0):
        words = free >> 6
        bits = (free & 63).astype(np.uint64)
        cols = ((R[:, words] >> bits) & np.uint64(1)).astype(np.uint8).T  # (|free|, rank)
        k = free.shape[0]
        ii, jj = np.triu_indices(k, 1)
        flips = [np.empty((0,), np.int64)] + [np.array([i]) for i in range(k)]
        flips += [np.array([i, j]) for i, j in zip(ii, jj)]
        piv_part = np.vstack([rhs[None, :], rhs ^ cols, rhs ^ cols[ii] ^ cols[jj]])
        extra = np.concatenate([[0], np.ones(k, np.int64), np.full(ii.shape[0], 2)])
        w = piv_part.sum(axis=1, dtype=np.int64) + extra
        best = np.flatnonzero(w == w.min())
        cands = []
        for b in best:
            x = np.zeros_like(x0)
            x[piv] = piv_part[b]
            x[free[flips[b]]] = 1
            cands.append(x)
        if len(cands) == 1:
            return cands[0]
        P = np.packbits(np.array(cands), axis=1, bitorder="big")
        return cands[gf2._pick_lex(P)]


def bp_decode(H, s, cfg: BpConfig) -> DecodeResult:
    return BpOsdDecoder(H, cfg.channel_prior, cfg, osd=None).bp_only(s)


def osd_postprocess(H, s, reliabilities, cfg: OsdConfig) -> DecodeResult:
    """OSD given per-bit reliabilities (posterior LLRs: lower means less reliable)."""
    H = as_binary(H, 2)
    dec = BpOsdDecoder(H, 0.25, BpConfig(), osd=cfg)
    x = dec.osd_solve(as_binary(s, 1), np.asarray(reliabilities, dtype=float))
    return DecodeResult(x, False, np.asarray(reliabilities, dtype=float), 0, True)


# ---------------------------------------------------------------------------
# composite decoders


class SingleShotDecoder:
    """Decode against ``(H | I)``: data errors plus measurement flips.

    A zero ``p_synd`` removes the augmentation columns, reducing to plain
    decoding of H. ``tie_break`` nudges the measurement prior up by that
    relative amount so that, between equally likely explanations, a
    measurement flip wins over a data error.
    """

    def __init__(self, H, p_data, p_synd, bp: BpConfig | None = None, osd: OsdConfig | None = OsdConfig(),
                 tie_break: float = 1e-6):
        H = as_binary(H, 2)
        m, n = H.shape
        self.n = n
        aug = np.hstack([H, gf2.identity(m)])
        prior = np.concatenate([
            np.broadcast_to(np.asarray(p_data, float), (n,)),
            np.broadcast_to(np.asarray(p_synd, float), (m,)) * (1.0 + tie_break),
        ])
        self.inner = BpOsdDecoder(aug, prior, bp, osd)

    def decode(self, s) -> tuple[np.ndarray, np.ndarray, DecodeResult]:
        res = self.inner.decode(s)
        return res.correction[: self.n], res.correction[self.n :], res


def single_shot_decode(H, s, cfg: BpConfig, p_synd=None, osd: OsdConfig | None = OsdConfig()):
    """Returns ``(data_correction, inferred_syndrome_error)``."""
    p = cfg.channel_prior
    dec = SingleShotDecoder(H, p, p if p_synd is None else p_synd, cfg, osd)
    data, synd, _ = dec.decode(s)
    return data, synd


@dataclass
class MetacheckResult:
    repaired_syndrome: np.ndarray
    syndrome_repair: np.ndarray
    correction: np.ndarray
    flagged: bool = False
    projection: np.ndarray | None = field(default=None, repr=False)


class TwoStageDecoder:
    """Repair a noisy syndrome with metachecks, then decode it.

    Stage (i) decodes ``M s`` over M (prior ``p_synd`` per check). Stage (ii)
    decodes the repaired syndrome over H (prior ``p_data``). If the repaired
    syndrome is still outside im(H), the residue is projected out by one
    decode over ``(H | I)`` and the event is flagged.
    """

    def __init__(self, H, M, p_data, p_synd, bp: BpConfig | None = None, osd: OsdConfig | None = OsdConfig()):
        H = as_binary(H, 2)
        self.H = H
        self.M = None if M is None else as_binary(M, 2).reshape(-1, H.shape[0])
        if self.M is not None and self.M.shape[0] and np.any(gf2.matmul(self.M, H)):
            raise ValueError("metacheck matrix does not annihilate H (M H != 0)")
        self.has_meta = self.M is not None and self.M.shape[0] > 0
        self.meta_dec = BpOsdDecoder(self.M, p_synd, bp, osd) if self.has_meta else None
        self.main_dec = BpOsdDecoder(H, p_data, bp, osd)
        self.left_null = gf2.left_null_basis(H)
        self._proj = None
        self._proj_args = (p_data, p_synd, bp, osd)

    def in_image(self, s: np.ndarray) -> bool:
        return not self.left_null.shape[0] or not np.any(gf2.matvec(self.left_null, s))

    def decode(self, observed) -> MetacheckResult:
        s = as_binary(observed, 1)
        repair = np.zeros_like(s)
        if self.has_meta:
            meta = gf2.matvec(self.M, s)
            if meta.any():
                repair = self.meta_dec.decode(meta).correction
        rs = s ^ repair
        if self.in_image(rs):
            return MetacheckResult(rs, repair, self.main_dec.decode(rs).correction)
        if self._proj is None:
            p_data, p_synd, bp, osd = self._proj_args
            self._proj = SingleShotDecoder(self.H, p_data, max(float(np.max(p_synd)), 1e-3), bp, osd)
        e, extra, _ = self._proj.decode(rs)
        return MetacheckResult(rs ^ extra, repair ^ extra, e, flagged=True, projection=extra)


def two_stage_metacheck_decode(H, M, observed_s, p_data, p_synd, bp=None, osd=OsdConfig()):
    """Returns ``(repaired_s, correction, flagged)``."""
    res = TwoStageDecoder(H, M, p_data, p_synd, bp, osd).decode(observed_s)
    return res.repaired_syndrome, res.correction, res.flagged


# ---------------------------------------------------------------------------
# exact oracles


def exact_min_weight_decode(H, s, budget: float = 2**24, max_weight: int | None = None) -> np.ndarray:
    """True minimum-weight ``e`` with ``H e = s``; ties go to the lexicographically smallest support.

    Enumerates the solution coset when ``2^dim ker H`` fits the budget,
    otherwise searches by increasing weight.
    """
    H = as_binary(H, 2)
    s = as_binary(s, 1)
    e0 = gf2.solve(H, s)
    if e0 is None:
        raise ValueError("syndrome is not in the image of H")
    K = gf2.kernel_basis(H)
    if 2.0 ** K.shape[0] <= budget:
        vec, _ = gf2.affine_minimum(e0, K, budget)
        return vec
    cap = H.shape[1] if max_weight is None else max_weight
    vec = gf2.ball_search(H, s, cap, budget=budget)
    if vec is None:
        raise BudgetExceeded(np.inf, budget, f"no solution of weight <= {cap}")
    return vec


def producible_syndromes(H, t: int, budget: float = 2**24) -> np.ndarray:
    """Distinct packed syndromes ``H e`` over all ``|e| <= t``."""
    H = as_binary(H, 2)
    m, n = H.shape
    total = sum(comb(n, w) for w in range(t + 1))
    if total > budget:
        raise BudgetExceeded(total, budget, "producible syndrome enumeration")
    cols = np.packbits(H.T, axis=1, bitorder="big")
    out = [np.zeros((1, cols.shape[1]), np.uint8)]
    for w in range(1, t + 1):
        combos = np.array(list(itertools.combinations(range(n), w)), dtype=np.int64).reshape(-1, w)
        out.append(np.bitwise_xor.reduce(cols[combos], axis=1))
    return np.unique(np.vstack(out), axis=0)


def shadow_decode(H, S_stab, observed_s, t: int, budget: float = 2**24, table: np.ndarray | None = None):
    """Two-step minimum-weight decoder with repair radius ``t``.

    Step 1 picks the minimum-weight ``s_hat`` such that ``observed + s_hat``
    equals ``H e'`` for some ``e'`` of reduced weight at most ``t``. Stabilizer
    rows ``S_stab`` leave syndromes unchanged, so Hamming weight ``<= t``
    enumerates the same set. Step 2 is an exact minimum-weight decode, found
    by a ball search of radius t.
    Raises ``ValueError`` when no producible syndrome exists (``t < 0``).
    """
    H = as_binary(H, 2)
    s = as_binary(observed_s, 1)
    m = H.shape[0]
    if t < 0:
        raise ValueError("t must be non-negative")
    P = producible_syndromes(H, t, budget) if table is None else table
    sp = np.packbits(s, bitorder="big")
    diff = P ^ sp
    w = np.bitwise_count(diff).sum(axis=1, dtype=np.int64)
    best = diff[w == w.min()]
    s_hat = np.unpackbits(best[gf2._pick_lex(best)], bitorder="big", count=m)
    # the repaired syndrome has a preimage of weight <= t by construction
    e_hat = gf2.ball_search(H, s ^ s_hat, t, budget=budget)
    return s_hat, e_hat
