"""Exhaustive property checkers used as oracles.

Every search takes an explicit budget. When a search would exceed it the
checker either returns a certified bound (flagged ``exact=False``) or raises
:class:`~hgpprep.gf2.BudgetExceeded`; it never silently degrades.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Callable, NamedTuple, Sequence

import numpy as np

from hgpprep import gf2
from hgpprep.codes import CssCode, _quotient_basis, logical_basis
from hgpprep.gf2 import BudgetExceeded, as_binary, rank

DEFAULT_BUDGET = 2**24


class DistanceResult(NamedTuple):
    """``value`` is exact when ``exact`` is True, otherwise a certified lower bound."""

    value: float
    exact: bool
    witness: np.ndarray | None = None


def _span_nonzero_min(Q: np.ndarray, B: np.ndarray, n: int) -> tuple[np.ndarray | None, float]:
    """Minimum weight over ``c Q + b B`` with ``c != 0`` (rows independent)."""
    Qp = np.packbits(Q, axis=1, bitorder="big")
    Bp = np.packbits(B, axis=1, bitorder="big") if B.shape[0] else np.zeros((0, Qp.shape[1]), np.uint8)
    TQ = gf2._span_table(Qp)[1:]
    TB = gf2._span_table(Bp)
    outer, inner = (TQ, TB) if TQ.shape[0] <= TB.shape[0] else (TB, TQ)
    best, best_w = None, np.inf
    for row in outer:
        cand = inner ^ row
        w = np.bitwise_count(cand).sum(axis=1, dtype=np.int64)
        i = int(np.argmin(w))
        if w[i] < best_w:
            best_w, best = int(w[i]), cand[i]
    if best is None:
        return None, np.inf
    return np.unpackbits(best, bitorder="big", count=n), best_w


def min_weight_nontrivial(check, stab, cap: int | None = None, budget: float = DEFAULT_BUDGET) -> DistanceResult:
    """Minimum weight of ``v`` with ``check v = 0`` and ``v`` outside rowspace(``stab``).

    Uses coset enumeration when ``2^(rank stab + dim quotient)`` fits the
    budget, otherwise a ball search up to ``cap``, shortened to what the
    budget allows. When nothing is found the result is the certified lower
    bound ``searched cap + 1``.
    """
    check = as_binary(check, 2)
    n = check.shape[1]
    stab = as_binary(stab, 2).reshape(-1, n)
    B = gf2.row_basis(stab)
    Q = _quotient_basis(check, stab)
    h = Q.shape[0]
    if h == 0:
        return DistanceResult(np.inf, True, None)
    if 2.0 ** (B.shape[0] + h) <= budget:
        vec, w = _span_nonzero_min(Q, B, n)
        return DistanceResult(w, True, vec)
    if cap is None:
        raise BudgetExceeded(2.0 ** (B.shape[0] + h), budget, "coset enumeration (no weight cap)")
    spent, reach = 0, 0
    for w in range(1, cap + 1):
        spent += comb(n, w)
        if spent > budget:
            break
        reach = w
    detector = gf2.kernel_basis(B) if B.shape[0] else gf2.identity(n)
    cap = reach
    vec = gf2.ball_search(check, np.zeros(check.shape[0], np.uint8), cap, budget=budget, nonzero=detector)
    if vec is None:
        return DistanceResult(cap + 1, False, None)
    return DistanceResult(int(vec.sum()), True, vec)


def distance_exhaustive(H, weight_cap: int | None = None, budget: float = DEFAULT_BUDGET) -> DistanceResult:
    """Minimum distance of the classical code ker(H); ``inf`` if k = 0."""
    H = as_binary(H, 2)
    return min_weight_nontrivial(H, np.zeros((0, H.shape[1]), np.uint8), weight_cap, budget)


def css_distance_exhaustive(code: CssCode, cap: int | None = None, budget: float = DEFAULT_BUDGET):
    """``(d_X, d_Z)`` as :class:`DistanceResult` pair.

    d_X is the minimum weight of an X-logical (in ker H_Z, outside
    rowspace H_X); d_Z symmetrically.
    """
    d_x = min_weight_nontrivial(code.HZ, code.HX, cap, budget)
    d_z = min_weight_nontrivial(code.HX, code.HZ, cap, budget)
    return d_x, d_z


def hgp_logical_witness(code: CssCode, layout, c2_codeword) -> np.ndarray:
    """A left-block X-logical ``e_i (x) c`` for a classical codeword ``c`` of the second factor.

    Its weight equals ``|c|``, so it certifies ``d_X <= |c|``.
    """
    c = as_binary(c2_codeword, 1)
    LX, LZ = (code.LX, code.LZ) if code.LZ is not None else logical_basis(code)
    for i in range(layout.n1):
        v = np.zeros(code.n, np.uint8)
        v[i * layout.n2 : (i + 1) * layout.n2] = c
        if not np.any(gf2.matvec(code.HZ, v)) and np.any(gf2.matvec(LZ, v)):
            return v
    raise ValueError("no nontrivial product logical found for this codeword")


# ---------------------------------------------------------------------------
# confinement and soundness


def _tabulate(f, upto: int) -> np.ndarray:
    if callable(f):
        return np.array([f(x) for x in range(upto + 1)], dtype=float)
    vals = np.asarray(f, dtype=float)
    if vals.shape[0] <= upto:
        raise ValueError(f"tabulated f covers 0..{vals.shape[0] - 1}, need 0..{upto}")
    if np.any(np.diff(vals[: upto + 1]) < 0):
        raise ValueError("f must be monotone non-decreasing")
    return vals[: upto + 1]


@dataclass
class PropertyReport:
    """Outcome of a confinement or soundness check.

    ``worst_ratio`` is the largest ``reduced weight / f(syndrome weight)``
    seen (inf when f vanishes on a violating case); ``passed`` iff it is
    at most 1. ``redundant`` records whether H has dependent rows.
    """

    kind: str
    t: int
    passed: bool
    worst_ratio: float
    checked: int
    violations: int
    worst_case: np.ndarray | None
    redundant: bool
    notes: list[str] = field(default_factory=list)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.kind}(t={self.t}): {verdict} worst_ratio={self.worst_ratio:.4g} "
            f"checked={self.checked} violations={self.violations} redundant={self.redundant}"
        )


def _ratio(num: float, den: float) -> float:
    if num == 0:
        return 0.0
    return np.inf if den <= 0 else num / den


def _combinations(n: int, w: int, chunk: int = 1 << 15):
    it = itertools.combinations(range(n), w)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64)
        if flat.size == 0:
            return
        yield flat.reshape(-1, w)


def reduced_weight_table(H, S, t: int, budget: float = DEFAULT_BUDGET):
    """Exact reduced weights of every error with ``|e| <= t``.

    Two errors share a stabilizer coset iff ``K e`` agrees, with K a basis
    of ker(S). If ``||e|| < |e| <= t`` the minimizer is itself enumerated,
    so grouping by coset key yields exact reduced weights in one pass.
    Returns a list of ``(weight, combos, syndrome_weight, reduced)`` chunks.
    """
    H = as_binary(H, 2)
    n = H.shape[1]
    S = as_binary(S, 2).reshape(-1, n)
    total = sum(comb(n, w) for w in range(t + 1))
    if total > budget:
        raise BudgetExceeded(total, budget, "weight-t error enumeration")
    B = gf2.row_basis(S)
    K = gf2.kernel_basis(B) if B.shape[0] else gf2.identity(n)
    kcols = np.packbits(K.T, axis=1, bitorder="big")
    hcols = np.packbits(H.T, axis=1, bitorder="big")
    chunks, keys, weights = [], [], []
    for w in range(1, t + 1):
        for combos in _combinations(n, w):
            keys.append(np.bitwise_xor.reduce(kcols[combos], axis=1))
            sw = np.bitwise_count(np.bitwise_xor.reduce(hcols[combos], axis=1)).sum(axis=1, dtype=np.int64)
            weights.append(np.full(combos.shape[0], w))
            chunks.append((w, combos, sw))
    if not chunks:
        return []
    allkeys = np.vstack(keys + [np.zeros((1, kcols.shape[1]), np.uint8)])
    allw = np.concatenate(weights + [np.zeros(1, np.int64)])
    _, inv = np.unique(allkeys, axis=0, return_inverse=True)
    inv = inv.ravel()
    best = np.full(inv.max() + 1, np.iinfo(np.int64).max)
    np.minimum.at(best, inv, allw)
    red = best[inv]
    out, pos = [], 0
    for w, combos, sw in chunks:
        k = combos.shape[0]
        out.append((w, combos, sw, red[pos : pos + k]))
        pos += k
    return out


def confinement_check(H, S, t: int, f: Callable | Sequence[float], budget: float = DEFAULT_BUDGET) -> PropertyReport:
    """(t, f)-confinement: ``f(|He|) >= ||e||`` whenever ``||e|| <= t``.

    Every error of reduced weight at most t has a Hamming-weight-t
    representative with the same syndrome, so enumerating ``|e| <= t``
    suffices.
    """
    H = as_binary(H, 2)
    m, n = H.shape
    fx = _tabulate(f, m)
    worst, worst_e, viol, checked = 0.0, None, 0, 0
    for w, combos, sw, red in reduced_weight_table(H, S, t, budget):
        bound = fx[sw]
        viol += int((red > bound).sum())
        safe = np.where(bound > 0, bound, 1.0)
        ratio = np.where(red == 0, 0.0, np.where(bound > 0, red / safe, np.inf))
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst = float(ratio[i])
            worst_e = np.zeros(n, np.uint8)
            worst_e[combos[i]] = 1
        checked += combos.shape[0]
    return PropertyReport(
        "confinement", t, viol == 0, worst, checked, viol, worst_e,
        redundant=rank(H) < m,
    )


def confinement_profile(H, S, t: int, budget: float = DEFAULT_BUDGET) -> np.ndarray:
    """Smallest monotone f making H (t, f)-confined.

    ``f[x]`` is the largest reduced weight among errors with ``||e|| <= t``
    and ``|He| <= x``. ``f[0] > 0`` signals a nontrivial logical of weight
    at most t.
    """
    H = as_binary(H, 2)
    f = np.zeros(H.shape[0] + 1)
    for _, _, sw, red in reduced_weight_table(H, S, t, budget):
        np.maximum.at(f, sw, np.where(red <= t, red, 0).astype(float))
    return np.maximum.accumulate(f)


def soundness_check(H, S, t: int, f: Callable | Sequence[float], budget: float = DEFAULT_BUDGET) -> PropertyReport:
    """(t, f)-soundness: every valid syndrome ``s`` with ``|s| <= t`` has a
    preimage of reduced weight at most ``f(|s|)``.

    The minimum reduced weight over preimages equals the minimum Hamming
    weight of ``e0 + ker H`` for any particular solution ``e0``.
    """
    H = as_binary(H, 2)
    m, n = H.shape
    total = sum(comb(m, w) for w in range(t + 1))
    if total > budget:
        raise BudgetExceeded(total, budget, "soundness enumeration")
    K = gf2.kernel_basis(H)
    if 2.0 ** K.shape[0] > budget:
        raise BudgetExceeded(2.0 ** K.shape[0], budget, "preimage coset enumeration")
    fx = _tabulate(f, t)
    N = gf2.left_null_basis(H)
    ncols = N.T.astype(np.uint8)
    redundant = N.shape[0] > 0
    worst, worst_s, viol, checked = 0.0, None, 0, 0
    for w in range(1, t + 1):
        for combos in _combinations(m, w):
            if N.shape[0]:
                valid = ~np.any(np.bitwise_xor.reduce(ncols[combos], axis=1), axis=1)
            else:
                valid = np.ones(combos.shape[0], bool)
            for idx in np.flatnonzero(valid):
                s = np.zeros(m, np.uint8)
                s[combos[idx]] = 1
                e0 = gf2.solve(H, s)
                _, red = gf2.affine_minimum(e0, K, budget)
                r = _ratio(red, fx[w])
                if red > fx[w]:
                    viol += 1
                if r > worst:
                    worst, worst_s = r, s
                checked += 1
    notes = []
    if not redundant:
        notes.append("H has full row rank: every syndrome is valid and no metachecks exist")
    return PropertyReport("soundness", t, viol == 0, worst, checked, viol, worst_s, redundant, notes)


# ---------------------------------------------------------------------------
# homology


def css_chain(code: CssCode) -> list[np.ndarray]:
    """Chain ``S_X -> Q -> S_Z [-> M_Z]`` as the list of its maps."""
    maps = [code.HX.T, code.HZ]
    if code.MZ is not None:
        maps.append(code.MZ)
    return maps


def homology_dims(chain: Sequence) -> list[int]:
    """Homology dimension at every space of ``C_0 -> C_1 -> ... -> C_L``.

    ``chain[i]`` maps ``C_i`` to ``C_{i+1}``; consecutive maps must
    compose to zero.
    """
    maps = [as_binary(A, 2) for A in chain]
    if not maps:
        raise ValueError("empty chain")
    for i in range(len(maps) - 1):
        if maps[i + 1].shape[1] != maps[i].shape[0]:
            raise ValueError(f"maps {i} and {i + 1} have incompatible shapes")
        if np.any(gf2.matmul(maps[i + 1], maps[i])):
            raise ValueError(f"maps {i} and {i + 1} do not compose to zero")
    dims = [maps[0].shape[1]] + [A.shape[0] for A in maps]
    ranks = [rank(A) for A in maps]
    out = []
    for i, dim in enumerate(dims):
        outgoing = ranks[i] if i < len(maps) else 0
        incoming = ranks[i - 1] if i > 0 else 0
        out.append(dim - outgoing - incoming)
    return out


def single_shot_distance(HZ, MZ, cap: int | None = None, budget: float = DEFAULT_BUDGET) -> DistanceResult:
    """Minimum weight over nonzero classes of ker(M_Z) / im(H_Z); inf when trivial."""
    HZ = as_binary(HZ, 2)
    MZ = as_binary(MZ, 2).reshape(-1, HZ.shape[0])
    return min_weight_nontrivial(MZ, HZ.T, cap, budget)
