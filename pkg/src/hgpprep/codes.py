"""Classical and CSS code constructions.

Covers the (wc, wr) configuration-model ensemble, repetition and star
codes with their causal orientation, hypergraph products, thickening by a
classical code (homological product of a CSS 3-term chain with a classical
2-term chain), and logical-operator bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from hgpprep import gf2
from hgpprep.gf2 import identity, rank, tensor_product

SAMPLER_BUDGET = 10**6


# ---------------------------------------------------------------------------
# classical codes


@dataclass(frozen=True)
class CausalOrientation:
    """Arrows of time on a tree-like classical Tanner graph.

    ``incoming[b]`` is the check feeding bit ``b`` (-1 for a source bit),
    ``source[c]`` the bit that feeds check ``c`` and ``targets[c]`` the bits
    it feeds. ``endpoints`` are sink bits whose sheets stay unmeasured;
    ``schedule`` lists the measured bits in a topological order.
    """

    incoming: tuple[int, ...]
    source: tuple[int, ...]
    targets: tuple[tuple[int, ...], ...]
    endpoints: tuple[int, ...]
    schedule: tuple[int, ...]

    def validate(self, H: np.ndarray) -> None:
        m, n = H.shape
        if len(self.incoming) != n or len(self.source) != m or len(self.targets) != m:
            raise ValueError("orientation does not match the Tanner graph size")
        for c in range(m):
            bits = set(np.flatnonzero(H[c]).tolist())
            if bits != {self.source[c], *self.targets[c]}:
                raise ValueError(f"check {c}: orientation disagrees with its support")
            for t in self.targets[c]:
                if self.incoming[t] != c:
                    raise ValueError(f"bit {t} must have check {c} as its unique incoming arrow")
        if sorted(self.schedule + self.endpoints) != list(range(n)):
            raise ValueError("schedule and endpoints must partition the bits")
        seen: set[int] = set()
        for b in self.schedule:
            c = self.incoming[b]
            if c >= 0 and self.source[c] not in seen:
                raise ValueError("schedule is not topological")
            seen.add(b)
        outdeg = [0] * n
        for c in range(m):
            outdeg[self.source[c]] += 1
        for b in self.endpoints:
            if outdeg[b]:
                raise ValueError(f"endpoint {b} has an outgoing arrow")
        if any(d > 1 for d in outdeg):
            raise ValueError("a bit may feed at most one check")


@dataclass(frozen=True, eq=False)
class ClassicalCode:
    """Parity-check matrix with cached parameters.

    ``d`` is ``None`` until computed; ``d_exact`` is False for certified
    lower bounds. ``orientation`` is set for codes usable as a thickening.
    """

    H: np.ndarray
    name: str = ""
    d: float | None = None
    d_exact: bool = True
    seed: int | None = None
    orientation: CausalOrientation | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        H = gf2.as_binary(self.H, 2).copy()
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        if self.orientation is not None:
            self.orientation.validate(H)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @cached_property
    def rank(self) -> int:
        return rank(self.H)

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def k_transpose(self) -> int:
        return self.m - self.rank

    def transpose(self) -> "ClassicalCode":
        return ClassicalCode(self.H.T, name=f"{self.name}^T")

    def generator(self) -> np.ndarray:
        return gf2.kernel_basis(self.H)

    def __repr__(self) -> str:
        d = "?" if self.d is None else (self.d if self.d_exact else f">={self.d}")
        return f"ClassicalCode({self.name!r}, [{self.n},{self.k},{d}], m={self.m})"


def _stub_matching(rng, n, col_deg, row_deg, multi_edges, budget):
    m = n * col_deg // row_deg
    E = n * col_deg
    stubs = np.repeat(np.arange(m), row_deg)
    cols = np.repeat(np.arange(n), col_deg)
    if multi_edges == "merge":
        chk = stubs[rng.permutation(E)]
        H = np.zeros((m, n), dtype=np.uint8)
        H[chk, cols] = 1
        return H, 1
    batch = 1024
    tries = 0
    while tries < budget:
        b = min(batch, budget - tries)
        perm = rng.random((b, E)).argsort(axis=1)
        chk = stubs[perm]
        key = np.sort(chk.reshape(b, n, col_deg), axis=2)
        ok = np.flatnonzero(np.all(np.diff(key, axis=2) != 0, axis=(1, 2)))
        if ok.size:
            H = np.zeros((m, n), dtype=np.uint8)
            H[chk[ok[0]], cols] = 1
            return H, tries + int(ok[0]) + 1
        tries += b
    return None, tries


def sample_regular_ldpc(
    n: int,
    col_deg: int,
    row_deg: int,
    seed: int,
    multi_edges: str = "resample",
    require_full_rank: bool = False,
    budget: int = SAMPLER_BUDGET,
) -> ClassicalCode:
    """Draw H from the bipartite configuration model.

    ``multi_edges="resample"`` redraws the whole stub matching until the
    graph is simple, giving an exactly (col_deg, row_deg)-regular H.
    ``"merge"`` keeps the first matching and collapses repeated edges into a
    single entry, so a few degrees drop below nominal. With
    ``require_full_rank`` draws continue (same RNG stream) until rank H = m.
    """
    if (n * col_deg) % row_deg:
        raise ValueError(f"n*col_deg = {n * col_deg} is not divisible by row_deg = {row_deg}")
    if multi_edges not in ("resample", "merge"):
        raise ValueError(f"unknown multi_edges mode {multi_edges!r}")
    rng = np.random.default_rng(seed)
    spent = 0
    draws = 0
    while spent < budget:
        H, tries = _stub_matching(rng, n, col_deg, row_deg, multi_edges, budget - spent)
        spent += tries
        if H is None:
            break
        draws += 1
        if require_full_rank and rank(H) < H.shape[0]:
            continue
        return ClassicalCode(
            H,
            name=f"ldpc({n},{col_deg},{row_deg})#{seed}",
            seed=seed,
            meta={
                "family": "ldpc",
                "n": n,
                "col_deg": col_deg,
                "row_deg": row_deg,
                "multi_edges": multi_edges,
                "require_full_rank": require_full_rank,
                "matchings_drawn": spent,
                "rank": rank(H),
            },
        )
    raise RuntimeError(
        f"configuration model (n={n}, {col_deg},{row_deg}) seed={seed}: retry budget "
        f"{budget} exhausted after {draws} accepted draws"
    )


def repetition_code(ell: int) -> ClassicalCode:
    """Length-``ell`` repetition code, checks on adjacent bits.

    Time flows from bit ``ell-1`` towards the unmeasured endpoint bit 0.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    H = np.zeros((ell - 1, ell), dtype=np.uint8)
    for c in range(ell - 1):
        H[c, c] = H[c, c + 1] = 1
    orient = CausalOrientation(
        incoming=tuple(range(ell - 1)) + (-1,),
        source=tuple(c + 1 for c in range(ell - 1)),
        targets=tuple((c,) for c in range(ell - 1)),
        endpoints=(0,),
        schedule=tuple(range(ell - 1, 0, -1)),
    )
    return ClassicalCode(
        H, name=f"rep({ell})", d=ell, orientation=orient,
        meta={"family": "repetition", "ell": ell},
    )


def star_code(z: int, branch_len: int) -> ClassicalCode:
    """``z`` chains of ``branch_len`` bits joined by one weight-``z`` central check.

    Bit ``(j, i)`` has index ``j*branch_len + i`` with ``i = 0`` the outer
    end of branch ``j``. Chain checks of branch ``j`` come first
    (``j*(branch_len-1) + i`` joins positions ``i`` and ``i+1``), the central
    check is last. Branch 0 is incoming; outer ends of the other branches
    are the endpoints.
    """
    if z < 2 or branch_len < 1:
        raise ValueError("star code needs z >= 2 and branch_len >= 1")
    L = branch_len
    n = z * L
    mc = z * (L - 1) + 1
    H = np.zeros((mc, n), dtype=np.uint8)
    incoming = [-1] * n
    source = [0] * mc
    targets: list[tuple[int, ...]] = [()] * mc
    for j in range(z):
        for i in range(L - 1):
            c = j * (L - 1) + i
            H[c, j * L + i] = H[c, j * L + i + 1] = 1
            if j == 0:
                source[c], targets[c] = i, (i + 1,)
                incoming[i + 1] = c
            else:
                source[c], targets[c] = j * L + i + 1, (j * L + i,)
                incoming[j * L + i] = c
    center = mc - 1
    H[center, [j * L + L - 1 for j in range(z)]] = 1
    source[center] = L - 1
    targets[center] = tuple(j * L + L - 1 for j in range(1, z))
    for j in range(1, z):
        incoming[j * L + L - 1] = center
    schedule = list(range(L))
    for j in range(1, z):
        schedule += [j * L + i for i in range(L - 1, 0, -1)]
    orient = CausalOrientation(
        incoming=tuple(incoming),
        source=tuple(source),
        targets=tuple(targets),
        endpoints=tuple(j * L for j in range(1, z)),
        schedule=tuple(schedule),
    )
    return ClassicalCode(
        H, name=f"star({z},{branch_len})", d=2 * L, orientation=orient,
        meta={"family": "star", "z": z, "branch_len": branch_len},
    )


# ---------------------------------------------------------------------------
# CSS codes


@dataclass(frozen=True, eq=False)
class CssCode:
    """Paired X/Z check matrices plus optional metachecks and logical bases."""

    HX: np.ndarray
    HZ: np.ndarray
    MZ: np.ndarray | None = None
    MX: np.ndarray | None = None
    LX: np.ndarray | None = None
    LZ: np.ndarray | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for attr in ("HX", "HZ", "MZ", "MX", "LX", "LZ"):
            val = getattr(self, attr)
            if val is not None:
                arr = gf2.as_binary(val, 2).copy()
                arr.setflags(write=False)
                object.__setattr__(self, attr, arr)
        if self.HX.shape[1] != self.HZ.shape[1]:
            raise ValueError("HX and HZ act on different numbers of qubits")
        if np.any(gf2.matmul(self.HX, self.HZ.T)):
            raise ValueError("HX HZ^T != 0: checks do not commute")
        if self.MZ is not None and np.any(gf2.matmul(self.MZ, self.HZ)):
            raise ValueError("MZ HZ != 0")
        if self.MX is not None and np.any(gf2.matmul(self.MX, self.HX)):
            raise ValueError("MX HX != 0")
        if self.LX is not None and np.any(gf2.matmul(self.HZ, self.LX.T)):
            raise ValueError("HZ LX^T != 0")
        if self.LZ is not None and np.any(gf2.matmul(self.HX, self.LZ.T)):
            raise ValueError("HX LZ^T != 0")

    @property
    def n(self) -> int:
        return self.HX.shape[1]

    @cached_property
    def rank_x(self) -> int:
        return rank(self.HX)

    @cached_property
    def rank_z(self) -> int:
        return rank(self.HZ)

    @property
    def k(self) -> int:
        return self.n - self.rank_x - self.rank_z

    def with_logicals(self, reduce: bool = False) -> "CssCode":
        LX, LZ = logical_basis(self, reduce=reduce)
        return replace(self, LX=LX, LZ=LZ)

    def __repr__(self) -> str:
        return f"CssCode({self.name!r}, [[{self.n},{self.k}]], mX={self.HX.shape[0]}, mZ={self.HZ.shape[0]})"


@dataclass(frozen=True)
class HgpLayout:
    """Qubit indexing of a hypergraph product.

    Left block qubit ``(b1, b2)`` is ``b1*n2 + b2``; right block qubit
    ``(c1, c2)`` is ``n1*n2 + c1*m2 + c2``.
    """

    n1: int
    n2: int
    m1: int
    m2: int

    def left(self, b1: int, b2: int) -> int:
        return b1 * self.n2 + b2

    def right(self, c1: int, c2: int) -> int:
        return self.n1 * self.n2 + c1 * self.m2 + c2


def hypergraph_product(c1: ClassicalCode, c2: ClassicalCode) -> tuple[CssCode, HgpLayout]:
    H1, H2 = c1.H, c2.H
    m1, n1 = H1.shape
    m2, n2 = H2.shape
    HX = np.hstack([tensor_product(H1, identity(n2)), tensor_product(identity(m1), H2.T)])
    HZ = np.hstack([tensor_product(identity(n1), H2), tensor_product(H1.T, identity(m2))])
    code = CssCode(
        HX, HZ, name=f"hgp({c1.name},{c2.name})",
        meta={"family": "hgp", "classical": [c1.name, c2.name]},
    )
    expected_k = c1.k * c2.k + c1.k_transpose * c2.k_transpose
    if code.k != expected_k:
        raise AssertionError(f"HGP k={code.k} disagrees with k1k2 + k1'k2' = {expected_k}")
    return code, HgpLayout(n1, n2, m1, m2)


# ---------------------------------------------------------------------------
# thickening


@dataclass(frozen=True)
class ThickenedLayout:
    """Index maps of a thickened code.

    Sheet qubit ``(bit, q)`` is ``q*n_bits + bit``; intermediate qubit
    ``(check, x)`` is ``n*n_bits + x*n_checks + check``. X-check
    ``(bit, x)`` is ``x*n_bits + bit``. Sheet Z-check ``(bit, r)`` is
    ``r*n_bits + bit``; intermediate Z-check ``(check, q)`` is
    ``m_z*n_bits + q*n_checks + check``. Metacheck ``(check, r)`` is
    ``r*n_checks + check``.
    """

    n: int
    m_x: int
    m_z: int
    classical: ClassicalCode

    @property
    def n_bits(self) -> int:
        return self.classical.n

    @property
    def n_checks(self) -> int:
        return self.classical.m

    @property
    def ell(self) -> int:
        return self.n_bits

    @property
    def orientation(self) -> CausalOrientation:
        return self.classical.orientation

    @property
    def endpoints(self) -> tuple[int, ...]:
        return self.orientation.endpoints

    @property
    def boundary_sheet(self) -> int:
        return self.endpoints[0]

    @property
    def fault_tolerant(self) -> bool:
        # a single sheet has no metachecks: plain transversal initialization
        return self.n_checks > 0

    @property
    def n_qubits(self) -> int:
        return self.n * self.n_bits + self.m_x * self.n_checks

    @property
    def n_zchecks(self) -> int:
        return self.m_z * self.n_bits + self.n * self.n_checks

    def sheet_qubits(self, bit: int) -> np.ndarray:
        return np.arange(self.n) * self.n_bits + bit

    def inter_qubits(self, check: int) -> np.ndarray:
        return self.n * self.n_bits + np.arange(self.m_x) * self.n_checks + check

    def xchecks(self, bit: int) -> np.ndarray:
        return np.arange(self.m_x) * self.n_bits + bit

    def sheet_zchecks(self, bit: int) -> np.ndarray:
        return np.arange(self.m_z) * self.n_bits + bit

    def inter_zchecks(self, check: int) -> np.ndarray:
        return self.m_z * self.n_bits + np.arange(self.n) * self.n_checks + check

    def metachecks(self, check: int) -> np.ndarray:
        return np.arange(self.m_z) * self.n_checks + check

    @cached_property
    def bulk_mask(self) -> np.ndarray:
        mask = np.ones(self.n_qubits, dtype=bool)
        for b in self.endpoints:
            mask[self.sheet_qubits(b)] = False
        mask.setflags(write=False)
        return mask

    def qubit_table(self) -> np.ndarray:
        """Rows ``(index, kind, classical_index, base_index)``; kind 0 = sheet, 1 = intermediate."""
        rows = []
        for b in range(self.n_bits):
            for q, idx in enumerate(self.sheet_qubits(b)):
                rows.append((idx, 0, b, q))
        for c in range(self.n_checks):
            for x, idx in enumerate(self.inter_qubits(c)):
                rows.append((idx, 1, c, x))
        return np.array(sorted(rows), dtype=np.int64).reshape(-1, 4)


def thicken(code: CssCode, classical: ClassicalCode) -> tuple[CssCode, ThickenedLayout]:
    """Homological product of ``code`` with an oriented classical code.

    Returns the thickened code (carrying its Z-metacheck matrix) and layout.
    """
    if classical.orientation is None:
        raise ValueError("thickening code needs a causal orientation (repetition or star)")
    h = classical.H
    nc, nb = h.shape
    HX, HZ = code.HX, code.HZ
    m_x, n = HX.shape
    m_z = HZ.shape[0]
    tHX = np.hstack([tensor_product(HX, identity(nb)), tensor_product(identity(m_x), h.T)])
    tHZ = gf2.block_compose(
        [
            [tensor_product(HZ, identity(nb)), np.zeros((m_z * nb, m_x * nc), np.uint8)],
            [tensor_product(identity(n), h), tensor_product(HX.T, identity(nc))],
        ]
    )
    tMZ = np.hstack([tensor_product(identity(m_z), h), tensor_product(HZ, identity(nc))])
    thick = CssCode(
        tHX, tHZ, MZ=tMZ, name=f"thick({code.name},{classical.name})",
        meta={"family": "thickened", "base": code.name, "classical": classical.name},
    )
    layout = ThickenedLayout(n=n, m_x=m_x, m_z=m_z, classical=classical)
    k_c = classical.k
    expected = code.k * k_c + (m_x - code.rank_x) * classical.k_transpose
    if thick.k != expected:
        raise AssertionError(f"thickened k={thick.k}, Kunneth predicts {expected}")
    return thick, layout


# ---------------------------------------------------------------------------
# logical operators


def _quotient_basis(kernel_of: np.ndarray, modulo: np.ndarray) -> np.ndarray:
    """Basis of ker(kernel_of) / rowspace(modulo) as representative rows."""
    K = gf2.kernel_basis(kernel_of)
    B = gf2.row_basis(modulo)
    if K.shape[0] == 0:
        return K
    stacked = np.vstack([B, K])
    _, piv = gf2.row_reduce(stacked.T.copy())
    picks = [p - B.shape[0] for p in piv if p >= B.shape[0]]
    return K[picks]


def inverse(P: np.ndarray) -> np.ndarray:
    k = P.shape[0]
    R, piv = gf2.row_reduce(np.hstack([P, identity(k)]))
    if list(piv[:k]) != list(range(k)):
        raise ValueError("matrix is singular over GF(2)")
    return R[:, k:].copy()


def logical_basis(code: CssCode, reduce: bool = False, budget: float = 2**22):
    """Logical X and Z bases with ``LZ LX^T = I``.

    ``reduce`` replaces each row by its minimum-weight stabilizer-equivalent
    (exhaustive, so only for small codes).
    """
    LX = _quotient_basis(code.HZ, code.HX)
    LZ = _quotient_basis(code.HX, code.HZ)
    if LX.shape[0] != LZ.shape[0]:
        raise AssertionError("logical X and Z counts differ")
    k = LX.shape[0]
    if k:
        P = gf2.matmul(LZ, LX.T)
        LX = gf2.matmul(inverse(P).T, LX)
    if reduce and k:
        LX = np.array([gf2.min_weight_coset_rep(r, code.HX, budget).vector for r in LX])
        LZ = np.array([gf2.min_weight_coset_rep(r, code.HZ, budget).vector for r in LZ])
    return LX.reshape(k, code.n), LZ.reshape(k, code.n)


def classical_generator_for(classical: ClassicalCode) -> np.ndarray:
    """Codewords ``g_j`` with ``g_j[endpoint_i] = delta_ij``.

    Requires the endpoints to be an information set of the classical code.
    """
    K = gf2.kernel_basis(classical.H)
    ends = list(classical.orientation.endpoints)
    if K.shape[0] != len(ends):
        raise ValueError("number of endpoints must equal the classical dimension")
    KE = K[:, ends]
    return gf2.matmul(inverse(KE), K)


def kunneth_logicals(code: CssCode, layout: ThickenedLayout, base_LX, base_LZ):
    """Product logicals of a thickened code.

    ``LZ~`` rows are ``G_Z (x) e_j`` (endpoint sheet ``j`` only) and ``LX~``
    rows ``G_X (x) g_j``; rows are grouped endpoint-major. With paired base
    logicals the result is paired as well.
    """
    g = classical_generator_for(layout.classical)
    nb = layout.n_bits
    pad = np.zeros((base_LX.shape[0], layout.m_x * layout.n_checks), np.uint8)
    LX, LZ = [], []
    for j, e in enumerate(layout.endpoints):
        unit = np.zeros((1, nb), np.uint8)
        unit[0, e] = 1
        LZ.append(np.hstack([tensor_product(base_LZ, unit), pad]))
        LX.append(np.hstack([tensor_product(base_LX, g[j : j + 1]), pad]))
    LX = np.vstack(LX)
    LZ = np.vstack(LZ)
    if np.any(gf2.matmul(code.HX, LZ.T)) or np.any(gf2.matmul(code.HZ, LX.T)):
        raise AssertionError("Kunneth logicals fail to commute with the thickened checks")
    return LX, LZ
