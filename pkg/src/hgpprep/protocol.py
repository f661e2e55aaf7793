"""Two-stage preparation of |+> on HGP codes via a thickened code.

Everything is simulated in the binary Pauli-frame picture: X-support and
Z-support vectors over the thickened qubits. Randomness of the bulk
X-measurements is replaced by a uniformly random Z-stabilizer element (the
intrinsic error), which is exact for CSS states under X/Z measurements.

Stage 1 (transversal initialization): every Z-check of the thickened code
is measured once with flip probability ``p_synd``. Metachecks repair the
syndrome and the repaired syndrome is decoded; the correction restricted
to the endpoint sheets is the residual X error carried forward.

Stage 2 (collapse): all bulk qubits are measured in X. Bulk X-checks are
read as repeated noisy syndrome rounds of the base code and processed bit
by bit along the causal orientation of the classical code, pushing a Z
correction onto each unmeasured endpoint sheet.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from hgpprep import gf2
from hgpprep.analysis import _tabulate, confinement_profile
from hgpprep.codes import ClassicalCode, CssCode, ThickenedLayout, repetition_code, thicken
from hgpprep.decoders import (
    BpConfig,
    BpOsdDecoder,
    OsdConfig,
    SingleShotDecoder,
    TwoStageDecoder,
    exact_min_weight_decode,
    producible_syndromes,
    shadow_decode,
)

# stream ids for per-trial generators
STAGE1_SYND, STAGE1_DATA, BULK_Z, INTRINSIC, FRESH_X = range(5)
PRIOR_FLOOR = 1e-3


def trial_rng(master_seed: int, point: int, trial: int, stream: int) -> np.random.Generator:
    """Independent generator for one (point, trial, stream); identical across worker counts."""
    return np.random.default_rng([master_seed, point, trial, stream])


def bernoulli(rng: np.random.Generator, p: float, n: int) -> np.ndarray:
    return (rng.random(n) < p).astype(np.uint8)


@dataclass(frozen=True)
class NoiseModel:
    """``p_data``: independent X and Z flip rate per qubit; ``p_synd``: stage-1 check flip rate."""

    p_data: float = 0.0
    p_synd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_data", "p_synd"):
            p = getattr(self, name)
            if not 0.0 <= p < 0.5:
                raise ValueError(f"{name} must lie in [0, 1/2), got {p}")


def _prior(p: float, floor: float = PRIOR_FLOOR) -> float:
    return max(p, floor)


# ---------------------------------------------------------------------------
# stage 1


@dataclass
class Stage1Result:
    syndrome_error: np.ndarray
    data_error: np.ndarray
    repaired: np.ndarray
    syndrome_repair: np.ndarray
    correction: np.ndarray
    residual: np.ndarray
    flagged: bool


def make_stage1_decoder(thick: CssCode, noise: NoiseModel, data_noise: bool = False,
                        bp: BpConfig | None = None, osd: OsdConfig | None = OsdConfig()) -> TwoStageDecoder:
    p_x = noise.p_data if data_noise else noise.p_synd
    return TwoStageDecoder(thick.HZ, thick.MZ, _prior(p_x), _prior(noise.p_synd), bp, osd)


def stage1_run(thick: CssCode, decoder, s_err: np.ndarray, x_err: np.ndarray | None = None) -> Stage1Result:
    """One stage-1 decode for given syndrome and data errors; ``decoder`` maps s to a MetacheckResult."""
    x_err = np.zeros(thick.n, np.uint8) if x_err is None else x_err
    observed = gf2.matvec(thick.HZ, x_err) ^ s_err
    res = decoder.decode(observed)
    return Stage1Result(s_err, x_err, res.repaired_syndrome, res.syndrome_repair, res.correction,
                        x_err ^ res.correction, res.flagged)


def stage1_simulate(thick: CssCode, layout: ThickenedLayout, noise: NoiseModel, rng_synd, rng_data=None,
                    decoder=None, data_noise: bool = False) -> tuple[np.ndarray, Stage1Result]:
    """Sample stage-1 noise, repair and decode. Returns (residual X, record)."""
    decoder = decoder or make_stage1_decoder(thick, noise, data_noise)
    s_err = bernoulli(rng_synd, noise.p_synd, thick.HZ.shape[0])
    x_err = bernoulli(rng_data, noise.p_data, thick.n) if data_noise else None
    rec = stage1_run(thick, decoder, s_err, x_err)
    return rec.residual, rec


# ---------------------------------------------------------------------------
# stage 2


def sample_intrinsic_error(thick: CssCode, rng: np.random.Generator, HZ_T: sp.csr_matrix | None = None) -> np.ndarray:
    """Uniformly random element of the Z-stabilizer group (rowspace of H_Z)."""
    r = rng.integers(0, 2, thick.HZ.shape[0], dtype=np.uint8)
    M = HZ_T if HZ_T is not None else sp.csr_matrix(thick.HZ.T)
    return (np.asarray(M @ r.astype(np.int64)) & 1).astype(np.uint8).ravel()


@dataclass
class SheetView:
    """Bulk X-measurement outcomes arranged by classical bit and check.

    ``sheet_outcomes[b]`` (length n) are the outcomes on sheet ``b``,
    ``inter_outcomes[c]`` (length m_X) those of the intermediate layer of
    check ``c`` and ``syndromes[b]`` the reconstructed X-syndrome of sheet
    ``b``. Endpoint rows are zero (unmeasured).
    """

    layout: ThickenedLayout
    sheet_outcomes: np.ndarray
    inter_outcomes: np.ndarray
    syndromes: np.ndarray

    def bit_of_step(self, tau: int) -> int:
        """Repetition thickening only: step 1 is the sheet opposite the boundary."""
        ell = self.layout.n_bits
        if not 1 <= tau <= ell - 1:
            raise ValueError(f"step must lie in 1..{ell - 1}")
        return ell - tau

    def m_sheet(self, tau: int) -> np.ndarray:
        return self.sheet_outcomes[self.bit_of_step(tau)]

    def m_inter(self, tau: int) -> np.ndarray:
        """Intermediate layer between step ``tau`` and the next one."""
        return self.inter_outcomes[self.bit_of_step(tau) - 1]

    def s(self, tau: int) -> np.ndarray:
        return self.syndromes[self.bit_of_step(tau)]


def reconstruct_sheet_views(outcomes, layout: ThickenedLayout, thick: CssCode) -> SheetView:
    """Split full-length X outcomes (endpoint entries ignored) into per-sheet views."""
    o = gf2.as_binary(outcomes, 1).copy()
    if o.shape[0] != layout.n_qubits or thick.n != layout.n_qubits:
        raise ValueError(f"expected {layout.n_qubits} outcomes, got {o.shape[0]}")
    o[~layout.bulk_mask] = 0
    nb, nc, n, mx = layout.n_bits, layout.n_checks, layout.n, layout.m_x
    synd = gf2.matvec(thick.HX, o).reshape(mx, nb).T.copy()
    sheet = o[: n * nb].reshape(n, nb).T.copy()
    inter = o[n * nb :].reshape(mx, nc).T.copy()
    for b in layout.endpoints:
        synd[b] = 0
    return SheetView(layout, sheet, inter, synd)


StepDecoder = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class CollapseResult:
    """Boundary corrections per endpoint bit plus per-bit decoder outputs."""

    z: dict[int, np.ndarray]
    data_corrections: dict[int, np.ndarray] = field(default_factory=dict)
    syndrome_corrections: dict[int, np.ndarray] = field(default_factory=dict)


def collapse(views: SheetView, step: StepDecoder) -> CollapseResult:
    """Sequential correction along the causal orientation.

    For each measured bit in schedule order: ``s' = s_b + s_hat_in``,
    ``(z_hat, s_hat) = step(s')`` and ``z_out = z_in + m_b + z_hat``. The
    pair ``(z_out, s_hat)`` flows to every target of the bit's outgoing
    check, so a star center copies it onto each outgoing branch.
    """
    lay = views.layout
    orient = lay.orientation
    n, mx = lay.n, lay.m_x
    out: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    res = CollapseResult({})
    for b in orient.schedule:
        c = orient.incoming[b]
        if c < 0:
            z_in, s_in = np.zeros(n, np.uint8), np.zeros(mx, np.uint8)
        else:
            z_in, s_in = out[orient.source[c]]
        z_hat, s_hat = step(views.syndromes[b] ^ s_in)
        out[b] = (z_in ^ views.sheet_outcomes[b] ^ z_hat, s_hat)
        res.data_corrections[b] = z_hat
        res.syndrome_corrections[b] = s_hat
    for e in orient.endpoints:
        c = orient.incoming[e]
        res.z[e] = out[orient.source[c]][0].copy() if c >= 0 else np.zeros(n, np.uint8)
    return res


def bp_osd_step(decoder: SingleShotDecoder) -> StepDecoder:
    def step(s):
        if not s.any():
            return np.zeros(decoder.n, np.uint8), np.zeros_like(s)
        data, synd, _ = decoder.decode(s)
        return data, synd

    return step


def shadow_step(H: np.ndarray, t: int, budget: float = 2**24) -> StepDecoder:
    """Shadow decoder with repair radius ``t`` as an Algorithm-1 step."""
    table = producible_syndromes(H, t, budget)

    def step(s):
        s_hat, e_hat = shadow_decode(H, None, s, t, budget, table=table)
        return e_hat, s_hat

    return step


def whole_bulk_collapse(views: SheetView, thick: CssCode, p: float, bp=None, osd=OsdConfig()) -> CollapseResult:
    """Decode every bulk X-check at once, then push the cleaned outcomes.

    Each endpoint receives the sum of the corrected sheet outcomes along
    its causal path.
    """
    lay = views.layout
    orient = lay.orientation
    measured = [b for b in range(lay.n_bits) if b not in orient.endpoints]
    rows = np.concatenate([lay.xchecks(b) for b in measured]) if measured else np.zeros(0, np.int64)
    cols = np.flatnonzero(lay.bulk_mask)
    res = CollapseResult({})
    sheet = views.sheet_outcomes.copy()
    if rows.size:
        H = thick.HX[np.ix_(rows, cols)]
        s = np.concatenate([views.syndromes[b] for b in measured])
        e_hat = np.zeros(lay.n_qubits, np.uint8)
        e_hat[cols] = BpOsdDecoder(H, _prior(p), bp, osd).decode(s).correction
        for b in measured:
            sheet[b] ^= e_hat[lay.sheet_qubits(b)]
    for e in orient.endpoints:
        z = np.zeros(lay.n, np.uint8)
        c = orient.incoming[e]
        while c >= 0:
            b = orient.source[c]
            z ^= sheet[b]
            c = orient.incoming[b]
        res.z[e] = z
    return res


def algorithm1_collapse(views: SheetView, hgp: CssCode, p: float, bp=None, osd=OsdConfig()):
    """Repetition thickening: returns (boundary Z correction, CollapseResult)."""
    dec = SingleShotDecoder(hgp.HX, _prior(p), _prior(p), bp, osd)
    res = collapse(views, bp_osd_step(dec))
    (z,) = res.z.values()
    return z, res


def algorithm1_star(views: SheetView, hgp: CssCode, p: float, bp=None, osd=OsdConfig()) -> list[np.ndarray]:
    """Star thickening: one boundary Z correction per outgoing endpoint, in endpoint order."""
    dec = SingleShotDecoder(hgp.HX, _prior(p), _prior(p), bp, osd)
    res = collapse(views, bp_osd_step(dec))
    return [res.z[e] for e in views.layout.endpoints]


# ---------------------------------------------------------------------------
# adjudication and full protocol


def adjudicate(r: np.ndarray, L: np.ndarray, H: np.ndarray | None = None) -> bool:
    """True on logical failure, i.e. ``L r != 0``. With ``H`` given, ``r`` must be in its kernel."""
    if H is not None and np.any(gf2.matvec(H, r)):
        raise AssertionError("residual is not in the kernel of the checks: harness bug")
    return bool(np.any(gf2.matvec(L, r)))


@dataclass
class ProtocolTrace:
    """Per-trial record; every syndrome satisfies its defining relation."""

    stage1: Stage1Result | None = None
    boundary_x: dict[int, np.ndarray] = field(default_factory=dict)
    intrinsic: np.ndarray | None = None
    bulk_z: np.ndarray | None = None
    E: np.ndarray | None = None
    S_e: np.ndarray | None = None
    views: SheetView | None = None
    collapse: CollapseResult | None = None
    boundary_z: dict[int, np.ndarray] = field(default_factory=dict)
    fail_x: bool = False
    fail_z: bool = False
    flagged: bool = False


@dataclass
class PointStats:
    trials: int = 0
    failures_x: int = 0
    failures_z: int = 0
    failures_any: int = 0
    flagged: int = 0

    def add(self, other: "PointStats") -> None:
        self.trials += other.trials
        self.failures_x += other.failures_x
        self.failures_z += other.failures_z
        self.failures_any += other.failures_any
        self.flagged += other.flagged

    def rate(self, sector: str = "any") -> float:
        f = {"x": self.failures_x, "z": self.failures_z, "any": self.failures_any}[sector]
        return f / self.trials if self.trials else float("nan")

    def stderr(self, sector: str = "any") -> float:
        r = self.rate(sector)
        return float(np.sqrt(r * (1 - r) / self.trials)) if self.trials else float("nan")


@dataclass(frozen=True)
class ProtocolOptions:
    """Which pieces of the protocol a simulation exercises.

    ``sectors`` picks X (stage 1, logical X failure) and/or Z (stage 2,
    logical Z failure). ``stage1_data_noise`` adds X errors at ``p_data``
    before the stage-1 measurement; ``fresh_boundary_x`` adds a round of
    X errors on the boundary before the final decode; ``bulk_z_noise``
    puts Z errors at ``p_data`` on every bulk qubit before collapse.
    """

    sectors: tuple[str, ...] = ("x", "z")
    stage1_data_noise: bool = False
    fresh_boundary_x: bool = True
    bulk_z_noise: bool = True
    whole_bulk: bool = False
    prior_floor: float = PRIOR_FLOOR


class ProtocolSimulator:
    """Monte Carlo driver for one (HGP code, classical thickening) pair."""

    def __init__(self, hgp: CssCode, classical: ClassicalCode, bp: BpConfig | None = None,
                 osd: OsdConfig | None = OsdConfig()):
        self.hgp = hgp if hgp.LX is not None else hgp.with_logicals()
        self.classical = classical
        self.thick, self.layout = thicken(self.hgp, classical)
        self.bp = bp
        self.osd = osd
        self._HZ_T = sp.csr_matrix(self.thick.HZ.T.astype(np.int64))
        self._decoders: dict = {}

    def decoders(self, noise: NoiseModel, opts: ProtocolOptions):
        key = (noise.p_data, noise.p_synd, opts)
        if key not in self._decoders:
            fl = opts.prior_floor
            p_x = noise.p_data if opts.stage1_data_noise else noise.p_synd
            self._decoders = {
                key: dict(
                    stage1=TwoStageDecoder(self.thick.HZ, self.thick.MZ, max(p_x, fl), max(noise.p_synd, fl),
                                           self.bp, self.osd),
                    final_x=BpOsdDecoder(self.hgp.HZ, max(noise.p_data, fl), self.bp, self.osd),
                    final_z=BpOsdDecoder(self.hgp.HX, max(noise.p_data, fl), self.bp, self.osd),
                    single_shot=SingleShotDecoder(self.hgp.HX, max(noise.p_data, fl), max(noise.p_data, fl),
                                                  self.bp, self.osd),
                )
            }
        return self._decoders[key]

    def trial(self, noise: NoiseModel, opts: ProtocolOptions, point: int, trial: int,
              record: bool = False) -> ProtocolTrace:
        dec = self.decoders(noise, opts)
        lay, thick, hgp = self.layout, self.thick, self.hgp
        tr = ProtocolTrace()
        seed = noise.seed
        if "x" in opts.sectors:
            rng_s = trial_rng(seed, point, trial, STAGE1_SYND)
            s_err = bernoulli(rng_s, noise.p_synd, thick.HZ.shape[0])
            x_err = None
            if opts.stage1_data_noise:
                x_err = bernoulli(trial_rng(seed, point, trial, STAGE1_DATA), noise.p_data, thick.n)
            st1 = stage1_run(thick, dec["stage1"], s_err, x_err)
            tr.flagged = st1.flagged
            rng_f = trial_rng(seed, point, trial, FRESH_X)
            for e in lay.endpoints:
                r = st1.residual[lay.sheet_qubits(e)]
                if opts.fresh_boundary_x:
                    r = r ^ bernoulli(rng_f, noise.p_data, lay.n)
                tr.boundary_x[e] = r
                synd = gf2.matvec(hgp.HZ, r)
                if synd.any():
                    r = r ^ dec["final_x"].decode(synd).correction
                tr.fail_x |= adjudicate(r, hgp.LZ, hgp.HZ)
            if record:
                tr.stage1 = st1
        if "z" in opts.sectors:
            bulk = np.zeros(thick.n, np.uint8)
            if opts.bulk_z_noise:
                noise_z = bernoulli(trial_rng(seed, point, trial, BULK_Z), noise.p_data, thick.n)
                bulk = noise_z & lay.bulk_mask
            intr = sample_intrinsic_error(thick, trial_rng(seed, point, trial, INTRINSIC), self._HZ_T)
            frame = bulk ^ intr
            views = reconstruct_sheet_views(frame, lay, thick)
            if opts.whole_bulk:
                col = whole_bulk_collapse(views, thick, max(noise.p_data, opts.prior_floor), self.bp, self.osd)
            else:
                col = collapse(views, bp_osd_step(dec["single_shot"]))
            for e in lay.endpoints:
                r = frame[lay.sheet_qubits(e)] ^ col.z[e]
                tr.boundary_z[e] = r
                synd = gf2.matvec(hgp.HX, r)
                if synd.any():
                    r = r ^ dec["final_z"].decode(synd).correction
                tr.fail_z |= adjudicate(r, hgp.LX, hgp.HX)
            if record:
                tr.intrinsic, tr.bulk_z, tr.views, tr.collapse = intr, bulk, views, col
                n, nb = lay.n, lay.n_bits
                tr.E = bulk[: n * nb].reshape(n, nb).T
                tr.S_e = bulk[n * nb :].reshape(lay.m_x, lay.n_checks).T
        return tr

    def run_point(self, noise: NoiseModel, trials, point: int = 0, opts: ProtocolOptions = ProtocolOptions()) -> PointStats:
        """Aggregate ``trials`` (a count or an iterable of trial indices)."""
        idx = range(trials) if isinstance(trials, int) else trials
        st = PointStats()
        for t in idx:
            tr = self.trial(noise, opts, point, t)
            st.trials += 1
            st.failures_x += tr.fail_x
            st.failures_z += tr.fail_z
            st.failures_any += tr.fail_x or tr.fail_z
            st.flagged += tr.flagged
        return st


def full_protocol_simulate(hgp: CssCode, classical: ClassicalCode, noise: NoiseModel, trials: int,
                           opts: ProtocolOptions = ProtocolOptions(), bp=None, osd=OsdConfig(),
                           point: int = 0) -> PointStats:
    return ProtocolSimulator(hgp, classical, bp, osd).run_point(noise, trials, point, opts)


# ---------------------------------------------------------------------------
# repeated-measurement baseline


class RepeatedMeasurementBaseline:
    """``ell`` noisy rounds of H_Z measurement on the unthickened code.

    Rounds are indexed so that round 0 is the last in time. Round ``b``
    reports ``H_Z x_b + meas_b``, where ``x_b`` is the sum of the data
    errors ``data_c`` (``c >= b``) that occur between rounds ``c+1`` and
    ``c``. Only the round outcomes are visible to the decoder.

    The whole history is decoded at once over the spacetime code: its
    fault space (``meas`` then ``data``) is checked by the detectors
    ``D = (I (x) h | H_Z (x) I)`` comparing consecutive rounds, and the
    per-round frames ``x_b`` (plus X-stabilizer gauge on the data faults)
    generate ``ker D`` through ``S = [[H_Z (x) I, 0], [I (x) h, H_X^T (x) I]]``.
    The round outcomes are repaired with ``D`` and decoded with ``S``; the
    frame estimate of round 0 is the correction. Faults are drawn in the
    layout of the stage-1 check flips, so both consume the same sample.
    """

    def __init__(self, hgp: CssCode, ell: int, bp=None, osd=OsdConfig(), data_faults: bool = True):
        self.hgp = hgp if hgp.LX is not None else hgp.with_logicals()
        self.ell = ell
        self.data_faults = data_faults
        h = repetition_code(ell).H
        HZ, HX = self.hgp.HZ, self.hgp.HX
        mz, n = HZ.shape
        self.mz, self.n = mz, n
        self.D = np.hstack([gf2.tensor_product(gf2.identity(mz), h),
                            gf2.tensor_product(HZ, gf2.identity(ell - 1))])
        self.S = gf2.block_compose([
            [gf2.tensor_product(HZ, gf2.identity(ell)), np.zeros((mz * ell, HX.shape[0] * (ell - 1)), np.uint8)],
            [gf2.tensor_product(gf2.identity(n), h), gf2.tensor_product(HX.T, gf2.identity(ell - 1))],
        ])
        self.bp, self.osd = bp, osd
        self._dec = {}

    def decoders(self, noise: NoiseModel, floor: float):
        key = (noise.p_data, noise.p_synd, floor)
        if key not in self._dec:
            ps = max(noise.p_synd, floor)
            self._dec = {key: dict(
                history=TwoStageDecoder(self.S, self.D, ps, ps, self.bp, self.osd),
                final=BpOsdDecoder(self.hgp.HZ, max(noise.p_data, floor), self.bp, self.osd),
            )}
        return self._dec[key]

    def trial(self, noise: NoiseModel, point: int, trial: int, fresh_boundary_x: bool = True,
              floor: float = PRIOR_FLOOR) -> tuple[bool, bool]:
        dec = self.decoders(noise, floor)
        mz, n, ell = self.mz, self.n, self.ell
        faults = bernoulli(trial_rng(noise.seed, point, trial, STAGE1_SYND), noise.p_synd, mz * ell + n * (ell - 1))
        meas = faults[: mz * ell].reshape(mz, ell)
        data = faults[mz * ell :].reshape(n, ell - 1)
        if not self.data_faults:
            data = np.zeros_like(data)
        # frames x_b: cumulative data errors seen by round b
        frames = np.zeros((n, ell), np.uint8)
        if ell > 1:
            frames[:, : ell - 1] = np.bitwise_xor.accumulate(data[:, ::-1], axis=1)[:, ::-1]
        outcomes = gf2.matmul(self.hgp.HZ, frames) ^ meas
        observed = np.concatenate([outcomes.reshape(-1), np.zeros(n * (ell - 1), np.uint8)])
        res = dec["history"].decode(observed)
        r = frames[:, 0] ^ res.correction[: n * ell].reshape(n, ell)[:, 0]
        if fresh_boundary_x:
            r = r ^ bernoulli(trial_rng(noise.seed, point, trial, FRESH_X), noise.p_data, n)
        synd = gf2.matvec(self.hgp.HZ, r)
        if synd.any():
            r = r ^ dec["final"].decode(synd).correction
        return adjudicate(r, self.hgp.LZ, self.hgp.HZ), res.flagged

    def run_point(self, noise: NoiseModel, trials, point: int = 0, fresh_boundary_x: bool = True) -> PointStats:
        idx = range(trials) if isinstance(trials, int) else trials
        st = PointStats()
        for t in idx:
            fail, flagged = self.trial(noise, point, t, fresh_boundary_x)
            st.trials += 1
            st.failures_x += fail
            st.failures_any += fail
            st.flagged += flagged
        return st


def repeated_measurement_baseline(hgp: CssCode, rounds: int, noise: NoiseModel, trials: int,
                                  bp=None, osd=OsdConfig(), point: int = 0) -> PointStats:
    return RepeatedMeasurementBaseline(hgp, rounds, bp, osd).run_point(noise, trials, point)


# ---------------------------------------------------------------------------
# exhaustive bound suites


@dataclass
class SuiteReport:
    name: str
    passed: bool
    checked: int
    violations: int
    worst_ratio: float
    worst_case: object = None
    notes: list[str] = field(default_factory=list)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f" ({'; '.join(self.notes)})" if self.notes else ""
        return (f"{self.name}: {verdict} checked={self.checked} violations={self.violations} "
                f"worst_ratio={self.worst_ratio:.4g}{extra}")


class _Worst:
    def __init__(self):
        self.ratio, self.case, self.violations, self.checked = 0.0, None, 0, 0

    def update(self, value: float, bound: float, case) -> None:
        self.checked += 1
        r = 0.0 if value == 0 else (np.inf if bound <= 0 else value / bound)
        if value > bound:
            self.violations += 1
        if r > self.ratio:
            self.ratio, self.case = r, case


def exact_stage1(thick: CssCode, s_err: np.ndarray, budget: float = 2**24) -> np.ndarray:
    """Stage-1 correction with exact minimum-weight repair and decode (true syndrome 0)."""
    meta = gf2.matvec(thick.MZ, s_err) if thick.MZ is not None and thick.MZ.shape[0] else None
    repaired = s_err.copy()
    if meta is not None and meta.any():
        repaired ^= exact_min_weight_decode(thick.MZ, meta, budget)
    return exact_min_weight_decode(thick.HZ, repaired, budget)


def lemma1_suite(thick: CssCode, d: int, max_weight: int | None = None, extra_weight: int | None = None,
                 extra_samples: int | None = None, seed: int = 0, budget: float = 2**24) -> SuiteReport:
    """Stage-1 residual bound ``||e + e_hat|| <= 2 |s_e|^3`` with exact decoders.

    Covers every syndrome error of weight up to ``max_weight`` (default
    ``d // 2``). ``extra_weight`` adds that weight too, either exhaustively
    or by ``extra_samples`` random draws. Reduced weight is taken modulo the
    X-stabilizers.
    """
    m = thick.HZ.shape[0]
    wmax = d // 2 if max_weight is None else max_weight
    stab = gf2.row_basis(thick.HX)
    acc = _Worst()

    def check(support):
        s = np.zeros(m, np.uint8)
        s[list(support)] = 1
        e_hat = exact_stage1(thick, s, budget)
        _, red = gf2.affine_minimum(e_hat, stab, budget)
        acc.update(red, 2 * len(support) ** 3, s)

    for w in range(1, wmax + 1):
        for sup in itertools.combinations(range(m), w):
            check(sup)
    notes = [f"exhaustive |s_e| <= {wmax}"]
    if extra_weight:
        if extra_samples is None:
            for sup in itertools.combinations(range(m), extra_weight):
                check(sup)
            notes.append(f"exhaustive |s_e| = {extra_weight}")
        else:
            rng = np.random.default_rng(seed)
            for _ in range(extra_samples):
                check(rng.choice(m, extra_weight, replace=False))
            notes.append(f"{extra_samples} samples at |s_e| = {extra_weight}")
    return SuiteReport("stage1-residual", acc.violations == 0, acc.checked, acc.violations, acc.ratio,
                       acc.case, notes)


def _bulk_errors(layout: ThickenedLayout, max_sheet: int, max_inter: int):
    sheet_q = np.concatenate([layout.sheet_qubits(b) for b in layout.orientation.schedule]) \
        if layout.orientation.schedule else np.zeros(0, np.int64)
    inter_q = np.arange(layout.n * layout.n_bits, layout.n_qubits)
    for a in range(max_sheet + 1):
        for sa in itertools.combinations(sheet_q, a):
            for b in range(max_inter + 1):
                for sb in itertools.combinations(inter_q, b):
                    e = np.zeros(layout.n_qubits, np.uint8)
                    e[list(sa) + list(sb)] = 1
                    yield e


def lemma3_suite(hgp: CssCode, thick: CssCode, layout: ThickenedLayout, t: int, f=None,
                 budget: float = 2**24) -> SuiteReport:
    """Stage-2 boundary residual ``||e_boundary|| <= t/4`` under the shadow decoder with radius t/2.

    Enumerates every bulk Z error with ``|E| <= t/4`` and
    ``f(2 |S_e|) <= t/4``, where ``f`` defaults to the measured
    confinement profile of H_X at cutoff ``t``.
    """
    f_tab = confinement_profile(hgp.HX, hgp.HZ, t, budget) if f is None else _tabulate(f, hgp.HX.shape[0])
    notes = [f"t={t}", f"f={[round(float(v), 3) for v in f_tab[:6]]}..."]
    if f_tab[0] > 0:
        notes.append("H_X is not confined at this t (logical of weight <= t)")
        return SuiteReport("stage2-residual", False, 0, 0, np.inf, None, notes)
    q = t / 4
    max_sheet = int(np.floor(q))
    max_inter = 0
    while 2 * (max_inter + 1) < f_tab.shape[0] and f_tab[2 * (max_inter + 1)] <= q:
        max_inter += 1
    step = shadow_step(hgp.HX, t // 2, budget)
    stab = gf2.row_basis(hgp.HZ)
    acc = _Worst()
    for e in _bulk_errors(layout, max_sheet, max_inter):
        views = reconstruct_sheet_views(e, layout, thick)
        res = collapse(views, step)
        for b in layout.endpoints:
            r = e[layout.sheet_qubits(b)] ^ res.z[b]
            _, red = gf2.affine_minimum(r, stab, budget)
            acc.update(red, q, e)
    notes.append(f"|E| <= {max_sheet}, |S_e| <= {max_inter}")
    return SuiteReport("stage2-residual", acc.violations == 0, acc.checked, acc.violations, acc.ratio,
                       acc.case, notes)


def theorem_suite(stage1: SuiteReport, stage2: SuiteReport, d: int, t: int) -> SuiteReport:
    """Full-protocol bounds: the X and Z sectors are processed independently, so the
    product of the two enumerations passes iff both factor suites pass, given ``d > t``."""
    notes = [f"d={d} > t={t}" if d > t else f"requires d > t (d={d}, t={t})"]
    ok = stage1.passed and stage2.passed and d > t
    return SuiteReport("full-protocol", ok, stage1.checked * max(stage2.checked, 1),
                       stage1.violations + stage2.violations, max(stage1.worst_ratio, stage2.worst_ratio),
                       None, notes)
