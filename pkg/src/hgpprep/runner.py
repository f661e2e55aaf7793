"""Run orchestration: JSON configs, worker pool, CSV results and manifests.

Randomness flows from one master seed: trial ``i`` of parameter point
``j`` uses ``default_rng([master_seed, j, i, stream])``, so results do not
depend on the worker count or chunking. Point ``j`` enumerates
(thickening, p) pairs and is shared by all experiments in a run, so a
protocol run and its repeated-measurement baseline see the same faults.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from hgpprep import __version__
from hgpprep.bundle import read_bundle
from hgpprep.codes import (
    ClassicalCode,
    CssCode,
    hypergraph_product,
    repetition_code,
    sample_regular_ldpc,
    star_code,
)
from hgpprep.decoders import BpConfig, OsdConfig
from hgpprep.protocol import (
    NoiseModel,
    PointStats,
    ProtocolOptions,
    ProtocolSimulator,
    RepeatedMeasurementBaseline,
)

SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "schema_version", "run_id", "code_id", "thickening", "experiment", "p", "trials",
    "failures_x", "failures_z", "failures", "rate", "stderr", "flagged", "wall_time",
]
EXPERIMENTS = ("x", "z", "both", "baseline")
WORKERS_ENV = "HGPPREP_WORKERS"

log = logging.getLogger("hgpprep")


class ConfigError(ValueError):
    """Malformed run configuration; the message names the offending field."""


# ---------------------------------------------------------------------------
# code specs


def _parse_kv(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def classical_from_spec(spec) -> ClassicalCode:
    """``{"family": "ldpc"|"repetition"|"star", ...}`` or a short string.

    Strings: ``ldpc:n=18,wc=5,wr=6,seed=3[,merge=1][,full_rank=1]``,
    ``rep:5``, ``star:3,2``.
    """
    if isinstance(spec, str):
        fam, _, rest = spec.partition(":")
        if fam == "ldpc":
            kv = _parse_kv(rest)
            spec = {
                "family": "ldpc",
                "n": int(kv["n"]),
                "col_deg": int(kv.get("wc", kv.get("col_deg", 5))),
                "row_deg": int(kv.get("wr", kv.get("row_deg", 6))),
                "seed": int(kv.get("seed", 0)),
                "multi_edges": "merge" if kv.get("merge", "0") in ("1", "true") else kv.get("multi_edges", "resample"),
                "require_full_rank": kv.get("full_rank", "0") in ("1", "true"),
            }
        elif fam in ("rep", "repetition"):
            spec = {"family": "repetition", "ell": int(rest)}
        elif fam == "star":
            z, bl = (int(x) for x in rest.split(","))
            spec = {"family": "star", "z": z, "branch_len": bl}
        else:
            raise ConfigError(f"unknown classical family {fam!r}")
    fam = spec.get("family")
    try:
        if fam == "ldpc":
            return sample_regular_ldpc(
                int(spec["n"]), int(spec.get("col_deg", 5)), int(spec.get("row_deg", 6)), int(spec["seed"]),
                multi_edges=spec.get("multi_edges", "resample"),
                require_full_rank=bool(spec.get("require_full_rank", False)),
            )
        if fam == "repetition":
            return repetition_code(int(spec["ell"]))
        if fam == "star":
            return star_code(int(spec["z"]), int(spec["branch_len"]))
    except KeyError as exc:
        raise ConfigError(f"classical spec {spec!r} is missing field {exc.args[0]!r}") from None
    raise ConfigError(f"unknown classical family {fam!r}")


def thickening_from_spec(spec) -> ClassicalCode:
    if isinstance(spec, str):
        return classical_from_spec(spec)
    kind = spec.get("type", spec.get("family"))
    if kind in ("repetition", "rep"):
        return repetition_code(int(spec["ell"]))
    if kind == "star":
        return star_code(int(spec["z"]), int(spec["branch_len"]))
    raise ConfigError(f"thickening.type must be 'repetition' or 'star', got {kind!r}")


def thickening_label(c: ClassicalCode) -> str:
    meta = c.meta
    if meta.get("family") == "repetition":
        return f"rep:{meta['ell']}"
    if meta.get("family") == "star":
        return f"star:{meta['z']},{meta['branch_len']}"
    return c.name


def build_code(spec: dict) -> tuple[CssCode, str]:
    """Base CSS code (with logicals) and its id from a code spec."""
    if "bundle" in spec:
        code, _ = read_bundle(spec["bundle"])
        cid = spec.get("id", code.name)
    else:
        if spec.get("family", "hgp") != "hgp":
            raise ConfigError(f"code.family must be 'hgp' or use 'bundle', got {spec.get('family')!r}")
        if "classical" not in spec:
            raise ConfigError("code.classical is required for family 'hgp'")
        c1 = classical_from_spec(spec["classical"])
        c2 = classical_from_spec(spec.get("classical2", spec["classical"]))
        code, _ = hypergraph_product(c1, c2)
        cid = spec.get("id", code.name)
    if code.LX is None or code.LZ is None:
        code = code.with_logicals()
    return code, cid


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    command: str = "simulate"
    code: dict = field(default_factory=dict)
    thickenings: list = field(default_factory=list)
    experiments: list = field(default_factory=lambda: ["x"])
    grid: list = field(default_factory=list)
    p_data: float | None = None
    p_synd: float | None = None
    trials: int = 1000
    master_seed: int = 0
    options: dict = field(default_factory=dict)
    bp: dict = field(default_factory=dict)
    osd: dict = field(default_factory=dict)
    output: str | None = None
    workers: int | None = None

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "config" in d and "library_version" in d:
            d = d["config"]  # a manifest
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if self.command not in ("simulate", "verify-bounds"):
            raise ConfigError(f"command: unsupported value {self.command!r}")
        if not isinstance(self.code, dict) or not self.code:
            raise ConfigError("code: a code spec object is required")
        if "bundle" in self.code and not Path(self.code["bundle"]).exists():
            raise ConfigError(f"code.bundle: path {self.code['bundle']!r} does not exist")
        if self.command == "simulate":
            if not self.grid:
                raise ConfigError("grid: at least one p value is required")
            if any(not 0 <= float(p) < 0.5 for p in self.grid):
                raise ConfigError("grid: every p must lie in [0, 1/2)")
            if not self.thickenings:
                raise ConfigError("thickenings: at least one thickening spec is required")
            bad = [e for e in self.experiments if e not in EXPERIMENTS]
            if bad or not self.experiments:
                raise ConfigError(f"experiments: choose from {EXPERIMENTS}, got {self.experiments!r}")
        if int(self.trials) < 1:
            raise ConfigError("trials: must be >= 1")
        opt_fields = {f.name for f in fields(ProtocolOptions)} - {"sectors"}
        bad = sorted(set(self.options) - opt_fields)
        if bad:
            raise ConfigError(f"options: unknown field(s) {', '.join(bad)}")
        for name, klass in (("bp", BpConfig), ("osd", OsdConfig)):
            allowed = {f.name for f in fields(klass)} - {"channel_prior"}
            bad = sorted(set(getattr(self, name)) - allowed)
            if bad:
                raise ConfigError(f"{name}: unknown field(s) {', '.join(bad)}")
            try:
                klass(**getattr(self, name))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{name}: {exc}") from None
        if self.workers is not None and int(self.workers) < 1:
            raise ConfigError("workers: must be >= 1")

    @property
    def run_id(self) -> str:
        d = self.to_dict()
        d.pop("output", None)
        d.pop("workers", None)
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def noise_for(self, experiment: str, p: float) -> NoiseModel:
        pd = self.p_data if self.p_data is not None else p
        ps = self.p_synd if self.p_synd is not None else p
        if experiment == "z":
            ps = 0.0 if self.p_synd is None else ps
        return NoiseModel(p_data=float(pd), p_synd=float(ps), seed=int(self.master_seed))

    def options_for(self, experiment: str) -> ProtocolOptions:
        sectors = {"x": ("x",), "z": ("z",), "both": ("x", "z"), "baseline": ("x",)}[experiment]
        return ProtocolOptions(sectors=sectors, **self.options)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# execution


_CACHE: dict = {}


def _simulator(cfg: RunConfig, ti: int, experiment: str):
    key = (cfg.run_id, ti, experiment == "baseline")
    if key not in _CACHE:
        code, _ = build_code(cfg.code)
        thick = thickening_from_spec(cfg.thickenings[ti])
        bp = BpConfig(**cfg.bp)
        osd = OsdConfig(**cfg.osd)
        if experiment == "baseline":
            if thick.meta.get("family") != "repetition":
                raise ConfigError("baseline experiment requires repetition thickenings")
            _CACHE[key] = RepeatedMeasurementBaseline(code, thick.n, bp, osd)
        else:
            _CACHE[key] = ProtocolSimulator(code, thick, bp, osd)
    return _CACHE[key]


def _run_chunk(args) -> tuple[tuple, PointStats, float]:
    cfg_dict, experiment, ti, pi, start, stop = args
    cfg = RunConfig.from_dict(cfg_dict)
    t0 = time.perf_counter()
    sim = _simulator(cfg, ti, experiment)
    p = float(cfg.grid[pi])
    noise = cfg.noise_for(experiment, p)
    point = ti * len(cfg.grid) + pi
    trials = range(start, stop)
    if experiment == "baseline":
        st = sim.run_point(noise, trials, point, cfg.options.get("fresh_boundary_x", True))
    else:
        st = sim.run_point(noise, trials, point, cfg.options_for(experiment))
    return (experiment, ti, pi), st, time.perf_counter() - t0


@dataclass
class ResultRow:
    run_id: str
    code_id: str
    thickening: str
    experiment: str
    p: float
    trials: int
    failures_x: int
    failures_z: int
    failures: int
    flagged: int
    wall_time: float

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def stderr(self) -> float:
        r = self.rate
        return float(np.sqrt(r * (1 - r) / self.trials))

    def as_csv(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION, "run_id": self.run_id, "code_id": self.code_id,
            "thickening": self.thickening, "experiment": self.experiment, "p": repr(float(self.p)),
            "trials": self.trials, "failures_x": self.failures_x, "failures_z": self.failures_z,
            "failures": self.failures, "rate": repr(self.rate), "stderr": repr(self.stderr),
            "flagged": self.flagged, "wall_time": f"{self.wall_time:.3f}",
        }


def simulate(cfg: RunConfig, workers: int | None = None, chunk: int = 2000) -> list[ResultRow]:
    """Run every (experiment, thickening, p) point; rows come back in canonical order."""
    workers = workers or cfg.workers or default_workers()
    _, code_id = build_code(cfg.code)
    labels = [thickening_label(thickening_from_spec(t)) for t in cfg.thickenings]
    cfg_dict = cfg.to_dict()
    tasks = []
    for experiment in cfg.experiments:
        for ti in range(len(cfg.thickenings)):
            for pi in range(len(cfg.grid)):
                for start in range(0, cfg.trials, chunk):
                    tasks.append((cfg_dict, experiment, ti, pi, start, min(cfg.trials, start + chunk)))
    agg: dict = {}
    wall: dict = {}
    if workers == 1:
        results = map(_run_chunk, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_run_chunk, tasks)
    for key, st, dt in results:
        agg.setdefault(key, PointStats()).add(st)
        wall[key] = wall.get(key, 0.0) + dt
        log.info("point %s: %d/%d trials done", key, agg[key].trials, cfg.trials)
    if workers != 1:
        pool.shutdown()
    rows = []
    for experiment in cfg.experiments:
        for ti in range(len(cfg.thickenings)):
            for pi, p in enumerate(cfg.grid):
                st = agg[(experiment, ti, pi)]
                fails = st.failures_any
                rows.append(ResultRow(cfg.run_id, code_id, labels[ti], experiment, float(p), st.trials,
                                      st.failures_x, st.failures_z, fails, st.flagged,
                                      wall[(experiment, ti, pi)]))
    return rows


def write_results(rows: list[ResultRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r.as_csv())
    return path


def read_results(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames
    if header != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    for r in rows:
        if int(r["schema_version"]) != SCHEMA_VERSION:
            raise ValueError(f"{path}: unsupported schema version {r['schema_version']}")
    return rows


def write_manifest(cfg: RunConfig, path) -> Path:
    manifest = {
        "library_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "run_id": cfg.run_id,
        "seed_derivation": "numpy default_rng([master_seed, point_index, trial_index, stream_id])",
        "config": cfg.to_dict(),
    }
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def run(cfg: RunConfig, out_dir=None, workers: int | None = None) -> int:
    """Execute ``cfg``; writes results.csv, manifest.json and run.log. Returns an exit status."""
    out = Path(out_dir or cfg.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    try:
        write_manifest(cfg, out / "manifest.json")
        if cfg.command == "simulate":
            rows = simulate(cfg, workers)
            write_results(rows, out / "results.csv")
            log.info("wrote %d rows", len(rows))
        else:
            from hgpprep.cli import verify_bounds_report

            code, _ = build_code(cfg.code)
            text = verify_bounds_report(code, cfg.thickenings[0] if cfg.thickenings else None)
            (out / "verify_bounds.txt").write_text(text)
        return 0
    finally:
        log.removeHandler(handler)
        handler.close()


# ---------------------------------------------------------------------------
# plot data


def emit_plot_data(results_csv, out_csv, grouping: str = "thickening") -> int:
    """Long-format series keyed by (code, thickening, experiment), sorted by p.

    ``grouping="code"`` keys series by (experiment, thickening, code) so
    curves of different code sizes sit together. Returns the row count.
    """
    rows = read_results(results_csv)
    if not rows:
        log.warning("%s has no result rows; writing an empty series file", results_csv)
    if grouping == "thickening":
        key = lambda r: (r["code_id"], r["experiment"], r["thickening"])  # noqa: E731
    elif grouping == "code":
        key = lambda r: (r["experiment"], r["thickening"], r["code_id"])  # noqa: E731
    else:
        raise ValueError(f"grouping must be 'thickening' or 'code', got {grouping!r}")
    rows.sort(key=lambda r: (key(r), float(r["p"])))
    cols = ["series", "code_id", "thickening", "experiment", "p", "rate", "stderr", "trials"]
    with Path(out_csv).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            series = "|".join(key(r))
            w.writerow({"series": series, **{c: r[c] for c in cols[1:]}})
    return len(rows)
