"""Command-line front end: ``hgpprep <command> ...`` (or ``python -m hgpprep``)."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from hgpprep import analysis, gf2
from hgpprep.alist import read_alist
from hgpprep.bundle import read_bundle, write_bundle
from hgpprep.codes import hypergraph_product, thicken
from hgpprep.decoders import BpConfig, BpOsdDecoder, OsdConfig
from hgpprep.gf2 import BudgetExceeded
from hgpprep.protocol import lemma1_suite, lemma3_suite, theorem_suite
from hgpprep.runner import (
    ConfigError,
    RunConfig,
    classical_from_spec,
    default_workers,
    emit_plot_data,
    run,
    thickening_from_spec,
)


def parse_f(spec: str):
    """``linear:A`` (A x), ``power:A,K`` (A x^K) or ``table:f0,f1,...``."""
    kind, _, rest = spec.partition(":")
    if kind == "linear":
        a = float(rest or 1)
        return lambda x: a * x
    if kind == "power":
        a, k = (float(v) for v in rest.split(","))
        return lambda x: a * x**k
    if kind == "table":
        return [float(v) for v in rest.split(",")]
    raise ValueError(f"unknown f spec {spec!r}")


def _bits(v) -> str:
    return "".join(str(int(b)) for b in v)


def _read_bits(path) -> np.ndarray:
    text = "".join(Path(path).read_text().split())
    if text and set(text) - {"0", "1"}:
        raise ValueError(f"{path}: syndrome must be a 0/1 bitstring")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


# ---------------------------------------------------------------------------
# commands


def cmd_construct(args) -> int:
    spec = args.classical
    if args.family != "hgp":
        raise ConfigError(f"--family: only 'hgp' is supported, got {args.family!r}")
    if args.seed is not None and spec.startswith("ldpc") and "seed=" not in spec:
        spec += f",seed={args.seed}"
    if args.find:
        target = {k: int(v) for k, v in (x.split("=") for x in args.find.split(","))}
        c1 = find_seed(spec, target, args.max_seeds)
    else:
        c1 = classical_from_spec(spec)
    c2 = classical_from_spec(args.classical2) if args.classical2 else c1
    for c in {id(c1): c1, id(c2): c2}.values():
        if c.d is None and c.k <= 20:
            d = analysis.distance_exhaustive(c.H)
            object.__setattr__(c, "d", d.value)
    code, _ = hypergraph_product(c1, c2)
    code = code.with_logicals()
    thick = thickening_from_spec(args.thicken) if args.thicken else None
    out = write_bundle(args.out, code, (c1, c2), thick)
    print(f"wrote {out}: {code!r}; factors {c1!r} {c2!r}" + (f"; thickening {thick.name}" if thick else ""))
    return 0


def find_seed(spec: str, target: dict, max_seeds: int):
    """First seed (counting up from the seed in ``spec``) whose code has the requested k and d."""
    base = dict(x.split("=") for x in spec.partition(":")[2].split(",") if x)
    start = int(base.pop("seed", 0))
    for seed in range(start, start + max_seeds):
        kv = ",".join(f"{k}={v}" for k, v in {**base, "seed": seed}.items())
        c = classical_from_spec(f"ldpc:{kv}")
        if "k" in target and c.k != target["k"]:
            continue
        d = analysis.distance_exhaustive(c.H)
        if "d" in target and d.value != target["d"]:
            continue
        object.__setattr__(c, "d", d.value)
        return c
    raise RuntimeError(f"no seed in [{start}, {start + max_seeds}) matches {target}")


def _check_matrices(args):
    code, info = read_bundle(args.bundle)
    if args.thickened:
        if info["thickening"] is None:
            raise ConfigError("--thickened: bundle has no thickening code")
        code, _ = thicken(code, info["thickening"])
    H, S = (code.HX, code.HZ) if args.matrix == "X" else (code.HZ, code.HX)
    return code, H, S


def cmd_check(args) -> int:
    code, H, S = _check_matrices(args)
    rows = []
    what = args.what
    if what == "distance":
        dx, dz = analysis.css_distance_exhaustive(code, cap=args.cap)
        lines = [f"d_X = {dx.value} ({'exact' if dx.exact else 'lower bound'})",
                 f"d_Z = {dz.value} ({'exact' if dz.exact else 'lower bound'})"]
        rows = [{"quantity": "d_X", "value": dx.value, "exact": dx.exact,
                 "witness": "" if dx.witness is None else _bits(dx.witness)},
                {"quantity": "d_Z", "value": dz.value, "exact": dz.exact,
                 "witness": "" if dz.witness is None else _bits(dz.witness)}]
    elif what in ("confinement", "soundness"):
        f = parse_f(args.f)
        fn = analysis.confinement_check if what == "confinement" else analysis.soundness_check
        rep = fn(H, S, args.t, f)
        lines = [rep.summary(), *rep.notes]
        rows = [{"quantity": what, "value": rep.worst_ratio, "exact": True,
                 "witness": "" if rep.worst_case is None else _bits(rep.worst_case)}]
    elif what == "homology":
        dims = analysis.homology_dims(analysis.css_chain(code))
        lines = [f"homology dimensions: {dims}"]
        rows = [{"quantity": f"H_{i}", "value": v, "exact": True, "witness": ""} for i, v in enumerate(dims)]
    elif what == "single-shot":
        if code.MZ is None:
            raise ConfigError("single-shot distance needs metachecks: pass --thickened")
        r = analysis.single_shot_distance(code.HZ, code.MZ, cap=args.cap)
        lines = [f"d_ss = {r.value} ({'exact' if r.exact else 'lower bound'})"]
        rows = [{"quantity": "d_ss", "value": r.value, "exact": r.exact,
                 "witness": "" if r.witness is None else _bits(r.witness)}]
    else:
        raise ConfigError(f"--what: unknown checker {what!r}")
    print("\n".join(lines))
    out = Path(args.csv) if args.csv else Path(args.bundle) / f"check_{what}.csv"
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["quantity", "value", "exact", "witness"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return 0


def cmd_decode(args) -> int:
    H = read_alist(args.matrix)
    s = _read_bits(args.syndrome)
    if s.shape[0] != H.shape[0]:
        raise ConfigError(f"--syndrome: length {s.shape[0]} does not match {H.shape[0]} checks")
    dec = BpOsdDecoder(H, args.prior, BpConfig(max_iters=args.bp_iters), OsdConfig(depth=args.osd_depth))
    res = dec.decode(s)
    print(_bits(res.correction))
    print(json.dumps({"iterations": int(res.iterations), "converged": bool(res.converged),
                      "osd_used": bool(res.osd_used), "weight": int(res.correction.sum())}))
    return 0


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_json(args.config)
    workers = args.workers or cfg.workers or default_workers()
    status = run(cfg, args.out, workers)
    print(f"results in {Path(args.out or cfg.output or '.') / 'results.csv'}")
    return status


def verify_bounds_report(code, thickening_spec=None, t: int | None = None, extra_weight: int | None = 2,
                         extra_samples: int | None = None) -> str:
    dx, dz = analysis.css_distance_exhaustive(code, cap=12)
    d = int(min(dx.value, dz.value))
    thick_c = thickening_from_spec(thickening_spec) if thickening_spec else thickening_from_spec(f"rep:{d}")
    thick, layout = thicken(code, thick_c)
    t = d - 1 if t is None else t
    s1 = lemma1_suite(thick, d, extra_weight=extra_weight, extra_samples=extra_samples)
    s2 = lemma3_suite(code, thick, layout, t)
    th = theorem_suite(s1, s2, d, t)
    head = f"code {code.name} [[{code.n},{code.k},{d}]] thickened by {thick_c.name}: [[{thick.n},{thick.k}]]"
    return "\n".join([head, s1.summary(), s2.summary(), th.summary()]) + "\n"


def cmd_verify_bounds(args) -> int:
    code, info = read_bundle(args.bundle)
    spec = args.thicken
    if spec is None and info["thickening"] is not None:
        spec = _spec_of(info["thickening"])
    text = verify_bounds_report(code, spec, args.t, args.extra_weight or None, args.samples)
    print(text, end="")
    (Path(args.bundle) / "verify_bounds.txt").write_text(text)
    return 0 if "FAIL" not in text else 1


def _spec_of(c) -> str:
    m = c.meta
    if m.get("family") == "star":
        return f"star:{m['z']},{m['branch_len']}"
    return f"rep:{c.n}"


def cmd_plot_data(args) -> int:
    n = emit_plot_data(args.results, args.out, args.grouping)
    if n == 0:
        print("warning: no result rows", file=sys.stderr)
    print(f"wrote {n} rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hgpprep", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build an HGP code bundle")
    c.add_argument("--family", default="hgp")
    c.add_argument("--classical", required=True, help="e.g. ldpc:n=18,wc=5,wr=6 or rep:3")
    c.add_argument("--classical2", help="second factor (default: same as --classical)")
    c.add_argument("--seed", type=int)
    c.add_argument("--find", help="seed search target, e.g. k=3,d=9")
    c.add_argument("--max-seeds", type=int, default=5000)
    c.add_argument("--thicken", help="thickening spec stored with the bundle, e.g. rep:3 or star:3,2")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("check", help="run an exhaustive property checker on a bundle")
    k.add_argument("--bundle", required=True)
    k.add_argument("--what", required=True,
                   choices=["distance", "confinement", "soundness", "homology", "single-shot"])
    k.add_argument("--t", type=int, default=2)
    k.add_argument("--f", default="linear:1", help="linear:A | power:A,K | table:f0,f1,...")
    k.add_argument("--matrix", choices=["X", "Z"], default="X", help="check matrix under test")
    k.add_argument("--thickened", action="store_true", help="apply the bundle's thickening first")
    k.add_argument("--cap", type=int, default=12, help="weight cap for ball searches")
    k.add_argument("--csv", help="worst-case CSV path (default: BUNDLE/check_WHAT.csv)")
    k.set_defaults(func=cmd_check)

    d = sub.add_parser("decode", help="BP+OSD decode one syndrome")
    d.add_argument("--matrix", required=True)
    d.add_argument("--syndrome", required=True)
    d.add_argument("--bp-iters", type=int, default=20)
    d.add_argument("--osd-depth", type=int, default=20)
    d.add_argument("--prior", type=float, default=0.01)
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="Monte Carlo run from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify-bounds", help="exhaustive residual-bound suites")
    v.add_argument("--bundle", required=True)
    v.add_argument("--thicken")
    v.add_argument("--t", type=int)
    v.add_argument("--extra-weight", type=int, default=2)
    v.add_argument("--samples", type=int, help="sample the extra weight instead of enumerating it")
    v.set_defaults(func=cmd_verify_bounds)

    g = sub.add_parser("plot-data", help="long-format rate-vs-p series from results.csv")
    g.add_argument("--results", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--grouping", choices=["thickening", "code"], default="thickening")
    g.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"error: {exc}. Lower the weight cap or use a smaller instance.", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
