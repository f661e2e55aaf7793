"""Code bundles: a directory of alist matrices plus metadata.

Layout::

    HX.alist HZ.alist [MZ.alist] [LX.alist LZ.alist]
    [H1.alist H2.alist]        classical factors of an HGP code
    [thickening.alist]         oriented classical code used for thickening
    bundle.json                names, parameters, orientation
    manifest.txt               human-readable summary and index tables
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from hgpprep.alist import read_alist, write_alist
from hgpprep.codes import CausalOrientation, ClassicalCode, CssCode, ThickenedLayout, thicken

BUNDLE_VERSION = 1


def _orientation_json(o: CausalOrientation | None):
    return None if o is None else {k: list(map(list, v)) if k == "targets" else list(v) for k, v in asdict(o).items()}


def _orientation_from(d) -> CausalOrientation | None:
    if d is None:
        return None
    return CausalOrientation(
        incoming=tuple(d["incoming"]),
        source=tuple(d["source"]),
        targets=tuple(tuple(t) for t in d["targets"]),
        endpoints=tuple(d["endpoints"]),
        schedule=tuple(d["schedule"]),
    )


def _classical_json(c: ClassicalCode) -> dict:
    return {
        "name": c.name,
        "n": c.n,
        "k": c.k,
        "d": None if c.d is None else (None if np.isinf(c.d) else int(c.d)),
        "d_exact": c.d_exact,
        "seed": c.seed,
        "meta": c.meta,
        "orientation": _orientation_json(c.orientation),
    }


def write_bundle(path, code: CssCode, factors: tuple[ClassicalCode, ClassicalCode] | None = None,
                 thickening: ClassicalCode | None = None, extra: dict | None = None) -> Path:
    """Write ``code`` (the base code) and optional factors and thickening to ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    write_alist(out / "HX.alist", code.HX)
    write_alist(out / "HZ.alist", code.HZ)
    for name in ("MZ", "LX", "LZ"):
        M = getattr(code, name)
        if M is not None and M.shape[0]:
            write_alist(out / f"{name}.alist", M)
    meta = {
        "version": BUNDLE_VERSION,
        "name": code.name,
        "n": code.n,
        "k": code.k,
        "meta": code.meta,
        "factors": None,
        "thickening": None,
    }
    if factors is not None:
        write_alist(out / "H1.alist", factors[0].H)
        write_alist(out / "H2.alist", factors[1].H)
        meta["factors"] = [_classical_json(f) for f in factors]
    if thickening is not None:
        write_alist(out / "thickening.alist", thickening.H)
        meta["thickening"] = _classical_json(thickening)
    if extra:
        meta["extra"] = extra
    (out / "bundle.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    lines = [f"code {code.name}", f"[[n={code.n}, k={code.k}]]  mX={code.HX.shape[0]}  mZ={code.HZ.shape[0]}"]
    if factors is not None:
        for i, f in enumerate(factors, 1):
            lines.append(f"factor H{i}: {f!r}")
    if thickening is not None:
        thick, layout = thicken(code, thickening)
        lines.append(f"thickening {thickening.name}: [[{thick.n}, {thick.k}]] "
                     f"mX={thick.HX.shape[0]} mZ={thick.HZ.shape[0]} metachecks={thick.MZ.shape[0]}")
        lines.append(f"endpoints (unmeasured sheets): {list(layout.endpoints)}")
        lines.append(f"schedule: {list(layout.orientation.schedule)}")
        lines.append("qubit table: index kind(0=sheet,1=intermediate) classical_index base_index")
        lines += [" ".join(map(str, row)) for row in layout.qubit_table()]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")
    return out


def read_bundle(path) -> tuple[CssCode, dict]:
    """Return the base code and a dict with ``factors``/``thickening`` ClassicalCodes (or None)."""
    src = Path(path)
    if not (src / "bundle.json").exists():
        raise FileNotFoundError(f"{src} is not a code bundle (bundle.json missing)")
    meta = json.loads((src / "bundle.json").read_text())
    if meta.get("version") != BUNDLE_VERSION:
        raise ValueError(f"unsupported bundle version {meta.get('version')}")

    def opt(name):
        f = src / f"{name}.alist"
        return read_alist(f) if f.exists() else None

    code = CssCode(read_alist(src / "HX.alist"), read_alist(src / "HZ.alist"), MZ=opt("MZ"),
                   LX=opt("LX"), LZ=opt("LZ"), name=meta["name"], meta=meta.get("meta", {}))
    info = {"factors": None, "thickening": None, "meta": meta}

    def classical(H, j):
        return ClassicalCode(H, name=j["name"], d=j["d"] if j["d"] is not None else None,
                             d_exact=j["d_exact"], seed=j["seed"], meta=j["meta"],
                             orientation=_orientation_from(j["orientation"]))

    if meta.get("factors"):
        info["factors"] = (classical(read_alist(src / "H1.alist"), meta["factors"][0]),
                           classical(read_alist(src / "H2.alist"), meta["factors"][1]))
    if meta.get("thickening"):
        info["thickening"] = classical(read_alist(src / "thickening.alist"), meta["thickening"])
    return code, info


def thickened_from_bundle(path) -> tuple[CssCode, CssCode, ThickenedLayout]:
    code, info = read_bundle(path)
    if info["thickening"] is None:
        raise ValueError("bundle has no thickening code")
    thick, layout = thicken(code, info["thickening"])
    return code, thick, layout
