from __future__ import annotations

import json

import numpy as np
import pytest

from hgpprep.bundle import read_bundle, thickened_from_bundle, write_bundle
from hgpprep.codes import hypergraph_product, repetition_code, sample_regular_ldpc, star_code


def test_roundtrip(tmp_path, surface13):
    code, _ = surface13
    r3 = repetition_code(3)
    write_bundle(tmp_path / "b", code, (r3, r3), star_code(3, 2))
    back, info = read_bundle(tmp_path / "b")
    for name in ("HX", "HZ", "LX", "LZ"):
        assert np.array_equal(getattr(back, name), getattr(code, name))
    assert back.name == code.name
    assert np.array_equal(info["factors"][0].H, r3.H)
    thick = info["thickening"]
    assert thick.orientation == star_code(3, 2).orientation
    base, t, layout = thickened_from_bundle(tmp_path / "b")
    assert t.k == 2 and layout.endpoints == (2, 4)


def test_manifest_contents(tmp_path):
    c = sample_regular_ldpc(12, 5, 6, seed=0, multi_edges="merge", require_full_rank=True)
    code, _ = hypergraph_product(c, c)
    write_bundle(tmp_path, code, (c, c), repetition_code(3))
    text = (tmp_path / "manifest.txt").read_text()
    assert "[[n=244, k=4]]" in text
    assert "qubit table" in text
    meta = json.loads((tmp_path / "bundle.json").read_text())
    assert meta["factors"][0]["seed"] == 0
    assert meta["factors"][0]["meta"]["rank"] == 10


def test_read_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_bundle(tmp_path)


def test_no_thickening(tmp_path, surface13):
    write_bundle(tmp_path, surface13[0])
    with pytest.raises(ValueError):
        thickened_from_bundle(tmp_path)
