from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hgpprep import alist
from hgpprep.codes import sample_regular_ldpc

from conftest import REP3


def test_alist_text_layout():
    text = alist.to_alist(REP3)
    lines = text.splitlines()
    assert lines[0].split() == ["3", "2"]
    assert lines[1].split() == ["2", "2"]
    # per-column lists are 1-indexed, zero-padded to the max column weight
    assert lines[4].split() == ["1", "0"]
    assert lines[5].split() == ["1", "2"]
    assert lines[7].split() == ["1", "2"]


def test_coo_text_layout():
    text = alist.to_coo(REP3)
    assert text.splitlines()[0] == "2 3"
    assert "0 0" in text.splitlines()


def test_file_roundtrip(tmp_path):
    H = sample_regular_ldpc(12, 5, 6, seed=3, multi_edges="merge").H
    alist.write_alist(tmp_path / "h.alist", H)
    alist.write_coo(tmp_path / "h.coo", H)
    assert np.array_equal(alist.read_alist(tmp_path / "h.alist"), H)
    assert np.array_equal(alist.read_coo(tmp_path / "h.coo"), H)
    # bit-exact text round trip
    assert alist.to_alist(alist.read_alist(tmp_path / "h.alist")) == (tmp_path / "h.alist").read_text()


@settings(max_examples=80, deadline=None)
@given(st.tuples(st.integers(1, 9), st.integers(1, 9)).flatmap(
    lambda s: arrays(np.uint8, s, elements=st.integers(0, 1))))
def test_roundtrip_random(H):
    assert np.array_equal(alist.from_alist(alist.to_alist(H)), H)
    assert np.array_equal(alist.from_coo(alist.to_coo(H)), H)
