from __future__ import annotations

import numpy as np
import pytest

from hgpprep import analysis, gf2
from hgpprep.codes import ClassicalCode, hypergraph_product, repetition_code, sample_regular_ldpc, thicken
from hgpprep.gf2 import BudgetExceeded


def test_distance_examples():
    assert analysis.distance_exhaustive(repetition_code(5).H).value == 5
    assert analysis.distance_exhaustive(gf2.identity(4)).value == np.inf


def test_distance_n18_desk_instance():
    c = sample_regular_ldpc(18, 5, 6, seed=59, multi_edges="merge", require_full_rank=True)
    assert c.k == 3 and c.rank == 15
    d = analysis.distance_exhaustive(c.H)
    assert d.value == 9 and d.exact
    assert gf2.weight(d.witness) == 9 and not gf2.matvec(c.H, d.witness).any()


def test_distance_cap_gives_certified_lower_bound():
    H = sample_regular_ldpc(40, 3, 6, seed=0).H
    d = analysis.distance_exhaustive(H, weight_cap=2, budget=1e5)
    assert d.value == 3 and not d.exact and d.witness is None


def test_distance_without_cap_over_budget():
    with pytest.raises(BudgetExceeded):
        analysis.distance_exhaustive(np.zeros((1, 40), np.uint8), budget=1e3)


def test_css_distance_k0():
    code, _ = hypergraph_product(repetition_code(3).transpose(), repetition_code(3))
    dx, dz = analysis.css_distance_exhaustive(code)
    assert dx.value == dz.value == np.inf


@pytest.mark.parametrize("ell,expected", [(2, (6, 3)), (3, (9, 3))])
def test_css_distance_thickened(surface13, ell, expected):
    code, _ = surface13
    thick, _ = thicken(code, repetition_code(ell))
    dx, dz = analysis.css_distance_exhaustive(thick, cap=9)
    assert (dx.value, dz.value) == expected and dx.exact and dz.exact


@pytest.mark.parametrize("a,b", [(3, 3), (3, 4), (2, 5)])
def test_hgp_distance_formula(a, b):
    c1, c2 = repetition_code(a), repetition_code(b)
    code, _ = hypergraph_product(c1, c2)
    dx, dz = analysis.css_distance_exhaustive(code)
    assert min(dx.value, dz.value) == min(a, b)


def test_hgp_logical_witness_weight():
    c = sample_regular_ldpc(18, 5, 6, seed=59, multi_edges="merge", require_full_rank=True)
    code, layout = hypergraph_product(c, c)
    w = analysis.distance_exhaustive(c.H).witness
    L = analysis.hgp_logical_witness(code, layout, w)
    assert gf2.weight(L) == 9
    assert not gf2.matvec(code.HZ, L).any()
    assert not gf2.in_rowspace(code.HX, L)


def test_confinement_single_errors():
    H = sample_regular_ldpc(12, 3, 6, seed=1).H
    r = analysis.confinement_check(H, np.zeros((0, 12), np.uint8), 1, lambda x: x)
    assert r.passed


def test_confinement_surface(surface13):
    code, _ = surface13
    r = analysis.confinement_check(code.HX, code.HZ, 2, lambda x: x)
    assert not r.passed and r.worst_ratio == 2 and r.violations == 6
    bad = r.worst_case
    assert gf2.min_weight_coset_rep(bad, code.HZ).weight > gf2.weight(gf2.matvec(code.HX, bad))
    assert analysis.confinement_check(code.HX, code.HZ, 2, lambda x: 2 * x).passed
    prof = analysis.confinement_profile(code.HX, code.HZ, 2)
    assert prof[:3].tolist() == [0, 2, 2]


def test_confinement_zero_matrix():
    r = analysis.confinement_check(np.zeros((2, 4), np.uint8), np.zeros((0, 4), np.uint8), 1, lambda x: 10 * x)
    assert not r.passed


def test_confinement_tabulated_f(surface13):
    code, _ = surface13
    assert analysis.confinement_check(code.HX, code.HZ, 2, [0, 2, 2, 2, 2, 2, 2, 2]).passed


def test_soundness_t0(surface13):
    code, _ = surface13
    assert analysis.soundness_check(code.HZ, code.HX, 0, lambda x: 0).passed


def test_soundness_thickened(thick13):
    _, thick, _ = thick13
    r = analysis.soundness_check(thick.HZ, thick.HX, 3, lambda x: x**3 / 4)
    assert r.passed and r.redundant


def test_soundness_flags_missing_redundancy(surface13):
    code, _ = surface13
    r = analysis.soundness_check(code.HZ, code.HX, 2, lambda x: 2 * x)
    assert not r.redundant
    assert any("full row rank" in n for n in r.notes)


def test_soundness_implies_confinement(surface13):
    code, _ = surface13
    thick, _ = thicken(code, repetition_code(2))
    H, S = thick.HZ, thick.HX
    f = lambda x: x**3 / 4  # noqa: E731
    delta = int(H.sum(axis=0).max())
    t = delta
    assert analysis.soundness_check(H, S, t, f).passed
    assert analysis.confinement_check(H, S, t // delta, f).passed


def test_homology_surface(surface13):
    code, _ = surface13
    assert analysis.homology_dims(analysis.css_chain(code)) == [0, 1, 0]


def test_homology_thickened(thick13):
    _, thick, _ = thick13
    assert analysis.homology_dims(analysis.css_chain(thick)) == [0, 1, 0, 0]


def test_homology_zero_maps():
    chain = [np.zeros((3, 2), np.uint8), np.zeros((4, 3), np.uint8)]
    assert analysis.homology_dims(chain) == [2, 3, 4]


def test_homology_rejects_non_chain():
    with pytest.raises(ValueError):
        analysis.homology_dims([gf2.identity(2), gf2.identity(2)])


def test_homology_matches_k_on_ensemble():
    for seed in range(3):
        c = sample_regular_ldpc(12, 5, 6, seed=seed, multi_edges="merge")
        code, _ = hypergraph_product(c, c)
        assert analysis.homology_dims(analysis.css_chain(code))[1] == code.k


def test_single_shot_distance(thick13, surface13):
    _, thick, _ = thick13
    assert analysis.single_shot_distance(thick.HZ, thick.MZ).value == np.inf
    r = analysis.single_shot_distance(thick.HZ, thick.MZ[1:], cap=6)
    assert r.value < np.inf and r.witness is not None
    assert not gf2.in_image(thick.HZ, r.witness)
    code, _ = surface13
    empty = np.zeros((0, code.HZ.shape[0]), np.uint8)
    assert analysis.single_shot_distance(code.HZ, empty).value == np.inf


def test_single_shot_distance_empty_metachecks_redundant():
    # cyclic repetition checks are dependent, so H_Z has redundant rows
    ring = ClassicalCode(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], np.uint8))
    code, _ = hypergraph_product(ring, ring)
    assert gf2.rank(code.HZ) < code.HZ.shape[0]
    empty = np.zeros((0, code.HZ.shape[0]), np.uint8)
    r = analysis.single_shot_distance(code.HZ, empty, cap=3)
    assert r.value < np.inf
