import math

import pytest
from hypothesis import given, settings

from sharedinfo import MEASURES, bivariate_decomposition, get_measure, i_i, i_min, mutual_information
from sharedinfo.measures import (
    coinformation_identity_check,
    conditional_measure,
    i_min_argmin,
    specific_information,
)

import oracles
from strategies import small_dists

LEFTMONO_S = 1 / 3 + (2 / 3) * (0.75 * math.log2(3) - 1)


def test_leftmono_values(leftmono):
    assert i_min(leftmono, ["S"], [["X1"], ["X2"]]) == pytest.approx(LEFTMONO_S, abs=1e-12)
    assert i_min(leftmono, ["S"], [["X1"], ["X2"]]) == pytest.approx(0.459148, abs=1e-6)
    assert i_min(leftmono, ["S", "S2"], [["X1"], ["X2"]]) == pytest.approx(1 / 3, abs=1e-12)


def test_leftmono_conditional_value(leftmono):
    m = get_measure("imin")
    # frozen from averaging the first-form oracle over S
    v = m.conditional(leftmono, ["S2"], [["X1"], ["X2"]], ["S"])
    assert v == pytest.approx(0.1383458330929479, abs=1e-12)
    assert conditional_measure(m, leftmono, ["S2"], [["X1"], ["X2"]], ["S"]) == v


def test_conditional_rejects_overlap(leftmono):
    with pytest.raises(ValueError):
        conditional_measure(i_min, leftmono, ["S2"], [["X1"], ["S"]], ["S"])


def test_copy_example(copy_dist):
    blocks = [["X1"], ["X2"]]
    assert i_min(copy_dist, ["S1", "S2"], blocks) == pytest.approx(1.0, abs=1e-9)
    assert i_i(copy_dist, ["S1", "S2"], blocks) == pytest.approx(1.0, abs=1e-9)
    for name in ("imin", "ii"):
        dec = bivariate_decomposition(MEASURES[name], copy_dist, ["S1", "S2"], "X1", "X2")
        assert dec.as_tuple() == pytest.approx((1.0, 0.0, 0.0, 1.0), abs=1e-9)
        assert dec.total == pytest.approx(2.0, abs=1e-9)


def test_xor_target_measures(xor):
    # either single input is independent of the XOR output
    assert i_min(xor, ["X3"], [["X1"], ["X2"]]) == pytest.approx(0.0, abs=1e-12)
    assert i_min(xor, ["X3"], [["X1", "X2"]]) == pytest.approx(1.0, abs=1e-12)
    dec = bivariate_decomposition(MEASURES["imin"], xor, ["X3"], "X1", "X2")
    assert dec.as_tuple() == pytest.approx((0.0, 0.0, 0.0, 1.0), abs=1e-12)


def test_specific_information_conflicting(conflicting):
    spec = specific_information(conflicting, ["S"], ["X1"])
    assert spec[(0,)] == pytest.approx(spec[(1,)], abs=1e-12)
    assert spec[(0,)] == pytest.approx(1 - 0.9182958340544896, abs=1e-9)


def test_argmin_lowest_index_on_ties(conflicting, leftmono):
    assert set(i_min_argmin(conflicting, ["S"], [["X1"], ["X2"]]).values()) == {0}
    am = i_min_argmin(leftmono, ["S"], [["X1"], ["X2"]])
    assert set(am) == {(0,), (1,)}


def test_overlap_rules(xor, leftmono):
    # full-set target may overlap its blocks
    assert i_min(xor, ["X1", "X2", "X3"], [["X1"]]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        i_min(leftmono, ["S"], [["S"], ["X1"]])
    with pytest.raises(ValueError):
        i_min(leftmono, ["S"], [])
    with pytest.raises(ValueError):
        i_min(leftmono, [], [["X1"]])


def test_get_measure():
    assert get_measure("imin").name == "imin"
    with pytest.raises(ValueError, match="unknown measure"):
        get_measure("nope")


def test_geometric_measures_via_registry(conflicting):
    assert MEASURES["si_kl"](conflicting, ["S"], [["X1"], ["X2"]]) == pytest.approx(0.054469443963673536, abs=1e-8)
    assert MEASURES["si_lr"](conflicting, ["S"], [["X1"], ["X2"]]) == pytest.approx(
        (4 / 6) * math.log2(4 / 3), abs=1e-9
    )


NAMES = ["S", "A", "B"]


@settings(max_examples=150, deadline=None)
@given(small_dists(names=NAMES))
def test_imin_matches_first_form_oracle(d):
    t, names = oracles.table(d)
    for blocks in ([["A"], ["B"]], [["A", "B"]], [["A"]], [["A"], ["A", "B"]]):
        assert i_min(d, ["S"], blocks) == pytest.approx(
            oracles.i_min_first_form(t, names, ["S"], blocks), abs=1e-9
        )


@settings(max_examples=150, deadline=None)
@given(small_dists(names=NAMES))
def test_imin_below_ii_below_each_mi(d):
    blocks = [["A"], ["B"]]
    lo = i_min(d, ["S"], blocks)
    mid = i_i(d, ["S"], blocks)
    assert lo <= mid + 1e-9
    assert mid == pytest.approx(min(mutual_information(d, "S", b) for b in blocks), abs=1e-12)
    assert lo >= -1e-12


@settings(max_examples=100, deadline=None)
@given(small_dists(names=NAMES))
def test_decomposition_identities(d):
    for name in ("imin", "ii"):
        dec = bivariate_decomposition(MEASURES[name], d, ["S"], "A", "B")
        assert dec.consistency_residual < 1e-9
        assert coinformation_identity_check(d, ["S"], "A", "B", dec) < 1e-9
        assert dec.total == pytest.approx(mutual_information(d, "S", ["A", "B"]), abs=1e-9)
