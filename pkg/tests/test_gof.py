import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collide import (EmpiricalSurvival, InvalidParamsError, dkw_epsilon,
                     histogram_csv, ks_against, ks_statistic, ks_two_sample,
                     moment, moments_of, stream_split)
from collide.gof import StreamPool, freedman_diaconis_edges

SEED = 314159


# ------------------------------------------------------------- streams

def test_stream_split_reproducible():
    a = stream_split(SEED, 5).random(100)
    b = stream_split(SEED, 5).random(100)
    assert np.array_equal(a, b)


def test_stream_split_distinct_indices():
    a = stream_split(SEED, 0).random(8)
    b = stream_split(SEED, 1).random(8)
    assert a[0] != b[0]


def test_stream_split_distinct_seeds():
    a = stream_split(SEED, 3).random(8)
    b = stream_split(SEED + 1, 3).random(8)
    assert not np.array_equal(a, b)


def test_stream_pool_equivalent_to_split():
    pool = StreamPool(SEED)
    for i in (0, 7, 12345, 2 ** 40):
        got = pool.get(i).random(16)
        expect = stream_split(SEED, i).random(16)
        assert np.array_equal(got, expect)


def test_stream_pool_interleaved_reuse():
    pool = StreamPool(SEED)
    first = pool.get(1).random(4)
    pool.get(2).random(4)
    again = pool.get(1).random(4)
    assert np.array_equal(first, again)


# ------------------------------------------------------------- DKW / KS

def test_dkw_closed_form():
    assert dkw_epsilon(20_000, 1e-3) == pytest.approx(
        math.sqrt(math.log(2000.0) / 40_000.0), rel=1e-15)


def test_ks_from_law_passes_fixed_seeds():
    # samples drawn from the law itself pass at delta=1e-3 for 20 seeds
    for i in range(20):
        x = stream_split(SEED, i).exponential(1.0, size=100_000)
        rep = ks_against(x, lambda r: np.exp(-np.asarray(r)), delta=1e-3)
        assert rep.passed, (i, rep.statistic, rep.threshold)


def test_ks_constant_sample_fails():
    x = np.full(1000, 2.0)
    rep = ks_against(x, lambda r: np.exp(-np.asarray(r)), delta=1e-3)
    assert not rep.passed
    assert rep.statistic >= 1 - math.exp(-2) - 1e-3


def test_ks_rayleigh_vs_exponential_fails():
    x = stream_split(SEED, 0).rayleigh(scale=1.0, size=10_000)
    # mean-matched exponential: still ~0.06 apart in sup norm
    mean = math.sqrt(math.pi / 2)
    rep = ks_against(x, lambda r: np.exp(-np.asarray(r) / mean), delta=1e-3)
    assert not rep.passed


@given(st.floats(min_value=0.1, max_value=50.0))
@settings(max_examples=25, deadline=None)
def test_ks_invariant_under_rescaling(scale):
    x = stream_split(SEED, 9).exponential(1.0, size=2000)
    base = ks_statistic(x, lambda r: np.exp(-np.asarray(r)))
    scaled = ks_statistic(x * scale, lambda r: np.exp(-np.asarray(r) / scale))
    assert scaled == pytest.approx(base, abs=1e-12)


def test_ks_requires_enough_data():
    with pytest.raises(InvalidParamsError):
        ks_against(np.ones(50), lambda r: np.exp(-np.asarray(r)))
    with pytest.raises(InvalidParamsError):
        ks_against(np.array([]), lambda r: np.exp(-np.asarray(r)))


def test_ks_report_json(tmp_path):
    x = stream_split(SEED, 1).exponential(1.0, size=1000)
    rep = ks_against(x, lambda r: np.exp(-np.asarray(r)), allowance=0.01)
    p = tmp_path / "ks.json"
    rep.save_json(p)
    import json
    obj = json.loads(p.read_text())
    assert set(obj) >= {"statistic", "n", "delta", "dkw_epsilon", "allowance",
                        "passed", "threshold"}
    assert obj["threshold"] == pytest.approx(obj["dkw_epsilon"] + 0.01)


def test_ks_two_sample_same_law_passes():
    a = stream_split(SEED, 2).exponential(1.0, size=30_000)
    b = stream_split(SEED, 3).exponential(1.0, size=30_000)
    assert ks_two_sample(a, b).passed


def test_ks_two_sample_different_laws_fail():
    a = stream_split(SEED, 2).exponential(1.0, size=30_000)
    b = stream_split(SEED, 3).rayleigh(scale=1.0, size=30_000)
    assert not ks_two_sample(a, b).passed


# ------------------------------------------------------------- empirical

def test_empirical_survival_at_zero():
    s = EmpiricalSurvival.from_sample([0.5, 1.2, 3.0])
    assert s(0.0) == 1.0
    assert s(3.0) == 0.0
    assert s(1.0) == pytest.approx(2 / 3)


# ------------------------------------------------------------- moments

def test_moments_point_sample():
    rep = moments_of(np.full(10, 4.0), k=2)
    assert rep.variance == 0.0
    assert rep.mean == 4.0


def test_moments_uniform_two_values():
    x = np.array([1.0, 2.0] * 5000)
    rep = moments_of(x, k=1)
    assert rep.mean == pytest.approx(1.5)
    assert rep.se_mean == pytest.approx(0.5 / math.sqrt(x.size), rel=1e-2)


def test_moments_match_law_moment():
    x = stream_split(SEED, 4).rayleigh(scale=math.sqrt(2.0), size=200_000)
    law_mean = moment(lambda r: np.exp(-np.asarray(r) ** 2 / 4), 1)
    rep = moments_of(x, k=2)
    assert abs(rep.mean - law_mean) <= 3 * rep.se_mean
    law_m2 = moment(lambda r: np.exp(-np.asarray(r) ** 2 / 4), 2)
    assert abs(rep.kth_moment - law_m2) <= 3 * rep.se_kth


# ------------------------------------------------------------- histograms

def test_freedman_diaconis_rule():
    x = stream_split(SEED, 5).normal(size=8000)
    edges = freedman_diaconis_edges(x)
    q75, q25 = np.percentile(x, [75, 25])
    width = 2 * (q75 - q25) / 8000 ** (1 / 3)
    assert np.diff(edges)[0] <= width * 1.2


def test_histogram_csv(tmp_path):
    x = stream_split(SEED, 6).exponential(1.0, size=5000)
    p = tmp_path / "h.csv"
    histogram_csv(x, p, header_comment="reproduces: demo",
                  law=lambda r: np.exp(-np.asarray(r)))
    lines = p.read_text().splitlines()
    assert lines[0] == "# reproduces: demo"
    assert lines[1] == "bin_left,bin_right,count,density,law_density"
    counts = [int(ln.split(",")[2]) for ln in lines[2:]]
    assert sum(counts) == 5000
    p2 = tmp_path / "h2.csv"
    histogram_csv(x, p2)
    assert p2.read_text().splitlines()[0] == "bin_left,bin_right,count"
