import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collide import (AliasSampler, ColorMix, InvalidDistributionError,
                     RankedDistribution, UrnModelSpec, make_log_atom,
                     make_sqrt_atom, make_uniform, mfold_scaling_of, sampler,
                     scaling_of, spec_scaling, stream_split)


def test_make_uniform_basic():
    d = make_uniform(4)
    assert np.allclose(d.masses, 0.25)
    assert scaling_of(d).s_n == pytest.approx(0.5)


def test_make_uniform_365_scale():
    assert scaling_of(make_uniform(365)).s_n == pytest.approx(1 / math.sqrt(365), abs=1e-12)
    assert scaling_of(make_uniform(365)).s_n == pytest.approx(0.052342, abs=1e-6)


def test_make_uniform_degenerate():
    d = make_uniform(1)
    assert d.masses.tolist() == [1.0]
    assert scaling_of(d).s_n == pytest.approx(1.0)


def test_make_uniform_rejects_zero():
    with pytest.raises(InvalidDistributionError):
        make_uniform(0)


def test_sqrt_atom_values():
    d = make_sqrt_atom(4)
    assert d.masses.tolist() == pytest.approx([0.5, 0.125, 0.125, 0.125, 0.125])
    assert math.fsum(d.masses.tolist()) == pytest.approx(1.0, abs=1e-15)


def test_sqrt_atom_limit_atom():
    # the leading normalized atom tends to 1/sqrt(2)
    prof = scaling_of(make_sqrt_atom(10 ** 4))
    assert prof.psi[0] == pytest.approx(1 / math.sqrt(2), abs=5e-3)


def test_log_atom_values():
    d = make_log_atom(8)
    assert d.masses[0] == pytest.approx(1 / math.log(8), abs=1e-12)
    assert math.fsum(d.masses.tolist()) == pytest.approx(1.0, abs=1e-15)
    prof = scaling_of(make_log_atom(10 ** 6))
    assert prof.psi[0] >= 0.99


def test_constructor_preconditions():
    with pytest.raises(InvalidDistributionError):
        make_sqrt_atom(1)
    with pytest.raises(InvalidDistributionError):
        make_log_atom(2)


def test_ranked_validation():
    with pytest.raises(InvalidDistributionError):
        RankedDistribution([0.2, 0.5, 0.3])     # not sorted
    with pytest.raises(InvalidDistributionError):
        RankedDistribution([0.7, 0.4])          # sums to 1.1
    with pytest.raises(InvalidDistributionError):
        RankedDistribution([1.5, -0.5])


@given(st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=1, max_size=40))
@settings(max_examples=60, deadline=None)
def test_normalized_sorted_masses_always_valid(raw):
    arr = np.sort(np.asarray(raw))[::-1]
    arr = arr / math.fsum(arr.tolist())
    d = RankedDistribution(arr.copy())
    prof = scaling_of(d)
    assert prof.sum_psi_sq == pytest.approx(1.0, rel=1e-10)
    assert np.all(np.diff(d.masses) <= 0)


@pytest.mark.parametrize("n", [1, 10, 1000, 100_000])
def test_uniform_scaling_psi_normalization(n):
    prof = scaling_of(make_uniform(n))
    assert prof.sum_psi_sq == pytest.approx(1.0, rel=1e-10)


def test_mfold_scaling_uniform():
    prof = mfold_scaling_of(make_uniform(100), 2)
    assert prof.s_2m == pytest.approx(100 ** -0.75, rel=1e-12)
    assert (prof.s_2m ** 4) == pytest.approx(float(np.sum(make_uniform(100).masses ** 4)),
                                             rel=1e-10)


def test_sampler_point_mass():
    d = RankedDistribution([1.0])
    rng = stream_split(0, 0)
    assert np.all(sampler(d).draw(rng, 1000) == 0)


def test_sampler_uniform_frequencies():
    rng = stream_split(123, 0)
    draws = sampler(make_uniform(2)).draw(rng, 10 ** 6)
    freq = np.mean(draws == 0)
    assert abs(freq - 0.5) < 0.003


def test_sampler_sqrt_atom_frequency():
    d = make_sqrt_atom(100)
    rng = stream_split(7, 0)
    draws = sampler(d).draw(rng, 10 ** 6)
    assert abs(np.mean(draws == 0) - 0.1) < 0.003


def test_sampler_five_sigma_all_atoms():
    # empirical frequencies of every atom within 5 sigma at 1e6 draws
    masses = np.sort(np.random.default_rng(3).dirichlet(np.ones(50)))[::-1]
    d = RankedDistribution(masses / math.fsum(masses.tolist()))
    n_draws = 10 ** 6
    draws = sampler(d).draw(stream_split(11, 0), n_draws)
    freq = np.bincount(draws, minlength=50) / n_draws
    bound = 5 * np.sqrt(d.masses * (1 - d.masses) / n_draws)
    assert np.all(np.abs(freq - d.masses) <= bound + 1e-9)


def test_alias_rejects_bad_mass():
    with pytest.raises(InvalidDistributionError):
        AliasSampler([0.5, 0.2])
    with pytest.raises(InvalidDistributionError):
        AliasSampler([-0.1, 1.1])


def test_color_mix_validation():
    with pytest.raises(InvalidDistributionError):
        ColorMix(np.array([0.5, 0.5, 0.1]))
    with pytest.raises(InvalidDistributionError):
        ColorMix(np.array([1.0, 0.0]))
    assert ColorMix.uniform(4).q == 4


def test_urn_spec_scaling_identical_rows():
    # any mix over identical rows reduces to s_n^2 = sum p^2
    d = make_uniform(100)
    for mix in [(0.5, 0.5), (0.8, 0.2), (0.3, 0.3, 0.4)]:
        spec = UrnModelSpec.from_shared(mix, d)
        s, psi, phi = spec_scaling(spec)
        assert s == pytest.approx(0.1, rel=1e-12)
        assert np.allclose(psi, d.masses / s)
        assert np.allclose(phi, 1.0, rtol=1e-10)


def test_urn_spec_zero_mass_rows_allowed():
    rows = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
    spec = UrnModelSpec.from_rows((0.5, 0.5), rows)
    assert spec.n_urns == 3
    # s_n^2 = (1/4)^2 + (1/2)^2 + (1/4)^2
    assert spec.s_n ** 2 == pytest.approx(0.375, rel=1e-12)


def test_urn_spec_row_sum_enforced():
    with pytest.raises(InvalidDistributionError):
        UrnModelSpec.from_rows((0.5, 0.5), np.array([[0.6, 0.5], [0.5, 0.5]]))


def test_cross_term_matches_definition():
    rng = np.random.default_rng(5)
    rows = rng.dirichlet(np.ones(6), size=2)
    spec = UrnModelSpec.from_rows((0.7, 0.3), rows)
    w = spec.mix.weights
    psi = spec.psi_per_color
    direct = sum(w[a] * w[b] * float(np.sum(psi[a] * psi[b]))
                 for a in range(2) for b in range(2) if a != b)
    assert spec.cross_term() == pytest.approx(direct, rel=1e-10)


def test_json_roundtrip(tmp_path):
    d = make_sqrt_atom(10)
    p = tmp_path / "d.json"
    d.save_json(p)
    back = RankedDistribution.load_json(p)
    assert back.label == d.label
    assert np.array_equal(back.masses, d.masses)
    obj = json.loads(p.read_text())
    assert set(obj) == {"label", "masses"}


def test_masses_text_roundtrip(tmp_path):
    d = make_uniform(5)
    p = tmp_path / "masses.txt"
    p.write_text("\n".join(repr(float(x)) for x in d.masses) + "\n")
    back = RankedDistribution.load_masses_text(p)
    assert np.array_equal(back.masses, d.masses)
    assert back.label == "masses"
