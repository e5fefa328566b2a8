import math

import numpy as np
import pytest

from collide import (InvalidDistributionError, PaConfig, PathConfig,
                     RankedDistribution, RunawayTrialError,
                     count_monochromatic_edges, generate_pa_multigraph,
                     make_uniform, path_expectation_formula,
                     path_expectation_oracle, sim_pa_collision, sim_path_run,
                     stream_split)
from collide.distributions import AliasSampler
from collide.graphs import default_pa_cap, pa_reference, simple_edges, write_edge_list
from collide import _kernels

SEED = 5150


# ------------------------------------------------------------ PA generator

def test_pa_kernel_matches_reference():
    # kernel and pure-python growth consume one uniform stream identically
    pal = AliasSampler(make_uniform(7).masses)
    for m in (2, 3, 4):
        for trial in range(5):
            rng = stream_split(SEED, trial)
            n_vertices = 60
            u_first = rng.random(2)
            u01 = rng.random((n_vertices - 1) * (m + 2))
            u_all = np.concatenate([u_first, u01])
            edges_ref, colors_ref, hit_ref = pa_reference(
                m, u_all, pal._prob, pal._alias, n_vertices)
            ends = np.empty(2 * m * (n_vertices + 1), dtype=np.int64)
            colors = np.empty(n_vertices + 1, dtype=np.int64)
            idx = int(u_all[0] * pal.n)
            if u_all[1] >= pal._prob[idx]:
                idx = pal._alias[idx]
            colors[1] = idx
            ends[: 2 * m] = 1
            hit, ends_len = _kernels.run_pa_vertices(
                u01, m, pal._prob, pal._alias, 2, n_vertices + 1, ends, colors=colors,
                ends_len=2 * m)
            assert hit == hit_ref
            n_edges = ends_len // 2
            got = [(int(ends[2 * i]), int(ends[2 * i + 1])) for i in range(m, n_edges)]
            assert got == edges_ref[m:len(got) + m]
            grown = max(v for e in edges_ref for v in e)
            assert np.array_equal(colors[1:grown + 1],
                                  [colors_ref[v] for v in range(1, grown + 1)])


def test_pa_handshake_identity():
    edges = generate_pa_multigraph(2, 10_000, SEED)
    deg = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + (2 if u == v else 1)
        if u != v:
            deg[v] = deg.get(v, 0) + 1
    assert sum(deg.values()) == 2 * len(edges)


def test_pa_attachment_probabilities_sum_to_one():
    # at every step of a 100-vertex growth, the stated attachment law is a
    # probability vector: sum_u d(u)/(M+1) + (d(n)+1)/(M+1) = 1
    m = 3
    ends = [1] * (2 * m)
    rng = stream_split(SEED, 0)
    for v in range(2, 101):
        for _ in range(m):
            M = len(ends)
            deg = {}
            for e in ends:
                deg[e] = deg.get(e, 0) + 1
            total = sum(deg.get(u, 0) for u in range(1, v)) + deg.get(v, 0) + 1
            assert abs(total / (M + 1) - 1.0) <= 1e-12
            j = int(rng.random() * (M + 1))
            vi = v if j == M else ends[j]
            ends.append(v)
            ends.append(vi)


def test_pa_point_palette_collides_at_two():
    # one color: the first simple edge is monochromatic.  Vertex 2 fails to
    # make one only if all its m=2 attachments are self-loops, an event of
    # probability (1/5)(3/7) = 3/35.
    palette = RankedDistribution([1.0])
    cfg = PaConfig(m=2, palette=palette, trials=30_000, max_vertices=50)
    batch = sim_pa_collision(cfg, SEED)
    assert not batch.censored.any()
    p2 = float(np.mean(batch.times == 2))
    expect = 1 - 3 / 35
    assert abs(p2 - expect) <= 4 * math.sqrt(expect * (1 - expect) / batch.trials)
    assert batch.times.min() == 2


def test_pa_censoring_flag():
    palette = make_uniform(10 ** 6)   # collisions far beyond the cap
    cfg = PaConfig(m=2, palette=palette, trials=50, max_vertices=100)
    batch = sim_pa_collision(cfg, SEED)
    assert batch.censored.all()
    assert np.all(batch.times == 100)


def test_pa_stochastic_decrease_in_m():
    palette = make_uniform(500)
    means, ses = [], []
    for m in (2, 3, 4):
        cfg = PaConfig(m=m, palette=palette, trials=4000,
                       max_vertices=default_pa_cap(m, palette))
        b = sim_pa_collision(cfg, SEED)
        kept = b.times[~b.censored]
        means.append(float(np.mean(kept)))
        ses.append(float(np.std(kept)) / math.sqrt(kept.size))
    for i in (1, 2):
        assert means[i] <= means[i - 1] + 3 * math.hypot(ses[i], ses[i - 1])


def test_pa_determinism_threads():
    cfg = PaConfig(m=2, palette=make_uniform(200), trials=4000,
                   max_vertices=4000)
    a = sim_pa_collision(cfg, SEED)
    b = sim_pa_collision(cfg, SEED, threads=3)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.censored, b.censored)


def test_pa_config_validation():
    with pytest.raises(InvalidDistributionError):
        PaConfig(m=1, palette=make_uniform(5), trials=1, max_vertices=10)


def test_edge_list_roundtrip(tmp_path):
    edges = generate_pa_multigraph(2, 20, SEED)
    p = tmp_path / "g.txt"
    write_edge_list(edges, p)
    lines = p.read_text().splitlines()
    assert len(lines) == len(edges)
    assert lines[0] == "1 1"


# ------------------------------------------------------------ edge counting

def test_count_monochromatic_all_same():
    edges = [(1, 2), (2, 3), (1, 3)]
    assert count_monochromatic_edges(edges, {1: 0, 2: 0, 3: 0}) == 3


def test_count_monochromatic_proper():
    edges = [(1, 2), (2, 3)]
    assert count_monochromatic_edges(edges, {1: 0, 2: 1, 3: 0}) == 0


def test_count_monochromatic_triangle_aab():
    edges = [(1, 2), (2, 3), (1, 3)]
    assert count_monochromatic_edges(edges, {1: "a", 2: "a", 3: "b"}) == 1


def test_count_monochromatic_collapses_loops_and_multiedges():
    edges = [(1, 1), (1, 2), (2, 1), (1, 2)]
    assert simple_edges(edges) == {(1, 2)}
    assert count_monochromatic_edges(edges, {1: 0, 2: 0}) == 1


# ------------------------------------------------------------ path runs

def test_path_single_color_deterministic():
    cfg = PathConfig(probs=(1.0,), m=4)
    b = sim_path_run(cfg, 200, SEED)
    assert np.all(b.times == 4)


def test_path_fair_coin_mean():
    cfg = PathConfig(probs=(0.5, 0.5), m=2)
    b = sim_path_run(cfg, 200_000, SEED)
    se = float(np.std(b.times)) / math.sqrt(b.trials)
    assert abs(float(np.mean(b.times)) - 3.0) <= 4 * se


def test_path_runaway_cap():
    cfg = PathConfig(probs=tuple([1e-3] * 1000), m=6)
    with pytest.raises(RunawayTrialError):
        sim_path_run(cfg, 5, SEED, max_draws=50_000)


def test_path_formula_values():
    assert path_expectation_formula(PathConfig(probs=(0.5, 0.5), m=2)) == 3.0
    assert path_expectation_formula(PathConfig(probs=(1.0,), m=5)) == 5.0
    # the formula's own arithmetic at (0.7, 0.3), m=3
    got = path_expectation_formula(PathConfig(probs=(0.7, 0.3), m=3))
    assert got == pytest.approx(4.135135135, rel=1e-9)


def test_path_oracle_uniform_closed_form():
    # uniform c colors: E[T] = (c^m - 1)/(c - 1)
    for c, m in [(2, 2), (2, 3), (3, 3), (4, 2), (5, 4)]:
        cfg = PathConfig(probs=tuple([1.0 / c] * c), m=m)
        expect = (c ** m - 1) / (c - 1)
        assert path_expectation_oracle(cfg) == pytest.approx(expect, rel=1e-12)


def test_path_oracle_single_color():
    assert path_expectation_oracle(PathConfig(probs=(1.0,), m=7)) == pytest.approx(7.0)


def test_path_oracle_nonuniform_frozen():
    # exact absorbing-chain value, confirmed by 2e6-trial Monte Carlo
    got = path_expectation_oracle(PathConfig(probs=(0.7, 0.3), m=3))
    assert got == pytest.approx(5.680350811718603, rel=1e-12)


def test_path_formula_matches_oracle_where_valid():
    # equal probabilities with m=2, and any single-color chain
    for c in (2, 3, 5, 8):
        cfg = PathConfig(probs=tuple([1.0 / c] * c), m=2)
        assert path_expectation_formula(cfg) == pytest.approx(
            path_expectation_oracle(cfg), rel=1e-12)
    for m in (2, 3, 6):
        cfg = PathConfig(probs=(1.0,), m=m)
        assert path_expectation_formula(cfg) == pytest.approx(
            path_expectation_oracle(cfg), rel=1e-12)


@pytest.mark.slow
def test_path_sim_agrees_with_oracle_means():
    # 20 random configurations: simulated mean within 4 sigma of the exact
    # absorbing-chain value (the independent oracle, not the closed formula)
    rng = stream_split(SEED, 123)
    for i in range(20):
        c = int(rng.integers(1, 5))
        m = int(rng.integers(2, 5))
        probs = rng.dirichlet(np.ones(c))
        cfg = PathConfig(probs=tuple(probs / probs.sum()), m=m)
        oracle = path_expectation_oracle(cfg)
        trials = 4000
        b = sim_path_run(cfg, trials, SEED + i)
        se = float(np.std(b.times)) / math.sqrt(trials)
        assert abs(float(np.mean(b.times)) - oracle) <= 4 * se + 1e-9, (c, m)


def test_path_config_validation():
    with pytest.raises(InvalidDistributionError):
        PathConfig(probs=(0.5, 0.5), m=1)
    with pytest.raises(InvalidDistributionError):
        PathConfig(probs=(0.5, 0.4), m=2)
    with pytest.raises(InvalidDistributionError):
        path_expectation_oracle(PathConfig(probs=tuple([1 / 65] * 65), m=2))


def test_pa_max_degree_superlogarithmic_smoke():
    # preferential attachment grows hubs much faster than log(n)
    import collections
    worst = []
    for seed in range(3):
        edges = generate_pa_multigraph(2, 5000, seed)
        deg = collections.Counter()
        for u, v in edges:
            deg[u] += 2 if u == v else 1
            if u != v:
                deg[v] += 1
        worst.append(max(deg.values()))
    assert min(worst) >= 4 * math.log(5000)
