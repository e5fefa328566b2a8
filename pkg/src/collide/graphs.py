"""Sequential-coloring collision times on growing graphs: the
preferential-attachment model PA(m) and runs on the infinite path, plus the
exact path-expectation formula and its independent absorbing-chain oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distributions import AliasSampler, RankedDistribution
from .errors import InvalidDistributionError, NumericFailureError, RunawayTrialError
from .gof import StreamPool
from .urn import _BLOCK_CAP, DEFAULT_TRIAL_CAP, TrialBatch, run_chunked


@dataclass(frozen=True)
class PaConfig:
    """Preferential-attachment run configuration.

    ``m`` edges per new vertex (the model is defined for m >= 2); vertices
    are colored on arrival from ``palette``.  Trials reaching ``max_vertices``
    without a monochromatic simple edge are flagged censored.
    """

    m: int
    palette: RankedDistribution
    trials: int
    max_vertices: int

    def __post_init__(self):
        if self.m < 2:
            raise InvalidDistributionError("PA(m) requires m >= 2")
        if self.trials < 1 or self.max_vertices < 2:
            raise InvalidDistributionError("trials >= 1 and max_vertices >= 2 required")


def default_pa_cap(m: int, palette: RankedDistribution, mult: float = 20.0) -> int:
    """Vertex cap at ``mult`` times the asymptotic mean collision time 1/(m sum p^2)."""
    sum_p2 = float(np.sum(palette.masses ** 2))
    return max(64, int(mult / (m * sum_p2)) + 8)


def sim_pa_collision(cfg: PaConfig, seed: int, *, threads: int = 1) -> TrialBatch:
    """Collision time of sequential coloring on growing PA(m) multigraphs.

    The graph starts as one vertex with m self-loops; each new vertex n adds
    m edges one at a time, attaching to u with probability d(u)/(M+1) and to
    itself with (d(n)+1)/(M+1).  The collision time is the first vertex whose
    arrival puts a monochromatic edge in the underlying simple graph
    (self-loops never count, multi-edges collapse); only edges incident to
    the newest vertex can create one, so each step costs O(m).
    """
    pal = AliasSampler(cfg.palette.masses)
    prob, alias = pal._prob, pal._alias
    m, vmax = cfg.m, cfg.max_vertices
    v_block0 = min(vmax, default_pa_cap(m, cfg.palette, mult=4.0))

    def chunk(t0, t1):
        pool = StreamPool(seed)
        ends = np.empty(2 * m * (vmax + 1), dtype=np.int64)
        colors = np.empty(vmax + 1, dtype=np.int64)
        out = np.empty(t1 - t0, dtype=np.int64)
        cens = np.zeros(t1 - t0, dtype=bool)
        for t in range(t0, t1):
            rng = pool.get(t)
            u = rng.random(2)
            idx = int(u[0] * pal.n)
            if u[1] >= prob[idx]:
                idx = alias[idx]
            colors[1] = idx
            ends[: 2 * m] = 1
            ends_len = 2 * m
            v = 2
            v_block = v_block0
            hit = -1
            while v <= vmax:
                v_stop = min(v + v_block, vmax + 1)
                u01 = rng.random((v_stop - v) * (m + 2))
                hit, ends_len = _kernels.run_pa_vertices(
                    u01, m, prob, alias, v, v_stop, ends, ends_len, colors
                )
                if hit >= 0:
                    break
                v = v_stop
                v_block = min(v_block * 2, vmax)
            if hit >= 0:
                out[t - t0] = hit
            else:
                out[t - t0] = vmax
                cens[t - t0] = True
        return out, cens

    parts = run_chunked(cfg.trials, threads, chunk)
    times = np.concatenate([p[0] for p in parts])
    cens = np.concatenate([p[1] for p in parts])
    return TrialBatch(times=times, seed=seed, model_digest=cfg.palette.digest(),
                      kind="pa", censored=cens)


def pa_reference(m: int, u01: np.ndarray, pal_prob: np.ndarray,
                 pal_alias: np.ndarray, n_vertices: int):
    """Pure-python PA growth consuming uniforms exactly like the kernel.

    Returns (edges, colors, collision_vertex_or_-1).  Used to validate the
    numba path and to export multigraph edge lists.
    """
    npal = len(pal_prob)
    pos = 0

    def draw_color():
        nonlocal pos
        idx = int(u01[pos] * npal)
        if u01[pos + 1] >= pal_prob[idx]:
            idx = pal_alias[idx]
        pos += 2
        return int(idx)

    colors = {1: draw_color()}
    ends = [1] * (2 * m)
    edges = [(1, 1)] * m
    hit = -1
    for v in range(2, n_vertices + 1):
        colors[v] = draw_color()
        for _ in range(m):
            mtot = len(ends)
            j = int(u01[pos] * (mtot + 1))
            pos += 1
            vi = v if j == mtot else ends[j]
            ends.append(v)
            ends.append(vi)
            edges.append((v, vi))
            if vi != v and colors[vi] == colors[v] and hit < 0:
                hit = v
        if hit >= 0:
            break
    return edges, colors, hit


def generate_pa_multigraph(m: int, n_vertices: int, seed: int):
    """Edge list of one PA(m) multigraph (loops as (u, u)), colors ignored."""
    if m < 2 or n_vertices < 1:
        raise InvalidDistributionError("need m >= 2 and n_vertices >= 1")
    pool = StreamPool(seed)
    rng = pool.get(0)
    ends = [1] * (2 * m)
    edges = [(1, 1)] * m
    for v in range(2, n_vertices + 1):
        u01 = rng.random(m)
        for i in range(m):
            mtot = len(ends)
            j = int(u01[i] * (mtot + 1))
            vi = v if j == mtot else ends[j]
            ends.append(v)
            ends.append(vi)
            edges.append((v, vi))
    return edges


def write_edge_list(edges, path):
    with open(path, "w") as fh:
        fh.write("\n".join(f"{u} {v}" for u, v in edges) + "\n")


def simple_edges(edges) -> set:
    """Underlying simple edge set: loops dropped, multi-edges collapsed."""
    return {(min(u, v), max(u, v)) for u, v in edges if u != v}


def count_monochromatic_edges(edges, coloring) -> int:
    """Number of simple edges whose endpoints share a color."""
    return sum(1 for u, v in simple_edges(edges) if coloring[u] == coloring[v])


@dataclass(frozen=True)
class PathConfig:
    """I.i.d. color stream stopped at the first run of m equal colors."""

    probs: tuple
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise InvalidDistributionError("run length m must be >= 2")
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 1 or any(p <= 0 for p in probs):
            raise InvalidDistributionError("color probabilities must be positive")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise InvalidDistributionError("color probabilities must sum to 1")

    @property
    def c(self) -> int:
        return len(self.probs)

    @classmethod
    def from_palette(cls, palette: RankedDistribution, m: int) -> "PathConfig":
        return cls(probs=tuple(palette.masses.tolist()), m=m)


def sim_path_run(cfg: PathConfig, trials: int, seed: int, *, threads: int = 1,
                 max_draws: int = DEFAULT_TRIAL_CAP) -> TrialBatch:
    """Index of the color completing the first run of m equal consecutive colors."""
    if trials < 1:
        raise InvalidDistributionError("trials must be >= 1")
    samp = AliasSampler(np.asarray(cfg.probs))
    lam = math.fsum(p ** cfg.m for p in cfg.probs)
    k0 = int(min(max(64, 3.0 / lam + cfg.m + 16), _BLOCK_CAP))

    def chunk(t0, t1):
        pool = StreamPool(seed)
        out = np.empty(t1 - t0, dtype=np.int64)
        for t in range(t0, t1):
            rng = pool.get(t)
            offset = 0
            block = k0
            last, run = np.int64(-1), np.int64(0)
            while True:
                if offset >= max_draws:
                    raise RunawayTrialError(f"trial {t} exceeded the {max_draws}-draw cap")
                block = min(block, max_draws - offset)
                colors = samp.draw(rng, block)
                k, last, run = _kernels.scan_run(colors, cfg.m, last, run)
                if k >= 0:
                    out[t - t0] = offset + k + 1
                    break
                offset += block
                block = min(block * 2, _BLOCK_CAP)
        return out

    times = np.concatenate(run_chunked(trials, threads, chunk))
    digest = f"path:c={cfg.c},m={cfg.m}"
    return TrialBatch(times=times, seed=seed, model_digest=digest, kind="path")


def path_expectation_formula(cfg: PathConfig) -> float:
    """The closed-form run-time expectation 1 + (m-1) sum p^{m-1} / sum p^m.

    Evaluated exactly as displayed.  Beware: the formula agrees with the
    exact absorbing-chain value (``path_expectation_oracle``) only in special
    cases (m = 2 with equal probabilities, or a single color); see the
    oracle's docstring.
    """
    p = np.asarray(cfg.probs)
    return float(1.0 + (cfg.m - 1) * np.sum(p ** (cfg.m - 1)) / np.sum(p ** cfg.m))


def path_expectation_oracle(cfg: PathConfig) -> float:
    """Exact E[T] for the first length-m monochromatic run, by linear solve.

    States are (current color a, run length l in 1..m-1) with absorption at
    run length m; the expected absorption time solves a (c(m-1))-square
    system.  Requires c <= 64 and m <= 32.  For equal probabilities this
    reduces to the classical (c^m - 1)/(c - 1).
    """
    c, m = cfg.c, cfg.m
    if c > 64 or m > 32:
        raise InvalidDistributionError("oracle supports c <= 64 and m <= 32")
    p = np.asarray(cfg.probs)
    nstate = c * (m - 1)

    def sid(a, l):
        return a * (m - 1) + (l - 1)

    A = np.eye(nstate)
    b = np.ones(nstate)
    for a in range(c):
        for l in range(1, m):
            i = sid(a, l)
            if l + 1 < m:
                A[i, sid(a, l + 1)] -= p[a]
            for a2 in range(c):
                if a2 != a:
                    A[i, sid(a2, 1)] -= p[a2]
    try:
        e = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"absorbing-chain system is singular: {exc}") from exc
    resid = float(np.max(np.abs(A @ e - b)))
    if resid > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
        raise NumericFailureError(f"linear solve residual {resid!r} too large")
    return float(1.0 + np.sum(p * e[[sid(a, 1) for a in range(c)]]))
