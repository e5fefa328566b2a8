"""Discrete-time Monte Carlo engines for urn collision processes.

Each trial draws from its own random stream (see ``gof.stream_split``), so a
batch is a pure function of (model, trials, master seed) no matter how trials
are chunked across threads.  Balls are drawn in blocks sized from the model's
collision scale and scanned by numba kernels; per-urn state is stamped with
the global trial id, so it survives block boundaries and needs no clearing.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .distributions import (AliasSampler, RankedDistribution, UrnModelSpec,
                            scaling_of, mfold_scaling_of)
from .errors import InvalidDistributionError, RunawayTrialError
from .gof import StreamPool

DEFAULT_TRIAL_CAP = 1_000_000_000
_BLOCK_CAP = 1 << 22
_CHUNK = 4096


@dataclass(frozen=True)
class TrialBatch:
    """A reproducibly seeded batch of simulated collision times.

    ``times`` is (N,) for scalar modes or (N, m) strictly increasing rows for
    joint mode; integer draw indices for discrete engines (the colliding
    ball's own index, so every time is >= 2 ... >= 1 for repeat of a point
    mass), float epochs for continuous ones.  ``color_counts``, when
    recorded, holds per-color ball counts strictly before the colliding draw.
    """

    times: np.ndarray
    seed: int
    model_digest: str
    kind: str
    censored: np.ndarray | None = None
    color_counts: np.ndarray | None = None

    def __post_init__(self):
        self.times.setflags(write=False)
        if np.issubdtype(self.times.dtype, np.integer) and self.times.size:
            floor = 1 if self.censored is None else 0
            if self.times.min() < floor:
                raise InvalidDistributionError("collision times must be >= 1")
        if self.times.ndim == 2 and self.times.size:
            if np.any(np.diff(self.times, axis=1) <= 0):
                raise InvalidDistributionError("joint times must strictly increase")

    @property
    def trials(self) -> int:
        return int(self.times.shape[0])

    def to_csv(self, path, header_comment: str | None = None):
        with BatchCsvWriter(path, header_comment=header_comment) as w:
            w.append(self.times)

    def to_json_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "seed": self.seed,
            "model_digest": self.model_digest,
            "times": self.times.tolist(),
        }
        if self.censored is not None:
            d["censored"] = self.censored.tolist()
        if self.color_counts is not None:
            d["color_counts"] = self.color_counts.tolist()
        return d

    def save_json(self, path):
        Path(path).write_text(json.dumps(self.to_json_dict()))


class BatchCsvWriter:
    """Streaming "trial,k,time" writer for batches too large to hold at once."""

    def __init__(self, path, header_comment: str | None = None):
        self._fh = open(path, "w")
        if header_comment:
            self._fh.write(f"# {header_comment}\n")
        self._fh.write("trial,k,time\n")
        self._next_trial = 0

    def append(self, times, start_trial: int | None = None):
        t0 = self._next_trial if start_trial is None else start_trial
        arr = np.asarray(times)
        is_int = np.issubdtype(arr.dtype, np.integer)
        rows = arr[:, None] if arr.ndim == 1 else arr
        out = []
        for i in range(rows.shape[0]):
            for k in range(rows.shape[1]):
                v = rows[i, k]
                out.append(f"{t0 + i},{k + 1},{int(v) if is_int else repr(float(v))}")
        self._fh.write("\n".join(out) + "\n")
        self._next_trial = t0 + rows.shape[0]

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def run_chunked(trials: int, threads: int, chunk_fn):
    """Run chunk_fn(t0, t1) over [0, trials) in fixed chunks, optionally threaded.

    Results are concatenated in chunk order, so output is independent of the
    thread count.
    """
    ranges = [(t0, min(t0 + _CHUNK, trials)) for t0 in range(0, trials, _CHUNK)]
    if threads <= 1 or len(ranges) == 1:
        return [chunk_fn(t0, t1) for t0, t1 in ranges]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda rg: chunk_fn(*rg), ranges))


def _first_block(scale: float, mult: float = 8.0) -> int:
    return int(min(max(64, mult / scale + 16), _BLOCK_CAP))


def _trim(block: int, drawn: int, cap: int, trial: int) -> int:
    if drawn >= cap:
        raise RunawayTrialError(
            f"trial {trial} exceeded the {cap}-draw cap without a collision "
            "(disjoint or near-disjoint color supports?)"
        )
    return min(block, cap - drawn)


class _MixSampler:
    """Color-selection sampling from cumulative mix weights."""

    def __init__(self, weights):
        self._cum = np.cumsum(np.asarray(weights, dtype=np.float64))
        self._q = len(weights)

    def draw(self, rng, size):
        idx = np.searchsorted(self._cum, rng.random(size), side="right")
        return np.minimum(idx, self._q - 1).astype(np.int64)


def _shared_row_sampler(spec: UrnModelSpec) -> AliasSampler | None:
    """One alias table when every color shares the same urn law (urns then
    independent of colors, halving the rng calls per block)."""
    rows = spec.per_color
    if all(np.array_equal(rows[a], rows[0]) for a in range(1, rows.shape[0])):
        return AliasSampler(rows[0])
    return None


def _draw_urns(rng, colors, block, q, shared, samplers):
    if shared is not None:
        return shared.draw(rng, block)
    urns = np.empty(block, dtype=np.int64)
    for a in range(q):
        pos = np.nonzero(colors == a)[0]
        if pos.size:
            urns[pos] = samplers[a].draw(rng, pos.size)
    return urns


def sim_repeat_time(d: RankedDistribution, trials: int, seed: int, *,
                    threads: int = 1,
                    max_draws: int = DEFAULT_TRIAL_CAP) -> TrialBatch:
    """Draw i.i.d. urns until one repeats; record the repeating draw's index."""
    if trials < 1:
        raise InvalidDistributionError("trials must be >= 1")
    samp = AliasSampler(d.masses)
    n = d.support_size
    k0 = _first_block(scaling_of(d).s_n)

    def chunk(t0, t1):
        pool = StreamPool(seed)
        stamp = np.full(n, -1, dtype=np.int64)
        out = np.empty(t1 - t0, dtype=np.int64)
        for t in range(t0, t1):
            rng = pool.get(t)
            offset = 0
            block = k0
            while True:
                block = _trim(block, offset, max_draws, t)
                urns = samp.draw(rng, block)
                k = _kernels.scan_repeat(urns, stamp, t)
                if k >= 0:
                    out[t - t0] = offset + k + 1
                    break
                offset += block
                block = min(block * 2, _BLOCK_CAP)
        return out

    times = np.concatenate(run_chunked(trials, threads, chunk))
    return TrialBatch(times=times, seed=seed, model_digest=d.digest(), kind="repeat")


def sim_first_collision(spec: UrnModelSpec, trials: int, seed: int, *,
                        threads: int = 1, max_draws: int = DEFAULT_TRIAL_CAP,
                        record_color_counts: bool = False,
                        block_hint: int | None = None) -> TrialBatch:
    """First ball entering an urn that already holds a differently colored ball.

    ``block_hint`` overrides the first draw-block size (the default is sized
    from the model's collision scale s_n, which can underestimate when a
    heavy atom dominates s_n but not the collision time).
    """
    if trials < 1:
        raise InvalidDistributionError("trials must be >= 1")
    q, n = spec.q, spec.n_urns
    mix = _MixSampler(spec.mix.weights)
    shared = _shared_row_sampler(spec)
    samplers = None if shared else [AliasSampler(spec.per_color[a]) for a in range(q)]
    k0 = _first_block(spec.s_n) if block_hint is None else \
        int(min(max(64, block_hint), _BLOCK_CAP))

    def chunk(t0, t1):
        pool = StreamPool(seed)
        urn_color = np.empty(n, dtype=np.int64)
        stamp = np.full(n, -1, dtype=np.int64)
        out = np.empty(t1 - t0, dtype=np.int64)
        counts = np.zeros((t1 - t0, q), dtype=np.int64) if record_color_counts else None
        for t in range(t0, t1):
            rng = pool.get(t)
            offset = 0
            block = k0
            while True:
                block = _trim(block, offset, max_draws, t)
                colors = mix.draw(rng, block)
                urns = _draw_urns(rng, colors, block, q, shared, samplers)
                k = _kernels.scan_two_color(urns, colors, urn_color, stamp, t)
                if k >= 0:
                    out[t - t0] = offset + k + 1
                    if counts is not None:
                        counts[t - t0] += np.bincount(colors[:k], minlength=q)
                    break
                if counts is not None:
                    counts[t - t0] += np.bincount(colors, minlength=q)
                offset += block
                block = min(block * 2, _BLOCK_CAP)
        return out, counts

    parts = run_chunked(trials, threads, chunk)
    times = np.concatenate([p[0] for p in parts])
    cc = np.concatenate([p[1] for p in parts]) if record_color_counts else None
    return TrialBatch(times=times, seed=seed, model_digest=spec.digest(),
                      kind="collision", color_counts=cc)


def sim_joint_collisions(spec: UrnModelSpec, m: int, trials: int, seed: int, *,
                         threads: int = 1, max_draws: int = DEFAULT_TRIAL_CAP,
                         block_hint: int | None = None) -> TrialBatch:
    """Indices of the first m balls landing in urns holding another color.

    Urns are never reset: once an urn holds two distinct colors, every later
    ball entering it is a collision.  With equal ``block_hint`` values this
    engine and ``sim_first_collision`` consume identical draws, so the first
    coordinate coincides trial by trial under one seed.
    """
    if m < 1:
        raise InvalidDistributionError("m must be >= 1")
    q, n = spec.q, spec.n_urns
    mix = _MixSampler(spec.mix.weights)
    shared = _shared_row_sampler(spec)
    samplers = None if shared else [AliasSampler(spec.per_color[a]) for a in range(q)]
    k0 = _first_block(spec.s_n, mult=8.0 + 4.0 * m) if block_hint is None else \
        int(min(max(64, block_hint), _BLOCK_CAP))

    def chunk(t0, t1):
        pool = StreamPool(seed)
        urn_color = np.empty(n, dtype=np.int64)
        stamp = np.full(n, -1, dtype=np.int64)
        out = np.empty((t1 - t0, m), dtype=np.int64)
        hits = np.empty(m, dtype=np.int64)
        for t in range(t0, t1):
            rng = pool.get(t)
            offset = 0
            block = k0
            found = 0
            while True:
                block = _trim(block, offset, max_draws, t)
                colors = mix.draw(rng, block)
                urns = _draw_urns(rng, colors, block, q, shared, samplers)
                found = _kernels.scan_joint(urns, colors, offset, urn_color,
                                            stamp, t, hits, found, m)
                if found == m:
                    out[t - t0] = hits + 1
                    break
                offset += block
                block = min(block * 2, _BLOCK_CAP)
        return out

    times = np.concatenate(run_chunked(trials, threads, chunk))
    return TrialBatch(times=times, seed=seed, model_digest=spec.digest(), kind="joint")


def sim_mfold_collision(d: RankedDistribution, q: int, m: int, trials: int,
                        seed: int, *, threads: int = 1,
                        max_draws: int = DEFAULT_TRIAL_CAP) -> TrialBatch:
    """First ball completing m balls of each of two distinct colors in one urn.

    Colors are chosen uniformly over q and the urn law is shared, as in the
    m-fold model.
    """
    if q < 2 or m < 1:
        raise InvalidDistributionError("m-fold model needs q >= 2 and m >= 1")
    samp = AliasSampler(d.masses)
    n = d.support_size
    k0 = _first_block(mfold_scaling_of(d, m).s_2m, mult=5.0)

    def chunk(t0, t1):
        pool = StreamPool(seed)
        cell_count = np.empty(n * q, dtype=np.int64)
        cell_stamp = np.full(n * q, -1, dtype=np.int64)
        ready = np.empty(n, dtype=np.int64)
        stamp = np.full(n, -1, dtype=np.int64)
        out = np.empty(t1 - t0, dtype=np.int64)
        for t in range(t0, t1):
            rng = pool.get(t)
            offset = 0
            block = k0
            while True:
                block = _trim(block, offset, max_draws, t)
                colors = rng.integers(0, q, size=block)
                urns = samp.draw(rng, block)
                k = _kernels.scan_mfold(urns, colors, q, m, cell_count,
                                        cell_stamp, ready, stamp, t)
                if k >= 0:
                    out[t - t0] = offset + k + 1
                    break
                offset += block
                block = min(block * 2, _BLOCK_CAP)
        return out

    times = np.concatenate(run_chunked(trials, threads, chunk))
    return TrialBatch(times=times, seed=seed, model_digest=d.digest(), kind="mfold")
