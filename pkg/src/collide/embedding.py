"""Continuous-time side: Poisson-embedded collision epochs and the limiting
point process (quadratic-rate background plus retained atom channels).

This module is the independent route to the same laws as the discrete
engines: the embedded race and the limit process are sampled directly and
cross-checked against the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import UrnModelSpec
from .errors import InvalidParamsError, RunawayTrialError
from .gof import StreamPool
from .urn import TrialBatch, run_chunked


@dataclass(frozen=True)
class ChannelSpec:
    """One retained atom channel: a rate-psi Poisson stream split over q colors."""

    psi: float
    q: int

    def __post_init__(self):
        if not self.psi > 0:
            raise InvalidParamsError("channel intensity psi must be > 0")
        if self.q < 2:
            raise InvalidParamsError("channels need q >= 2 colors")


@dataclass(frozen=True)
class LimitProcessSpec:
    """Parameters of the limiting arrival process of scaled collision times."""

    q: int
    psi_atoms: tuple = ()
    background_coeff: float = field(init=False)

    def __post_init__(self):
        if self.q < 2:
            raise InvalidParamsError("q must be >= 2")
        atoms = tuple(float(x) for x in self.psi_atoms)
        object.__setattr__(self, "psi_atoms", atoms)
        if any(x <= 0 for x in atoms):
            raise InvalidParamsError("atom intensities must be > 0")
        ssq = float(sum(x * x for x in atoms))
        if ssq > 1.0 + 1e-10:
            raise InvalidParamsError("sum(psi^2) exceeds 1")
        object.__setattr__(self, "background_coeff", max(1.0 - ssq, 0.0))
        if not atoms and self.background_coeff == 0.0:
            raise InvalidParamsError("spec has neither atoms nor background")


@dataclass(frozen=True)
class ArrivalSample:
    """Strictly increasing arrival times of one realization."""

    times: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.times, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "times", arr)
        if arr.size and (np.any(arr <= 0) or np.any(np.diff(arr) <= 0)):
            raise InvalidParamsError("arrival times must be positive and strictly increasing")

    def __len__(self):
        return int(self.times.size)


def sample_inhomog_quadratic(rate_coeff: float, rng: np.random.Generator, *,
                             count: int | None = None,
                             horizon: float | None = None) -> ArrivalSample:
    """Arrivals of a Poisson process with intensity rate_coeff * t.

    Sampled exactly by the time change Lambda(t) = rate_coeff t^2 / 2: the
    k-th arrival is sqrt(2 Gamma_k / rate_coeff) with Gamma_k the partial
    sums of standard exponentials.
    """
    if not rate_coeff > 0:
        raise InvalidParamsError("rate_coeff must be > 0")
    if (count is None) == (horizon is None):
        raise InvalidParamsError("give exactly one of count / horizon")
    if count is not None:
        gam = np.cumsum(rng.standard_exponential(count))
        return ArrivalSample(np.sqrt(2.0 * gam / rate_coeff))
    lam_max = rate_coeff * horizon * horizon / 2.0
    gams = []
    total = 0.0
    while total <= lam_max:
        block = rng.standard_exponential(max(16, int(lam_max) + 8))
        gams.append(block)
        total += float(np.sum(block))
    gam = np.cumsum(np.concatenate(gams))
    gam = gam[gam <= lam_max]
    return ArrivalSample(np.sqrt(2.0 * gam / rate_coeff))


def _channel_events(rng, psi, q, need_events):
    """Times and color marks of a rate-psi stream, grown to >= need_events."""
    gaps = rng.standard_exponential(need_events) / psi
    colors = rng.integers(0, q, size=need_events)
    return np.cumsum(gaps), colors


def _first_mismatch(colors) -> int:
    hits = np.nonzero(colors != colors[0])[0]
    return int(hits[0]) if hits.size else -1


def sample_channel_retained(ch: ChannelSpec, horizon: float,
                            rng: np.random.Generator) -> ArrivalSample:
    """Channel events on [0, horizon] from the collision-creating event onward.

    The stream's points carry i.i.d. uniform color marks; the first point
    whose color differs from a previously seen color is retained (inclusive),
    along with everything after it.  Points strictly before it are removed.
    """
    if not horizon > 0:
        raise InvalidParamsError("horizon must be > 0")
    times = np.empty(0)
    colors = np.empty(0, dtype=np.int64)
    while times.size == 0 or times[-1] <= horizon:
        t2, c2 = _channel_events(rng, ch.psi, ch.q,
                                 max(16, int(ch.psi * horizon) + 8))
        off = times[-1] if times.size else 0.0
        times = np.concatenate([times, off + t2])
        colors = np.concatenate([colors, c2])
    j = _first_mismatch(colors)
    if j < 0 or times[j] > horizon:
        return ArrivalSample(np.empty(0))
    kept = times[j:]
    return ArrivalSample(kept[kept <= horizon])


def _channel_first_retained(rng, psi, q, m):
    """First m retained events of a channel (exact, count-based)."""
    times, colors = _channel_events(rng, psi, q, m + 8)
    while True:
        j = _first_mismatch(colors)
        if j >= 0 and times.size >= j + m:
            return times[j:j + m]
        t2, c2 = _channel_events(rng, psi, q, m + 8)
        times = np.concatenate([times, times[-1] + t2])
        colors = np.concatenate([colors, c2])


def sample_limit_process(spec: LimitProcessSpec, m: int, trials: int, seed: int,
                         *, threads: int = 1) -> TrialBatch:
    """First m arrivals of the superposed limit process, one row per trial.

    Background: quadratic-rate Poisson with intensity
    (1 - sum psi^2)(1 - 1/q) t.  Channels: retained atom streams.  The m
    smallest merged arrivals are found from each stream's first m events
    (any merged arrival among the first m is within its own stream's first m).
    """
    if m < 1 or trials < 1:
        raise InvalidParamsError("m and trials must be >= 1")
    c_bg = spec.background_coeff * (1.0 - 1.0 / spec.q)
    atoms = spec.psi_atoms

    def chunk(t0, t1):
        pool = StreamPool(seed)
        out = np.empty((t1 - t0, m))
        for t in range(t0, t1):
            rng = pool.get(t)
            cands = [_channel_first_retained(rng, psi, spec.q, m) for psi in atoms]
            if c_bg > 0:
                gam = np.cumsum(rng.standard_exponential(m))
                cands.append(np.sqrt(2.0 * gam / c_bg))
            merged = np.sort(np.concatenate(cands))
            out[t - t0] = merged[:m]
        return out

    times = np.concatenate(run_chunked(trials, threads, chunk))
    digest = f"limitproc:q={spec.q},psi={','.join(repr(a) for a in atoms)}"
    return TrialBatch(times=times, seed=seed, model_digest=digest,
                      kind="limit_arrivals")


def sim_embedded_continuous(spec: UrnModelSpec, trials: int, seed: int, *,
                            threads: int = 1) -> TrialBatch:
    """Continuous-time collision epochs of the embedded race.

    Each (urn, color) pair rings an independent exponential clock of rate
    q_a p_{a,i}; a trial's epoch is the first time some urn has heard two
    distinct colors.  The empirical survival matches survival_prelimit_exact
    pointwise by construction.
    """
    if trials < 1:
        raise InvalidParamsError("trials must be >= 1")
    q, n = spec.q, spec.n_urns
    rates = spec.mix.weights[:, None] * spec.per_color
    live = rates > 0
    if np.count_nonzero(np.sum(live, axis=0) >= 2) == 0:
        raise RunawayTrialError("no urn is reachable by two colors; collision impossible")

    def chunk(t0, t1):
        pool = StreamPool(seed)
        out = np.empty(t1 - t0)
        for t in range(t0, t1):
            rng = pool.get(t)
            e = rng.standard_exponential((q, n))
            times = np.full((q, n), np.inf)
            times[live] = e[live] / rates[live]
            second = np.partition(times, 1, axis=0)[1]
            out[t - t0] = np.min(second)
        return out

    times = np.concatenate(run_chunked(trials, threads, chunk))
    return TrialBatch(times=times, seed=seed, model_digest=spec.digest(),
                      kind="embedded")
