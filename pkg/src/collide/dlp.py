"""Idealized running-time models for interval discrete-log algorithms.

Walks are modeled as i.i.d. draws over exponent sets (the standard
idealization); the tame/wild race is exactly a two-color urn model, so
instance simulation delegates to the urn engine and the closed-form hazards
come from the general collision law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .distributions import UrnModelSpec
from .errors import InvalidDistributionError
from .laws import LimitParams, SurvivalCurve, moment
from .urn import DEFAULT_TRIAL_CAP, TrialBatch, sim_first_collision

GS = "gs"
AGS = "ags"
_GL_NODES = 64


@dataclass(frozen=True)
class DlpInstance:
    """One problem instance: interval size n and target exponent fraction x."""

    n: int
    x: float
    variant: str

    def __post_init__(self):
        if self.variant not in (GS, AGS):
            raise InvalidDistributionError("variant must be 'gs' or 'ags'")
        if abs(self.x) > 0.5:
            raise InvalidDistributionError("|x| must be <= 1/2")
        if self.n < 8:
            raise InvalidDistributionError("n must be >= 8")
        if self.variant == AGS and self.n % 4:
            raise InvalidDistributionError("AGS requires 4 | n")

    def to_json_dict(self) -> dict:
        return {"variant": self.variant, "n": self.n, "x": self.x}


def gs_spec(inst: DlpInstance) -> UrnModelSpec:
    """Two-color spec of the Gaudry-Schost race.

    Tame walk uniform (mass 1/n) on n exponents, wild walk the same law
    shifted by round(|x| n), on a shared index space; mix (1/2, 1/2).  With
    this construction s_n = sqrt((1 - |x|/2)/n) exactly at finite n.
    """
    if inst.variant != GS:
        raise InvalidDistributionError("gs_spec needs a GS instance")
    n = inst.n
    shift = round(abs(inst.x) * n)
    size = n + shift
    tame = np.zeros(size)
    tame[:n] = 1.0 / n
    wild = np.zeros(size)
    wild[shift:shift + n] = 1.0 / n
    return UrnModelSpec.from_rows((0.5, 0.5), np.vstack([tame, wild]),
                                  label=f"gs(n={n},x={inst.x})")


def ags_spec(inst: DlpInstance) -> UrnModelSpec:
    """Two-color spec of the accelerated (equivalence-class) variant.

    The urn space is the set of classes {a, -a}.  Tame: uniform 2/n on its
    n/2 classes.  Wild, writing s = round(|x| n): for |x| < 1/4, mass 4/n on
    the first n/4 - s classes and 2/n on the next 2s; for |x| >= 1/4,
    uniform 2/n on the n/2 classes [s - n/4, s + n/4).  Rows sum to 1
    exactly, and in the first case s_n = sqrt((10 - 8x)/(4n)),
    phi_1 = 8/(10-8x), phi_2 = 4(4-8x)/(10-8x) hold exactly at finite n.
    """
    if inst.variant != AGS:
        raise InvalidDistributionError("ags_spec needs an AGS instance")
    n = inst.n
    s = round(abs(inst.x) * n)
    half, quarter = n // 2, n // 4
    if abs(inst.x) < 0.25 and s < quarter:
        size = half
        tame = np.full(size, 2.0 / n)
        wild = np.zeros(size)
        wild[: quarter - s] = 4.0 / n
        wild[quarter - s: quarter + s] = 2.0 / n
    else:
        size = max(half, s + quarter)
        tame = np.zeros(size)
        tame[:half] = 2.0 / n
        wild = np.zeros(size)
        wild[s - quarter: s + quarter] = 2.0 / n
    for row in (tame, wild):
        total = math.fsum(row.tolist())
        if abs(total - 1.0) > 1e-12:
            row /= total
    return UrnModelSpec.from_rows((0.5, 0.5), np.vstack([tame, wild]),
                                  label=f"ags(n={n},x={inst.x})")


def instance_spec(inst: DlpInstance) -> UrnModelSpec:
    return gs_spec(inst) if inst.variant == GS else ags_spec(inst)


def sim_dlp_runtime(inst: DlpInstance, trials: int, seed: int, *,
                    threads: int = 1,
                    max_draws: int = DEFAULT_TRIAL_CAP) -> TrialBatch:
    """Idealized running-time samples: draws until a tame-wild coincidence."""
    return sim_first_collision(instance_spec(inst), trials, seed,
                               threads=threads, max_draws=max_draws)


def hazard_gs(x: float, r):
    """Limiting survival of the GS running time in T/sqrt(n) units."""
    if abs(x) > 0.5:
        raise InvalidDistributionError("|x| must be <= 1/2")
    r = np.asarray(r, dtype=np.float64)
    return np.exp(-(1.0 - abs(x)) * r * r / 4.0)


def hazard_ags(x: float, r):
    """Limiting survival of the AGS running time, with the |x| = 1/4 case split."""
    if abs(x) > 0.5:
        raise InvalidDistributionError("|x| must be <= 1/2")
    r = np.asarray(r, dtype=np.float64)
    if abs(x) < 0.25:
        return np.exp(-r * r / 2.0)
    return np.exp(-(3.0 - 4.0 * abs(x)) * r * r / 4.0)


def hazard(variant: str, x: float, r):
    return hazard_gs(x, r) if variant == GS else hazard_ags(x, r)


def gs_limit_params(x: float) -> LimitParams:
    """Limit fingerprint of the GS race: both phi equal 1/(1 - |x|/2), no atoms."""
    phi = 1.0 / (1.0 - abs(x) / 2.0)
    return LimitParams(q=2, mix=(0.5, 0.5), phi=(phi, phi), psi=(), cross=0.0)


def ags_limit_params(x: float) -> LimitParams:
    if abs(x) < 0.25:
        phi1 = 8.0 / (10.0 - 8.0 * abs(x))
        phi2 = 4.0 * (4.0 - 8.0 * abs(x)) / (10.0 - 8.0 * abs(x))
    else:
        phi1 = phi2 = 4.0 / (5.0 - 4.0 * abs(x))
    return LimitParams(q=2, mix=(0.5, 0.5), phi=(phi1, phi2), psi=(), cross=0.0)


def _gl_segments(variant: str):
    # split at every kink of the integrand: |x| at 0, the AGS case change at 1/4
    if variant == GS:
        return [(-0.5, 0.0), (0.0, 0.5)]
    return [(-0.5, -0.25), (-0.25, 0.0), (0.0, 0.25), (0.25, 0.5)]


def _gl_nodes(lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    mid, halfw = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + halfw * x, halfw * w


def averaged_mean_constant(variant: str) -> float:
    """Instance-averaged mean of the hazard law, E_x[ E[T/sqrt(n)] ].

    Gauss-Legendre over x ~ Uniform[-1/2, 1/2] (AGS integrand split at its
    |x| = 1/4 kink), with each per-x mean from the moment quadrature.
    Closed forms: (4 - 2 sqrt(2)) sqrt(pi) for GS, (5 sqrt(2)/4 - 1) sqrt(pi)
    for AGS.
    """
    total = 0.0
    for lo, hi in _gl_segments(variant):
        xs, ws = _gl_nodes(lo, hi)
        total += float(np.sum(ws * [moment(lambda r, xv=xv: hazard(variant, xv, r), 1)
                                    for xv in xs]))
    return total


def averaged_hazard(variant: str, r):
    """Survival averaged over x ~ Uniform[-1/2, 1/2] at scaled time(s) r."""
    r = np.asarray(r, dtype=np.float64)
    total = np.zeros_like(r, dtype=np.float64)
    for lo, hi in _gl_segments(variant):
        xs, ws = _gl_nodes(lo, hi)
        for xv, wv in zip(xs, ws):
            total = total + wv * hazard(variant, xv, r)
    return total if r.ndim else float(total)


@dataclass(frozen=True)
class HazardCurve:
    """A tabulated hazard-law survival curve tagged with its instance."""

    curve: SurvivalCurve
    variant: str
    x: float

    @classmethod
    def from_instance(cls, variant: str, x: float, r_max: float = 6.0,
                      points: int = 601) -> "HazardCurve":
        curve = SurvivalCurve.from_law(lambda r: hazard(variant, x, r), r_max, points)
        return cls(curve=curve, variant=variant, x=x)


def hazard_csv(curves: Iterable[HazardCurve], path, header_comment: str | None = None):
    """Write hazard curves as "variant,x,r,survival" rows."""
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append("variant,x,r,survival")
    for hc in curves:
        for r, s in zip(hc.curve.grid, hc.curve.values):
            lines.append(f"{hc.variant},{hc.x!r},{float(r)!r},{float(s)!r}")
    Path(path).write_text("\n".join(lines) + "\n")
