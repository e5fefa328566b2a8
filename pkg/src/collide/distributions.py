"""Ranked urn-selection distributions, generalized urn-model specs, and their
collision scalings.

Everything here is immutable after construction and safe to share across
threads.  Mass sums are accumulated with ``math.fsum`` (error-free
transformation) so that supports up to 10**6 with masses ~1e-6 still meet the
1e-12 normalization tolerance.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidDistributionError

MASS_TOL = 1e-12
SCALE_RTOL = 1e-10


def _as_mass_array(masses) -> np.ndarray:
    arr = np.asarray(masses, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidDistributionError("masses must be a non-empty 1-d sequence")
    return arr


@dataclass(frozen=True)
class RankedDistribution:
    """A discrete urn-selection law with masses listed in non-increasing order.

    Parameters
    ----------
    masses : sequence of float
        Point probabilities, non-increasing, each >= 0, summing to 1 within
        1e-12 absolute.
    label : str
        Free-form name used in exports and digests.
    """

    masses: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = _as_mass_array(self.masses)
        arr.setflags(write=False)
        object.__setattr__(self, "masses", arr)
        if np.any(arr < 0):
            raise InvalidDistributionError(f"{self.label!r}: negative mass")
        if np.any(arr[1:] > arr[:-1]):
            raise InvalidDistributionError(f"{self.label!r}: masses not non-increasing")
        total = math.fsum(arr.tolist())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistributionError(
                f"{self.label!r}: masses sum to {total!r}, not 1 within {MASS_TOL}"
            )

    @property
    def support_size(self) -> int:
        return int(self.masses.size)

    def to_json_dict(self) -> dict:
        return {"label": self.label, "masses": self.masses.tolist()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RankedDistribution":
        return cls(masses=obj["masses"], label=obj.get("label", ""))

    def save_json(self, path):
        Path(path).write_text(json.dumps(self.to_json_dict()))

    @classmethod
    def load_json(cls, path) -> "RankedDistribution":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    @classmethod
    def load_masses_text(cls, path, label: str | None = None) -> "RankedDistribution":
        """Load from a one-mass-per-line text file (blank lines ignored)."""
        lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
        masses = [float(ln) for ln in lines if ln]
        return cls(masses=masses, label=label if label is not None else Path(path).stem)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(b"ranked:" + self.label.encode())
        h.update(self.masses.tobytes())
        return h.hexdigest()[:16]


def make_uniform(n: int, label: str | None = None) -> RankedDistribution:
    """Uniform law on n urns: p_i = 1/n."""
    if n < 1:
        raise InvalidDistributionError("make_uniform requires n >= 1")
    return RankedDistribution(np.full(n, 1.0 / n), label or f"uniform({n})")


def make_sqrt_atom(n: int, label: str | None = None) -> RankedDistribution:
    """One atom of mass 1/sqrt(n) plus n equal masses carrying the rest."""
    if n < 2:
        raise InvalidDistributionError("make_sqrt_atom requires n >= 2")
    p1 = 1.0 / math.sqrt(n)
    rest = (1.0 - p1) / n
    masses = np.empty(n + 1)
    masses[0] = p1
    masses[1:] = rest
    return RankedDistribution(masses, label or f"sqrt_atom({n})")


def make_log_atom(n: int, label: str | None = None) -> RankedDistribution:
    """One atom of mass 1/ln(n) plus n equal masses carrying the rest."""
    if n < 3:
        raise InvalidDistributionError("make_log_atom requires n >= 3")
    p1 = 1.0 / math.log(n)
    rest = (1.0 - p1) / n
    masses = np.empty(n + 1)
    masses[0] = p1
    masses[1:] = rest
    return RankedDistribution(masses, label or f"log_atom({n})")


@dataclass(frozen=True)
class ScalingProfile:
    """Collision scale s_n = sqrt(sum p_i^2) and normalized atoms psi_i = p_i/s_n."""

    s_n: float
    psi: np.ndarray
    sum_psi_sq: float

    def __post_init__(self):
        self.psi.setflags(write=False)


def scaling_of(d: RankedDistribution) -> ScalingProfile:
    p = d.masses
    s_sq = math.fsum((p * p).tolist())
    s_n = math.sqrt(s_sq)
    psi = p / s_n
    return ScalingProfile(s_n=s_n, psi=psi, sum_psi_sq=math.fsum((psi * psi).tolist()))


@dataclass(frozen=True)
class MfoldScaling:
    """m-fold collision scale s^(2m) = (sum p_i^2m)^(1/2m) and its atoms."""

    s_2m: float
    psi_2m: np.ndarray
    m: int

    def __post_init__(self):
        self.psi_2m.setflags(write=False)


def mfold_scaling_of(d: RankedDistribution, m: int) -> MfoldScaling:
    if m < 1:
        raise InvalidDistributionError("fold order m must be >= 1")
    p = d.masses
    s_pow = math.fsum((p ** (2 * m)).tolist())
    s_2m = s_pow ** (1.0 / (2 * m))
    return MfoldScaling(s_2m=s_2m, psi_2m=p / s_2m, m=m)


@dataclass(frozen=True)
class ColorMix:
    """Color-selection probabilities (q_1, ..., q_q)."""

    weights: np.ndarray

    def __post_init__(self):
        arr = _as_mass_array(self.weights)
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)
        if np.any(arr <= 0):
            raise InvalidDistributionError("color weights must be strictly positive")
        total = math.fsum(arr.tolist())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistributionError(f"color weights sum to {total!r}, not 1")

    @property
    def q(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, q: int) -> "ColorMix":
        return cls(np.full(q, 1.0 / q))


@dataclass(frozen=True)
class UrnModelSpec:
    """General urn model: a color mix plus one urn-selection row per color.

    Rows live on a shared 0-based urn index space; zero masses are allowed
    inside rows so that colors with disjoint supports (e.g. tame/wild walks
    on different exponent ranges) can be expressed.  Derived quantities:

    * ``s_n`` with s_n^2 = sum_i (sum_a q_a p_{a,i})^2,
    * ``psi_per_color`` = rows / s_n,
    * ``phi`` with phi_a = sum_i psi_{a,i}^2, computed exactly at finite n.
    """

    mix: ColorMix
    per_color: np.ndarray
    label: str = ""
    s_n: float = field(init=False)
    psi_per_color: np.ndarray = field(init=False)
    phi: np.ndarray = field(init=False)

    def __post_init__(self):
        rows = np.asarray(self.per_color, dtype=np.float64)
        if rows.ndim != 2:
            raise InvalidDistributionError("per_color must be a (q, n_urns) array")
        if rows.shape[0] != self.mix.q:
            raise InvalidDistributionError("one row per color required")
        if self.mix.q < 2:
            raise InvalidDistributionError("collision models need q >= 2 colors")
        if np.any(rows < 0):
            raise InvalidDistributionError("negative urn mass")
        for a in range(rows.shape[0]):
            total = math.fsum(rows[a].tolist())
            if abs(total - 1.0) > MASS_TOL:
                raise InvalidDistributionError(
                    f"color {a} row sums to {total!r}, not 1 within {MASS_TOL}"
                )
        rows.setflags(write=False)
        object.__setattr__(self, "per_color", rows)
        mean_row = self.mix.weights @ rows
        s_sq = math.fsum((mean_row * mean_row).tolist())
        s_n = math.sqrt(s_sq)
        psi = rows / s_n
        psi.setflags(write=False)
        phi = np.array([math.fsum((psi[a] * psi[a]).tolist()) for a in range(rows.shape[0])])
        phi.setflags(write=False)
        object.__setattr__(self, "s_n", s_n)
        object.__setattr__(self, "psi_per_color", psi)
        object.__setattr__(self, "phi", phi)

    @property
    def q(self) -> int:
        return self.mix.q

    @property
    def n_urns(self) -> int:
        return int(self.per_color.shape[1])

    @classmethod
    def from_rows(cls, mix_weights: Sequence[float], rows, label: str = "") -> "UrnModelSpec":
        return cls(mix=ColorMix(np.asarray(mix_weights, dtype=np.float64)), per_color=rows, label=label)

    @classmethod
    def from_shared(cls, mix_weights: Sequence[float], d: RankedDistribution,
                    label: str | None = None) -> "UrnModelSpec":
        """All colors share one urn law (the p_{na_i} = p_{ni} case)."""
        q = len(mix_weights)
        rows = np.tile(d.masses, (q, 1))
        return cls.from_rows(mix_weights, rows, label if label is not None else d.label)

    def cross_term(self) -> float:
        """sum_i sum_{a != b} q_a q_b psi_{a,i} psi_{b,i}, exact at finite n."""
        w = self.mix.weights
        weighted = w[:, None] * self.psi_per_color
        tot = np.sum(weighted, axis=0)
        full = math.fsum((tot * tot).tolist())
        diag = math.fsum((w ** 2 * self.phi).tolist())
        return full - diag

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(b"urnspec:" + self.label.encode())
        h.update(self.mix.weights.tobytes())
        h.update(self.per_color.tobytes())
        return h.hexdigest()[:16]


def spec_scaling(spec: UrnModelSpec) -> tuple[float, np.ndarray, np.ndarray]:
    """(s_n, psi_per_color, phi) of a general urn-model spec."""
    return spec.s_n, spec.psi_per_color, spec.phi


class AliasSampler:
    """Constant-time sampling of an urn index by Walker/Vose alias tables.

    O(n) setup, then each draw costs one uniform integer plus one uniform
    float.  Zero masses are permitted (they are simply never returned).
    """

    def __init__(self, masses):
        p = np.asarray(masses, dtype=np.float64)
        n = p.size
        if n < 1 or np.any(p < 0):
            raise InvalidDistributionError("alias table needs a nonnegative mass vector")
        total = math.fsum(p.tolist())
        if abs(total - 1.0) > 1e-9:
            raise InvalidDistributionError("alias table masses must sum to 1")
        from . import _kernels
        scaled = p * (n / total)
        prob = np.empty(n)
        alias = np.empty(n, dtype=np.int64)
        _kernels.build_alias_tables(scaled.copy(), prob, alias)
        self.n = n
        self._prob = prob
        self._alias = alias
        self._uniform = bool(np.all(p == p[0]))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` urn indices.

        Consumes one rng call for an exactly uniform table, two otherwise
        (the draw protocol is fixed per table, so batches stay reproducible).
        """
        if self._uniform:
            return rng.integers(0, self.n, size=size)
        idx = rng.integers(0, self.n, size=size)
        u = rng.random(size)
        return np.where(u < self._prob[idx], idx, self._alias[idx])


def sampler(d: RankedDistribution) -> AliasSampler:
    """Alias sampler for a ranked distribution's urn index."""
    return AliasSampler(d.masses)
