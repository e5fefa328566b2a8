"""Closed-form limiting and pre-limit survival functions for collision times,
plus moments by quadrature and tabulated survival curves.

Every law is evaluated in log space and clamps Gaussian coefficients in
[-1e-10, 0] to 0, so parameter sets sitting on the boundary sum(psi^2) = 1
(up to floating error) are handled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy import integrate
from scipy.special import gammaincc

from .distributions import RankedDistribution, UrnModelSpec
from .errors import InvalidParamsError, NumericFailureError

COEFF_TOL = 1e-10


@dataclass(frozen=True)
class LimitParams:
    """Asymptotic fingerprint parameterizing the closed-form survival laws.

    ``psi`` holds the ranked atom limits (the theta_i of the single-color
    repeat law when q = 1; shared across colors for the general law when
    ``psi_per_color`` is absent).  ``phi`` holds the per-color limits of the
    full squared-atom sums, which can exceed sum(psi^2) when mass escapes to
    dust.  ``cross`` is the limit of the cross-color atom correlation
    sum_i sum_{a!=b} q_a q_b psi_{a,i} psi_{b,i}; it is taken as an explicit
    input (computed from ``psi_per_color`` when omitted).
    """

    q: int = 1
    psi: tuple = ()
    phi: tuple | None = None
    mix: tuple | None = None
    m: int = 1
    psi_per_color: tuple | None = None
    cross: float | None = None

    def __post_init__(self):
        if self.q < 1:
            raise InvalidParamsError("q must be >= 1")
        if self.m < 1:
            raise InvalidParamsError("fold order m must be >= 1")
        psi = tuple(float(x) for x in self.psi)
        object.__setattr__(self, "psi", psi)
        if any(x < 0 for x in psi):
            raise InvalidParamsError("psi atoms must be nonnegative")
        if any(psi[i + 1] > psi[i] for i in range(len(psi) - 1)):
            raise InvalidParamsError("psi atoms must be non-increasing")
        if self.phi is None and self.psi_per_color is None:
            # the m-fold normalization: sum psi^(2m) <= 1 (m = 1 for plain laws)
            if math.fsum(x ** (2 * self.m) for x in psi) > 1.0 + COEFF_TOL:
                raise InvalidParamsError(f"sum(psi^{2 * self.m}) exceeds 1")
        if self.mix is not None:
            mix = tuple(float(w) for w in self.mix)
            object.__setattr__(self, "mix", mix)
            if len(mix) != self.q or any(w <= 0 for w in mix):
                raise InvalidParamsError("mix must hold q positive weights")
            if abs(math.fsum(mix) - 1.0) > 1e-12:
                raise InvalidParamsError("mix weights must sum to 1")
        if self.psi_per_color is not None:
            rows = tuple(tuple(float(x) for x in row) for row in self.psi_per_color)
            object.__setattr__(self, "psi_per_color", rows)
            if len(rows) != self.q:
                raise InvalidParamsError("psi_per_color needs one row per color")
        if self.phi is not None:
            phi = tuple(float(x) for x in self.phi)
            object.__setattr__(self, "phi", phi)
            if len(phi) != self.q:
                raise InvalidParamsError("phi needs one entry per color")
            rows = self._atom_rows()
            if rows is not None:
                for a in range(self.q):
                    if phi[a] < math.fsum(x * x for x in rows[a]) - COEFF_TOL:
                        raise InvalidParamsError(f"phi[{a}] below its own atom sum")

    def _atom_rows(self):
        if self.psi_per_color is not None:
            return self.psi_per_color
        if self.psi:
            return tuple(self.psi for _ in range(self.q))
        return None

    def to_json_dict(self) -> dict:
        return {
            "q": self.q, "psi": list(self.psi), "m": self.m,
            "phi": list(self.phi) if self.phi is not None else None,
            "mix": list(self.mix) if self.mix is not None else None,
            "psi_per_color": [list(r) for r in self.psi_per_color]
            if self.psi_per_color is not None else None,
            "cross": self.cross,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LimitParams":
        return cls(
            q=obj["q"], psi=tuple(obj.get("psi", ())), m=obj.get("m", 1),
            phi=tuple(obj["phi"]) if obj.get("phi") is not None else None,
            mix=tuple(obj["mix"]) if obj.get("mix") is not None else None,
            psi_per_color=tuple(tuple(r) for r in obj["psi_per_color"])
            if obj.get("psi_per_color") is not None else None,
            cross=obj.get("cross"),
        )

    @classmethod
    def from_spec(cls, spec: UrnModelSpec, keep_atoms: bool = False) -> "LimitParams":
        """Parameters induced by a finite-n spec.

        With ``keep_atoms=False`` the atom limits are taken as 0 (the regime
        max_i p_{a,i} -> 0) and only the exact phi_a survive; with
        ``keep_atoms=True`` the full finite-n psi rows are kept, in which case
        the general law reproduces the exact pre-limit survival.
        """
        if keep_atoms:
            rows = tuple(tuple(row) for row in spec.psi_per_color)
            cross = spec.cross_term()
        else:
            rows = None
            cross = 0.0
        return cls(
            q=spec.q,
            psi=(),
            phi=tuple(spec.phi),
            mix=tuple(spec.mix.weights),
            psi_per_color=rows,
            cross=cross,
        )


def _clamp_coeff(coeff: float, what: str) -> float:
    if coeff < -COEFF_TOL:
        raise InvalidParamsError(f"{what} coefficient is {coeff!r} < 0 beyond tolerance")
    return max(coeff, 0.0)


def _eval_on(r, fn):
    arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any(arr < 0):
        raise InvalidParamsError("scaled time r must be >= 0")
    out = fn(arr)
    return float(out[0]) if np.isscalar(r) or np.ndim(r) == 0 else out


def survival_repeat_cp(params: LimitParams, r):
    """Repeat-time limit law: exp(-(1-sum theta^2) r^2/2) prod (1+theta_i r) e^{-theta_i r}."""
    theta = np.asarray(params.psi)
    coeff = _clamp_coeff(1.0 - math.fsum((theta * theta).tolist()), "Gaussian")

    def fn(rr):
        log_s = -0.5 * coeff * rr ** 2
        if theta.size:
            x = theta[None, :] * rr[:, None]
            log_s = log_s + np.sum(np.log1p(x) - x, axis=1)
        return np.exp(log_s)

    return _eval_on(r, fn)


def survival_qcolor(params: LimitParams, r):
    """q-color first-collision limit law under a uniform color mix."""
    q = params.q
    if q < 2:
        raise InvalidParamsError("q-color law needs q >= 2")
    psi = np.asarray(params.psi)
    coeff = _clamp_coeff(1.0 - math.fsum((psi * psi).tolist()), "Gaussian")
    qm1_q = (q - 1) / q

    def fn(rr):
        log_s = -0.5 * qm1_q * coeff * rr ** 2
        if psi.size:
            x = psi[None, :] * rr[:, None]
            log_s = log_s + np.sum(
                -qm1_q * x + np.log(q - (q - 1) * np.exp(-x / q)), axis=1
            )
        return np.exp(log_s)

    return _eval_on(r, fn)


def _log_general_atom_factor(x):
    """log of e^{-sum_a x_a} (1 + sum_a e^{x_a} - q) for x with shape (..., q, k).

    Evaluated as sum_a e^{x_a - X} - (q-1) e^{-X} with X = sum_a x_a, so every
    exponential argument is <= 0 and the form is overflow-free.
    """
    q = x.shape[-2]
    X = np.sum(x, axis=-2, keepdims=True)
    inner = np.sum(np.exp(x - X), axis=-2) - (q - 1) * np.exp(-X[..., 0, :])
    return np.log(inner)


def survival_general(params: LimitParams, r):
    """First-collision limit law under general color and urn selection."""
    q = params.q
    if q < 2:
        raise InvalidParamsError("general law needs q >= 2")
    if params.phi is None or params.mix is None:
        raise InvalidParamsError("general law needs phi and mix")
    w = np.asarray(params.mix)
    phi = np.asarray(params.phi)
    rows = params._atom_rows()
    atoms = np.asarray(rows, dtype=np.float64) if rows is not None else np.zeros((q, 0))
    if params.cross is not None:
        cross = params.cross
    else:
        weighted = w[:, None] * atoms
        tot = np.sum(weighted, axis=0)
        cross = math.fsum((tot * tot).tolist()) - math.fsum(
            (w ** 2 * np.sum(atoms * atoms, axis=1)).tolist()
        )
    coeff = _clamp_coeff(
        1.0 - math.fsum((w ** 2 * phi).tolist()) - cross, "Gaussian"
    )

    def fn(rr):
        log_s = -0.5 * coeff * rr ** 2
        if atoms.shape[1]:
            x = (w[:, None] * atoms)[None, :, :] * rr[:, None, None]
            log_s = log_s + np.sum(_log_general_atom_factor(x), axis=1)
        return np.exp(log_s)

    return _eval_on(r, fn)


def h_lower_poisson(m: int, x):
    """h_m(x) = P(Poisson(x) <= m-1), the lower Poisson tail."""
    return gammaincc(m, np.asarray(x, dtype=np.float64))


def mfold_gauss_coeff(q: int, m: int) -> float:
    """(q-1) / (2 q^{2m-1} (m!)^2), the m-fold Gaussian-term constant."""
    return (q - 1) / (2.0 * q ** (2 * m - 1) * math.factorial(m) ** 2)


def survival_mfold(params: LimitParams, r):
    """m-fold collision limit law (uniform color mix); reduces to the q-color
    law exactly at m = 1."""
    q, m = params.q, params.m
    if q < 2:
        raise InvalidParamsError("m-fold law needs q >= 2")
    psi = np.asarray(params.psi)
    coeff = _clamp_coeff(
        1.0 - math.fsum((psi ** (2 * m)).tolist()), "Gaussian"
    )
    c_qm = mfold_gauss_coeff(q, m)

    def fn(rr):
        log_s = -coeff * c_qm * rr ** (2 * m)
        if psi.size:
            h = h_lower_poisson(m, psi[None, :] * rr[:, None] / q)
            log_s = log_s + np.sum(
                (q - 1) * np.log(h) + np.log(q - (q - 1) * h), axis=1
            )
        return np.exp(log_s)

    return _eval_on(r, fn)


Model = Union[RankedDistribution, UrnModelSpec]


def survival_prelimit_exact(model: Model, t, q: int | None = None):
    """Exact survival of the continuous-time embedded collision epoch.

    For a ``RankedDistribution`` with ``q`` colors (uniform mix):
    exp(-(q-1)t/q) * prod_i (q - (q-1) exp(-p_i t / q)).  For an
    ``UrnModelSpec``: exp(-t sum_i sum_a q_a p_{a,i}) * prod_i
    (1 + sum_a exp(q_a p_{a,i} t) - q), evaluated overflow-free.  This is the
    small-instance oracle both simulations and limit laws are checked against.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(tt < 0):
        raise InvalidParamsError("time t must be >= 0")
    if isinstance(model, RankedDistribution):
        if q is None or q < 2:
            raise InvalidParamsError("q >= 2 required with a shared urn law")
        p, counts = np.unique(model.masses, return_counts=True)
        x = p[None, :] * tt[:, None] / q
        log_s = np.sum(
            counts[None, :] * (-(q - 1) * x + np.log(q - (q - 1) * np.exp(-x))),
            axis=1,
        )
    else:
        spec = model
        w = spec.mix.weights
        x = (w[:, None] * spec.per_color)[None, :, :] * tt[:, None, None]
        log_s = np.sum(_log_general_atom_factor(x), axis=1)
    out = np.exp(log_s)
    return float(out[0]) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class SurvivalCurve:
    """A tabulated r -> S(r) function on a strictly increasing grid from 0."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise InvalidParamsError("grid and values must be matching 1-d arrays")
        if g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise InvalidParamsError("grid must start at 0 and strictly increase")
        if abs(v[0] - 1.0) > 1e-9:
            raise InvalidParamsError("S(0) must be 1")
        if np.any(v < -1e-12) or np.any(v > 1.0 + 1e-12):
            raise InvalidParamsError("survival values must lie in [0, 1]")
        if np.any(np.diff(v) > 1e-12):
            raise InvalidParamsError("survival values must be non-increasing")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_law(cls, law: Callable, r_max: float, points: int = 601) -> "SurvivalCurve":
        grid = np.linspace(0.0, r_max, points)
        return cls(grid=grid, values=np.asarray(law(grid), dtype=np.float64))

    def __call__(self, r):
        return np.interp(r, self.grid, self.values)

    def density(self) -> np.ndarray:
        """-dS/dr by central differences on the grid (O(h^2) error)."""
        return -np.gradient(self.values, self.grid)

    def to_csv(self, path, header_comment: str | None = None):
        lines = []
        if header_comment:
            lines.append(f"# {header_comment}")
        lines.append("r,survival")
        lines.extend(f"{float(r)!r},{float(s)!r}" for r, s in zip(self.grid, self.values))
        Path(path).write_text("\n".join(lines) + "\n")


def density_of(law: Callable, r, step: float = 1e-4):
    """Density -S'(r) by central finite differences (error O(step^2))."""
    r = np.asarray(r, dtype=np.float64)
    lo = np.maximum(r - step, 0.0)
    return (np.asarray(law(lo)) - np.asarray(law(r + step))) / (r + step - lo)


def moment(law: Union[Callable, SurvivalCurve], k: int = 1) -> float:
    """E[X^k] = integral of k r^{k-1} S(r) dr, to relative tolerance 1e-8.

    The upper limit is pushed out by doubling until S < 1e-14 (all laws here
    have Gaussian or exponential tails).
    """
    if isinstance(law, SurvivalCurve):
        g, v = law.grid, law.values
        integrand = v if k == 1 else k * g ** (k - 1) * v
        return float(np.trapezoid(integrand, g))
    upper = 1.0
    while float(law(upper)) > 1e-14:
        upper *= 2.0
        if upper > 1e9:
            raise NumericFailureError("survival does not decay; moment integral diverges")
    val, err = integrate.quad(
        lambda r: k * r ** (k - 1) * float(law(r)), 0.0, upper,
        epsabs=1e-12, epsrel=1e-8, limit=200,
    )
    if not math.isfinite(val) or (val > 0 and err > 1e-6 * max(val, 1e-12)):
        raise NumericFailureError(f"moment quadrature failed: value {val!r}, err {err!r}")
    return val
