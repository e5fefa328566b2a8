"""Command-line surface: run simulations, evaluate laws, emit curves,
histograms, and the machine-readable acceptance report.

Exit codes: 0 success, 2 usage/config error, 3 numeric failure (including
runaway trials), 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .distributions import (RankedDistribution, UrnModelSpec, make_log_atom,
                            make_sqrt_atom, make_uniform, mfold_scaling_of,
                            scaling_of)
from .dlp import (AGS, GS, DlpInstance, HazardCurve, averaged_hazard, hazard,
                  hazard_csv, sim_dlp_runtime)
from .embedding import sim_embedded_continuous
from .errors import (InvalidDistributionError, InvalidParamsError,
                     NumericFailureError, RunawayTrialError)
from .gof import histogram_csv, ks_against
from .graphs import PaConfig, PathConfig, default_pa_cap, sim_pa_collision, sim_path_run
from .laws import (LimitParams, SurvivalCurve, h_lower_poisson, survival_general,
                   survival_mfold, survival_prelimit_exact, survival_qcolor,
                   survival_repeat_cp)
from .urn import (sim_first_collision, sim_joint_collisions, sim_mfold_collision,
                  sim_repeat_time)

DEFAULT_SEED = acceptance.DEFAULT_SEED

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("COLLIDE_THREADS")
    return int(env) if env else 1


def _load_distribution(args) -> tuple[RankedDistribution, tuple]:
    """(distribution, limit atom profile) from the model flags."""
    chosen = [k for k in ("uniform", "sqrt_atom", "log_atom", "masses")
              if getattr(args, k, None) is not None]
    if len(chosen) != 1:
        raise InvalidDistributionError(
            "give exactly one of --uniform / --sqrt-atom / --log-atom / --masses")
    kind = chosen[0]
    if kind == "uniform":
        return make_uniform(args.uniform), ()
    if kind == "sqrt_atom":
        return make_sqrt_atom(args.sqrt_atom), (1.0 / math.sqrt(2.0),)
    if kind == "log_atom":
        return make_log_atom(args.log_atom), (1.0,)
    path = Path(args.masses)
    d = (RankedDistribution.load_json(path) if path.suffix == ".json"
         else RankedDistribution.load_masses_text(path))
    # no constructor knowledge: keep the finite-n profile as the atom limits
    return d, tuple(scaling_of(d).psi.tolist())


def _mix(args) -> tuple:
    if args.mix:
        return tuple(float(w) for w in args.mix.split(","))
    return tuple([1.0 / args.q] * args.q)


def _write_batch(batch, args, scale: float, law, label: str | None):
    out = Path(args.out)
    comment = f"reproduces: {args.figure_label}" if args.figure_label else label
    if args.format == "json":
        batch.save_json(out)
    else:
        batch.to_csv(out, header_comment=comment)
    times = batch.times if batch.times.ndim == 1 else batch.times[:, -1]
    if batch.censored is not None:
        times = times[~batch.censored]
    if law is not None:
        rep = ks_against(times * scale, law, allowance=args.allowance)
        rep.save_json(out.with_suffix(out.suffix + ".ks.json"))
        histogram_csv(times * scale, out.with_suffix(out.suffix + ".hist.csv"),
                      header_comment=comment, law=law)
        print(f"KS D={rep.statistic:.5f} threshold={rep.threshold:.5f} "
              f"{'PASS' if rep.passed else 'FAIL'}")
        return rep.passed
    return True


def _cmd_simulate_urn(args) -> int:
    d, atoms = _load_distribution(args)
    threads = _threads(args)
    law = None
    scale = 1.0
    if args.repeat:
        batch = sim_repeat_time(d, args.trials, args.seed, threads=threads)
        scale = scaling_of(d).s_n
        if args.law == "auto":
            law = lambda r: survival_repeat_cp(LimitParams(q=1, psi=atoms), r)
        label = f"repeat time, {d.label}"
    elif args.mfold:
        batch = sim_mfold_collision(d, args.q, args.mfold, args.trials,
                                    args.seed, threads=threads)
        prof = mfold_scaling_of(d, args.mfold)
        scale = prof.s_2m
        if args.law == "auto":
            params = LimitParams(q=args.q, m=args.mfold, psi=tuple(prof.psi_2m))
            law = lambda r: survival_mfold(params, r)
        label = f"{args.mfold}-fold collision, {d.label}, q={args.q}"
    elif args.continuous:
        spec = UrnModelSpec.from_shared(_mix(args), d)
        batch = sim_embedded_continuous(spec, args.trials, args.seed, threads=threads)
        if args.law == "auto":
            law = lambda t: survival_prelimit_exact(d, np.asarray(t, float), q=args.q)
        label = f"embedded continuous collision, {d.label}, q={args.q}"
    elif args.joint:
        spec = UrnModelSpec.from_shared(_mix(args), d)
        batch = sim_joint_collisions(spec, args.joint, args.trials, args.seed,
                                     threads=threads)
        scale = spec.s_n
        if args.law == "auto":
            if atoms:
                raise InvalidParamsError(
                    "no closed form for joint arrivals with atoms; omit --law")
            c = (1.0 - 1.0 / args.q)
            mth = args.joint
            law = lambda r: h_lower_poisson(mth, c * np.asarray(r) ** 2 / 2.0)
        label = f"first {args.joint} collisions, {d.label}, q={args.q}"
    else:
        spec = UrnModelSpec.from_shared(_mix(args), d)
        batch = sim_first_collision(spec, args.trials, args.seed, threads=threads)
        scale = spec.s_n
        if args.law == "auto":
            mix = _mix(args)
            if all(abs(w - mix[0]) < 1e-12 for w in mix):
                params = LimitParams(q=args.q, psi=atoms)
                law = lambda r: survival_qcolor(params, r)
            else:
                params = LimitParams(q=args.q, psi=atoms, mix=mix,
                                     phi=tuple([1.0] * args.q))
                law = lambda r: survival_general(params, r)
        label = f"first collision, {d.label}, q={args.q}"
    ok = _write_batch(batch, args, scale, law, label)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _cmd_simulate_dlp(args) -> int:
    inst = DlpInstance(n=args.n, x=args.x, variant=args.variant)
    batch = sim_dlp_runtime(inst, args.trials, args.seed, threads=_threads(args))
    law = None
    if args.law == "auto":
        law = lambda r: hazard(args.variant, args.x, r)
    ok = _write_batch(batch, args, 1.0 / math.sqrt(args.n), law,
                      f"dlp {args.variant} x={args.x} n={args.n}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _cmd_simulate_pa(args) -> int:
    palette = make_uniform(args.colors) if args.masses is None else \
        RankedDistribution.load_json(args.masses)
    cap = args.max_vertices or default_pa_cap(args.m, palette)
    cfg = PaConfig(m=args.m, palette=palette, trials=args.trials, max_vertices=cap)
    batch = sim_pa_collision(cfg, args.seed, threads=_threads(args))
    sum_p2 = float(np.sum(palette.masses ** 2))
    law = None
    if args.law == "auto":
        law = lambda r: np.exp(-args.m * np.asarray(r))
    print(f"censor rate: {float(np.mean(batch.censored)):.5f}")
    ok = _write_batch(batch, args, sum_p2, law,
                      f"pa collision, m={args.m}, {palette.label}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _cmd_simulate_path(args) -> int:
    palette = make_uniform(args.colors) if args.masses is None else \
        RankedDistribution.load_json(args.masses)
    cfg = PathConfig.from_palette(palette, args.m)
    batch = sim_path_run(cfg, args.trials, args.seed, threads=_threads(args))
    lam = float(np.sum(palette.masses ** cfg.m))
    law = None
    if args.law == "auto":
        law = lambda r: np.exp(-np.asarray(r))
    ok = _write_batch(batch, args, lam, law,
                      f"path run, m={args.m}, {palette.label}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _parse_floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",")) if text else ()


def _cmd_law(args) -> int:
    name = args.name
    grid_max, points = args.r_max, args.points
    if name in (GS, AGS):
        xs = args.x or [0.0]
        curves = [HazardCurve.from_instance(name, x, grid_max, points) for x in xs]
        hazard_csv(curves, args.out,
                   header_comment=f"reproduces: {args.figure_label}"
                   if args.figure_label else None)
        return EXIT_OK
    if name in ("gs-avg", "ags-avg"):
        variant = GS if name == "gs-avg" else AGS
        law = lambda r: averaged_hazard(variant, r)
    elif name == "qcolor":
        params = LimitParams(q=args.q, psi=_parse_floats(args.psi))
        law = lambda r: survival_qcolor(params, r)
    elif name == "cp":
        params = LimitParams(q=1, psi=_parse_floats(args.psi))
        law = lambda r: survival_repeat_cp(params, r)
    elif name == "mfold":
        params = LimitParams(q=args.q, m=args.m, psi=_parse_floats(args.psi))
        law = lambda r: survival_mfold(params, r)
    elif name == "general":
        mix = _parse_floats(args.mix) if args.mix else tuple([1.0 / args.q] * args.q)
        phi = _parse_floats(args.phi) if args.phi else tuple([1.0] * args.q)
        params = LimitParams(q=args.q, psi=_parse_floats(args.psi), mix=mix,
                             phi=phi, cross=args.cross)
        law = lambda r: survival_general(params, r)
    else:
        raise InvalidParamsError(f"unknown law {name!r}")
    curve = SurvivalCurve.from_law(law, grid_max, points)
    comment = f"reproduces: {args.figure_label}" if args.figure_label else None
    if args.format == "json":
        Path(args.out).write_text(json.dumps(
            {"law": name, "r": curve.grid.tolist(), "survival": curve.values.tolist()}))
    else:
        curve.to_csv(args.out, header_comment=comment)
    return EXIT_OK


def _cmd_report(args) -> int:
    threads = _threads(args)
    log = (lambda msg: print(msg, file=sys.stderr)) if not args.quiet else None
    only = args.only.split(",") if args.only else None
    if args.check_determinism:
        check = acceptance.run_determinism_check(args.seed, log=log)
        report = check["report"]
        report["determinism_identical"] = check["identical"]
        ok = report["all_passed"] and check["identical"]
    else:
        report = acceptance.run_suite(args.seed, threads=threads, only=only, log=log)
        ok = report["all_passed"]
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _add_common(p, needs_out=True):
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: COLLIDE_THREADS or 1)")
    if needs_out:
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--law", default=None, const="auto", nargs="?",
                   help="compare against the matching closed-form law "
                        "(writes .ks.json and .hist.csv next to --out)")
    p.add_argument("--allowance", type=float, default=0.0,
                   help="model-bias allowance added to the DKW band")
    p.add_argument("--figure-label", default=None,
                   help="label stamped into output header comments")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="collide",
        description="Collision-time simulators, limit laws, and validation reports.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo engine")
    simsub = sim.add_subparsers(dest="target", required=True)

    urn = simsub.add_parser("urn", help="urn collision / repeat-time engines")
    urn.add_argument("--uniform", type=int, default=None, metavar="N")
    urn.add_argument("--sqrt-atom", dest="sqrt_atom", type=int, default=None, metavar="N")
    urn.add_argument("--log-atom", dest="log_atom", type=int, default=None, metavar="N")
    urn.add_argument("--masses", default=None, help="distribution file (.json or text)")
    urn.add_argument("--q", type=int, default=2)
    urn.add_argument("--mix", default=None, help="comma color weights (implies q)")
    urn.add_argument("--repeat", action="store_true", help="single-color repeat time")
    urn.add_argument("--joint", type=int, default=None, metavar="M")
    urn.add_argument("--mfold", type=int, default=None, metavar="M")
    urn.add_argument("--continuous", action="store_true",
                     help="continuous-time embedded race")
    _add_common(urn)
    urn.set_defaults(func=_cmd_simulate_urn)

    dlp = simsub.add_parser("dlp", help="idealized DLP running times")
    dlp.add_argument("--variant", choices=(GS, AGS), required=True)
    dlp.add_argument("--x", type=float, default=0.0)
    dlp.add_argument("--n", type=int, default=10 ** 4)
    _add_common(dlp)
    dlp.set_defaults(func=_cmd_simulate_dlp)

    pa = simsub.add_parser("pa", help="preferential-attachment coloring collisions")
    pa.add_argument("--m", type=int, default=2)
    pa.add_argument("--colors", type=int, default=1000)
    pa.add_argument("--masses", default=None)
    pa.add_argument("--max-vertices", dest="max_vertices", type=int, default=None)
    _add_common(pa)
    pa.set_defaults(func=_cmd_simulate_pa)

    path_p = simsub.add_parser("path", help="runs of equal colors on the path")
    path_p.add_argument("--m", type=int, default=2)
    path_p.add_argument("--colors", type=int, default=1000)
    path_p.add_argument("--masses", default=None)
    _add_common(path_p)
    path_p.set_defaults(func=_cmd_simulate_path)

    law = sub.add_parser("law", help="evaluate a closed-form law on a grid")
    law.add_argument("name", choices=("qcolor", "cp", "general", "mfold",
                                      GS, AGS, "gs-avg", "ags-avg"))
    law.add_argument("--q", type=int, default=2)
    law.add_argument("--m", type=int, default=1)
    law.add_argument("--psi", default="", help="comma atom limits")
    law.add_argument("--mix", default=None)
    law.add_argument("--phi", default=None)
    law.add_argument("--cross", type=float, default=None)
    law.add_argument("--x", type=float, action="append", default=None,
                     help="instance parameter (repeatable, gs/ags only)")
    law.add_argument("--r-max", dest="r_max", type=float, default=6.0)
    law.add_argument("--points", type=int, default=601)
    law.add_argument("--out", required=True)
    law.add_argument("--format", choices=("csv", "json"), default="csv")
    law.add_argument("--figure-label", default=None)
    law.set_defaults(func=_cmd_law)

    rep = sub.add_parser("report", help="run the acceptance suite")
    rep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    rep.add_argument("--threads", type=int, default=None)
    rep.add_argument("--only", default=None, help="comma-separated criterion names")
    rep.add_argument("--out", default=None)
    rep.add_argument("--check-determinism", dest="check_determinism",
                     action="store_true",
                     help="rerun the suite under two thread counts and compare bytes")
    rep.add_argument("--quiet", action="store_true")
    rep.set_defaults(func=_cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidDistributionError, InvalidParamsError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailureError, RunawayTrialError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
