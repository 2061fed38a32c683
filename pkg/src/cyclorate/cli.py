"""Command line interface: simulate, periodogram, fit, experiment.

Exit codes: 0 success, 2 parse/config error, 3 numerical failure (singular
coefficient system), 4 frequency cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from .coefficients import SingularGramError, fit_coefficients, reconstruct_rate
from .estimator import as_event_series
from .experiments import run_convergence, run_dynrange, run_sawtooth
from .periodogram import evaluate_periodogram
from .rates import RateModel, SawtoothRate, preset
from .recovery import CapExceededError, RecoveryConfig, run_bic_recovery, run_threshold_recovery
from .simulate import EventSeries, RngStream, simulate_nhpp
from .windows import WindowSpec

_WINDOWS = {"hann": "hann", "rect": "rectangle", "cos4": "cos4"}
_MODES = {"tau": "tau", "tau-xi": "tau_xi", "bic": "bic"}


def _add_pipeline_flags(p):
    p.add_argument("--window", choices=sorted(_WINDOWS), default="hann")
    p.add_argument("--mode", choices=sorted(_MODES), default="tau-xi")
    p.add_argument("--band", type=float, default=1.0, help="frequency search limit B")
    p.add_argument("--radius", type=float, default=3.0,
                   help="exclusion radius in units of 1/T")
    p.add_argument("--xi", type=float, default=1e-4)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=4.0)
    p.add_argument("--oversample", type=int, default=16)
    p.add_argument("--noise-replicates", type=int, default=100)
    p.add_argument("--raw-periodogram", action="store_true",
                   help="skip centralization of the periodogram")
    p.add_argument("--sup-coefficient", type=float, default=None,
                   help="override the threshold coefficient on sup|H|")
    p.add_argument("--noise-coefficient", type=float, default=None,
                   help="override the threshold coefficient on the noise level")


def _config_from_args(args):
    return RecoveryConfig(
        band=args.band, window=_WINDOWS[args.window], mode=_MODES[args.mode],
        radius_factor=args.radius, xi=args.xi, alpha=args.alpha, beta=args.beta,
        gamma=args.gamma, oversample=args.oversample,
        centralized=not args.raw_periodogram,
        noise_replicates=args.noise_replicates,
        sup_coefficient=args.sup_coefficient,
        noise_coefficient=args.noise_coefficient,
    )


def _load_rate(args):
    if args.preset:
        params = {}
        for kv in args.preset_param or []:
            key, _, value = kv.partition("=")
            params[key] = float(value)
        if args.preset == "sawtooth" and not params:
            return SawtoothRate()
        if args.preset == "convergence":
            params.setdefault("horizon", args.horizon)
            params.setdefault("seed", args.seed)
        return preset(args.preset, **params)
    if args.model:
        return RateModel.from_json(pathlib.Path(args.model).read_text())
    raise ValueError("either --preset or --model is required")


def _cmd_simulate(args):
    rate = _load_rate(args)
    if args.horizon is None:
        raise ValueError("--horizon is required")
    events = simulate_nhpp(rate, args.horizon, RngStream(args.seed))
    events.write(args.out)
    print(f"wrote {len(events)} events to {args.out}")
    return 0


def _cmd_periodogram(args):
    events = EventSeries.read(args.events)
    window = WindowSpec(_WINDOWS[args.window], events.horizon)
    grid = evaluate_periodogram(events, window, args.band, args.oversample,
                                centralized=not args.raw_periodogram)
    grid.to_csv(args.out)
    print(f"wrote {len(grid.frequencies)} grid points to {args.out}")
    return 0


def _cmd_fit(args):
    events = EventSeries.read(args.events)
    cfg = _config_from_args(args)
    rng = RngStream(args.seed)
    if cfg.mode == "bic":
        freq_set = run_bic_recovery(events, cfg)
    else:
        freq_set = run_threshold_recovery(events, cfg, rng)
    fit = fit_coefficients(events, freq_set)
    model = reconstruct_rate(fit)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(model.to_json(indent=2) + "\n")
    (out / "frequencies.json").write_text(freq_set.to_json(indent=2) + "\n")
    (out / "coefficients.json").write_text(fit.to_json(indent=2) + "\n")
    window = WindowSpec(cfg.window, events.horizon)
    grid = evaluate_periodogram(events, window, cfg.band, cfg.oversample,
                                centralized=cfg.centralized)
    grid.to_csv(out / "spectrum.csv")

    if args.gamma_id:
        alt = fit_coefficients(events, freq_set, gamma_identity=True)
        (out / "coefficients_identity.json").write_text(alt.to_json(indent=2) + "\n")
    if args.period:
        _write_profile(out / "profile.csv", model, args.period, args.profile_bins)
    print(f"recovered {len(freq_set)} positive frequencies -> {out}")
    return 0


def _write_profile(path, model, period, bins):
    import csv as _csv

    t = np.arange(bins) * (period / bins)
    values = np.asarray(model.evaluate(t))
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["time_in_period", "rate"])
        for ti, vi in zip(t, values):
            writer.writerow([repr(float(ti)), repr(float(vi))])


def _cmd_experiment(args):
    common = dict(seed=args.seed, jobs=args.jobs, replicates=args.replicates)
    if args.name == "convergence":
        kwargs = dict(common)
        if args.t_ladder:
            kwargs["t_ladder"] = tuple(float(x) for x in args.t_ladder.split(","))
        if args.g_rules:
            kwargs["g_rules"] = tuple(args.g_rules.split(","))
        if args.replicates is None:
            kwargs.pop("replicates")
        report = run_convergence(**kwargs)
    elif args.name == "sawtooth":
        kwargs = dict(common)
        if args.replicates is None:
            kwargs.pop("replicates")
        report = run_sawtooth(**kwargs)
    elif args.name == "dynrange":
        kwargs = dict(common)
        if args.dynamic_ranges:
            kwargs["ranges"] = tuple(float(x) for x in args.dynamic_ranges.split(","))
        if args.replicates is None:
            kwargs.pop("replicates")
        report = run_dynrange(**kwargs)
    else:
        raise ValueError(f"unknown experiment {args.name!r}")
    paths = report.write(args.out_dir)
    print(f"{args.name}: {len(report.records)} replicates in {report.runtime:.1f}s")
    for p in paths:
        print(f"  {p}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="cyclorate",
                                description="cyclic arrival-rate estimation")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw events from a rate model")
    sim.add_argument("--preset", choices=["convergence", "sawtooth", "lunar"])
    sim.add_argument("--preset-param", action="append", metavar="KEY=VALUE")
    sim.add_argument("--model", help="rate model JSON file")
    sim.add_argument("--horizon", type=float, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    per = sub.add_parser("periodogram", help="export the periodogram grid")
    per.add_argument("events")
    per.add_argument("--window", choices=sorted(_WINDOWS), default="hann")
    per.add_argument("--band", type=float, default=1.0)
    per.add_argument("--oversample", type=int, default=16)
    per.add_argument("--raw-periodogram", action="store_true")
    per.add_argument("--out", required=True)
    per.set_defaults(func=_cmd_periodogram)

    fit = sub.add_parser("fit", help="recover frequencies and fit the rate")
    fit.add_argument("events")
    _add_pipeline_flags(fit)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--gamma-id", action="store_true",
                     help="also emit the identity-Gram baseline coefficients")
    fit.add_argument("--period", type=float, default=None,
                     help="emit a periodic rate profile CSV with this period")
    fit.add_argument("--profile-bins", type=int, default=168)
    fit.add_argument("--out-dir", required=True)
    fit.set_defaults(func=_cmd_fit)

    exp = sub.add_parser("experiment", help="run a simulation study")
    exp.add_argument("name", choices=["convergence", "sawtooth", "dynrange"])
    exp.add_argument("--replicates", type=int, default=None)
    exp.add_argument("--t-ladder", default=None, help="comma-separated horizons")
    exp.add_argument("--g-rules", default=None,
                     help="comma-separated rules among 6, T^1/6, T^1/2")
    exp.add_argument("--dynamic-ranges", default=None, help="comma-separated r values")
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--jobs", type=int, default=1)
    exp.add_argument("--out-dir", required=True)
    exp.set_defaults(func=_cmd_experiment)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SingularGramError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
