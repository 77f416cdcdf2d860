"""Command line entry point.

Examples::

    inflowqw simulate --n 100 --t-max 460 --format csv -o fig1.csv
    inflowqw mixing-time --n 100 --theta 3
    inflowqw sweep --command mixing-time --n-list 50,100,200,400 --theta 3

Parameters resolve as flags > ``--config`` JSON file > built-in defaults.
Exit status: 0 success, 2 usage error, 3 numeric failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .analysis import (
    compare_pulsation,
    detect_peaks,
    limit_distribution,
    mixing_scaling,
    mixing_time,
    pulsation_formula,
    pulsation_peak_value,
    pulsation_profile,
)
from .errors import ConfigError, NumericError
from .export import dumps_json, rows_to_csv, series_to_csv, series_to_json, write_text
from .model import ModelConfig, TailMode, evolve
from .reduced import Epsilon, reduced_series, stationary_state, nu_marked
from .spectral import BRANCHES, decompose, fit_perturbation, kato_coefficients

EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 2, 3, 4

COMMANDS = ("simulate", "reduced", "spectrum", "mixing-time", "pulsation", "sweep")
SWEEPABLE = ("mixing-time", "limit", "pulsation", "spectrum")

_COMMON = {"output": None, "format": None}
DEFAULTS = {
    "simulate": {"n": 100, "t_max": None, "marked": 0, "tail_mode": "source-sink",
                 "summary": None, **_COMMON},
    "reduced": {"n": 100, "t_max": None, "summary": None, **_COMMON},
    "spectrum": {"n": 100, "eps_list": None, **_COMMON},
    "mixing-time": {"n": 100, "theta": 3.0, "horizon_factor": 2.0, **_COMMON},
    "pulsation": {"n": 100, "t_max": None, "window": 1, "summary": None, **_COMMON},
    "sweep": {"command": "mixing-time", "n_list": [50, 100, 200, 400], "theta": 3.0,
              "horizon_factor": 2.0, "jobs": None, "summary": None, **_COMMON},
}
_DEFAULT_FORMAT = {"simulate": "csv", "reduced": "csv", "pulsation": "csv", "sweep": "csv",
                   "spectrum": "json", "mixing-time": "json"}
_METHOD = {"simulate": "full", "reduced": "reduced", "spectrum": "closed-form",
           "mixing-time": "closed-form", "pulsation": "reduced", "sweep": "closed-form"}


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inflowqw",
        description="Grover walk with constant inflow on the complete graph with one marked vertex",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with parameter values")
    sub = parser.add_subparsers(dest="cmd", required=True)
    S = argparse.SUPPRESS

    def common(p, series=False):
        p.add_argument("-o", "--output", default=S, help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=S)
        if series:
            p.add_argument("--summary", default=S, help="also write a JSON summary here")

    p = sub.add_parser("simulate", help="full arc-space simulation")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--t-max", dest="t_max", type=int, default=S,
                   help="time horizon (default: floor(N ln N))")
    p.add_argument("--marked", type=int, default=S)
    p.add_argument("--tail-mode", dest="tail_mode", choices=[m.value for m in TailMode], default=S)
    common(p, series=True)

    p = sub.add_parser("reduced", help="three-dimensional reduced recursion")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--t-max", dest="t_max", type=int, default=S)
    common(p, series=True)

    p = sub.add_parser("spectrum", help="eigen-data of T(eps) and perturbation coefficients")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--eps-list", dest="eps_list", type=_float_list, default=S)
    common(p)

    p = sub.add_parser("mixing-time", help="l2 mixing time t(theta)")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--theta", type=float, default=S)
    p.add_argument("--horizon-factor", dest="horizon_factor", type=float, default=S)
    common(p)

    p = sub.add_parser("pulsation", help="peaks of the marked probability in the early phase")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--t-max", dest="t_max", type=int, default=S, help="default: N")
    p.add_argument("--window", type=int, default=S)
    common(p, series=True)

    p = sub.add_parser("sweep", help="repeat an analysis over several N")
    p.add_argument("--command", choices=SWEEPABLE, default=S)
    p.add_argument("--n-list", dest="n_list", type=_int_list, default=S)
    p.add_argument("--theta", type=float, default=S)
    p.add_argument("--horizon-factor", dest="horizon_factor", type=float, default=S)
    p.add_argument("--jobs", type=int, default=S, help="worker processes (default: CPU count)")
    common(p, series=True)
    return parser


def resolve_params(cmd: str, flags: dict, config_path: str | None) -> dict:
    params = dict(DEFAULTS[cmd])
    if config_path:
        try:
            with open(config_path) as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{config_path}: invalid JSON ({exc})") from exc
        if not isinstance(cfg, dict):
            raise ConfigError(f"{config_path}: expected a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - set(params))
        if unknown:
            raise ConfigError(f"unknown parameter(s) for {cmd}: {', '.join(unknown)}")
        params.update(cfg)
    params.update(flags)
    _validate(cmd, params)
    return params


def _validate(cmd: str, p: dict) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    if p.get("format") is None:
        p["format"] = _DEFAULT_FORMAT[cmd]
    need(p["format"] in ("csv", "json"), f"format must be csv or json, got {p['format']!r}")
    if "n" in p:
        need(isinstance(p["n"], int) and p["n"] >= 3, f"--n must be an integer >= 3, got {p['n']!r}")
    if "t_max" in p:
        if p["t_max"] is None:
            n = p["n"]
            p["t_max"] = n if cmd == "pulsation" else int(math.floor(n * math.log(n)))
        need(isinstance(p["t_max"], int) and p["t_max"] >= 0, "--t-max must be a non-negative integer")
    if cmd == "pulsation":
        need(p["t_max"] >= p["n"], "pulsation needs --t-max >= N")
        need(isinstance(p["window"], int) and p["window"] >= 1, "--window must be >= 1")
    if "theta" in p:
        need(isinstance(p["theta"], (int, float)) and p["theta"] > 0, "--theta must be positive")
    if "horizon_factor" in p:
        need(p["horizon_factor"] >= 2, "--horizon-factor must be >= 2")
    if cmd == "simulate":
        need(0 <= p["marked"] < p["n"], "--marked must lie in [0, N)")
        need(p["tail_mode"] in [m.value for m in TailMode], f"unknown tail mode {p['tail_mode']!r}")
    if cmd == "sweep":
        need(p["command"] in SWEEPABLE, f"sweep command must be one of {SWEEPABLE}")
        need(len(p["n_list"]) > 0 and all(isinstance(n, int) and n >= 3 for n in p["n_list"]),
             "--n-list needs integers >= 3")
        if p["jobs"] is None:
            p["jobs"] = os.cpu_count() or 1
        need(p["jobs"] >= 1, "--jobs must be >= 1")
    if cmd == "spectrum" and p["eps_list"] is not None:
        need(all(0 < e <= 0.1 for e in p["eps_list"]), "--eps-list values must lie in (0, 0.1]")


def _summary(cmd: str, params: dict, results: dict) -> dict:
    shown = {k: v for k, v in params.items() if k not in ("output", "summary")}
    return {"command": cmd, "params": shown, "results": results,
            "method": _METHOD[cmd], "tool_version": __version__}


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_text(text, path)


# --- commands -----------------------------------------------------------------

def _run_series(cmd: str, p: dict) -> None:
    if cmd == "simulate":
        cfg = ModelConfig(p["n"], p["marked"], p["t_max"], TailMode(p["tail_mode"]))
        series = evolve(cfg)
    else:
        series = reduced_series(p["n"], p["t_max"])
    mu = nu_marked(stationary_state(Epsilon.from_n(p["n"])))
    results = {
        "rows": len(series),
        "nu_marked_final": series.nu_marked[-1],
        "stationary_nu_marked": mu,
        "norm_kn_final": series.norm_kn[-1],
        **{k: v for k, v in series.meta.items() if k not in ("marked",)},
    }
    if p["format"] == "csv":
        _emit(series_to_csv(series), p["output"])
    else:
        doc = _summary(cmd, p, {**results, "series": json.loads(series_to_json(series))})
        _emit(dumps_json(doc), p["output"])
    if p.get("summary"):
        write_text(dumps_json(_summary(cmd, p, results)), p["summary"])


def _spectrum_results(n: int, eps_list=None) -> dict:
    eps = Epsilon.from_n(n)
    d = decompose(eps)
    out = {
        "n": n,
        "eps": eps.value,
        "eigenvalues": {b: d.eigenvalues[k] for k, b in enumerate(BRANCHES)},
        "moduli": {b: abs(d.eigenvalues[k]) for k, b in enumerate(BRANCHES)},
        "spectral_radius": d.radius,
        "projections": {b: d.projections[k] for k, b in enumerate(BRANCHES)},
        "series_coefficients": {b: list(c) for b, c in kato_coefficients().items()},
    }
    if eps_list is not None:
        fits = {}
        for b in BRANCHES:
            f = fit_perturbation(b, eps_list)
            fits[b] = {"coeff1": f.coeff1, "coeff2": f.coeff2, "residual": f.residual,
                       "target1": f.target1, "target2": f.target2}
        out["fits"] = fits
    return out


def _run_spectrum(p: dict) -> None:
    res = _spectrum_results(p["n"], p["eps_list"])
    if p["format"] == "json":
        _emit(dumps_json(_summary("spectrum", p, res)), p["output"])
    else:
        rows = [(b, res["eigenvalues"][b].real, res["eigenvalues"][b].imag, res["moduli"][b])
                for b in BRANCHES]
        _emit(rows_to_csv(("branch", "re", "im", "modulus"), rows), p["output"])


def _run_mixing(p: dict) -> None:
    r = mixing_time(p["n"], float(p["theta"]), p["horizon_factor"])
    res = {**r.as_dict(), "certified_from": r.certified_from,
           "ratio_to_n_log_n": r.t_theta / (r.n_vertices * math.log(r.n_vertices))}
    if p["format"] == "json":
        _emit(dumps_json(_summary("mixing-time", p, res)), p["output"])
    else:
        keys = ("n", "theta", "t_theta", "horizon", "converged")
        _emit(rows_to_csv(keys, [[res[k] for k in keys]]), p["output"])


def _pulsation_results(n: int, t_max: int, window: int = 1):
    series = reduced_series(n, t_max)
    rep = detect_peaks(series, window)
    res = {
        "n": n,
        "first_peak": rep.peak_times[0] if rep.peak_times else None,
        "peaks": [[t, v] for t, v in rep.in_phase()],
        "fitted_period": rep.fitted_period,
        "predicted_period": rep.predicted_period,
        "predicted_first_peak": rep.predicted_first_peak,
        "spectral_period": rep.spectral_period,
        "formula_peak_value": pulsation_peak_value(n),
        "max_error_formula": compare_pulsation(n, n),
        "max_error_profile": compare_pulsation(n, n, pulsation_profile),
    }
    return series, rep, res


def _run_pulsation(p: dict) -> None:
    series, rep, res = _pulsation_results(p["n"], p["t_max"], p["window"])
    if p["format"] == "json":
        _emit(dumps_json(_summary("pulsation", p, res)), p["output"])
    else:
        t = series.t
        rows = zip(t, np.nan_to_num(series.nu_marked), rep.smoothed,
                   pulsation_formula(t, p["n"]), pulsation_profile(t, p["n"]))
        _emit(rows_to_csv(("t", "nu_marked", "nu_smoothed", "nu_formula", "nu_profile"),
                          [[int(a), float(b), float(c), float(d), float(e)]
                           for a, b, c, d, e in rows]), p["output"])
    if p.get("summary"):
        write_text(dumps_json(_summary("pulsation", p, res)), p["summary"])


def _sweep_job(args):
    what, n, theta, horizon_factor = args
    if what == "limit":
        mu, other = limit_distribution(n)
        return {"n": n, "mu_marked": mu, "mu_unmarked": other, "deviation": abs(mu - 0.5)}
    if what == "pulsation":
        _, _, res = _pulsation_results(n, n)
        return {k: res[k] for k in ("n", "first_peak", "fitted_period", "spectral_period",
                                    "predicted_period", "max_error_formula", "max_error_profile")}
    if what == "spectrum":
        res = _spectrum_results(n)
        return {"n": n, "eps": res["eps"], "spectral_radius": res["spectral_radius"],
                **{f"{b}_re": res["eigenvalues"][b].real for b in BRANCHES},
                **{f"{b}_im": res["eigenvalues"][b].imag for b in BRANCHES}}
    raise ConfigError(f"cannot sweep {what!r}")


def _run_sweep(p: dict) -> None:
    what, ns = p["command"], sorted(p["n_list"])
    if what == "mixing-time":
        sc = mixing_scaling(ns, float(p["theta"]), p["horizon_factor"], jobs=p["jobs"])
        rows = [{**r.as_dict(), "ratio": ratio} for r, ratio in zip(sc.results, sc.ratios)]
        x = np.array([n * math.log(n) for n in ns])
        y = np.array([r.t_theta for r in sc.results], dtype=float)
        extra = {"mean_ratio": sc.mean_ratio, "fitted_ratio": float(x @ y / (x @ x)),
                 "max_relative_spread": sc.max_relative_spread, "superlinear": sc.superlinear}
    else:
        args = [(what, n, p["theta"], p["horizon_factor"]) for n in ns]
        if p["jobs"] == 1 or len(ns) == 1:
            rows = [_sweep_job(a) for a in args]
        else:
            with ProcessPoolExecutor(max_workers=p["jobs"]) as pool:
                rows = list(pool.map(_sweep_job, args))
        extra = {}
    results = {"rows": rows, **extra}
    if p["format"] == "json":
        _emit(dumps_json(_summary("sweep", p, results)), p["output"])
    else:
        header = list(rows[0])
        _emit(rows_to_csv(header, [[r[k] for k in header] for r in rows]), p["output"])
    if p.get("summary"):
        write_text(dumps_json(_summary("sweep", p, results)), p["summary"])


def run(cmd: str, params: dict) -> None:
    if cmd in ("simulate", "reduced"):
        _run_series(cmd, params)
    elif cmd == "spectrum":
        _run_spectrum(params)
    elif cmd == "mixing-time":
        _run_mixing(params)
    elif cmd == "pulsation":
        _run_pulsation(params)
    elif cmd == "sweep":
        _run_sweep(params)
    else:
        raise ConfigError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("cmd", "config")}
    try:
        params = resolve_params(args.cmd, flags, args.config)
        run(args.cmd, params)
    except ConfigError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"{parser.prog}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"{parser.prog}: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
