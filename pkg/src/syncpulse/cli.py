"""Command-line interface: ``syncpulse {trace,sweep,optimize,check,report}``.

All quantities are in scaled units (frequencies over ``omega_p``, times
times ``omega_p``). Passing ``--omega-p`` other than 1 declares the other
inputs to be in physical units; they are rescaled before anything runs.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .analysis import interaction_mode_report, optimize_interval, sweep
from .coherence import QuadratureConfig, trace
from .errors import ConvergenceError, DomainError, EnvelopeError, FlatBracketError, PreconditionError
from .oracle import random_cross_checks
from .spectral import Family, SpectralDensity

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

DEFAULTS = {
    "spectrum": "gaussian",
    "table": None,
    "omega_p": 1.0,
    "gamma": 0.15,
    "s": 3.0,
    "tau_s": None,
    "n_pulses": None,
    "t_max": 60.0,
    "dt": 0.01,
    "rel_tol": 1e-8,
    "tail_mass": 1e-10,
    "max_subdivisions": 50_000,
    "method": "auto",
    "output": None,
    "seed": 42,
    "tau_min": 0.5,
    "tau_max": 8.0,
    "tau_step": 0.05,
    "conv_tol": 1e-4,
    "n_max": 200,
    "bracket": None,
    "modes": 64,
    "cases": 200,
}

# keys holding times; multiplied by omega_p when inputs are unscaled
_TIME_KEYS = ("tau_s", "t_max", "dt", "tau_min", "tau_max", "tau_step")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p):
    g = p.add_argument_group("spectrum")
    g.add_argument("--spectrum", choices=[f.value for f in Family if f is not Family.TABULATED])
    g.add_argument("--table", help="CSV with header 'e,h' (scaled units); overrides --spectrum")
    g.add_argument("--omega-p", type=float, help="centre frequency of the inputs; 1 means already scaled")
    g.add_argument("--gamma", type=float, help="width gamma_p")
    g.add_argument("--s", type=float, help="mean boson number (total weight)")
    q = p.add_argument_group("quadrature")
    q.add_argument("--rel-tol", type=float)
    q.add_argument("--tail-mass", type=float)
    q.add_argument("--max-subdivisions", type=int)
    q.add_argument("--method", choices=["auto", "kernel", "direct"])
    p.add_argument("--config", help="JSON file with the same keys as the flags; flags win")
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="syncpulse", description="Pi-pulse decoherence suppression in a spin-boson model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trace", help="coherence intensity I(t) as CSV")
    _add_common(p)
    p.add_argument("--tau-s", type=float, help="pulse interval; omit for free decay")
    p.add_argument("--n-pulses", type=int, help="cap on pulses applied (0 = free decay)")
    p.add_argument("--t-max", type=float)
    p.add_argument("--dt", type=float)

    p = sub.add_parser("sweep", help="asymptotic peak value P over a pulse-interval grid as CSV")
    _add_common(p)
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-step", type=float)
    p.add_argument("--conv-tol", type=float)
    p.add_argument("--n-max", type=int)

    p = sub.add_parser("optimize", help="maximise P inside a bracket, JSON")
    _add_common(p)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--conv-tol", type=float)
    p.add_argument("--n-max", type=int)

    p = sub.add_parser("check", help="randomised discrete-mode cross-check, JSON")
    _add_common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--modes", type=int)
    p.add_argument("--cases", type=int)

    p = sub.add_parser("report", help="interaction-mode diagnostics, JSON")
    _add_common(p)
    return parser


def resolve_config(args) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in data.items():
            k = key.replace("-", "_")
            if k not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r}")
            cfg[k] = value
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
    omega = float(cfg["omega_p"])
    if not (math.isfinite(omega) and omega > 0):
        raise UsageError("--omega-p must be finite and > 0")
    if omega != 1.0:
        for k in _TIME_KEYS:
            if cfg[k] is not None:
                cfg[k] = float(cfg[k]) * omega
        if cfg["bracket"] is not None:
            cfg["bracket"] = [float(v) * omega for v in cfg["bracket"]]
    return cfg


def make_spectrum(cfg) -> SpectralDensity:
    if cfg["table"]:
        return SpectralDensity.from_csv(cfg["table"])
    try:
        family = Family(cfg["spectrum"])
    except ValueError:
        raise UsageError(f"unknown spectrum {cfg['spectrum']!r}") from None
    if family is Family.TABULATED:
        raise UsageError("use --table for tabulated spectra")
    return SpectralDensity.from_unscaled(family, cfg["omega_p"], cfg["gamma"], cfg["s"])


def make_quadrature(cfg) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=float(cfg["rel_tol"]), tail_mass=float(cfg["tail_mass"]),
                            max_subdivisions=int(cfg["max_subdivisions"]))


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _warn(msg):
    print(f"syncpulse: warning: {msg}", file=sys.stderr)


def _dump_json(obj, path):
    with _sink(path) as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_trace(cfg) -> int:
    sd = make_spectrum(cfg)
    t_max, dt = float(cfg["t_max"]), float(cfg["dt"])
    if not (math.isfinite(t_max) and t_max > 0 and math.isfinite(dt) and dt > 0):
        raise UsageError("--t-max and --dt must be > 0")
    n = int(math.floor(t_max / dt + 1e-9)) + 1
    grid = dt * np.arange(n)
    tau = cfg["tau_s"]
    n_pulses = cfg["n_pulses"]
    if n_pulses is not None and n_pulses < 0:
        raise UsageError("--n-pulses must be >= 0")
    tr = trace(sd, None if tau is None else float(tau), n_pulses, grid, make_quadrature(cfg), cfg["method"])
    bad = np.flatnonzero(~tr.converged)
    for i in bad:
        _warn(f"point t={tr.times[i]!r} did not converge (err={tr.error[i]!r})")
    with _sink(cfg["output"]) as fh:
        tr.write_csv(fh)
    return EXIT_OK


def _tau_grid(cfg):
    lo, hi, step = float(cfg["tau_min"]), float(cfg["tau_max"]), float(cfg["tau_step"])
    if not (lo > 0 and step > 0 and hi >= lo) or not all(map(math.isfinite, (lo, hi, step))):
        raise UsageError("empty or invalid tau range (need 0 < tau-min <= tau-max, tau-step > 0)")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def cmd_sweep(cfg) -> int:
    sd = make_spectrum(cfg)
    res = sweep(sd, _tau_grid(cfg), float(cfg["conv_tol"]), int(cfg["n_max"]), make_quadrature(cfg), cfg["method"])
    n_bad = int(np.sum(~res.converged))
    if n_bad:
        _warn(f"{n_bad} of {res.tau_grid.size} grid points did not converge within n_max={cfg['n_max']}")
    for m in res.maxima:
        print(f"syncpulse: local maximum tau_s={m.tau_s:.6f} P={m.P:.6g} prominence={m.prominence:.3g}",
              file=sys.stderr)
    with _sink(cfg["output"]) as fh:
        res.write_csv(fh)
    return EXIT_OK


def cmd_optimize(cfg) -> int:
    if cfg["bracket"] is None:
        raise UsageError("--bracket A B is required")
    sd = make_spectrum(cfg)
    res = optimize_interval(sd, cfg["bracket"], float(cfg["conv_tol"]), make_quadrature(cfg),
                            n_max=int(cfg["n_max"]), method=cfg["method"])
    out = res.to_dict()
    out["spectrum"] = sd.describe()
    _dump_json(out, cfg["output"])
    return EXIT_OK


def cmd_check(cfg) -> int:
    modes, cases = int(cfg["modes"]), int(cfg["cases"])
    if modes < 2 or cases < 1:
        raise UsageError("--modes must be >= 2 and --cases >= 1")
    reports = random_cross_checks(seed=int(cfg["seed"]), n_cases=cases, n_modes=modes)
    failures = [r.to_dict() for r in reports if not r.passed]
    summary = {
        "passed": not failures,
        "seed": int(cfg["seed"]),
        "n_modes": modes,
        "n_cases": cases,
        "n_failed": len(failures),
        "max_amplitude_discrepancy": max(r.amplitude_discrepancy for r in reports),
        "max_intensity_discrepancy": max(r.intensity_discrepancy for r in reports),
        "failures": failures,
    }
    _dump_json(summary, cfg["output"])
    verdict = "PASS" if not failures else "FAIL"
    print(f"syncpulse: check {verdict}: {cases - len(failures)}/{cases} schedules agree", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_NUMERIC


def cmd_report(cfg) -> int:
    sd = make_spectrum(cfg)
    rep = interaction_mode_report(sd, make_quadrature(cfg))
    if rep.diagnostic:
        _warn(rep.diagnostic)
    if rep.truncated_at is not None:
        _warn(f"second moment diverges; g is reported for the spectrum cut at e={rep.truncated_at:.6g}")
    _dump_json(rep.to_dict(), cfg["output"])
    return EXIT_OK


COMMANDS = {"trace": cmd_trace, "sweep": cmd_sweep, "optimize": cmd_optimize,
            "check": cmd_check, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, DomainError, PreconditionError) as exc:
        print(f"syncpulse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlatBracketError, ConvergenceError, EnvelopeError, ArithmeticError) as exc:
        print(f"syncpulse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"syncpulse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
