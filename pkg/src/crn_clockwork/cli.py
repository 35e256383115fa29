"""Command-line front end: ``crn-clockwork <subcommand> [flags]``.

Exit codes: 0 success, 1 analysis failure, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .computation import compose_loop, compose_terminating_loop, staircase
from .crn import PolynomialOde, ReactionNetwork, network_to_polynomials, realize_network
from .dynamics import SolverConfig, Trace, integrate
from .errors import IntegrationError, NoOscillationError
from .oscillator import (
    EquilibriumKind,
    OscillatorConfig,
    build_oscillator,
    build_subsystem_xy,
    classify_initial,
    equilibrium_character,
    validate_clock,
    van_der_pol_2d,
)
from .periods import period_report, predict_periods, sweep_table

EXIT_OK, EXIT_ANALYSIS, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

SCENARIOS = ("standard", "vdp2d", "subsystem", "loop", "terminate")

DEFAULTS = {
    "scenario": "standard",
    "eps1": 1e-3,
    "eps2": 1e-3,
    "eta1": 0.1,
    "p": 3.0,
    "ell": 3.0,
    "x0": 5.0,
    "y0": 5.0,
    "u0": 0.0,
    "v0": 0.0,
    "s1": 0.0,
    "s2": 0.0,
    "s3": 1.0,
    "l": 4.0,
    "w0": 4.0,
    "eta3": 50.0,
    "t_end": 100.0,
    "rel_tol": 1e-8,
    "abs_tol": 1e-10,
    "sample": 0.01,
    "method": "Radau",
    "out": None,
    "format": None,
}


class InputError(Exception):
    pass


@dataclass
class ScenarioConfig:
    """Fully resolved run settings; defaults are the standard oscillator from (5, 5, 0, 0)."""

    scenario: str = "standard"
    oscillator: OscillatorConfig = field(default_factory=OscillatorConfig)
    initial: dict = field(default_factory=dict)
    t_end: float = 100.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    out: str | None = None
    format: str | None = None

    @classmethod
    def from_values(cls, v: dict) -> "ScenarioConfig":
        if v["scenario"] not in SCENARIOS:
            raise InputError(f"unknown scenario {v['scenario']!r}; choose from {', '.join(SCENARIOS)}")
        if not v["t_end"] > 0:
            raise InputError("t-end must be positive")
        try:
            osc = OscillatorConfig(v["eps1"], v["eps2"], v["eta1"], v["p"], v["ell"])
            solver = SolverConfig(v["rel_tol"], v["abs_tol"], sample_interval=v["sample"], method=v["method"])
        except ValueError as exc:
            raise InputError(str(exc)) from None
        keys = ("x0", "y0", "u0", "v0", "s1", "s2", "s3", "l", "w0", "eta3")
        initial = {k: float(v[k]) for k in keys}
        if any(initial[k] < 0 for k in keys):
            raise InputError("initial concentrations and parameters must be non-negative")
        fmt = v["format"]
        if fmt is None and v["out"]:
            fmt = "json" if str(v["out"]).endswith(".json") else "csv"
        return cls(v["scenario"], osc, initial, float(v["t_end"]), solver, v["out"], fmt or "csv")


def _resolve(args) -> ScenarioConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise InputError("config file must hold a flat JSON object")
        unknown = set(k.replace("-", "_") for k in doc) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        values.update({k.replace("-", "_"): val for k, val in doc.items()})
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    return ScenarioConfig.from_values(values)


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("model and solver")
    for name in ("eps1", "eps2", "eta1", "p", "ell", "x0", "y0", "u0", "v0"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--t-end", dest="t_end", type=float)
    g.add_argument("--rel-tol", dest="rel_tol", type=float)
    g.add_argument("--abs-tol", dest="abs_tol", type=float)
    g.add_argument("--sample", type=float, help="output sampling interval")
    g.add_argument("--method", choices=("Radau", "BDF", "LSODA"))
    g.add_argument("-o", "--out", help="output file (trace or report)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--config", help="flat JSON file of defaults; flags win")


def _add_loop_flags(p: argparse.ArgumentParser, terminating: bool):
    for name in ("s1", "s2", "s3"):
        p.add_argument(f"--{name}", type=float, help=f"initial {name}")
    if terminating:
        p.add_argument("--l", type=float, help="iteration target l")
        p.add_argument("--w0", type=float, help="initial counter w")
        p.add_argument("--eta3", type=float, help="counter rate constant")


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _write_trace(trace: Trace, sc: ScenarioConfig):
    if sc.out:
        if sc.format == "json":
            trace.to_json(sc.out)
        else:
            trace.to_csv(sc.out)


def _summary(trace: Trace) -> str:
    lines = [f"t in [{trace.times[0]:g}, {trace.times[-1]:g}], {len(trace)} samples"]
    for name in trace.species:
        col = trace[name]
        lines.append(f"  {name:>3}: min {col.min():.6g}  max {col.max():.6g}  final {col[-1]:.6g}")
    return "\n".join(lines)


def _warn_start(sc: ScenarioConfig):
    x0, y0 = sc.initial["x0"], sc.initial["y0"]
    ell = sc.oscillator.ell if sc.scenario != "vdp2d" else 3.0
    eq = equilibrium_character(ell).point
    if abs(x0 - eq[0]) < 1e-9 and abs(y0 - eq[1]) < 1e-9:
        print("warning: initial point is the unstable equilibrium", file=sys.stderr)


def run_scenario(sc: ScenarioConfig) -> Trace:
    i = sc.initial
    if sc.scenario == "vdp2d":
        system, s0 = van_der_pol_2d(sc.oscillator.eps1), (i["x0"], i["y0"])
    elif sc.scenario == "subsystem":
        system, s0 = build_subsystem_xy(sc.oscillator), (i["x0"], i["y0"])
    elif sc.scenario == "standard":
        system, s0 = build_oscillator(sc.oscillator), (i["x0"], i["y0"], i["u0"], i["v0"])
    else:
        return _composed(sc).simulate(sc.t_end, sc.solver)
    return integrate(system, s0, (0.0, sc.t_end), sc.solver)


def _composed(sc: ScenarioConfig):
    i = sc.initial
    osc = (i["x0"], i["y0"], i["u0"], i["v0"])
    s = (i["s1"], i["s2"], i["s3"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if sc.scenario == "loop":
            return compose_loop(sc.oscillator, s, osc)
        try:
            return compose_terminating_loop(sc.oscillator, s, i["l"], i["w0"], i["eta3"], osc)
        except ValueError as exc:
            raise InputError(str(exc)) from None


def cmd_simulate(args) -> int:
    sc = _resolve(args)
    _warn_start(sc)
    trace = run_scenario(sc)
    _write_trace(trace, sc)
    print(_summary(trace))
    return EXIT_OK


def cmd_analyze(args) -> int:
    sc = _resolve(args)
    cfg = sc.oscillator
    info = equilibrium_character(cfg.ell)
    if info.kind is not EquilibriumKind.OSCILLATORY:
        print(f"no oscillation: {info.kind.value} equilibrium at ({info.point[0]:g}, {info.point[1]:.6g})", file=sys.stderr)
        return EXIT_ANALYSIS
    _warn_start(sc)
    trace = integrate(build_oscillator(cfg), [sc.initial[k] for k in ("x0", "y0", "u0", "v0")], (0.0, sc.t_end), sc.solver)
    clock = validate_clock(trace, cfg)
    try:
        periods = period_report(cfg, trace).to_dict()
    except NoOscillationError as exc:
        periods = dict(period_report(cfg).to_dict(), error=str(exc))
    report = {
        "config": {k: getattr(cfg, k) for k in ("eps1", "eps2", "eta1", "p", "ell")},
        "clock": clock.to_dict(),
        "periods": periods,
    }
    _write(json.dumps(report, indent=2), sc.out)
    if not clock.passes:
        print(f"clock validation failed: {clock.reason}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


def cmd_classify(args) -> int:
    if args.x0 is None or args.y0 is None:
        raise InputError("classify needs --x0 and --y0")
    try:
        region = classify_initial(args.x0, args.y0, ell=args.ell if args.ell is not None else 3.0)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(region.value)
    return EXIT_OK


def cmd_realize(args) -> int:
    try:
        with open(args.input) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from None
    try:
        if args.invert:
            out = network_to_polynomials(ReactionNetwork.from_dict(doc)).to_dict()
        else:
            out = realize_network(PolynomialOde.from_dict(doc)).to_dict()
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed input: {exc}") from None
    _write(json.dumps(out, indent=2), args.out)
    return EXIT_OK


def cmd_demo_loop(args) -> int:
    sc = _resolve(args)
    sc.scenario = "loop"
    system = _composed(sc)
    trace = system.simulate(sc.t_end, sc.solver)
    steps = staircase(trace, sc.oscillator.p)
    if sc.out:
        _write_trace(trace, sc)
    report = {
        "s3": sc.initial["s3"],
        "staircase": [{"cycle": k + 1, "time": t, "s1": s} for k, (t, s) in enumerate(steps)],
        "final_s1": float(trace["s1"][-1]),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_demo_terminate(args) -> int:
    sc = _resolve(args)
    sc.scenario = "terminate"
    system = _composed(sc)
    trace = system.simulate(sc.t_end, sc.solver)
    if sc.out:
        _write_trace(trace, sc)
    report = {
        "l": sc.initial["l"],
        "w0": sc.initial["w0"],
        "eta3": sc.initial["eta3"],
        "final_s1": float(trace["s1"][-1]),
        "final_s2": float(trace["s2"][-1]),
        "final_w": float(trace["w"][-1]),
        "max_s1": float(trace["s1"].max()),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _sweep_one(cfg: OscillatorConfig, sc: ScenarioConfig, measure: bool):
    if not measure:
        return period_report(cfg)
    trace = integrate(build_oscillator(cfg), [sc.initial[k] for k in ("x0", "y0", "u0", "v0")], (0.0, sc.t_end), sc.solver)
    return period_report(cfg, trace)


def cmd_sweep(args) -> int:
    sc = _resolve(args)
    ells = args.ells or [sc.oscillator.ell]
    eta1s = args.eta1s or [sc.oscillator.eta1]
    try:
        cfgs = [sc.oscillator.replace(ell=e, eta1=h) for e in ells for h in eta1s]
        for c in cfgs:
            predict_periods(c.ell, c.eta1)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        threads = max(1, int(os.environ.get("CRN_CLOCKWORK_THREADS", os.cpu_count() or 1)))
    except ValueError:
        raise InputError("CRN_CLOCKWORK_THREADS must be an integer") from None
    with ThreadPoolExecutor(max_workers=min(threads, len(cfgs))) as pool:
        reports = list(pool.map(lambda c: _sweep_one(c, sc, not args.predict_only), cfgs))
    _write(sweep_table(reports), sc.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crn-clockwork", description="Chemical relaxation oscillator clocks and loop computation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a scenario and export the trace")
    p.add_argument("--scenario", choices=SCENARIOS)
    _add_common(p)
    _add_loop_flags(p, terminating=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="validate the clock and compare periods with predictions")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="which branch a start point (x0, y0) joins first")
    p.add_argument("--x0", type=float)
    p.add_argument("--y0", type=float)
    p.add_argument("--ell", type=float)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("realize", help="polynomial ODE JSON -> reaction network JSON")
    p.add_argument("input")
    p.add_argument("-o", "--out")
    p.add_argument("--invert", action="store_true", help="network JSON -> polynomial JSON instead")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("demo-loop", help="clock-driven s1 = s1 + s3 loop")
    _add_common(p)
    _add_loop_flags(p, terminating=False)
    p.set_defaults(func=cmd_demo_loop)

    p = sub.add_parser("demo-terminate", help="loop that stops once s1 reaches l")
    _add_common(p)
    _add_loop_flags(p, terminating=True)
    p.set_defaults(func=cmd_demo_terminate)

    p = sub.add_parser("sweep", help="predicted (and measured) phase durations over ell and eta1")
    _add_common(p)
    p.add_argument("--ells", type=float, nargs="+")
    p.add_argument("--eta1s", type=float, nargs="+")
    p.add_argument("--predict-only", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NoOscillationError as exc:
        print(f"no oscillation: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
