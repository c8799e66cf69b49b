"""Command-line interface.

Subcommands::

    evolve          time series of one state under either engine
    scan-xi         separability indicator over a (Werner F, time) grid
    curve           concurrence along a time grid for one state
    event           locate sudden death / delayed onset of entanglement
    longtime        stationary entanglement for a batch of states
    oracle-compare  closed form vs numeric integration, with threshold
    validate        density-matrix diagnostics for a state or file

Times are the dimensionless product ``gamma_decay * t`` (the CLI pins
``gamma_decay = 1``); the shift is given as the ratio ``--gamma-ratio``
and the bare frequency as ``--omega0-ratio``.  Exit codes: 0 success,
1 usage error, 2 physics/validity failure, 3 oracle mismatch.

Flags override values from an optional ``--config`` JSON file of
``{"flag-name": value}`` defaults; environment variables are not read.
Outputs are deterministic: the same configuration writes byte-identical
files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np

from . import qstate
from .analytic import ModelParams, UnsupportedStateError, evolve_x
from .entangle import concurrence_x, entanglement_report, xi
from .lindblad import (
    IntegrationError,
    integrate_grid,
    trajectory_to_csv,
    trajectory_to_json,
)
from .qstate import InvalidStateError, XState, as_x_state, from_x_params
from .scenarios import (
    ENGINE_ANALYTIC,
    ENGINE_NUMERIC,
    SweepSpec,
    disentanglement_time,
    evolution_series,
    longtime_report,
    onset_time,
    saturation_time,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2
EXIT_MISMATCH = 3

FAMILIES = ("werner", "rho_tilde", "rho_tilde_eps", "custom_x", "custom_full")

log = logging.getLogger("dickepair")


class UsageError(Exception):
    """Bad or missing flags; maps to exit code 1."""


class OracleMismatchError(Exception):
    """Engines disagree beyond the threshold; maps to exit code 3."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a command run needs, resolved from flags and config.

    ``states`` holds ``(label, family, param, state)`` tuples where
    ``state`` is an :class:`XState` or a raw 4x4 matrix (``custom_full``).
    """

    command: str
    states: tuple
    params: ModelParams
    t_max: float
    n_steps: int
    dt: float
    engine: str
    out_format: str
    output: str | None
    jobs: int


def _fmt(value: float) -> str:
    return f"{value:.17g}"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_state_flags(sub):
    group = sub.add_argument_group("initial state")
    group.add_argument("--family", choices=FAMILIES, help="state family")
    group.add_argument("--F", type=float, help="werner: singlet fraction in [0, 1]")
    group.add_argument("--a", type=float, help="rho_tilde(_eps): double-excitation knob")
    group.add_argument("--eps", type=float, help="rho_tilde_eps: singlet admixture")
    for name in ("rho11", "rho22", "rho33", "rho44"):
        group.add_argument(f"--{name}", type=float, help=f"custom_x: population {name}")
    group.add_argument("--rho23-re", type=float, default=0.0, help="custom_x: Re rho23")
    group.add_argument("--rho23-im", type=float, default=0.0, help="custom_x: Im rho23")
    group.add_argument("--state-file", help="custom_full: JSON file with the matrix")


def _add_model_flags(sub):
    group = sub.add_argument_group("model")
    group.add_argument(
        "--gamma-ratio", type=float, default=0.0,
        help="collective shift over decay rate (default 0)",
    )
    group.add_argument(
        "--omega0-ratio", type=float, default=0.0,
        help="bare frequency over decay rate (default 0; inert on X states)",
    )


def _add_grid_flags(sub, *, t_max=10.0, steps=500, dt=1e-3):
    group = sub.add_argument_group("time grid")
    group.add_argument(
        "--gamma-t-max", type=float, default=t_max,
        help=f"grid end, in units of 1/gamma_decay (default {t_max:g})",
    )
    group.add_argument(
        "--steps", type=int, default=steps,
        help=f"number of grid points (default {steps})",
    )
    group.add_argument(
        "--dt", type=float, default=dt,
        help=f"integrator step for the numeric engine (default {dt:g})",
    )


def _add_common_flags(sub):
    sub.add_argument(
        "--engine", choices=(ENGINE_ANALYTIC, ENGINE_NUMERIC),
        default=ENGINE_ANALYTIC, help="evolution engine (default analytic)",
    )
    sub.add_argument("-o", "--output", help="output path (default: stdout)")
    sub.add_argument(
        "--format", choices=("csv", "json"), default="csv", dest="out_format",
        help="output format (default csv)",
    )
    sub.add_argument(
        "--jobs", type=int, default=None,
        help="worker processes for sweeps (default: CPU count)",
    )
    sub.add_argument("--config", help="JSON file of default flag values")
    sub.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = _Parser(
        prog="dickepair",
        description="Entanglement dynamics of two atoms decaying collectively.",
    )
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)
    registry = {}

    def command(name, help_text, **grid_kw):
        sub = subs.add_parser(name, help=help_text)
        registry[name] = sub
        _add_state_flags(sub)
        _add_model_flags(sub)
        _add_grid_flags(sub, **grid_kw)
        _add_common_flags(sub)
        return sub

    command("evolve", "time series of one state", steps=201)
    curve = command("curve", "concurrence along a time grid")
    curve.add_argument(
        "--saturation-tol", type=float, default=1e-6,
        help="settling threshold for the reported saturation time (default 1e-6)",
    )

    scan = command("scan-xi", "xi over a (werner F, time) grid")
    scan.add_argument("--f-list", help="comma-separated werner fractions")
    scan.add_argument("--f-min", type=float, default=0.0, help="sweep start (default 0)")
    scan.add_argument("--f-max", type=float, default=1.0, help="sweep end (default 1)")
    scan.add_argument("--f-count", type=int, default=21, help="sweep size (default 21)")

    event = command("event", "locate sudden death or delayed onset", t_max=20.0)
    event.add_argument(
        "--kind", choices=("auto", "death", "onset"), default="auto",
        help="event to search for (default: pick from the initial verdict)",
    )
    event.add_argument(
        "--scan-samples", type=int, default=1000,
        help="pre-scan density before bisection (default 1000)",
    )
    event.add_argument(
        "--bracket-tol", type=float, default=1e-10,
        help="bisection bracket width target (default 1e-10)",
    )

    longtime = command("longtime", "stationary entanglement for a state batch")
    longtime.add_argument(
        "--state", action="append", dest="state_specs", metavar="SPEC",
        help="state spec like werner:0.75, rho_tilde:0.5, rho_tilde_eps:0.3:0.01, "
             "custom_x:p11:p22:p33:p44[:re[:im]]; repeatable",
    )

    oracle = command("oracle-compare", "closed form vs numeric integration", steps=201)
    oracle.add_argument(
        "--threshold", type=float, default=1e-7,
        help="max tolerated deviation (default 1e-7)",
    )

    val = command("validate", "density-matrix diagnostics")
    val.add_argument("--tol-herm", type=float, default=1e-10, help="hermiticity tolerance")
    val.add_argument("--tol-trace", type=float, default=1e-10, help="trace tolerance")
    val.add_argument("--tol-psd", type=float, default=1e-9, help="positivity tolerance")

    return parser, registry


def _apply_config(argv: list[str], registry: dict) -> None:
    """Load --config defaults into the chosen subcommand's parser."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file path")
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return
    if not argv or argv[0] not in registry:
        raise UsageError("--config requires a subcommand")
    sub = registry[argv[0]]
    try:
        with open(path, encoding="utf-8") as fh:
            mapping = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(mapping, dict):
        raise UsageError("config file must hold a JSON object of flag defaults")

    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in mapping.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"config key {key!r} is not a flag of {argv[0]!r}")
        value = raw
        if action.type is not None and value is not None:
            try:
                value = action.type(str(raw))
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        if action.choices is not None and value not in action.choices:
            raise UsageError(
                f"config key {key!r} must be one of {sorted(action.choices)}"
            )
        defaults[dest] = value
    sub.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# state construction
# ---------------------------------------------------------------------------

def _require(args, flag):
    value = getattr(args, flag.lstrip("-").replace("-", "_"))
    if value is None:
        raise UsageError(f"--family {args.family} needs {flag}")
    return value


def _state_from_flags(args, *, strict: bool = True):
    """Build (label, family, param, state) from the state flag group."""
    family = args.family
    if family is None:
        raise UsageError("choose an initial state with --family")
    if family == "werner":
        f = _require(args, "--F")
        return (f"werner:{f:g}", family, _fmt(f), qstate.werner(f))
    if family == "rho_tilde":
        a = _require(args, "--a")
        return (f"rho_tilde:{a:g}", family, _fmt(a), qstate.rho_tilde(a))
    if family == "rho_tilde_eps":
        a = _require(args, "--a")
        eps = _require(args, "--eps")
        label = f"rho_tilde_eps:{a:g}:{eps:g}"
        return (label, family, f"{_fmt(a)}:{_fmt(eps)}", qstate.rho_tilde_eps(a, eps))
    if family == "custom_x":
        pops = [_require(args, f"--{name}") for name in ("rho11", "rho22", "rho33", "rho44")]
        x = XState(*pops, complex(args.rho23_re, args.rho23_im))
        if strict:
            from_x_params(x)
        return ("custom_x", family, "", x)
    # custom_full
    path = _require(args, "--state-file")
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from exc
    if "matrix" in payload:
        state = qstate.density_matrix_from_dict(payload)
    elif "rho11" in payload:
        state = qstate.x_state_from_dict(payload)
    else:
        raise UsageError(f"state file {path} has neither 'matrix' nor X-state fields")
    return ("custom_full", family, "", state)


def _parse_state_spec(text: str):
    """Parse a longtime --state spec like 'werner:0.75' into (label, XState)."""
    parts = text.split(":")
    family, params = parts[0], parts[1:]
    try:
        values = [float(p) for p in params]
    except ValueError as exc:
        raise UsageError(f"bad state spec {text!r}: {exc}") from exc
    try:
        if family == "werner" and len(values) == 1:
            return text, qstate.werner(values[0])
        if family == "rho_tilde" and len(values) == 1:
            return text, qstate.rho_tilde(values[0])
        if family == "rho_tilde_eps" and len(values) == 2:
            return text, qstate.rho_tilde_eps(*values)
        if family == "custom_x" and 4 <= len(values) <= 6:
            coherence = complex(*(values[4:] + [0.0, 0.0])[:2])
            x = XState(*values[:4], coherence)
            from_x_params(x)
            return text, x
    except InvalidStateError:
        raise
    raise UsageError(f"bad state spec {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise UsageError(f"bad float list {text!r}: {exc}") from exc
    if not values:
        raise UsageError(f"empty float list {text!r}")
    return values


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _open_output(path):
    if path is None or path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")

SERIES_COLUMNS = (
    "family", "param", "gamma_t",
    "rho11", "rho22", "rho33", "rho44", "rho23_re", "rho23_im",
    "concurrence", "xi",
)

TABLE_COLUMNS = ("family", "param", "gamma_t", "xi", "concurrence")


def _series_row(family, param, gt, x: XState):
    return (
        family, param, _fmt(gt),
        _fmt(x.rho11), _fmt(x.rho22), _fmt(x.rho33), _fmt(x.rho44),
        _fmt(x.rho23.real), _fmt(x.rho23.imag),
        _fmt(concurrence_x(x)), _fmt(xi(x)),
    )


def _write_csv(cfg: RunConfig, columns, rows) -> None:
    with _open_output(cfg.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def _write_json(cfg: RunConfig, payload: dict) -> None:
    with _open_output(cfg.output) as fh:
        fh.write(json.dumps(payload, indent=2))
        fh.write("\n")


def _json_header(schema: str, cfg: RunConfig) -> dict:
    return {
        "schema": schema,
        "engine": cfg.engine,
        "basis_order": list(qstate.BASIS_LABELS),
        "model": {
            "gamma_decay": cfg.params.gamma_decay,
            "gamma_shift": cfg.params.gamma_shift,
            "omega0": cfg.params.omega0,
        },
    }


def _emit_rows(cfg: RunConfig, schema: str, columns, rows, extra=None) -> None:
    if cfg.out_format == "csv":
        _write_csv(cfg, columns, rows)
        return
    payload = _json_header(schema, cfg)
    if extra:
        payload.update(extra)
    payload["columns"] = list(columns)
    payload["rows"] = [list(row) for row in rows]
    _write_json(cfg, payload)


def _sweep_spec(cfg: RunConfig, f_values=()) -> SweepSpec:
    return SweepSpec(
        f_values=tuple(f_values),
        t_max=cfg.t_max,
        n_steps=cfg.n_steps,
        params=cfg.params,
        engine=cfg.engine,
        dt=cfg.dt,
    )


def _validated_series(rho0: XState, spec: SweepSpec):
    series = evolution_series(rho0, spec)
    for gt, state in series:
        report = qstate.validate(state)
        if not report.passed:
            raise IntegrationError(gt, report)
    return series


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_evolve(cfg: RunConfig, args) -> int:
    label, family, param, state = cfg.states[0]
    if not isinstance(state, XState):
        try:
            state = as_x_state(state)
        except InvalidStateError:
            if cfg.engine == ENGINE_ANALYTIC:
                raise UnsupportedStateError(
                    "closed form needs an X-shaped matrix; "
                    "use --engine numeric for general states"
                ) from None
            traj = integrate_grid(
                state, cfg.params, cfg.t_max, cfg.n_steps, cfg.dt
            )
            if cfg.out_format == "csv":
                with _open_output(cfg.output) as fh:
                    trajectory_to_csv(traj, fh)
            else:
                _write_json(cfg, trajectory_to_json(traj))
            return EXIT_OK
    series = _validated_series(state, _sweep_spec(cfg))
    rows = [_series_row(family, param, gt, x) for gt, x in series]
    _emit_rows(cfg, "dickepair/evolution-v1", SERIES_COLUMNS, rows,
               extra={"state": label})
    return EXIT_OK


def cmd_curve(cfg: RunConfig, args) -> int:
    label, family, param, state = cfg.states[0]
    x = state if isinstance(state, XState) else as_x_state(state)
    spec = _sweep_spec(cfg)
    series = evolution_series(x, spec)
    rows = [
        (family, param, _fmt(gt), _fmt(xi(s)), _fmt(concurrence_x(s)))
        for gt, s in series
    ]
    extra = {"state": label}
    if cfg.out_format == "json":
        sat = saturation_time(x, spec, tol=args.saturation_tol)
        extra["saturation_gamma_t"] = sat
    _emit_rows(cfg, "dickepair/curve-v1", TABLE_COLUMNS, rows, extra=extra)
    return EXIT_OK


def _scan_task(task):
    f, t_max, n_steps, gamma_shift, omega0, engine, dt = task
    spec = SweepSpec(
        f_values=(f,), t_max=t_max, n_steps=n_steps,
        params=ModelParams(1.0, gamma_shift, omega0), engine=engine, dt=dt,
    )
    series = evolution_series(qstate.werner(f), spec)
    return [
        ("werner", _fmt(f), _fmt(gt), _fmt(xi(s)), _fmt(concurrence_x(s)))
        for gt, s in series
    ]


def cmd_scan_xi(cfg: RunConfig, args) -> int:
    if args.f_list is not None:
        f_values = _parse_float_list(args.f_list)
    else:
        if args.f_count < 1:
            raise UsageError("--f-count must be positive")
        f_values = tuple(np.linspace(args.f_min, args.f_max, args.f_count))
    for f in f_values:
        if not 0.0 <= f <= 1.0:
            raise InvalidStateError(f"Werner fraction must lie in [0, 1], got {f}")
    tasks = [
        (f, cfg.t_max, cfg.n_steps, cfg.params.gamma_shift, cfg.params.omega0,
         cfg.engine, cfg.dt)
        for f in f_values
    ]
    if cfg.jobs > 1 and len(tasks) > 1:
        log.info("scanning %d fractions on %d workers", len(tasks), cfg.jobs)
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_scan_task, tasks))
    else:
        chunks = [_scan_task(task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]
    _emit_rows(cfg, "dickepair/scan-xi-v1", TABLE_COLUMNS, rows)
    return EXIT_OK


def cmd_event(cfg: RunConfig, args) -> int:
    label, family, param, state = cfg.states[0]
    x = state if isinstance(state, XState) else as_x_state(state)
    kind = args.kind
    if kind == "auto":
        kind = "death" if entanglement_report(x).verdict == "entangled" else "onset"
    finder = disentanglement_time if kind == "death" else onset_time
    event = finder(
        x, cfg.params, cfg.t_max,
        n_scan=args.scan_samples, bracket_tol=args.bracket_tol,
    )
    if cfg.out_format == "csv":
        row = (
            event.kind,
            "" if event.t_star is None else _fmt(event.t_star),
            _fmt(event.bracket_width),
        )
        _write_csv(cfg, ("kind", "t_star", "bracket_width"), [row])
    else:
        payload = _json_header("dickepair/event-v1", cfg)
        payload.update(
            state=label,
            searched_kind=kind,
            kind=event.kind,
            t_star=event.t_star,
            bracket_width=event.bracket_width,
            gamma_t_max=cfg.t_max,
        )
        _write_json(cfg, payload)
    return EXIT_OK


def cmd_longtime(cfg: RunConfig, args) -> int:
    if not args.state_specs:
        raise UsageError("give at least one --state spec, e.g. --state werner:0.75")
    states = [_parse_state_spec(text) for text in args.state_specs]
    rows = [
        (label, _fmt(s_minus), _fmt(c_inf))
        for label, s_minus, c_inf in longtime_report(states)
    ]
    _emit_rows(cfg, "dickepair/longtime-v1", ("state", "s_minus", "c_infinity"), rows)
    return EXIT_OK


def cmd_oracle_compare(cfg: RunConfig, args) -> int:
    label, family, param, state = cfg.states[0]
    x = state if isinstance(state, XState) else as_x_state(state)
    traj = integrate_grid(x, cfg.params, cfg.t_max, cfg.n_steps, cfg.dt)
    worst = 0.0
    for t, rho in zip(traj.times, traj.states):
        reference = evolve_x(x, cfg.params, t).to_matrix()
        worst = max(worst, float(np.max(np.abs(rho - reference))))
    passed = worst <= args.threshold
    if cfg.out_format == "json":
        payload = _json_header("dickepair/oracle-v1", cfg)
        payload.update(
            state=label,
            samples=len(traj),
            dt=cfg.dt,
            max_deviation=worst,
            threshold=args.threshold,
            passed=passed,
        )
        _write_json(cfg, payload)
    else:
        with _open_output(cfg.output) as fh:
            fh.write(
                f"max deviation {worst:.3e} over {len(traj)} samples "
                f"(threshold {args.threshold:.3e}): "
                f"{'PASS' if passed else 'FAIL'}\n"
            )
    if not passed:
        log.error("engines disagree: %.3e > %.3e", worst, args.threshold)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args) -> int:
    label, family, param, state = cfg.states[0]
    report = qstate.validate(
        state, tol_herm=args.tol_herm, tol_trace=args.tol_trace, tol_psd=args.tol_psd
    )
    payload = {
        "schema": "dickepair/validity-v1",
        "basis_order": list(qstate.BASIS_LABELS),
        "state": label,
        "hermiticity_defect": report.hermiticity_defect,
        "trace_defect": report.trace_defect,
        "min_eigenvalue": report.min_eigenvalue,
        "tolerances": {
            "herm": args.tol_herm, "trace": args.tol_trace, "psd": args.tol_psd,
        },
        "passed": report.passed,
    }
    _write_json(cfg, payload)
    return EXIT_OK if report.passed else EXIT_PHYSICS


_HANDLERS = {
    "evolve": cmd_evolve,
    "curve": cmd_curve,
    "scan-xi": cmd_scan_xi,
    "event": cmd_event,
    "longtime": cmd_longtime,
    "oracle-compare": cmd_oracle_compare,
    "validate": cmd_validate,
}

_STATELESS = ("scan-xi", "longtime")


def _build_config(args) -> RunConfig:
    params = ModelParams(1.0, args.gamma_ratio, args.omega0_ratio)
    if args.command in _STATELESS:
        states = ()
    else:
        strict = args.command != "validate"
        states = (_state_from_flags(args, strict=strict),)
    if args.gamma_t_max < 0.0:
        raise UsageError("--gamma-t-max must be nonnegative")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if args.dt <= 0.0:
        raise UsageError("--dt must be positive")
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs < 1:
        raise UsageError("--jobs must be positive")
    return RunConfig(
        command=args.command,
        states=states,
        params=params,
        t_max=args.gamma_t_max,
        n_steps=args.steps,
        dt=args.dt,
        engine=args.engine,
        out_format=args.out_format,
        output=args.output,
        jobs=jobs,
    )


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    try:
        _apply_config(argv, registry)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else EXIT_USAGE
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        cfg = _build_config(args)
        return _HANDLERS[args.command](cfg, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except InvalidStateError as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
