"""Command-line entry point.

Exit codes: 0 success, 2 bad invocation or configuration, 3 physics or
numerical failure (including a grid on which every point is a pole).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_angle, parse_int, parse_sections
from .dataset import Dataset
from .delay import CHANNELS
from .errors import OptoswitchError, ResponsePole, UndefinedRatio, UnknownFigure
from .model import physical_steady_state, validate_regime
from .oracle import (
    integrate_time_domain_batch,
    random_stable_draws,
    solve_linear_response,
    stable_window,
    system_stability,
)
from .response import amplitude_arrays
from .sweep import AXIS_NAMES, FIGURES, Axis, SweepSpec, figure_dataset, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3

SELFCHECK_CLOSED_TOL = 1e-10
SELFCHECK_TIME_TOL = 1e-6

_RATE_AXES = {"delta", "G", "kappa2", "gamma_m"}
_RATE_NAMES = {"rl": "R_l", "tl": "T_l", "rr": "R_r", "tr": "T_r"}


@dataclass
class CommandResult:
    dataset: Dataset
    lines: list[str]
    ok: bool = True


def _fixed(cfg: RunConfig, delta: float = 0.0) -> dict:
    p, d = cfg.params, cfg.drive
    return {
        "kappa1": p.kappa1, "kappa2": p.kappa2, "gamma_m": p.gamma_m, "omega_m": p.omega_m,
        "G": p.G, "n": p.n, "delta": delta, "theta": d.theta, "eps_L": d.eps_L, "eps_R": d.eps_R,
    }  # fmt: skip


def _defined_channels(cfg: RunConfig) -> list[str]:
    out = []
    if cfg.drive.eps_L > 0:
        out += ["rl", "tl"]
    if cfg.drive.eps_R > 0:
        out += ["rr", "tr"]
    if not out:
        raise UndefinedRatio("both probe amplitudes are zero; no channel is defined")
    return out


def _delta_axis(cfg: RunConfig, count: int | None) -> Axis:
    grid = cfg.delta_grid(count)
    if len(grid) < 2:
        raise ConfigError("the detuning grid needs at least 2 points")
    return Axis("delta", float(grid[0]), float(grid[-1]), len(grid))


def _annotate(ds: Dataset, cfg: RunConfig) -> Dataset:
    ds.metadata["style"] = cfg.style
    if cfg.kappa_rad_s is not None:
        ds.metadata["kappa1_rad_per_s"] = cfg.kappa_rad_s
        ds.metadata["seconds_per_tau_unit"] = 1.0 / cfg.kappa_rad_s
    return ds


def _require_some_point(ds: Dataset) -> None:
    if len(ds) and np.all(ds.column("status").astype(np.int64) & 1):
        raise ResponsePole("every grid point is a response pole")


def _summary(ds: Dataset, skip: set) -> str:
    parts = []
    for name in ds.names:
        if name in skip or name == "status":
            continue
        values = ds.column(name)
        values = values[np.isfinite(values)]
        if values.size:
            parts.append(f"{name} min={values.min():.6f} max={values.max():.6f}")
        else:
            parts.append(f"{name} undefined")
    return "; ".join(parts)


def cmd_spectrum(cfg: RunConfig, args) -> CommandResult:
    channels = _defined_channels(cfg)
    observables = [_RATE_NAMES[c] for c in channels] + [f"arg_{c}" for c in channels]
    spec = SweepSpec(_delta_axis(cfg, args.grid), None, _fixed(cfg), observables)
    ds = _annotate(run_sweep(spec), cfg)
    _require_some_point(ds)
    return CommandResult(ds, [_summary(ds, {"delta"} | {f"arg_{c}" for c in channels})])


def cmd_delay(cfg: RunConfig, args) -> CommandResult:
    section = cfg.section("delay")
    unknown = set(section) - {"channels"}
    if unknown:
        raise ConfigError(f"[delay]: unknown keys {sorted(unknown)}; allowed ['channels']")
    defined = _defined_channels(cfg)
    wanted = section.get("channels", " ".join(defined)).replace(",", " ").split()
    bad = [c for c in wanted if c not in CHANNELS]
    if bad or not wanted:
        raise ConfigError(f"[delay] channels must be drawn from {CHANNELS}, got {wanted}")
    spec = SweepSpec(_delta_axis(cfg, args.grid), None, _fixed(cfg), [f"tau_{c}" for c in wanted])
    ds = _annotate(run_sweep(spec), cfg)
    _require_some_point(ds)
    return CommandResult(ds, [_summary(ds, {"delta"})])


def _parse_axis(cfg: RunConfig, text: str, count: int | None) -> Axis:
    tokens = text.split()
    if len(tokens) != 4 or tokens[0] not in AXIS_NAMES:
        raise ConfigError(f"axis {text!r}: expected '<name> <start> <stop> <count>' with name in {AXIS_NAMES}")
    name, start, stop, n = tokens
    if name in _RATE_AXES:
        lo, hi = cfg.rate(start, name), cfg.rate(stop, name)
    elif name == "theta":
        lo, hi = parse_angle(start), parse_angle(stop)
    else:
        try:
            lo, hi = float(start), float(stop)
        except ValueError:
            raise ConfigError(f"axis {text!r}: bad bounds") from None
    try:
        return Axis(name, lo, hi, count if count is not None else parse_int(n, "count"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_sweep(cfg: RunConfig, args) -> CommandResult:
    section = cfg.section("sweep")
    unknown = set(section) - {"axis1", "axis2", "observables", "delta"}
    if unknown:
        raise ConfigError(f"[sweep]: unknown keys {sorted(unknown)}")
    if "axis1" not in section:
        raise ConfigError("[sweep]: axis1 is required")
    axis1 = _parse_axis(cfg, section["axis1"], args.grid)
    axis2 = _parse_axis(cfg, section["axis2"], args.grid) if "axis2" in section else None
    observables = section.get("observables", "R_l T_l").replace(",", " ").split()
    delta = cfg.rate(section.get("delta", "0"), "delta")
    try:
        spec = SweepSpec(axis1, axis2, _fixed(cfg, delta), observables)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ds = _annotate(run_sweep(spec), cfg)
    _require_some_point(ds)
    return CommandResult(ds, [_summary(ds, set(spec.axis_names))])


def cmd_figure(cfg: RunConfig, args) -> CommandResult:
    ds = figure_dataset(args.figure_id, grid=args.grid, grid2d=args.grid)
    axes = {a["name"] for a in ds.metadata["axes"]}
    return CommandResult(ds, [f"{args.figure_id}: {len(ds)} rows; " + _summary(ds, axes)])


def cmd_stability(cfg: RunConfig, args) -> CommandResult:
    section = cfg.section("stability")
    unknown = set(section) - {"G_max", "samples"}
    if unknown:
        raise ConfigError(f"[stability]: unknown keys {sorted(unknown)}")
    G_max = cfg.rate(section.get("G_max", "5"), "G_max")
    samples = parse_int(section.get("samples", "501"), "samples")
    if not G_max > 0 or samples < 2:
        raise ConfigError("[stability]: need G_max > 0 and samples >= 2")
    report = system_stability(cfg.params)
    windows = stable_window(cfg.params, G_max=G_max, samples=samples)
    lines = [f"{line} (units of kappa1)" if line.startswith("eigenvalue") else line for line in report.lines()]
    if windows:
        spans = ", ".join(f"[{lo:.12g}, {hi:.12g}]" for lo, hi in windows)
        lines.append(f"stable G window(s) in [0, {G_max:g}] kappa1: {spans}")
    else:
        lines.append(f"stable G window in [0, {G_max:g}] kappa1: none")
    rows = [[ev.real, ev.imag] for ev in report.eigenvalues]
    metadata = {
        "tool": "optoswitch",
        "version": __version__,
        "stable": report.stable,
        "max_real_part": report.max_real_part,
        "stable_windows": [list(w) for w in windows],
        "G_max": G_max,
    }
    ds = _annotate(Dataset([("eig_re", "kappa"), ("eig_im", "kappa")], np.array(rows), metadata), cfg)
    return CommandResult(ds, lines)


def cmd_validate(cfg: RunConfig, args) -> CommandResult:
    if cfg.physical is not None:
        base, ss = physical_steady_state(cfg.physical)
        params = base.replace(G=cfg.params.G * cfg.kappa_rad_s, n=cfg.params.n)
        report = validate_regime(params, ss)
    else:
        report = validate_regime(cfg.params)
    fields = [
        ("sideband_margin", report.sideband_margin),
        ("q_factor", report.q_factor),
        ("rwa_margin_1", report.rwa_margins[0]),
        ("rwa_margin_2", report.rwa_margins[1]),
        ("detuning_offset_1", report.detuning_offsets[0]),
        ("detuning_offset_2", report.detuning_offsets[1]),
        ("ratio_term", report.ratio_term),
    ]
    metadata = {
        "tool": "optoswitch",
        "version": __version__,
        "resolved_sideband": report.resolved_sideband,
        "high_q": report.high_q,
        "rwa_valid": report.rwa_valid,
        "red_detuned": report.red_detuned,
        "ratio_term_negligible": report.ratio_term_negligible,
    }
    ds = Dataset([(name, "1") for name, _ in fields], np.array([[v for _, v in fields]]), metadata)
    return CommandResult(_annotate(ds, cfg), report.lines())


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else float(np.linalg.norm(a))


def cmd_selfcheck(cfg: RunConfig, args) -> CommandResult:
    section = cfg.section("selfcheck")
    unknown = set(section) - {"count", "seed"}
    if unknown:
        raise ConfigError(f"[selfcheck]: unknown keys {sorted(unknown)}")
    count = parse_int(section.get("count", "200"), "count")
    seed = args.seed if args.seed is not None else parse_int(section.get("seed", "0"), "seed")
    if count < 1 or seed < 0:
        raise ConfigError("[selfcheck]: need count >= 1 and seed >= 0")
    draws = random_stable_draws(np.random.default_rng(seed), count)
    t0 = time.perf_counter()
    linear = [solve_linear_response(p, d, delta).as_array() for p, d, delta in draws]
    closed = []
    for p, d, delta in draws:
        db, da1, da2, _ = amplitude_arrays(p, d, delta)
        closed.append(np.array([complex(db), complex(da1), complex(da2)]))
    timed = [x.as_array() for x in integrate_time_domain_batch(draws)]
    dev_closed = np.array([_relative(c, lin) for c, lin in zip(closed, linear)])
    dev_time = np.array([_relative(t, lin) for t, lin in zip(timed, linear)])
    elapsed = time.perf_counter() - t0
    ok = dev_closed.max() < SELFCHECK_CLOSED_TOL and dev_time.max() < SELFCHECK_TIME_TOL
    lines = [
        f"draws: {count} (seed {seed}), {elapsed:.2f} s",
        f"closed form vs linear solve: max relative deviation {dev_closed.max():.3e} (limit {SELFCHECK_CLOSED_TOL:g})",
        f"linear solve vs time domain: max relative deviation {dev_time.max():.3e} (limit {SELFCHECK_TIME_TOL:g})",
        f"verdict: {'pass' if ok else 'FAIL'}",
    ]
    rows = np.column_stack(
        [
            [p.kappa2 for p, _, _ in draws],
            [p.gamma_m for p, _, _ in draws],
            [p.G for p, _, _ in draws],
            [p.n for p, _, _ in draws],
            [delta for _, _, delta in draws],
            dev_closed,
            dev_time,
        ]
    )
    columns = [("kappa2", "kappa"), ("gamma_m", "kappa"), ("G", "kappa"), ("n", "1"), ("delta", "kappa"),
               ("dev_closed_linear", "1"), ("dev_linear_time", "1")]  # fmt: skip
    metadata = {"tool": "optoswitch", "version": __version__, "seed": seed, "count": count, "pass": bool(ok)}
    ds = Dataset(columns, rows, metadata)
    return CommandResult(ds, lines, ok)


COMMANDS = {
    "spectrum": (cmd_spectrum, "R/T and phases of all defined channels over the detuning grid"),
    "delay": (cmd_delay, "group delays over the detuning grid"),
    "sweep": (cmd_sweep, "one- or two-axis parameter sweep"),
    "figure": (cmd_figure, "data behind a figure panel"),
    "stability": (cmd_stability, "eigenvalues and the stable-G window"),
    "validate": (cmd_validate, "check the approximations behind the model"),
    "selfcheck": (cmd_selfcheck, "closed form vs linear solve vs time integration"),
}
_ALWAYS_WRITE = {"spectrum", "delay", "sweep", "figure"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--out", help="output file (default <command>.<format> for data commands)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--grid", type=int, help="point count per axis, overriding the config")
    common.add_argument("--seed", type=int, help="selfcheck random seed (unsigned 64-bit)")

    parser = argparse.ArgumentParser(prog="optoswitch", description="Photon transport in a passive-active optomechanical pair.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "figure":
            p.add_argument("figure_id", help=f"one of {', '.join(FIGURES)}")
    return parser


def _check_args(args) -> None:
    if args.grid is not None and args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    if args.command == "figure" and args.figure_id not in FIGURES:
        raise UnknownFigure(f"unknown figure {args.figure_id!r}; choose from {', '.join(FIGURES)}")


def _output_path(args, cfg: RunConfig, fmt: str) -> str | None:
    if args.out:
        return args.out
    if cfg.output_path:
        return cfg.output_path
    if args.command in _ALWAYS_WRITE:
        stem = args.figure_id if args.command == "figure" else args.command
        return f"{stem}.{fmt}"
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG

    try:
        _check_args(args)
        cfg = load_config(args.config) if args.config else parse_sections({})
    except (ConfigError, UnknownFigure) as exc:
        print(f"optoswitch: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    fmt = args.format or cfg.output_format
    handler = COMMANDS[args.command][0]
    try:
        result = handler(cfg, args)
    except ConfigError as exc:
        print(f"optoswitch: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OptoswitchError as exc:
        print(f"optoswitch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except Exception as exc:  # noqa: BLE001 - every failure maps to an exit code
        print(f"optoswitch: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS

    for line in result.lines:
        print(line)

    path = _output_path(args, cfg, fmt)
    if path is not None:
        try:
            result.dataset.write(path, fmt, cfg.precision)
        except OSError as exc:
            print(f"optoswitch: cannot write {path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
