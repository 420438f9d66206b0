"""Command-line front end.

Subcommands: nodal-map, berry, spectrum, locate-ci, spin.  Every option can
also be supplied through a flat key=value config file (--config); explicit
flags win over the file, the file wins over built-in defaults.  All numeric
output is printed with 17 significant digits so reruns are byte-identical
and JSON re-reads reproduce the floats exactly.  Exit codes: 0 success,
2 usage or config problem, 3 domain error (the message names the error class
and offending values).

BERRYLINE_THREADS caps the worker threads used for radius sweeps.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .berryphase import canonicalize_phase, classify_mab, open_path_berry_phase
from .cilocate import CIResult, SearchRect, locate_ci
from .comoving import (
    ac_loop_phase,
    adiabaticity_ratio,
    dynamical_phase,
    integrate_spin,
    pseudorotation_trajectory,
    to_lab_frame,
)
from .eigenpath import circle_path, holonomy_sign
from .errors import BerrylineError
from .jahnteller import JTParams, circle_nodes, jt_eigenvectors, nodal_map
from .ringspectrum import RingProblem, flat_ring_problem, jt_ring_problem, spectrum

FORMAT_VERSION = 1


class ConfigError(Exception):
    """Bad config file or missing required setting (exit code 2)."""


def fmt(x: float) -> str:
    """Fixed 17-significant-digit decimal; round-trips float64 exactly."""
    return "%.17g" % float(x)


def _json_value(value, indent: int) -> str:
    pad = " " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{k}": {_json_value(v, indent + 2)}' for k, v in value.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = ", ".join(_json_value(v, indent) for v in value)
        return "[" + items + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(value)!r}")


def emit_json(obj: dict) -> str:
    return _json_value(obj, 0) + "\n"


def emit_json_compact(obj: dict) -> str:
    items = ", ".join(f'"{k}": {_json_value(v, 0)}' for k, v in obj.items())
    return "{" + items + "}"


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline="\n"), True


def write_text(path: str, text: str) -> None:
    stream, owned = _open_out(path)
    try:
        stream.write(text)
    finally:
        if owned:
            stream.close()


def csv_lines(header: list[str], rows) -> str:
    out = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, str):
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(fmt(cell))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


# --- option plumbing ---------------------------------------------------------

_REQUIRED = object()


@dataclass(frozen=True)
class Opt:
    name: str
    conv: Callable[[str], object]
    default: object
    help: str
    flag: bool = False


def _to_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _to_range(s: str) -> tuple[float, ...]:
    """Either a single value or an inclusive start:stop:step sweep."""
    parts = s.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ValueError(f"expected VALUE or START:STOP:STEP, got {s!r}")
    start, stop, step = (float(x) for x in parts)
    if step <= 0:
        raise ValueError(f"sweep step must be > 0, got {step!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty sweep {s!r}")
    return tuple(start + j * step for j in range(count))


def _to_interval(s: str) -> tuple[float, float]:
    parts = s.split(":")
    if len(parts) != 2:
        raise ValueError(f"expected START:END, got {s!r}")
    a, b = float(parts[0]), float(parts[1])
    return (a, b)


_ALIASES = {"grid": ["--M"]}


def _add_options(sub: argparse.ArgumentParser, options: list[Opt]) -> None:
    sub.add_argument("--config", default=None, metavar="FILE",
                     help="flat key=value config file; flags override it")
    for opt in options:
        dest = opt.name.replace("-", "_")
        extra = _ALIASES.get(opt.name, [])
        if opt.flag:
            sub.add_argument("--" + opt.name, *extra, dest=dest,
                             action="store_const", const=True, default=None,
                             help=opt.help)
        else:
            sub.add_argument("--" + opt.name, *extra, dest=dest, type=str,
                             default=None, help=opt.help, metavar="V")


def _read_config(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, _, value = line.partition("=")
                entries[key.strip().replace("-", "_")] = value.strip()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return entries


def resolve_options(args: argparse.Namespace, options: list[Opt]) -> dict:
    """Merge flags > config file > defaults into one settings dict."""
    cfg = _read_config(args.config) if args.config else {}
    if "format_version" in cfg:
        if cfg.pop("format_version") != str(FORMAT_VERSION):
            raise ConfigError(f"unsupported format_version (expected {FORMAT_VERSION})")
    known = {opt.name.replace("-", "_"): opt for opt in options}
    for key in cfg:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    values = {}
    for opt in options:
        dest = opt.name.replace("-", "_")
        raw_cli = getattr(args, dest)
        if raw_cli is not None:
            values[dest] = raw_cli if opt.flag else _convert(opt, raw_cli)
        elif dest in cfg:
            values[dest] = _convert(opt, cfg[dest])
        elif opt.default is _REQUIRED:
            raise ConfigError(f"missing required setting --{opt.name}")
        else:
            values[dest] = opt.default
    return values


def _convert(opt: Opt, raw: str):
    try:
        return _to_bool(raw) if opt.flag else opt.conv(raw)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad value for {opt.name}: {err}") from err


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get("BERRYLINE_THREADS")
    workers = os.cpu_count() or 1
    if cap is not None:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError as err:
            raise ConfigError(f"bad BERRYLINE_THREADS value {cap!r}") from err
    return max(1, min(workers, n_jobs))


# --- subcommands -------------------------------------------------------------

_NODAL_OPTS = [
    Opt("k", float, _REQUIRED, "linear coupling"),
    Opt("g", float, _REQUIRED, "quadratic coupling"),
    Opt("r", _to_range, _REQUIRED, "radius or START:STOP:STEP sweep"),
    Opt("theta-samples", int, 2048, "loop samples per circle"),
    Opt("band", int, 0, "band index (0 lower, 1 upper)"),
    Opt("nodes-out", str, "-", "node CSV destination ('-' = stdout)"),
    Opt("degeneracies-out", str, "-", "degeneracy CSV destination"),
]


def cmd_nodal_map(values: dict) -> int:
    p = JTParams(values["k"], values["g"])
    radii = values["r"]
    workers = _worker_count(len(radii))

    def one(r):
        return nodal_map(p, [r], theta_samples=values["theta_samples"],
                         band=values["band"])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            maps = list(pool.map(one, radii))
    else:
        maps = [one(r) for r in radii]

    rows = []
    skipped = []
    for m in maps:
        skipped.extend(m.skipped_radii)
        for row in m.rows:
            for ang in row.analytic_angles:
                rows.append((row.r, ang, "analytic"))
            for ang in row.numeric_angles:
                rows.append((row.r, ang, "numeric"))
    node_csv = csv_lines(["r", "theta_node", "source"], rows)

    deg_rows = [(d.r, d.theta) for d in maps[0].degeneracies] if maps else []
    deg_csv = csv_lines(["r", "theta"], deg_rows)

    for r in skipped:
        print(f"note: radius {fmt(r)} lies on the degeneracy circle; skipped",
              file=sys.stderr)
    if not rows:
        from .errors import OnDegeneracyCircle

        raise OnDegeneracyCircle(skipped[0], p.degeneracy_radius)

    if values["nodes_out"] == "-" and values["degeneracies_out"] == "-":
        sys.stdout.write(node_csv + "\n" + deg_csv)
    else:
        write_text(values["nodes_out"], node_csv)
        write_text(values["degeneracies_out"], deg_csv)
    return 0


_BERRY_OPTS = [
    Opt("k", float, _REQUIRED, "linear coupling"),
    Opt("g", float, _REQUIRED, "quadratic coupling"),
    Opt("r", float, _REQUIRED, "loop radius"),
    Opt("theta-samples", int, 2048, "loop samples"),
    Opt("band", int, 0, "band index"),
    Opt("out", str, "-", "JSON destination"),
]


def cmd_berry(values: dict) -> int:
    p = JTParams(values["k"], values["g"])
    branch, _, nodes = circle_nodes(p, values["r"],
                                    n_samples=values["theta_samples"],
                                    band=values["band"])
    phase = open_path_berry_phase(branch.vectors)
    result = {
        "format_version": FORMAT_VERSION,
        "k": values["k"],
        "g": values["g"],
        "r": values["r"],
        "band": values["band"],
        "theta_samples": values["theta_samples"],
        "K": nodes.count,
        "node_angles": list(nodes.angles),
        "geometric_phase": phase.geometric_phase,
        "holonomy_sign": holonomy_sign(branch),
        "mab_class": classify_mab(nodes).value,
    }
    write_text(values["out"], emit_json(result))
    return 0


_SPECTRUM_OPTS = [
    Opt("flat", None, None, "flat (zero) potential instead of a model band",
        flag=True),
    Opt("k", float, None, "linear coupling (model mode)"),
    Opt("g", float, None, "quadratic coupling (model mode)"),
    Opt("band", int, 0, "band index (model mode)"),
    Opt("parity", str, None, "seam parity even|odd (required with --flat)"),
    Opt("r0", float, 1.0, "ring radius"),
    Opt("grid", int, 1024, "grid points"),
    Opt("levels", int, 6, "number of levels"),
    Opt("barrier", _to_interval, None, "impenetrable arc START:END (radians)"),
    Opt("out", str, "-", "destination"),
]


def cmd_spectrum(values: dict) -> int:
    barrier = values["barrier"]
    if barrier is not None:
        barrier = (barrier[0], barrier[1] - barrier[0])
    if values["flat"]:
        if values["parity"] not in ("even", "odd"):
            raise ConfigError("--flat requires --parity even|odd")
        problem = flat_ring_problem(values["parity"], grid_size=values["grid"],
                                    radius=values["r0"], barrier=barrier)
        kind = "flat"
    else:
        if values["k"] is None or values["g"] is None:
            raise ConfigError("model mode requires --k and --g (or use --flat)")
        p = JTParams(values["k"], values["g"])
        problem = jt_ring_problem(p, values["r0"], grid_size=values["grid"],
                                  band=values["band"], barrier=barrier)
        if values["parity"] in ("even", "odd"):
            problem = RingProblem(radius=problem.radius,
                                  grid_size=problem.grid_size,
                                  potential=problem.potential,
                                  flux_parity=values["parity"],
                                  barrier=problem.barrier)
        kind = "jahnteller"
    result = spectrum(problem, values["levels"])
    header = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "k": values["k"],
        "g": values["g"],
        "band": values["band"] if kind == "jahnteller" else None,
        "r0": values["r0"],
        "grid": values["grid"],
        "levels": values["levels"],
        "flux_parity": problem.flux_parity,
        "barrier": None if values["barrier"] is None else list(values["barrier"]),
        "boundary": result.boundary,
    }
    lines = "# " + emit_json_compact(header) + "\n"
    rows = [
        (i, float(e), int(flag), problem.flux_parity)
        for i, (e, flag) in enumerate(zip(result.levels, result.degeneracy_flags))
    ]
    lines += csv_lines(["index", "energy", "degeneracy_flag", "parity"], rows)
    write_text(values["out"], lines)
    return 0


_LOCATE_OPTS = [
    Opt("k", float, _REQUIRED, "linear coupling"),
    Opt("g", float, _REQUIRED, "quadratic coupling"),
    Opt("x-min", float, -3.0, "search window"),
    Opt("x-max", float, 3.0, "search window"),
    Opt("y-min", float, -3.0, "search window"),
    Opt("y-max", float, 3.0, "search window"),
    Opt("band", int, 0, "band index"),
    Opt("spatial-tol", float, 1e-3, "cell size at which a hit is accepted"),
    Opt("gap-tol", float, 1e-8, "gap treated as degenerate"),
    Opt("samples-per-edge", int, 32, "boundary samples per cell edge"),
    Opt("min-depth", int, 4, "quadtree depth before pruning starts"),
    Opt("max-depth", int, 24, "quadtree depth limit"),
    Opt("out", str, "-", "JSON destination"),
]


def cmd_locate_ci(values: dict) -> int:
    from .jahnteller import jt_field

    p = JTParams(values["k"], values["g"])
    rect = SearchRect(values["x_min"], values["x_max"],
                      values["y_min"], values["y_max"])
    res: CIResult = locate_ci(jt_field(p, frame="cartesian"), rect,
                              band=values["band"],
                              spatial_tol=values["spatial_tol"],
                              gap_tol=values["gap_tol"],
                              samples_per_edge=values["samples_per_edge"],
                              min_depth=values["min_depth"],
                              max_depth=values["max_depth"])
    result = {
        "format_version": FORMAT_VERSION,
        "k": values["k"],
        "g": values["g"],
        "band": values["band"],
        "spatial_tol": values["spatial_tol"],
        "points": [list(pt) for pt in res.points],
        "gaps": list(res.gaps),
        "cells_evaluated": res.cells_evaluated,
        "depth_histogram": {str(d): c for d, c in res.depth_histogram.items()},
    }
    write_text(values["out"], emit_json(result))
    return 0


_SPIN_OPTS = [
    Opt("k", float, _REQUIRED, "linear coupling"),
    Opt("g", float, _REQUIRED, "quadratic coupling"),
    Opt("r", float, _REQUIRED, "drive radius"),
    Opt("period", float, _REQUIRED, "drive period"),
    Opt("steps", int, 65536, "integration steps"),
    Opt("revolutions", float, 1.0, "drive revolutions"),
    Opt("theta0", float, 0.0, "starting angle"),
    Opt("frame", str, "comoving", "propagation frame lab|comoving"),
    Opt("initial", str, "lower", "initial band eigenstate lower|upper"),
    Opt("store-stride", int, 64, "record every this many steps (power of two)"),
    Opt("series-out", str, "-", "CSV time series destination"),
    Opt("summary-out", str, "-", "JSON phase summary destination"),
]


def cmd_spin(values: dict) -> int:
    p = JTParams(values["k"], values["g"])
    traj = pseudorotation_trajectory(values["r"], values["period"],
                                     values["steps"], theta0=values["theta0"],
                                     revolutions=values["revolutions"])
    band = {"lower": 0, "upper": 1}.get(values["initial"])
    if band is None:
        raise ConfigError("--initial must be lower or upper")
    if values["frame"] == "comoving":
        psi0 = np.array([0.0, 1.0]) if band == 0 else np.array([1.0, 0.0])
    elif values["frame"] == "lab":
        psi0 = jt_eigenvectors(p, values["r"], values["theta0"])[band]
    else:
        raise ConfigError("--frame must be lab or comoving")

    ev = integrate_spin(p, traj, psi0.astype(complex), frame=values["frame"],
                        store_stride=values["store_stride"])
    # the sign holonomy lives in the rotating basis, so phases are always
    # extracted from lab-frame states no matter which frame propagated
    lab = to_lab_frame(ev) if values["frame"] == "comoving" else ev.states
    total = float(np.angle(np.vdot(lab[0], lab[-1])))
    dyn = dynamical_phase(p, traj, band=band)
    geo = canonicalize_phase(total - dyn)

    ac = None
    rev = values["revolutions"]
    if abs(rev - round(rev)) < 1e-12 and round(rev) != 0:
        loop = circle_path(values["r"], 4096, theta0=values["theta0"],
                           revolutions=float(round(rev)))
        ac = ac_loop_phase(p, loop)

    series = csv_lines(
        ["t", "sigma_x", "sigma_y", "sigma_z", "norm"],
        zip(ev.times, ev.sigma_x, ev.sigma_y, ev.sigma_z, ev.norms),
    )
    summary = {
        "format_version": FORMAT_VERSION,
        "k": values["k"],
        "g": values["g"],
        "r": values["r"],
        "period": values["period"],
        "steps": values["steps"],
        "revolutions": values["revolutions"],
        "frame": values["frame"],
        "initial": values["initial"],
        "total_phase": total,
        "dynamical_phase": dyn,
        "geometric_phase": geo,
        "adiabaticity_ratio": adiabaticity_ratio(p, traj),
        "final_norm": float(ev.norms[-1]),
        "ac_loop_phase": ac,
    }
    if values["series_out"] == "-" and values["summary_out"] == "-":
        sys.stdout.write(series + "\n" + emit_json(summary))
    else:
        write_text(values["series_out"], series)
        write_text(values["summary_out"], emit_json(summary))
    return 0


# --- driver ------------------------------------------------------------------

_COMMANDS = {
    "nodal-map": (_NODAL_OPTS, cmd_nodal_map,
                  "node lines of the anchor overlap over a radius sweep"),
    "berry": (_BERRY_OPTS, cmd_berry,
              "node count, geometric phase and loop class for one circle"),
    "spectrum": (_SPECTRUM_OPTS, cmd_spectrum,
                 "ring levels with periodic or antiperiodic seam"),
    "locate-ci": (_LOCATE_OPTS, cmd_locate_ci,
                  "find degeneracies by loop-sign subdivision"),
    "spin": (_SPIN_OPTS, cmd_spin,
             "driven two-level dynamics along a pseudorotation"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="berryline",
        description="geometric phases and sign holonomy of real electronic "
                    "Hamiltonians",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (options, func, help_text) in _COMMANDS.items():
        sub = subs.add_parser(name, help=help_text)
        _add_options(sub, options)
        sub.set_defaults(_options=options, _func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        values = resolve_options(args, args._options)
        return args._func(values)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except BerrylineError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
