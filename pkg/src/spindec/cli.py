"""Command-line front end.

Subcommands: rate, coherence, halfwidth, verify, init. Exit codes: 0 ok,
1 configuration error, 2 numerical failure, 3 verification failure.
"""
import argparse
import csv
import datetime
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import config as cfgmod
from . import layered_media as lm
from . import rates_coherence as rc
from . import verify as vf
from .errors import (BracketError, ConfigError, DomainError, QuadratureError, SingularityError,
                     SpindecError)

log = logging.getLogger("spindec")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
UM = 1e-6


class Table:
    """Columns with units, rendered as CSV with a ``# units:`` header."""

    def __init__(self, columns, units, meta=None):
        self.columns = list(columns)
        self.units = list(units)
        self.meta = dict(meta or {})
        self.rows = []

    def add(self, row):
        self.rows.append(list(row))

    def to_csv(self, timestamp=True):
        buf = io.StringIO()
        if timestamp:
            now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            buf.write(f"# generated: {now}\n")
        for key, value in self.meta.items():
            buf.write(f"# {key}: {value}\n")
        buf.write("# units: " + ", ".join(f"{c}={u}" for c, u in zip(self.columns, self.units))
                  + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self):
        return json.dumps({"columns": self.columns, "units": dict(zip(self.columns, self.units)),
                           "meta": self.meta,
                           "rows": [[_jsonable(v) for v in r] for r in self.rows]}, indent=1)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _label(x_um):
    return f"{x_um:g}"


# worker functions (top level so they pickle) --------------------------------

def _rate_point(args):
    d, omega, stack, elems, T, tol = args
    res = rc.rate(d, omega, stack, elems, T, tol=tol)
    closed = rc.gamma12_closed_form(d, omega, stack, tol=tol)[0]
    return res.gamma12, res.gamma12 / res.thermal_factor, closed, res.delta_omega, \
        res.thermal_factor, res.report.rel_error


def _coherence_point(args):
    l, d, omega, stack, elems, tol, axis = args
    S = rc.coherence_S(l, d, omega, stack, elems, tol=tol, axis=axis)
    return S


def _halfwidth_point(args):
    h, delta, d, omega, stack, elems, tol, axis = args
    return rc.half_coherence_length(d, omega, stack, elems, tol=tol, axis=axis)


def _map(fn, tasks, jobs):
    """Map in grid order, optionally across worker processes."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# commands -------------------------------------------------------------------

def _require_stack(cfg):
    if cfg.stack is None:
        raise ConfigError("stack is empty; add at least one layer")
    return cfg.stack


def cmd_rate(cfg, jobs=1):
    """Rates and shifts for every d in the configuration."""
    stack = _require_stack(cfg)
    if not cfg.d:
        raise ConfigError("geometry.d_um is empty")
    tasks = [(d, cfg.omega, stack, cfg.spin_elements, cfg.temperature, cfg.tol) for d in cfg.d]
    out = _map(_rate_point, tasks, jobs)
    table = Table(["d", "gamma12", "gamma12_T0", "gamma12_closed_form", "delta_omega",
                   "thermal_factor", "quad_rel_error"],
                  ["um", "1/s", "1/s", "1/s", "rad/s", "1", "1"],
                  {"frequency_hz": _fmt(cfg.frequency_hz), "temperature_k": _fmt(cfg.temperature)})
    for d, row in zip(cfg.d, out):
        table.add([d / UM, *row])
    return {"rate.csv": table}


def cmd_coherence(cfg, jobs=1):
    """S(l) per height, one file per d; adds the small-l expansion and ρ12(t)."""
    stack = _require_stack(cfg)
    if not cfg.d or not cfg.l:
        raise ConfigError("coherence needs non-empty geometry.d_um and geometry.l_um")
    tasks = [(l, d, cfg.omega, stack, cfg.spin_elements, cfg.tol, cfg.axis)
             for d in cfg.d for l in cfg.l]
    values = iter(_map(_coherence_point, tasks, jobs))
    files = {}
    for d in cfg.d:
        g0, _ = rc.gamma12_from_kernel(d, cfg.omega, stack, cfg.spin_elements, tol=cfg.tol)
        g = rc.apply_thermal(g0, cfg.omega, cfg.temperature)
        c2 = rc.small_l_coefficient(d, cfg.omega, stack)
        cols = ["l", "S", "S_expansion"] + [f"rho12_t{_label(t)}" for t in cfg.t]
        units = ["um", "1", "1"] + ["1"] * len(cfg.t)
        table = Table(cols, units, {"d_um": _label(d / UM), "frequency_hz": _fmt(cfg.frequency_hz),
                                    "gamma12_per_s": _fmt(g), "c2_per_um2": _fmt(c2 * UM ** 2),
                                    "axis": cfg.axis})
        for l in cfg.l:
            S = next(values)
            Sr = float(np.real(S))
            table.add([l / UM, Sr, 1.0 - c2 * l * l]
                      + [float(np.real(rc.rho12(t, S, g))) for t in cfg.t])
        files[f"fig1_d{_label(d / UM)}.csv"] = table
    return files


def cmd_halfwidth(cfg, jobs=1):
    """l_1/2 against film thickness h, one file per skin depth."""
    if not cfg.h:
        raise ConfigError("halfwidth needs a non-empty geometry.h_um list")
    if not cfg.deltas:
        raise ConfigError("halfwidth needs a non-empty halfwidth.delta_um list")
    if len(cfg.d) != 1:
        raise ConfigError("halfwidth needs exactly one value in geometry.d_um")
    d = cfg.d[0]
    tasks = [(h, delta, d, cfg.omega, cfg.film_stack(delta, h), cfg.spin_elements, cfg.tol,
              cfg.axis) for delta in cfg.deltas for h in cfg.h]
    values = iter(_map(_halfwidth_point, tasks, jobs))
    files = {}
    for delta in cfg.deltas:
        table = Table(["h", "l_half", "l_half_over_d"], ["um", "um", "1"],
                      {"d_um": _label(d / UM), "delta_um": _label(delta / UM),
                       "frequency_hz": _fmt(cfg.frequency_hz)})
        for h in cfg.h:
            lh = next(values)
            table.add([h / UM, lh / UM, lh / d])
        files[f"fig2_delta{_label(delta / UM)}.csv"] = table
    return files


def _write(files, cfg, as_json, timestamp, stream):
    os.makedirs(cfg.output_dir, exist_ok=True)
    for name, table in files.items():
        path = os.path.join(cfg.output_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(table.to_csv(timestamp))
        stream.write(f"wrote {path} ({len(table.rows)} rows)\n")
        if as_json:
            jpath = os.path.splitext(path)[0] + ".json"
            with open(jpath, "w", encoding="utf-8") as fh:
                fh.write(table.to_json())
            stream.write(f"wrote {jpath}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML configuration file")
    common.add_argument("--set", metavar="KEY=VAL", action="append", default=[],
                        help="override a configuration key, e.g. atom.temperature_k=300")
    common.add_argument("--json", action="store_true", help="also write a JSON mirror of each table")
    common.add_argument("--jobs", type=int, default=None, metavar="N",
                        help="worker processes (default: available CPUs)")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp header line")
    common.add_argument("--tol", type=float, default=None, metavar="REL",
                        help="relative quadrature tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="spindec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("rate", parents=[common], help="spin-flip rates and line shifts vs d")
    sub.add_parser("coherence", parents=[common], help="spatial coherence S(l) per d (fig1 files)")
    sub.add_parser("halfwidth", parents=[common], help="half-coherence length vs h (fig2 files)")
    v = sub.add_parser("verify", parents=[common], help="run the built-in oracle and identity checks")
    v.add_argument("--inject-tm-flip", action="store_true", help=argparse.SUPPRESS)
    i = sub.add_parser("init", parents=[common], help="write a configuration template")
    i.add_argument("--preset", default=cfgmod.DEFAULT_PRESET, choices=sorted(cfgmod.PRESETS))
    return p


def _jobs(args):
    if args.jobs is None:
        return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return args.jobs


def _verify(args, out):
    tol = args.tol if args.tol is not None else 1e-8
    if not tol > 0:
        raise ConfigError("--tol must be positive")
    if args.inject_tm_flip:
        with lm.debug_tm_sign_flip():
            results = vf.run_checks(tol)
    else:
        results = vf.run_checks(tol)
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail} [{r.seconds:.1f} s]\n")
    if args.json:
        out.write(json.dumps([r.__dict__ for r in results], indent=1) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "init":
            text = cfgmod.template(args.preset)
            if args.config:
                with open(args.config, "w", encoding="utf-8") as fh:
                    fh.write(text)
                out.write(f"wrote {args.config}\n")
            else:
                out.write(text)
            return EXIT_OK
        if args.command == "verify":
            return _verify(args, out)
        cfg = cfgmod.load(args.config, args.set, args.tol)
        jobs = _jobs(args)
        command = {"rate": cmd_rate, "coherence": cmd_coherence, "halfwidth": cmd_halfwidth}
        files = command[args.command](cfg, jobs)
        _write(files, cfg, args.json, not args.no_timestamp, out)
        return EXIT_OK
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (QuadratureError, BracketError, SingularityError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except DomainError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except SpindecError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
