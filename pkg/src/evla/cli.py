"""Command-line front end.

Subcommands evaluate the closed-form fields on tensor grids and emit flat
CSV (9 significant digits, LF line endings) so the output can be piped
into plotting tools:

    evla fluence --times 0,5,10 --grid 80,120 --out fluence.csv
    evla temperature --form derived --out temp.csv
    evla damage --table3
    evla damage --map --grid 40,40 --threshold 1
    evla validate --only a1,a2,a9
    evla registry

Parameters come from, in order of precedence: --config PATH, the
EVLA_CONFIG environment variable, --preset NAME, built-in defaults.

Exit codes: 0 success, 1 validation criterion failed, 2 bad
configuration or request, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import validate as validate_mod
from .damage import crit_time_table, damage_map
from .fluence import DomainError, SolverError, assemble_and_solve
from .params import (ConfigError, PRESETS, params_from_env_or_default,
                     region_of, registry_rows)
from .thermal import ThermalError, build_temperature

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

DEFAULT_TIMES = "0,2.5,5,7.5,10"


def _fmt(value):
    return "%.9g" % value


def _parse_times(text):
    try:
        times = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("bad --times value %r" % text)
    if not times:
        raise ConfigError("--times is empty")
    return times


def _parse_grid(text):
    try:
        nr, nz = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError("bad --grid value %r (want NR,NZ)" % text)
    if nr < 2 or nz < 2:
        raise ConfigError("--grid wants at least 2,2")
    return nr, nz


def _field_rows(ps, values_at, args, header):
    """Shared CSV driver for the fluence and temperature dumps."""
    geo, proto = ps.geometry, ps.protocol
    nr, nz = _parse_grid(args.grid)
    times = _parse_times(args.times)
    r = np.linspace(0.0, geo.r_s, nr)
    z = np.linspace(-geo.L, geo.L, nz)
    regions = [region_of(min(rv, geo.r_s - 1e-12), geo).value for rv in r]
    yield [*header]
    for t in times:
        keep = z >= -proto.v * t - 1e-12
        zk = z[keep]
        if zk.size == 0:
            continue
        vals = values_at(r[:, None], zk[None, :], t)
        for i, rv in enumerate(r):
            for j, zv in enumerate(zk):
                yield [_fmt(rv), _fmt(zv), _fmt(t), regions[i],
                       _fmt(vals[i, j])]


def _cmd_fluence(ps, args, out):
    sol = assemble_and_solve(ps)
    writer = csv.writer(out, lineterminator="\n")
    for row in _field_rows(ps, sol.eval, args,
                           ("r_mm", "z_mm", "t_s", "region",
                            "phi_W_per_mm2")):
        writer.writerow(row)
    return EXIT_OK


def _cmd_temperature(ps, args, out):
    if ps.protocol.u > 0.0:
        print("note: flowing-blood case (u = %g mm/s); the lumen forced "
              "rates grow with u" % ps.protocol.u, file=sys.stderr)
    sol = assemble_and_solve(ps)
    temp = build_temperature(ps, sol, mode=args.form, n_modes=args.modes)
    writer = csv.writer(out, lineterminator="\n")
    for row in _field_rows(ps, temp.eval, args,
                           ("r_mm", "z_mm", "t_s", "region", "T_C")):
        writer.writerow(row)
    return EXIT_OK


def _cmd_damage(ps, args, out):
    writer = csv.writer(out, lineterminator="\n")
    if args.table3:
        writer.writerow(("temp_C", "material", "t_crit_s"))
        for temp, per_mat in crit_time_table(ps):
            for mat, t_crit in per_mat.items():
                writer.writerow((_fmt(temp), mat, _fmt(t_crit)))
        return EXIT_OK
    sol = assemble_and_solve(ps)
    temp = build_temperature(ps, sol)
    nr, nz = _parse_grid(args.grid)
    geo = ps.geometry
    dm = damage_map(temp, np.linspace(0.0, geo.r_s, nr),
                    np.linspace(-geo.L, geo.L, nz),
                    threshold=args.threshold)
    writer.writerow(("r_mm", "z_mm", "omega", "t_crit_s"))
    for i, rv in enumerate(dm.r):
        for j, zv in enumerate(dm.z):
            writer.writerow((_fmt(rv), _fmt(zv), _fmt(dm.omega[i, j]),
                             _fmt(dm.t_cross[i, j])))
    return EXIT_OK


def _cmd_validate(ps, args, out):
    names = None
    if args.only:
        names = [v.strip() for v in args.only.split(",") if v.strip()]
    try:
        results = validate_mod.run(names, ps=ps)
    except KeyError as exc:
        raise ConfigError(exc.args[0])
    failed = 0
    for res in results:
        print(res.line(), file=out)
        if not res.passed:
            failed += 1
    print("%d of %d criteria passed" % (len(results) - failed,
                                        len(results)), file=out)
    return EXIT_VALIDATION if failed else EXIT_OK


def _cmd_registry(ps, args, out):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("material", "wavelength_nm", "key", "value", "unit",
                     "provenance"))
    for mat, wl, key, value, unit, prov in registry_rows():
        writer.writerow((mat, wl, key, _fmt(value) if isinstance(
            value, (int, float)) else value, unit, prov))
    return EXIT_OK


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI parameter file (overrides "
                                         "EVLA_CONFIG)")
    common.add_argument("--preset", choices=sorted(PRESETS),
                        help="built-in operating point")
    common.add_argument("--out", default="-",
                        help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="evla",
        description="Closed-form light/heat/damage fields for a laser "
                    "fiber pulled back through a blood-filled vein.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_flu = sub.add_parser("fluence", parents=[common],
                           help="light fluence CSV on a grid")
    p_tmp = sub.add_parser("temperature", parents=[common],
                           help="temperature CSV on a grid")
    for p in (p_flu, p_tmp):
        p.add_argument("--times", default=DEFAULT_TIMES,
                       help="comma-separated sample times [s]")
        p.add_argument("--grid", default="60,80", help="NR,NZ sample counts")
    p_tmp.add_argument("--form", default="derived",
                       choices=("derived", "printed", "printed_sqrt"),
                       help="forced-term variant")
    p_tmp.add_argument("--modes", type=int, default=20,
                       help="relaxation modes for the uniform start")

    p_dmg = sub.add_parser("damage", parents=[common],
                           help="dose table or dose map CSV")
    group = p_dmg.add_mutually_exclusive_group(required=True)
    group.add_argument("--table3", action="store_true",
                       help="constant-temperature crossing times")
    group.add_argument("--map", action="store_true",
                       help="dose and crossing-time map over (r, z)")
    p_dmg.add_argument("--grid", default="40,40", help="NR,NZ sample counts")
    p_dmg.add_argument("--threshold", type=float, default=1.0,
                       help="dose threshold for the crossing time")

    p_val = sub.add_parser("validate", parents=[common],
                           help="run acceptance criteria")
    p_val.add_argument("--only", help="comma-separated subset, e.g. a1,a5")

    sub.add_parser("registry", parents=[common],
                   help="built-in parameter provenance CSV")
    return parser


_COMMANDS = {
    "fluence": _cmd_fluence,
    "temperature": _cmd_temperature,
    "damage": _cmd_damage,
    "validate": _cmd_validate,
    "registry": _cmd_registry,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        ps = params_from_env_or_default(args.config, args.preset)
        if args.out == "-":
            return _COMMANDS[args.command](ps, args, sys.stdout)
        with open(args.out, "w", newline="") as out:
            return _COMMANDS[args.command](ps, args, out)
    except (ConfigError, DomainError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, ThermalError) as exc:
        print("solver error: %s" % exc, file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
