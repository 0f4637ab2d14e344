"""Batch experiment driver: reproducible, seeded runs emitting CSV/JSON.

Every output embeds the tool version and the full run configuration as
comment lines; identical configurations produce byte-identical files
(floats are rounded to 12 significant digits at the boundary, all exact
integers serialized as decimal strings).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from ._exact import primes_up_to
from ._pell import is_valid_disc, split_disc
from .errors import TorbitError

TAG = {
    "fields": "field/order/unit enumeration",
    "minkowski-scan": "least-norm ideal class statistics scan",
    "orbit": "periodic orbit invariants",
    "abundance": "bounded-geodesic length growth scan",
    "escape": "escape of mass along the small-regulator cubic family",
    "separation": "pairwise orbit separation scan",
    "times23": "x2 x3 entropy / discrepancy / exponential sum sweep",
}


def _f(x: float) -> str:
    return f"{float(x):.12g}"


def _header_lines(command: str, args: argparse.Namespace) -> List[str]:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return [
        f"# torbit {__version__}",
        f"# command: {command}",
        f"# experiment: {TAG[command]}",
        f"# config: {json.dumps(cfg, sort_keys=True, default=str)}",
        f"# threads: {os.environ.get('TORBIT_THREADS', '1')}",
    ]


def _write_csv(path: Optional[str], command: str, args, columns, rows) -> str:
    buf = io.StringIO()
    for line in _header_lines(command, args):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(r)
    data = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        return path
    sys.stdout.write(data)
    return "-"


def _write_json(path: Optional[str], payload: dict) -> str:
    data = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        return path
    sys.stdout.write(data)
    return "-"


# ----------------------------------------------------------------------------
# commands

def cmd_fields(args) -> int:
    from .fields import enumerate_totally_real_fields, unit_group
    fields = enumerate_totally_real_fields(args.degree, args.disc_bound)
    rows = []
    for fl in fields:
        ug = unit_group(fl.maximal_order())
        rows.append([fl.field_disc,
                     ";".join(str(c) for c in fl.min_poly),
                     _f(ug.classical_regulator),
                     _f(ug.covolume_regulator)])
    _write_csv(args.out, "fields", args,
               ["disc", "min_poly", "classical_regulator", "covolume_regulator"],
               rows)
    return 0


def cmd_minkowski_scan(args) -> int:
    from .fields import enumerate_totally_real_fields
    from .ideals import field_minkowski_stat
    fields = enumerate_totally_real_fields(args.degree, args.disc_bound)
    rows = []
    total = 0.0
    for fl in fields:
        st = field_minkowski_stat(fl.maximal_order())
        hd = st.h_delta(args.delta)
        total += st.regulator * hd
        rows.append([st.disc, st.n_classes, st.m_K,
                     _f(st.m_K / math.sqrt(st.disc)),
                     _f(st.regulator), hd])
    out = _write_csv(args.out, "minkowski-scan", args,
                     ["disc", "n_classes", "m_K", "m_K/sqrt_disc", "regulator", "h_delta"],
                     rows)
    summary = {
        "command": "minkowski-scan",
        "degree": args.degree,
        "disc_bound": args.disc_bound,
        "delta": float(_f(args.delta)),
        "n_fields": len(fields),
        "sum_R_h_delta": float(_f(total)),
        "version": __version__,
    }
    spath = (args.out + ".summary.json") if args.out else None
    _write_json(spath, summary)
    return 0


def cmd_orbit(args) -> int:
    from .fields import enumerate_totally_real_fields
    from .ideals import class_representatives
    from .orbits import orbit_from_triple
    fields = [f for f in enumerate_totally_real_fields(args.degree, args.disc)
              if f.field_disc == args.disc]
    if not fields:
        raise TorbitError(f"no totally real field of degree {args.degree} "
                          f"and discriminant {args.disc}")
    fl = fields[0]
    classes = class_representatives(fl.maximal_order())
    if not (0 <= args.class_index < len(classes)):
        raise TorbitError(f"class index {args.class_index} out of range "
                          f"(h = {len(classes)})")
    theta = tuple(int(t) for t in args.theta.split(","))
    rep = classes[args.class_index].representative
    orb = orbit_from_triple(fl, rep.inverse(), theta)
    payload = orb.to_json()
    payload["class_index"] = args.class_index
    payload["version"] = __version__
    _write_json(args.out, payload)
    return 0


def cmd_abundance(args) -> int:
    from .modular2 import abundance_scan
    rows = abundance_scan(args.delta, args.delta_max,
                          grid_decades=args.grid_decades)
    _write_csv(args.out, "abundance", args,
               ["Delta", "delta", "n_orbits_inside", "total_length_inside",
                "total_length_all"],
               [[r.Delta, _f(r.delta), r.n_orbits_inside,
                 _f(r.total_length_inside), _f(r.total_length_all)]
                for r in rows])
    return 0


def cmd_escape(args) -> int:
    from .fields import simplest_cubic
    from .ideals import FractionalIdeal
    from .orbits import orbit_from_triple, escaped_mass_fraction
    rows = []
    for a in range(args.a_min, args.a_max + 1):
        fl = simplest_cubic(a)
        orb = orbit_from_triple(
            fl, FractionalIdeal.unit_ideal(fl.maximal_order()), (0, 1, 2))
        frac = escaped_mass_fraction(orb, args.delta, args.grid)
        rows.append([a, fl.field_disc, _f(orb.classical_regulator), _f(frac)])
    _write_csv(args.out, "escape", args,
               ["a", "disc", "classical_regulator", "escaped_fraction"], rows)
    return 0


def cmd_separation(args) -> int:
    from fractions import Fraction as F
    from .fields import quadratic_field_of_disc, Order
    from .ideals import FractionalIdeal
    from .orbits import orbit_from_triple
    from .dynamics import pairwise_separations
    targets = np.unique(np.round(np.logspace(
        math.log10(5), math.log10(args.disc_bound), args.grid)).astype(int))
    discs = []
    for t in targets:
        D = int(t)
        while not is_valid_disc(D):
            D += 1
        if D <= args.disc_bound and D not in discs:
            discs.append(D)
    orbits = []
    for D in discs:
        D0, f = split_disc(D)
        fld = quadratic_field_of_disc(D0)
        O = Order(fld, [[F(1), F(0)], [F(0), F(f)]])
        orbits.append(orbit_from_triple(fld, FractionalIdeal.unit_ideal(O), (0, 1)))
    res = pairwise_separations(orbits, args.window_r, 64)
    rows = [[orbits[r.pair[0]].disc_order_route,
             orbits[r.pair[1]].disc_order_route,
             _f(r.window_R), r.grid, _f(r.min_dist), _f(r.scaled_stat)]
            for r in res]
    _write_csv(args.out, "separation", args,
               ["D1", "D2", "window_R", "grid", "min_dist", "scaled_stat"], rows)
    return 0


def cmd_times23(args) -> int:
    from .times23 import sweep
    primes = [p for p in primes_up_to(args.q_max)
              if p >= args.q_min and math.gcd(p, 6) == 1]
    if not primes:
        qs = []
    elif args.count >= len(primes):
        qs = primes
    else:
        idx = np.unique(np.round(np.linspace(0, len(primes) - 1, args.count)).astype(int))
        qs = [primes[i] for i in idx]
    rows = sweep(qs)
    _write_csv(args.out, "times23", args,
               ["q", "group_order", "ratio_log_order_log_q", "H1",
                "entropy_floor", "max_discrepancy", "max_norm_exp_sum"],
               [[r.q, r.group_order, _f(r.ratio_log_order_log_q), _f(r.H1),
                 _f(r.entropy_floor), _f(r.max_discrepancy),
                 _f(r.max_norm_exp_sum)] for r in rows])
    return 0


# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="torbit",
        description="periodic torus orbit laboratory: batch scans and reports")
    p.add_argument("--seed", type=int, default=0, help="run seed (recorded)")
    p.add_argument("--precision-bits", type=int, default=80)
    p.add_argument("--out", type=str, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fields")
    f.add_argument("--degree", type=int, required=True, choices=(2, 3))
    f.add_argument("--disc-bound", type=int, required=True)
    f.set_defaults(func=cmd_fields)

    m = sub.add_parser("minkowski-scan")
    m.add_argument("--degree", type=int, required=True, choices=(2, 3))
    m.add_argument("--disc-bound", type=int, required=True)
    m.add_argument("--delta", type=float, required=True)
    m.set_defaults(func=cmd_minkowski_scan)

    o = sub.add_parser("orbit")
    o.add_argument("--degree", type=int, required=True, choices=(2, 3))
    o.add_argument("--disc", type=int, required=True)
    o.add_argument("--class-index", type=int, default=0)
    o.add_argument("--theta", type=str, default=None)
    o.set_defaults(func=cmd_orbit)

    a = sub.add_parser("abundance")
    a.add_argument("--delta", type=float, required=True)
    a.add_argument("--delta-max", dest="delta_max", type=int, required=True)
    a.add_argument("--grid-decades", type=int, default=8)
    a.set_defaults(func=cmd_abundance)

    e = sub.add_parser("escape")
    e.add_argument("--delta", type=float, required=True)
    e.add_argument("--grid", type=int, default=16)
    e.add_argument("--a-min", type=int, default=-1)
    e.add_argument("--a-max", type=int, default=30)
    e.set_defaults(func=cmd_escape)

    s = sub.add_parser("separation")
    s.add_argument("--disc-bound", type=int, required=True)
    s.add_argument("--window-r", type=float, default=40.0)
    s.add_argument("--grid", type=int, default=20)
    s.set_defaults(func=cmd_separation)

    t = sub.add_parser("times23")
    t.add_argument("--q-min", type=int, required=True)
    t.add_argument("--q-max", type=int, required=True)
    t.add_argument("--count", type=int, default=40)
    t.set_defaults(func=cmd_times23)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "orbit" and args.theta is None:
        args.theta = ",".join(str(i) for i in range(args.degree))
    try:
        return args.func(args)
    except TorbitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
