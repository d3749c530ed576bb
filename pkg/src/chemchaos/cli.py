"""Command-line interface: ``chemchaos <subcommand> ...``.

Exit codes: 0 success, 1 semantic negative (not chemical, infeasible plan,
truncated run), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import catalog
from .crn import CrnFormatError, canonical_crn, crn_complexity, crn_to_cds, fuse, parse, render
from .lce import LceError, lce_qr
from .polysys import (
    PolySystem,
    SystemFormatError,
    as_fraction,
    complexity,
    dump_system,
    dumps_system,
    format_fraction,
    format_system,
    is_chemical,
    load_system,
)
from .qcm import QcmReport, execute_plan, load_plan, universal_qcm
from .sim import DEFAULT_ATOL, DEFAULT_RTOL, find_equilibria, integrate, monitor_positivity

THREADS_ENV = "CHEMCHAOS_THREADS"


class UsageError(Exception):
    pass


# -- input helpers -------------------------------------------------------------

def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("system", nargs="?", help="system definition file (JSON)")
    p.add_argument("--id", dest="entry_id", help="catalog id instead of a file")
    p.add_argument("--eps", help="epsilon for parametric catalog entries")
    p.add_argument("--mu", help="mu for parametric catalog entries")


def _param(text: str | None, name: str) -> Fraction | None:
    if text is None:
        return None
    try:
        v = as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--{name}: cannot read {text!r} as a number") from None
    if v <= 0:
        raise UsageError(f"--{name} must be positive")
    return v


def _params(args) -> tuple[Fraction | None, Fraction | None]:
    eps, mu = _param(args.eps, "eps"), _param(args.mu, "mu")
    if (eps is None) != (mu is None):
        raise UsageError("give both --eps and --mu, or neither")
    return eps, mu


def _resolve(args) -> tuple[PolySystem, catalog.CatalogEntry | None, tuple]:
    if (args.system is None) == (args.entry_id is None):
        raise UsageError("give exactly one input: a system file or --id")
    eps, mu = _params(args)
    if args.entry_id is not None:
        try:
            entry = catalog.get(args.entry_id)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        if entry.parametric and eps is None:
            eps, mu = entry.default_params
        return entry.system(eps, mu), entry, (eps, mu)
    if eps is not None:
        raise UsageError("--eps/--mu only apply to parametric catalog entries")
    return load_system(args.system), None, (None, None)


def _initial_condition(args, s: PolySystem, entry, params) -> np.ndarray:
    if args.ic is not None:
        try:
            vals = [float(as_fraction(v.strip())) for v in args.ic.split(",")]
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--ic: cannot read {args.ic!r}") from None
        if len(vals) != s.dim:
            raise UsageError(f"--ic needs {s.dim} comma-separated values")
        return np.array(vals)
    if entry is None or entry.initial_condition is None:
        raise UsageError("--ic is required for this system")
    return np.array([float(v) for v in entry.ic(*params)])


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


@contextlib.contextmanager
def _out_stream(path: str | None):
    if not path:
        yield sys.stdout
        return
    with open(path, "w") as fh:
        yield fh


# -- CSV writers -----------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_trajectory_csv(fh, times, states) -> None:
    n = states.shape[1]
    fh.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
    for t, row in zip(times, states):
        fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")


def write_lce_csv(fh, series) -> None:
    n = series.lambdas.shape[1]
    fh.write("t," + ",".join(f"lambda{i + 1}" for i in range(n)) + "\n")
    for t, row in zip(series.times, series.lambdas):
        fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")
    fh.write(series.summary() + "\n")


# -- subcommands ----------------------------------------------------------------------

def cmd_list(args) -> int:
    for eid in catalog.ids():
        e = catalog.get(eid)
        tag = " (eps, mu)" if e.parametric else ""
        print(f"{eid:30s} {e.description}{tag}")
    for fid, fig in catalog.FIGURES.items():
        print(f"{fid:30s} figure: {fig.description}")
    return 0


def cmd_show(args) -> int:
    s, entry, params = _resolve(args)
    if args.out:
        dump_system(s, args.out)
    if args.json:
        print(dumps_system(s))
        return 0
    if entry is not None:
        print(f"# id: {entry.id}")
        print(f"# {entry.description}")
        print(f"# source: {entry.provenance}")
        if entry.parametric:
            print(f"# eps = {format_fraction(params[0])}, mu = {format_fraction(params[1])}")
    ok, _ = is_chemical(s)
    print(f"# complexity {complexity(s).label()}, {'chemical' if ok else 'not chemical'}")
    for line in format_system(s).splitlines():
        print(f"# {line}")
    print(dumps_system(s))
    if ok:
        c = canonical_crn(s)
        f = fuse(c)
        print(f"# canonical CRN {crn_complexity(c).label()}")
        print(render(c))
        print(f"# fused CRN {crn_complexity(f).label()}")
        print(render(f))
    return 0


def cmd_check(args) -> int:
    s, _entry, _ = _resolve(args)
    ok, bad = is_chemical(s)
    print(f"complexity {complexity(s).label()}")
    print("chemical" if ok else "not chemical")
    for i, m in bad:
        print(f"  equation {i + 1} ({s.var_names[i]}): monomial coeff {format_fraction(m.coeff)} "
              f"exps {list(m.exps)} is negative without {s.var_names[i]} as a factor")
    return 0 if ok else 1


def _write_report(rep: QcmReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    dump_system(rep.perturbed, out / "perturbed.json")
    dump_system(rep.translated, out / "translated.json")
    dump_system(rep.rescaled, out / "rescaled.json")
    (out / "margins.txt").write_text(rep.margin_table() + "\n")
    summary = {
        "chemical": rep.chemical,
        "constraints_ok": rep.constraints_ok,
        "complexity": {k: complexity(getattr(rep, k)).label()
                       for k in ("perturbed", "translated", "rescaled")},
        "files": {"perturbed": "perturbed.json", "translated": "translated.json",
                  "rescaled": "rescaled.json", "margins": "margins.txt"},
    }
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")


def cmd_transform(args) -> int:
    if args.universal:
        if args.plan is not None:
            raise UsageError("--universal takes the system via --system-file or --id, not a plan")
        ns = argparse.Namespace(system=args.system_file, entry_id=args.entry_id, eps=args.eps, mu=args.mu)
        s, _, _ = _resolve(ns)
        if args.a is None or args.universal_mu is None:
            raise UsageError("--universal needs --a and --shift-mu")
        a = [as_fraction(v) for v in args.a.split(",")]
        rep = universal_qcm(s, a, as_fraction(args.universal_mu))
    else:
        if args.plan is None:
            raise UsageError("give a plan file or --universal")
        rep = execute_plan(load_plan(args.plan))
    _write_report(rep, Path(args.out))
    print(rep.margin_table())
    print(f"perturbed {complexity(rep.perturbed).label()}, rescaled {complexity(rep.rescaled).label()}")
    if not rep.chemical:
        i, m = rep.violations[0]
        failing = [c.describe() for c in rep.checks if not c.satisfied]
        why = f"; failing inequality: {failing[0]}" if failing else ""
        print(f"infeasible: equation {i + 1} keeps non-chemical monomial coeff {format_fraction(m.coeff)} "
              f"exps {list(m.exps)}{why}", file=sys.stderr)
        return 1
    return 0


def cmd_crn(args) -> int:
    if args.emit_ode:
        if args.crn_file is None:
            raise UsageError("--emit-ode needs --crn-file")
        c = parse(Path(args.crn_file).read_text())
        if args.fuse:
            c = fuse(c)
        s = crn_to_cds(c)
        with _out_stream(args.out) as fh:
            fh.write(dumps_system(s) + "\n")
        return 0
    if args.crn_file is not None:
        c = parse(Path(args.crn_file).read_text())
    else:
        s, _, _ = _resolve(args)
        ok, bad = is_chemical(s)
        if not ok:
            i, m = bad[0]
            print(f"not chemical: equation {i + 1} monomial coeff {format_fraction(m.coeff)} "
                  f"exps {list(m.exps)}", file=sys.stderr)
            return 1
        c = canonical_crn(s)
    if args.fuse:
        c = fuse(c)
    with _out_stream(args.out) as fh:
        if args.degrees:
            fh.write(f"# reactions {crn_complexity(c).label()}\n")
        fh.write(render(c) + "\n")
        for n in c.notes:
            fh.write(f"# note: {n}\n")
    return 0


def cmd_simulate(args) -> int:
    s, entry, params = _resolve(args)
    x0 = _initial_condition(args, s, entry, params)
    traj = integrate(s, x0, args.t_end, samples=args.samples, rtol=args.rtol, atol=args.atol)
    with _out_stream(args.out) as fh:
        write_trajectory_csv(fh, traj.times, traj.states)
    if traj.truncated:
        print(f"trajectory truncated: {traj.event}", file=sys.stderr)
        return 1
    hit = monitor_positivity(traj) if is_chemical(s)[0] and np.all(x0 > 0) else None
    if hit is not None:
        print(f"warning: component x{hit[1] + 1} = {hit[2]:.3g} at t = {hit[0]:.6g}", file=sys.stderr)
    return 0


def cmd_lce(args) -> int:
    s, entry, params = _resolve(args)
    x0 = _initial_condition(args, s, entry, params)
    try:
        series = lce_qr(s, x0, args.t_end, args.tau, rtol=args.rtol, atol=args.atol, transient=args.transient)
    except LceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with _out_stream(args.out) as fh:
        write_lce_csv(fh, series)
    if args.out:
        print(series.summary())
    if series.event:
        print(f"series truncated: {series.event}", file=sys.stderr)
        return 1
    return 0


# -- figure bundles -----------------------------------------------------------------------

def _run_panel(panel: catalog.Panel, out: Path, opts) -> dict:
    entry = catalog.get(panel.entry_id)
    params = panel.params
    s = entry.system(*(params or (None, None)))
    x0 = [float(v) for v in catalog.figure_ic(panel.entry_id, params)]
    record = {"panel": panel.name, "system": panel.entry_id, "kind": panel.kind,
              "initial_condition": [format_fraction(v) for v in catalog.figure_ic(panel.entry_id, params)]}
    if params is not None:
        record["eps"], record["mu"] = format_fraction(params[0]), format_fraction(params[1])
    name = f"{panel.name}.csv"
    if panel.kind == "trajectory":
        traj = integrate(s, x0, opts.t_end, samples=opts.samples, rtol=opts.rtol, atol=opts.atol)
        with open(out / name, "w") as fh:
            write_trajectory_csv(fh, traj.times, traj.states)
        record.update(t_end=opts.t_end, samples=len(traj.times), event=traj.event)
    elif panel.kind == "lce":
        series = lce_qr(s, x0, opts.lce_t_end, rtol=opts.rtol, atol=opts.atol)
        with open(out / name, "w") as fh:
            write_lce_csv(fh, series)
        record.update(t_end=opts.lce_t_end, tau=series.tau, final=list(series.final),
                      mean_divergence=series.mean_divergence, event=series.event)
    elif panel.kind == "equilibria":
        box = catalog.search_box(panel.entry_id, *(params or (None, None)))
        eqs = find_equilibria(s, box)
        with open(out / name, "w") as fh:
            n = s.dim
            fh.write(",".join([f"x{i + 1}" for i in range(n)] + ["stable", "residual", "relative_residual"]
                              + [f"re_eig{i + 1}" for i in range(n)] + [f"im_eig{i + 1}" for i in range(n)]) + "\n")
            for e in eqs:
                fh.write(",".join([_fmt(v) for v in e.point] + [str(int(e.stable)), _fmt(e.residual), _fmt(e.relative_residual)]
                                  + [_fmt(v) for v in e.jacobian_eigenvalues.real]
                                  + [_fmt(v) for v in e.jacobian_eigenvalues.imag]) + "\n")
        record.update(box=box, count=len(eqs))
    else:
        raise ValueError(f"unknown panel kind {panel.kind}")
    record["file"] = name
    return record


def threads() -> int:
    text = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(text))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {text!r}") from None


def cmd_reproduce(args) -> int:
    try:
        fig = catalog.figure(args.figure)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    out = Path(args.out) / fig.id if args.out else Path(fig.id)
    out.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        records = list(pool.map(lambda p: _run_panel(p, out, args), fig.panels))
    manifest = {"figure": fig.id, "description": fig.description, "rtol": args.rtol, "atol": args.atol,
                "panels": records}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    for r in records:
        print(f"{r['panel']}: {out / r['file']}")
    return 1 if any(r.get("event") for r in records) else 0


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemchaos", description="chemical realisations of chaotic polynomial systems")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="catalog ids and figure bundles")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("show", help="print a system with its CRNs")
    _add_source(p)
    p.add_argument("--json", action="store_true", help="print only the system file")
    p.add_argument("-o", "--out", help="also write the system file here")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("check", help="chemicality verdict and complexity label")
    _add_source(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("transform", help="execute a quasi-chemical map plan")
    p.add_argument("plan", nargs="?", help="plan file (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--universal", action="store_true", help="universal map on a system instead of a plan")
    p.add_argument("--system-file", help="system file for --universal")
    p.add_argument("--id", dest="entry_id", help="catalog id for --universal")
    p.add_argument("--eps")
    p.add_argument("--mu")
    p.add_argument("--a", help="comma-separated positive translation weights for --universal")
    p.add_argument("--shift-mu", dest="universal_mu", help="mu of the universal map (shift = a / mu)")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("crn", help="canonical or fused reaction network")
    _add_source(p)
    p.add_argument("--crn-file", help="read a reaction network instead of a system")
    p.add_argument("--canonical", action="store_true", help="canonical network (default)")
    p.add_argument("--fuse", action="store_true", help="fuse reactions sharing reactants and rate")
    p.add_argument("--degrees", action="store_true", help="print the reaction complexity label")
    p.add_argument("--emit-ode", action="store_true", help="convert --crn-file to a system file")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_crn)

    for name, func, helptext in (("simulate", cmd_simulate, "integrate a trajectory to CSV"),
                                 ("lce", cmd_lce, "finite-time Lyapunov exponents to CSV")):
        p = sub.add_parser(name, help=helptext)
        _add_source(p)
        p.add_argument("--ic", help="comma-separated initial condition (default: catalog figure IC)")
        p.add_argument("--t-end", type=_positive_float, default=1000.0 if name == "simulate" else 1e4)
        p.add_argument("--rtol", type=_positive_float, default=DEFAULT_RTOL)
        p.add_argument("--atol", type=_positive_float, default=DEFAULT_ATOL)
        p.add_argument("-o", "--out")
        if name == "simulate":
            p.add_argument("--samples", type=int, default=10001)
        else:
            p.add_argument("--tau", type=_positive_float)
            p.add_argument("--transient", type=float, default=0.0)
        p.set_defaults(func=func)

    p = sub.add_parser("reproduce", help="CSV bundle for one figure")
    p.add_argument("figure", help="fig1 .. fig5")
    p.add_argument("--out", help="parent directory (default: current directory)")
    p.add_argument("--t-end", type=_positive_float, default=1000.0)
    p.add_argument("--samples", type=int, default=10001)
    p.add_argument("--lce-t-end", type=_positive_float, default=1e4)
    p.add_argument("--rtol", type=_positive_float, default=DEFAULT_RTOL)
    p.add_argument("--atol", type=_positive_float, default=DEFAULT_ATOL)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SystemFormatError, CrnFormatError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
