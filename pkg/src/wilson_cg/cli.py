"""Command-line driver: ``wilson-cg {gen,apply,solve,bench,model}``."""

import argparse
import csv
import json
import re
import sys
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import fieldio, perf
from ._parallel import resolve_threads
from .cg import CGBreakdownError, SolverParams, cg_normal, make_point_source
from .dirac import apply_D, apply_Ddag, apply_normal, kappa_from_mass, stencil_flops
from .fields import NonUnitaryError, random_fermion
from .lattice import ANTIPERIODIC, PERIODIC, LatticeDims

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 4
EXIT_BREAKDOWN = 5

WALL_CLOCK_FIELDS = ("timings", "achieved_gflops")


@dataclass
class RunRecord:
    command: str
    parameters: dict
    dims: dict
    seed: object = None
    timings: dict = field(default_factory=dict)
    flops_total: int = 0
    achieved_gflops: float = 0.0
    solver: dict = None
    model: dict = None

    def to_dict(self):
        return asdict(self)

    def without_wall_clock(self):
        d = self.to_dict()
        for k in WALL_CLOCK_FIELDS:
            d.pop(k, None)
        return d


def _write_record(record, path):
    if path:
        with open(path, "w") as fh:
            json.dump(record.to_dict(), fh, indent=2)
            fh.write("\n")


def parse_clock(text):
    """'300MHz', '1.5 GHz', '150e6' -> Hz."""
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*([kMG]?Hz)?\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse clock {text!r}")
    scale = {None: 1.0, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}[m.group(2)]
    return float(m.group(1)) * scale


def _kappa(args):
    if args.mq is not None:
        return kappa_from_mass(args.mq)
    return args.kappa


def _source(spec, dims):
    """point[:site,spin,color] | random:SEED | file:PATH"""
    kind, _, rest = spec.partition(":")
    if kind == "point":
        site, spin, color = (int(x) for x in rest.split(",")) if rest else (0, 0, 0)
        return make_point_source(dims, site, spin, color)
    if kind == "random":
        return random_fermion(dims, np.random.default_rng(int(rest or 0)))
    if kind == "file":
        eta = fieldio.read_fermion(rest)
        if eta.dims != dims:
            raise ValueError(f"source lattice {eta.dims} does not match gauge {dims}")
        return eta
    raise ValueError(f"unknown source {spec!r}")


def _emit(rows, fmt, out, columns=None):
    """Print a list of flat dicts as an aligned table, CSV or JSON lines."""
    if not rows:
        return
    columns = columns or list(rows[0])
    if fmt == "json-lines":
        for r in rows:
            out.write(json.dumps(r) + "\n")
    elif fmt == "csv":
        w = csv.DictWriter(out, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
        out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
        for row in cells:
            out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


# -- commands -----------------------------------------------------------------

def cmd_gen(args, out):
    dims = LatticeDims(args.L, args.T)
    t0 = time.perf_counter()
    U = fieldio.generate(args.kind, dims, args.seed)
    fieldio.write_gauge(args.out, U)
    header = fieldio.read_header(args.out)
    rec = RunRecord("gen", {"kind": args.kind, "out": args.out}, asdict(dims), args.seed,
                    {"total_s": time.perf_counter() - t0})
    _emit([{"file": args.out, "lattice": str(dims), "kind": args.kind, "seed": args.seed,
            "checksum": f"{header.checksum:016x}"}], args.format, out)
    _write_record(rec, args.report)
    return EXIT_OK


_OPERATORS = {"D": apply_D, "Ddag": apply_Ddag, "normal": apply_normal}


def cmd_apply(args, out):
    U = fieldio.read_gauge(args.gauge, on_nonunitary=args.on_nonunitary)
    psi = _source(args.source, U.dims)
    kappa = _kappa(args)
    threads = resolve_threads(args.threads)
    t0 = time.perf_counter()
    res = _OPERATORS[args.op](U, psi, kappa, args.bc, threads)
    wall = time.perf_counter() - t0
    if args.out:
        fieldio.write_fermion(args.out, res)
    calls = 2 if args.op == "normal" else 1
    flops = calls * stencil_flops() * U.dims.volume
    _emit([{"op": args.op, "lattice": str(U.dims), "kappa": kappa,
            "norm": float(np.linalg.norm(res.psi)), "flops": flops}], args.format, out)
    rec = RunRecord("apply", {"op": args.op, "kappa": kappa, "source": args.source,
                              "bc": args.bc}, asdict(U.dims), None,
                    {"apply_s": wall}, flops, flops / wall / 1e9 if wall > 0 else 0.0)
    _write_record(rec, args.report)
    return EXIT_OK


def cmd_solve(args, out):
    t0 = time.perf_counter()
    U = fieldio.read_gauge(args.gauge, on_nonunitary=args.on_nonunitary)
    eta = _source(args.source, U.dims)
    kappa = _kappa(args)
    threads = resolve_threads(args.threads)
    t1 = time.perf_counter()
    params = SolverParams(tol=args.tol, max_iter=args.max_iter)
    res = cg_normal(U, eta, kappa, params, bc=args.bc, threads=threads,
                    deterministic=args.deterministic)
    t2 = time.perf_counter()
    if args.out:
        fieldio.write_fermion(args.out, res.psi)
    solve_s = t2 - t1
    solver = {
        "iterations": res.iterations,
        "converged": res.converged,
        "true_residual": res.true_residual,
        "recursive_residual": res.recursive_residual,
        "residual_history": res.residual_history,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "solution_checksum": f"{fieldio.checksum(fieldio.payload_bytes(res.psi)):016x}",
    }
    rec = RunRecord(
        "solve",
        {"gauge": args.gauge, "kappa": kappa, "mq": args.mq, "source": args.source,
         "bc": args.bc, "deterministic": args.deterministic},
        asdict(U.dims), None,
        {"load_s": t1 - t0, "solve_s": solve_s, "total_s": time.perf_counter() - t0},
        res.flops_total,
        res.flops_total / solve_s / 1e9 if solve_s > 0 else 0.0,
        solver,
    )
    _emit([{"lattice": str(U.dims), "kappa": kappa, "iterations": res.iterations,
            "converged": res.converged, "true_residual": res.true_residual,
            "flops": res.flops_total, "gflops": rec.achieved_gflops}], args.format, out)
    _write_record(rec, args.report)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_bench(args, out):
    dims = LatticeDims(args.L, args.T)
    U = fieldio.generate(args.gauge, dims, args.seed)
    psi = random_fermion(dims, np.random.default_rng(args.seed))
    threads = resolve_threads(args.threads)
    apply_D(U, psi, args.kappa, args.bc, threads)  # warm-up, not timed
    t0 = time.perf_counter()
    for _ in range(args.reps):
        apply_D(U, psi, args.kappa, args.bc, threads)
    wall = time.perf_counter() - t0
    f = stencil_flops()
    flops = args.reps * dims.volume * f
    gflops = flops / wall / 1e9
    formula = dims.volume * f * args.reps / wall / 1e9
    rec = RunRecord("bench", {"kappa": args.kappa, "reps": args.reps, "gauge": args.gauge,
                              "threads": threads}, asdict(dims), args.seed,
                    {"apply_s": wall, "per_call_s": wall / args.reps}, flops, gflops)
    _emit([{"lattice": str(dims), "reps": args.reps, "threads": threads, "wall_s": wall,
            "sites_per_s": dims.volume * args.reps / wall, "flops": flops,
            "gflops": gflops, "gflops_formula": formula}], args.format, out)
    _write_record(rec, args.report)
    return EXIT_OK


def cmd_model(args, out):
    data = perf.load_model_data(args.data)
    profiles = perf.load_profiles(data)
    names = args.profile or list(profiles)
    selected = [perf.get_profile(n, profiles) for n in names]
    dims = LatticeDims(args.L, args.T) if args.L else perf.reference_dims(data)
    f = args.flops_per_site or stencil_flops()
    rows, notes, records = [], [], []
    for p in selected:
        over = {}
        if args.clock:
            over["clock_hz"] = args.clock
        if args.II:
            over["interval"] = args.II
        if args.latency:
            over["latency"] = args.latency
        p = replace(p, **over)
        row = perf.compare_published(p, dims.volume, f)
        est = perf.throughput(dims.volume, f, p.clock_hz, p.interval, p.latency)
        eff = None
        if p.bandwidth:
            eff = perf.with_transfer(est, dims.volume, p, resident=args.resident,
                                     calls=args.calls).effective_gflops
        rows.append({
            "device": p.name, "II": p.interval, "clock_MHz": p.clock_hz / 1e6,
            "latency": p.latency, "V": dims.volume, "f": f,
            "model_gflops": row.model_gflops, "asymptote_gflops": row.asymptotic_gflops,
            "published_gflops": row.published_gflops, "rel_err": row.rel_error,
            "status": "-" if row.published_gflops is None else ("PASS" if row.passed else "FAIL"),
            "with_transfer_gflops": eff,
            "implied_f_asymptotic": row.implied_f_asymptotic,
        })
        if row.published_gflops is not None:
            notes.append(row.diagnostic())
        if p.calibrated:
            cal = perf.calibrate_bandwidth(p, perf.reference_dims(data).volume,
                                           data.get("flops_per_site"))
            notes.append(f"{p.name}: transfer/compute overhead ratio {cal.overhead_ratio:.3f}, "
                         f"calibrated channel bandwidth {cal.channel_bandwidth / 1e9:.4f} GB/s "
                         f"x {p.ddr_channels} channels")
        records.append(rows[-1])
    _emit(rows, args.format, out)
    if args.format == "table":
        for n in notes:
            out.write("note: " + n + "\n")
        for claim in perf.resource_scaling_check(data["size_scaling"]):
            out.write(f"scaling: {claim.claim}: {'PASS' if claim.passed else 'FAIL'} "
                      f"({claim.detail})\n")
    rec = RunRecord("model", {"profiles": names, "clock": args.clock, "II": args.II,
                              "latency": args.latency, "f": f}, asdict(dims),
                    model={"rows": records, "notes": notes})
    _write_record(rec, args.report)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json-lines"), default="table")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $WILSON_CG_THREADS or CPU count)")
    common.add_argument("--deterministic", action="store_true",
                        help="fixed-order reductions; results independent of --threads")
    common.add_argument("--report", help="write a JSON run record here")

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--L", type=int, default=4)
    lattice.add_argument("--T", type=int, default=8)

    bc = argparse.ArgumentParser(add_help=False)
    bc.add_argument("--bc", choices=(PERIODIC, ANTIPERIODIC), default=PERIODIC,
                    help="boundary condition in the time direction")

    kappa = argparse.ArgumentParser(add_help=False)
    g = kappa.add_mutually_exclusive_group()
    g.add_argument("--kappa", type=float, default=0.1)
    g.add_argument("--mq", type=float, default=None, help="quark mass; kappa = 1/(2(mq+4))")

    gauge_in = argparse.ArgumentParser(add_help=False)
    gauge_in.add_argument("gauge", help="gauge file written by 'gen'")
    gauge_in.add_argument("--on-nonunitary", choices=("error", "warn"), default="error")
    gauge_in.add_argument("--source", default="point",
                          help="point[:site,spin,color] | random:SEED | file:PATH")

    p = argparse.ArgumentParser(prog="wilson-cg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common, lattice], help="write a gauge configuration")
    s.add_argument("--kind", choices=fieldio.GAUGE_KINDS, default="random")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("apply", parents=[common, bc, kappa, gauge_in], help="apply D, D^dag or D D^dag")
    s.add_argument("--op", choices=tuple(_OPERATORS), default="D")
    s.add_argument("--out", help="write the result as a fermion file")
    s.set_defaults(func=cmd_apply)

    s = sub.add_parser("solve", parents=[common, bc, kappa, gauge_in], help="CG solve of D psi = eta")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=10_000)
    s.add_argument("--out", help="write the solution as a fermion file")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bench", parents=[common, lattice, bc], help="time repeated D applications")
    s.add_argument("--kappa", type=float, default=0.1)
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gauge", choices=fieldio.GAUGE_KINDS, default="random")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("model", parents=[common], help="analytic FPGA performance model")
    s.add_argument("--profile", action="append", help="device profile (repeatable; default all)")
    s.add_argument("--L", type=int, default=None)
    s.add_argument("--T", type=int, default=None)
    s.add_argument("--II", type=int, default=None, help="override initiation interval")
    s.add_argument("--latency", type=int, default=None, help="override kernel latency")
    s.add_argument("--clock", type=parse_clock, default=None, help="e.g. 300MHz")
    s.add_argument("--flops-per-site", type=int, default=None)
    s.add_argument("--calls", type=int, default=1)
    s.add_argument("--no-resident", dest="resident", action="store_false",
                   help="reload the links on every call")
    s.add_argument("--data", help="alternative device/table JSON file")
    s.set_defaults(func=cmd_model)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "model" and (args.L is None) != (args.T is None):
        parser.error("--L and --T must be given together")
    try:
        return args.func(args, out)
    except perf.UnknownProfileError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_VALIDATION
    except CGBreakdownError as exc:
        print(f"error: CG breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (fieldio.FieldFormatError, NonUnitaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
