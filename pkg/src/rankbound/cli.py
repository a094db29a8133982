"""Command-line interface.

Exit codes: 0 success, 1 usage or parameter error, 2 invalid state file,
3 an assert-mode verification found violations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import bound_set, classify
from .errors import ParseError, RankboundError, ValidationError
from .harness import CLAIMS, SEARCH_CLAIMS, ClaimSpec, run_claim, search_counterexample
from .measures import measure_all, singlet_fraction_magic, singlet_fraction_optimize
from .states import (
    dumps_state,
    load_state,
    maximally_mixed,
    mems,
    random_rank_r,
    save_state,
    werner,
)

EXIT_OK, EXIT_USAGE, EXIT_STATE, EXIT_VIOLATION = 0, 1, 2, 3

SWEEP_HEADER = ["p", "rank", "concurrence", "fidelity", "singlet_fraction", "linear_entropy", "vn_entropy"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """17 significant digits, locale independent."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


# --- commands -----------------------------------------------------------------

def cmd_bounds(args) -> int:
    d = args.dim
    ranks = [args.rank] if args.rank is not None else list(range(2, d * d + 1))
    sets = [bound_set(d, r) for r in ranks]
    if args.format == "json":
        _emit(json.dumps([b.to_dict() for b in sets], indent=2) + "\n", None)
        return EXIT_OK
    header = ["d_local", "rank", "vn_bound", "lin_bound", "lin_bound_exact", "conc_bound"]
    rows = [[b.d_local, b.rank, fmt(b.vn_bound), fmt(b.lin_bound), str(b.lin_bound_exact), fmt(b.conc_bound)]
            for b in sets]
    _emit(_csv_text(header, rows) if args.format == "csv" else _table(header, rows), None)
    return EXIT_OK


def cmd_measures(args) -> int:
    try:
        rho = load_state(args.state)
    except (ParseError, ValidationError) as exc:
        print(f"invalid state file {args.state}: {exc}", file=sys.stderr)
        return EXIT_STATE
    except OSError as exc:
        print(f"cannot read {args.state}: {exc}", file=sys.stderr)
        return EXIT_STATE
    method = args.fef
    if method is None:
        method = "magic" if rho.d_local == 2 else "optimize"
    if method in ("magic", "both") and rho.d_local != 2:
        print("magic-basis singlet fraction needs d_local = 2", file=sys.stderr)
        return EXIT_USAGE
    ms = measure_all(
        rho,
        fef_method="magic" if method == "both" else method,
        restarts=args.restarts,
        seed=args.seed,
    )
    verdict = classify(ms)
    out = {"measures": ms.to_dict(), "verdict": verdict.to_dict(), "fef_method": method}
    if method == "both":
        fo = singlet_fraction_optimize(rho, args.restarts, args.seed)
        fm = singlet_fraction_magic(rho)
        out["fef_optimize"] = fo
        out["fef_magic"] = fm
        out["fef_gap"] = abs(fm - fo)
    if args.format == "json":
        _emit(json.dumps(out, indent=2) + "\n", None)
    else:
        rows = [[k, fmt(v)] for k, v in ms.to_dict().items()]
        rows += [[k, fmt(v)] for k, v in verdict.to_dict().items() if k != "rank"]
        rows += [[k, fmt(out[k])] for k in ("fef_magic", "fef_optimize", "fef_gap") if k in out]
        _emit(_table(["quantity", "value"], rows), None)
    return EXIT_OK


def sweep_rows(rank: int, steps: int) -> list[list]:
    rows = []
    for p in np.linspace(0.0, 1.0, steps):
        ms = measure_all(werner(rank, float(p)))
        rows.append([float(p), rank, ms.concurrence, ms.fidelity, ms.singlet_fraction,
                     ms.linear_entropy, ms.vn_entropy])
    return rows


def cmd_sweep(args) -> int:
    if args.steps < 2:
        print("--steps must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    rows = [[fmt(v) for v in r] for r in sweep_rows(args.rank, args.steps)]
    try:
        _emit(_csv_text(SWEEP_HEADER, rows), args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_make(args) -> int:
    if args.family == "werner":
        if args.rank is None or args.p is None:
            print("werner needs --rank and --p", file=sys.stderr)
            return EXIT_USAGE
        rho = werner(args.rank, args.p)
    elif args.family == "mems":
        if args.spectrum is None:
            print("mems needs --spectrum l1,l2,l3,l4", file=sys.stderr)
            return EXIT_USAGE
        try:
            values = [float(v) for v in args.spectrum.split(",")]
        except ValueError:
            print(f"bad --spectrum {args.spectrum!r}", file=sys.stderr)
            return EXIT_USAGE
        rho = mems(values)
    elif args.family == "mixed":
        rho = maximally_mixed(args.dim)
    else:
        if args.rank is None:
            print("random needs --rank", file=sys.stderr)
            return EXIT_USAGE
        rho = random_rank_r(args.dim, args.rank, args.seed)
    if args.out in (None, "-"):
        sys.stdout.write(dumps_state(rho) + "\n")
    else:
        save_state(rho, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    claims = [c.strip() for c in args.claims.split(",") if c.strip()]
    if claims == ["all"]:
        claims = list(CLAIMS)
    specs = []
    for c in claims:
        specs.append(ClaimSpec(c, args.rank, args.trials, args.seed, args.mode, args.tolerance))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    rows = []
    for spec in specs:
        rep = run_claim(spec, workers=args.workers)
        path = outdir / f"{spec.claim_id}_r{spec.rank}.json"
        path.write_text(rep.to_json() + "\n", encoding="utf-8")
        if rep.failed:
            status = EXIT_VIOLATION
        rows.append([spec.claim_id, spec.rank, rep.mode, rep.trials_run, rep.violations,
                     format(rep.violation_rate, ".6g"), format(rep.worst_margin, ".6g"),
                     "FAIL" if rep.failed else "ok", str(path)])
    _emit(_table(["claim", "rank", "mode", "trials", "violations", "rate", "worst_margin", "status", "report"],
                 rows), None)
    return status


def cmd_search(args) -> int:
    res = search_counterexample(args.claim, args.rank, args.restarts, args.seed, tolerance=args.tolerance)
    _emit(json.dumps(res.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rankbound", description="Rank-dependent teleportation bounds: construct, measure, verify.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="print S*, S_L* and C_r for (d, r)")
    b.add_argument("--dim", type=int, required=True, help="local dimension d")
    b.add_argument("--rank", type=int, help="state rank (default: every rank 2..d^2)")
    b.add_argument("--format", choices=("table", "json", "csv"), default="table")
    b.set_defaults(func=cmd_bounds)

    m = sub.add_parser("measures", help="measures and verdicts for a state file")
    m.add_argument("state", help="state JSON file")
    m.add_argument("--fef", choices=("magic", "optimize", "both"), help="singlet-fraction method")
    m.add_argument("--restarts", type=int, default=32)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--format", choices=("table", "json"), default="table")
    m.set_defaults(func=cmd_measures)

    s = sub.add_parser("sweep", help="Werner-family CSV of concurrence, fidelity and entropies over p")
    s.add_argument("--family", choices=("werner",), default="werner")
    s.add_argument("--rank", type=int, choices=(2, 3, 4), required=True)
    s.add_argument("--steps", type=int, default=101, help="grid points on p in [0, 1]")
    s.add_argument("--out", help="output CSV (default stdout)")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run claim checks and write report JSON")
    v.add_argument("--claims", required=True, help=f"comma list from: {', '.join(CLAIMS)}; or 'all'")
    v.add_argument("--rank", type=int, choices=(2, 3, 4), required=True)
    v.add_argument("--trials", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--mode", choices=("assert", "survey"), help="default depends on the claim")
    v.add_argument("--tolerance", type=float, default=1e-9)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out", default="reports", help="directory for report files")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("make", help="write a state file")
    k.add_argument("--family", choices=("werner", "mems", "mixed", "random"), required=True)
    k.add_argument("--rank", type=int)
    k.add_argument("--p", type=float)
    k.add_argument("--spectrum", help="comma-separated eigenvalues for mems")
    k.add_argument("--dim", type=int, default=2, help="local dimension for mixed/random")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out", help="output file (default stdout)")
    k.set_defaults(func=cmd_make)

    c = sub.add_parser("search", help="derivative-free counterexample search")
    c.add_argument("--claim", choices=SEARCH_CLAIMS, required=True)
    c.add_argument("--rank", type=int, choices=(2, 3, 4), required=True)
    c.add_argument("--restarts", type=int, default=64)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tolerance", type=float, default=1e-9)
    c.add_argument("--out", help="output JSON (default stdout)")
    c.set_defaults(func=cmd_search)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RankboundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
