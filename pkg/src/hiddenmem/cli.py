"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 incomplete family, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from pathlib import Path
from typing import Any, Sequence

from . import io
from .circuits import CIRCUITS
from .qrf import FitConfig, certify
from .quantum import InvariantError, ProbeSchedule, all_pattern_statistics, run_schedule
from .reproduce import reproduce
from .stats import DEFAULT_TOL, IncompleteFamilyError, JointDistribution, StatisticsFamily, witness_hidden_memory

EXIT_OK, EXIT_INPUT, EXIT_INCOMPLETE, EXIT_INVARIANT = 0, 2, 3, 4
FORMATS = ("json", "csv", "table")


def _num(x: float) -> str:
    return f"{x:.12g}"


def _round(obj: Any) -> Any:
    """Round every float in a JSON-ready structure to 12 significant digits."""
    if isinstance(obj, float):
        return float(_num(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
    else:
        print(text)


def _dist_rows(dist: JointDistribution) -> list[tuple[str, str, float]]:
    times = [t + 1 for t in dist.measured_times]
    return [(dist.bits, " ".join(f"x{t}={x}" for t, x in zip(times, xs)), float(p))
            for xs, p in zip(dist.outcomes(), dist.probs.ravel())]


def _render_dists(dists: list[JointDistribution], fmt: str) -> str:
    rows = [r for dist in dists for r in _dist_rows(dist)]
    if fmt == "csv":
        buf = _io.StringIO()
        buf.write(f"# outcome order: {io.OUTCOME_ORDER}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pattern", "outcomes", "probability"])
        for pat, outs, p in rows:
            w.writerow([pat, outs, _num(p)])
        return buf.getvalue()
    lines = [f"{'pattern':<10}{'outcomes':<32}{'probability':>20}"]
    lines += [f"{pat:<10}{outs or '(none)':<32}{_num(p):>20}" for pat, outs, p in rows]
    return "\n".join(lines)


def _load_family(path: str, threads: int = 1) -> StatisticsFamily:
    doc = io.load_json(path)
    if isinstance(doc, dict) and "steps" in doc:
        return all_pattern_statistics(io.circuit_from_json(doc), threads)
    return io.family_from_json(doc)


def cmd_simulate(args: argparse.Namespace) -> int:
    proc = io.circuit_from_json(io.load_json(args.circuit))
    if args.schedule is not None:
        if len(args.schedule) != proc.n_times:
            raise io.InputError(f"--schedule has {len(args.schedule)} bits but the circuit has {proc.n_times} times")
        try:
            sched = ProbeSchedule.from_bits(args.schedule)
        except ValueError as exc:
            raise io.InputError(f"--schedule: {exc}") from None
        dist = run_schedule(proc, sched)
        if args.format == "json":
            text = io.dump_json(_round(io.distribution_to_json(dist)))
        else:
            text = _render_dists([dist], args.format)
    else:
        fam = all_pattern_statistics(proc, args.threads)
        if args.format == "json":
            text = io.dump_json(_round(io.family_to_json(fam)))
        else:
            text = _render_dists(list(fam.table.values()), args.format)
    _emit(text, args.out)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    fam = _load_family(args.family, args.threads)
    report = witness_hidden_memory(fam, args.tol)
    if args.format == "json":
        text = io.dump_json(_round(report.to_dict()))
    elif args.format == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "passed", "worst", "where"])
        for c in report.checks():
            w.writerow([c.name, c.passed, _num(c.worst), c.where])
        w.writerow(["verdict", "", "", report.verdict.value])
        text = buf.getvalue()
    else:
        text = report.render()
    _emit(text, args.out)
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    fam = _load_family(args.family)
    cfg = FitConfig(n_starts=args.starts, seed=args.seed, ancilla_dim=args.ancilla_dim,
                    max_iters=args.max_iters, threads=args.threads)
    rep = certify(fam, cfg, args.tol)
    if args.format == "json":
        text = io.dump_json(_round(rep.to_dict()))
    else:
        lines = [rep.witness.render(), f"residual: {_num(rep.residual)}",
                 "per-start losses: " + " ".join(_num(x) for x in rep.per_start_losses),
                 f"conclusion: {rep.conclusion.value}"]
        text = "\n".join(lines)
    _emit(text, args.out)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    rep = reproduce(args.tol)
    if args.format == "json":
        text = io.dump_json(_round(rep.to_dict()))
    elif args.format == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["circuit", "table", "pattern", "outcomes", "expected", "computed", "status"])
        for t in rep.tables:
            for o, e, c in t.rows:
                w.writerow([t.circuit, t.label, t.pattern, o, _num(e), _num(c), "PASS" if t.passed else "FAIL"])
        for v in rep.verdicts:
            w.writerow([v.circuit, "verdict", "", "", v.expected, v.got, "PASS" if v.passed else "FAIL"])
        text = buf.getvalue()
    else:
        lines = []
        for t in rep.tables:
            lines.append(f"[{'PASS' if t.passed else 'FAIL'}] {t.circuit} {t.label:<18} pattern {t.pattern}"
                         f"  max|diff| = {_num(t.max_diff)}")
            for o, e, c in t.rows:
                lines.append(f"    {o:<28}expected {_num(e):>8}   computed {_num(c):>20}")
        for v in rep.verdicts:
            worst = ", ".join(f"{k}={_num(x)}" for k, x in v.worst.items())
            lines.append(f"[{'PASS' if v.passed else 'FAIL'}] {v.circuit} verdict {v.got} (expected {v.expected}; {worst})")
        lines.append("ALL PASS" if rep.passed else "SOME CHECKS FAILED")
        text = "\n".join(lines)
    _emit(text, args.out)
    return EXIT_OK if rep.passed else EXIT_INVARIANT


def cmd_circuit(args: argparse.Namespace) -> int:
    _emit(io.dump_json(io.circuit_to_json(CIRCUITS[args.name]())), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hiddenmem", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, formats: Sequence[str] = FORMATS, default: str = "table") -> None:
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("simulate", help="probability tables of a circuit")
    sp.add_argument("circuit", help="circuit JSON file")
    sp.add_argument("--schedule", metavar="BITS", help="probing pattern, first time leftmost; omit for all patterns")
    common(sp, default="json")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze", help="Markovianity/compatibility witnesses for a family")
    sp.add_argument("family", help="family JSON (or circuit JSON, simulated on the fly)")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("certify", help="witness check plus memoryless-model fit")
    sp.add_argument("family", help="family JSON (or circuit JSON)")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--starts", type=int, default=FitConfig.n_starts)
    sp.add_argument("--seed", type=int, default=FitConfig.seed)
    sp.add_argument("--ancilla-dim", type=int, default=None)
    sp.add_argument("--max-iters", type=int, default=FitConfig.max_iters)
    common(sp, formats=("json", "table"))
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("reproduce", help="rebuild both circuits and check every reference table")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common(sp)
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("circuit", help="export a built-in circuit as JSON")
    sp.add_argument("name", choices=sorted(CIRCUITS))
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_circuit)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompleteFamilyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except InvariantError as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (io.InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
