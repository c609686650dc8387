"""Command-line front end: ``psbounds bound|sweep|verify|presets``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__, runner

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3
CONVENTIONS = (
    "settings 0-based; outcome 0 = no-click; uncharacterised party is the first tensor factor; "
    f"violated iff quantum_value > bound + {runner.VIOLATION_MARGIN:g}"
)
REFERENCE_TOL = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else "-inf"
    return f"{float(v):.12g}"


def _num(v):
    if v is None:
        return None
    if not math.isfinite(v):
        return str(v)
    return float(f"{float(v):.12g}")


def _options(args) -> dict:
    opts = {"seed": args.seed}
    if args.tol is not None:
        opts["tol"] = args.tol
    if args.max_iters is not None:
        opts["max_iters"] = args.max_iters
    return opts


def _load(args) -> dict:
    if args.preset and args.scenario:
        raise runner.ScenarioError("give either a scenario file or --preset, not both")
    if args.preset:
        return runner.load_preset(args.preset)
    if not args.scenario:
        raise runner.ScenarioError("no scenario given (pass a JSON file or --preset)")
    return runner.load_file(args.scenario)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def result_record(sc: dict, res: runner.Result) -> dict:
    eta = res.eta
    if isinstance(eta, list):
        eta = [_num(e) for e in eta]
    elif isinstance(eta, float):
        eta = _num(eta)
    rec = {
        "kind": res.kind,
        "scenario_sha256": runner.scenario_hash(sc),
        "eta": eta,
        "bound": _num(res.bound),
        "status": res.status,
        "gap": _num(res.gap),
        "quantum_value": _num(res.quantum_value),
        "violated": res.violated,
    }
    if res.analytic_upper_bound is not None:
        rec["analytic_upper_bound"] = _num(res.analytic_upper_bound)
    for k, v in res.extra.items():
        rec[k] = _num(v) if isinstance(v, float) else v
    return rec


def cmd_bound(args) -> int:
    sc = _load(args)
    eta = args.eta
    try:
        res = runner.run(sc, eta, _options(args))
    except runner.SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _emit(json.dumps(result_record(sc, res), indent=2) + "\n", args.out)
    return EXIT_OK


def sweep_csv(sc: dict, rows: list[runner.Row], options: dict) -> str:
    with_alpha = any(r.result is not None and "alpha" in r.result.extra for r in rows)
    buf = io.StringIO()
    buf.write(f"# psbounds {__version__} sweep\n")
    buf.write(f"# scenario_sha256: {runner.scenario_hash(sc)}\n")
    buf.write(f"# kind: {sc['kind']}\n")
    buf.write(f"# conventions: {CONVENTIONS}\n")
    buf.write(f"# options: {json.dumps(options, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    header = ["eta", "bound", "quantum_value", "violated", "status"] + (["alpha"] if with_alpha else [])
    w.writerow(header)
    for r in rows:
        if r.result is None:
            line = [fmt(r.eta), "", "", "", f"failed: {r.error}"]
            if with_alpha:
                line.append("")
        else:
            res = r.result
            line = [fmt(r.eta), fmt(res.bound), fmt(res.quantum_value), fmt(res.violated), res.status]
            if with_alpha:
                line.append(fmt(res.extra.get("alpha")))
        w.writerow(line)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    sc = _load(args)
    options = _options(args)
    rows = runner.sweep(sc, options)
    _emit(sweep_csv(sc, rows, options), args.out)
    bracket = runner.crossing_bracket(rows)
    if bracket:
        print(f"crossing between eta={fmt(bracket[0])} and eta={fmt(bracket[1])}", file=sys.stderr)
    return EXIT_SOLVER if any(r.result is None for r in rows) else EXIT_OK


def compare_reference(expected: str, reference: str, tol: float = REFERENCE_TOL) -> list[str]:
    """Differences between a freshly computed sweep CSV and a stored one."""
    problems = []

    def split(text):
        meta = [l for l in text.splitlines() if l.startswith("#")]
        body = list(csv.reader(l for l in text.splitlines() if l and not l.startswith("#")))
        return meta, body

    m1, b1 = split(expected)
    m2, b2 = split(reference)
    h1 = [l for l in m1 if "scenario_sha256" in l]
    h2 = [l for l in m2 if "scenario_sha256" in l]
    if h1 != h2:
        problems.append("scenario hash differs")
    if not b1 or not b2 or b1[0] != b2[0]:
        return problems + ["header row differs"]
    if len(b1) != len(b2):
        problems.append(f"row count {len(b2) - 1} != {len(b1) - 1}")
    for i, (r1, r2) in enumerate(zip(b1[1:], b2[1:]), start=1):
        for col, v1, v2 in zip(b1[0], r1, r2):
            if v1 == v2:
                continue
            try:
                ok = abs(float(v1) - float(v2)) <= tol * max(1.0, abs(float(v1)))
            except ValueError:
                ok = False
            if not ok:
                problems.append(f"row {i} column {col}: expected {v1}, reference has {v2}")
    return problems


def cmd_verify(args) -> int:
    sc = _load(args)
    options = _options(args)
    failed = False
    try:
        checks = runner.verify(sc, options)
    except (RuntimeError, ValueError) as exc:
        print(f"FAIL run: {exc}")
        return EXIT_VERIFY
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
        failed |= not c.passed
    if args.reference:
        try:
            with open(args.reference) as fh:
                reference = fh.read()
        except OSError as exc:
            raise runner.ScenarioError(f"{args.reference}: {exc.strerror}") from None
        fresh = sweep_csv(sc, runner.sweep(sc, options), options)
        problems = compare_reference(fresh, reference)
        for p in problems:
            print(f"FAIL reference: {p}")
        if not problems:
            print("PASS reference: sweep matches")
        failed |= bool(problems)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_presets(args) -> int:
    for name in runner.list_presets():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="psbounds", description="Detection-loophole-free steering and Bell bounds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("scenario", nargs="?", help="scenario JSON file")
        sp.add_argument("--preset", help="built-in scenario name (see 'psbounds presets')")
        sp.add_argument("--tol", type=float, default=None, help="solver tolerance (default 1e-9)")
        sp.add_argument("--max-iters", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write output here instead of stdout")

    sp = sub.add_parser("bound", help="single bound as JSON")
    common(sp)
    sp.add_argument("--eta", type=float, default=None, help="override the scenario efficiency with a uniform value")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("sweep", help="efficiency sweep as CSV")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run consistency checks")
    common(sp)
    sp.add_argument("--reference", help="stored sweep CSV to compare against")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("presets", help="list built-in scenarios")
    sp.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except runner.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
