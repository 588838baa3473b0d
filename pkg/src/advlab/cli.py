"""Command-line entry point ``adv``.

Exit codes: 0 all checks pass, 1 a verdict failed, 2 configuration or I/O
error, 3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import boolean_core as bc
from . import composition as comp
from . import harness
from . import programs as prog
from .serialize import dumps, matrix_from_json, read_json, witness_from_json, witness_to_json, write_json

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_SIZE = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=prog.DEFAULT_TOL, help="SDP accuracy (default %(default)g)")
    p.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    p.add_argument("--max-dim", type=int, default=512, help="cap on the Gram dimension of any solve")
    p.add_argument("--out", help="output file")
    p.add_argument("--format", choices=("json", "markdown"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adv", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="ADV of a Boolean function; writes the witness")
    p.add_argument("--function", required=True)
    _common(p)

    p = sub.add_parser("rel-compute", help="ADV_rel of a relation; writes the witness")
    p.add_argument("--relation", required=True)
    _common(p)

    p = sub.add_parser("gamma2", help="filtered gamma_2 norm of a matrix")
    p.add_argument("--matrix", required=True, help="JSON matrix {rows, cols, data}")
    _common(p)

    p = sub.add_parser("compose", help="composition check; relational if --relation is given")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--relation")
    src.add_argument("--function", help="outer Boolean function (functional check)")
    p.add_argument("--inner", required=True)
    p.add_argument("--direct", action="store_true", help="also solve the composed program directly")
    _common(p)

    p = sub.add_parser("verify", help="check a witness file")
    p.add_argument("--witness", required=True)
    tgt = p.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--relation")
    tgt.add_argument("--function")
    _common(p)

    p = sub.add_parser("battery", help="seeded property batteries")
    p.add_argument("--only", action="append", choices=sorted(harness.BATTERIES))
    _common(p)

    p = sub.add_parser("report", help="run named scenarios")
    p.add_argument("--scenario", action="append", choices=sorted(harness.SCENARIOS))
    p.add_argument("--direct", action="store_true", default=None)
    p.add_argument("--no-direct", dest="direct", action="store_false")
    _common(p)
    return parser


def _emit(args, payload: dict) -> None:
    text = harness.to_markdown(payload) if args.format == "markdown" else dumps(payload) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)


def _check_dim(dim: int, cap: int) -> None:
    if dim > cap:
        raise bc.SizeError(f"Gram dimension {dim} exceeds --max-dim {cap}")


def _witness_path(args, target: str) -> Path:
    return Path(args.out) if args.out else Path(f"{Path(target).stem}.witness.json")


def cmd_compute(args) -> int:
    g = harness.resolve_function(args.function)
    _check_dim(2 * g.arity * g.size, args.max_dim)
    cert = prog.solve_adv(g, args.tol)
    path = _witness_path(args, args.function)
    write_json(path, witness_to_json(cert.artifacts["witness"]))
    payload = cert.report() | {"witness_file": str(path)}
    sys.stdout.write(dumps(payload) + "\n")
    return EXIT_PASS if cert.valid else EXIT_FAIL


def cmd_rel_compute(args) -> int:
    f = harness.resolve_relation(args.relation)
    _check_dim(comp.gram_dimension(f), args.max_dim)
    cert = prog.solve_adv_rel(f, args.tol)
    path = _witness_path(args, args.relation)
    write_json(path, witness_to_json(cert.artifacts["witness"]))
    payload = cert.report() | {"witness_file": str(path)}
    sys.stdout.write(dumps(payload) + "\n")
    return EXIT_PASS if cert.valid else EXIT_FAIL


def cmd_gamma2(args) -> int:
    A = matrix_from_json(read_json(args.matrix))
    n = max(A.shape[0].bit_length() - 1, 0)
    _check_dim(2 * n * A.shape[0], args.max_dim)
    cert = prog.gamma2_filtered(A, args.tol)
    _emit(args, cert.report())
    return EXIT_PASS if cert.valid else EXIT_FAIL


def cmd_compose(args) -> int:
    g = harness.resolve_function(args.inner)
    if args.function:
        f = harness.resolve_function(args.function)
        h = bc.compose_function(f, g)
        _check_dim(2 * h.arity * h.size, args.max_dim)
        report = comp.functional_composition_check(f, g, sdp_tol=args.tol)
    else:
        f = harness.resolve_relation(args.relation)
        h = bc.compose_relation(f, g)
        if args.direct:
            _check_dim(comp.gram_dimension(h), args.max_dim)
        report = comp.relational_composition_check(f, g, direct=args.direct, sdp_tol=args.tol)
    _emit(args, report.to_json())
    return EXIT_PASS if report.verdict else EXIT_FAIL


def cmd_verify(args) -> int:
    target = harness.resolve_function(args.function) if args.function else harness.resolve_relation(args.relation)
    try:
        w = witness_from_json(read_json(args.witness), target)
    except (KeyError, ValueError, TypeError) as exc:
        raise harness.ConfigError(f"bad witness file: {exc}") from exc
    if isinstance(w, prog.RelationalDualWitness):
        cert = prog.check_relational_witness(w)
    else:
        cert = prog.check_functional_witness(w)
    _emit(args, cert.report())
    return EXIT_PASS if cert.valid else EXIT_FAIL


def cmd_battery(args) -> int:
    report = harness.run_batteries(args.seed, args.only)
    _emit(args, report)
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL


def cmd_report(args) -> int:
    report = harness.run_report(args.scenario, args.tol, args.seed, args.direct)
    _emit(args, report)
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL


COMMANDS = {
    "compute": cmd_compute,
    "rel-compute": cmd_rel_compute,
    "gamma2": cmd_gamma2,
    "compose": cmd_compose,
    "verify": cmd_verify,
    "battery": cmd_battery,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except bc.SizeError as exc:
        print(f"size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (harness.ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except prog.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
