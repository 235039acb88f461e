"""Command-line interface: ``benney-sym <subcommand> ...``.

Exit codes: 0 success, 1 verification failure (or numerical blow-up),
2 malformed input, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import __version__
from .determining_solver import generate_eta_matrix, generate_eta_row
from .errors import BlowUp, DegreeMismatch, ExactnessFailure, MalformedInput
from .formats import load_operators
from .graded_poly import parse_polynomial
from .operator_engine import (
    CanonicalOperator, Form, PointGeneratorId, kupershmidt_check, lie_bracket,
    point_generators, verify_jet, verify_restricted,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("benney_sym")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_generate(args) -> int:
    matrix = generate_eta_matrix(args.k, args.n)
    if args.format == "json":
        text = _dump(matrix.to_json())
    elif args.format == "latex":
        text = matrix.to_latex()
    else:
        text = matrix.to_text()
    _emit(text, args.out)
    return EXIT_OK


def _verify(op: CanonicalOperator, mode: str):
    if mode == "jet":
        return verify_jet(op if op.form is Form.JET else op.as_jet())
    if mode == "restricted" or op.form is Form.MOMENT_ONLY:
        return verify_restricted(op)
    return verify_jet(op)


def cmd_verify(args) -> int:
    ops = load_operators(Path(args.input).read_text())
    mode = "jet" if args.jet else "restricted" if args.restricted else "auto"
    reports = {}
    for n, op in enumerate(ops):
        reports[op.name or str(n)] = _verify(op, mode).to_json()
    passed = all(r["verdict"] == "pass" for r in reports.values())
    _emit(_dump({"schema": 1, "verdict": "pass" if passed else "fail", "operators": reports}), args.out)
    return EXIT_OK if passed else EXIT_FAIL


def _operators_output(ops: List[CanonicalOperator], reports: dict, fmt: str) -> str:
    passed = all(r.passed for r in reports.values())
    if fmt == "json":
        return _dump({
            "schema": 1,
            "verdict": "pass" if passed else "fail",
            "operators": [op.to_json() for op in ops],
            "reports": {k: r.to_json() for k, r in reports.items()},
        })
    lines = [op.to_text() for op in ops]
    for name, r in reports.items():
        lines.append(f"# {name}: {r.verdict} (checked {len(r.checked)}, skipped {len(r.skipped)})\n")
    return "".join(lines)


def cmd_point_ops(args) -> int:
    gens = point_generators(args.n)
    reports = {g.value: verify_jet(op) for g, op in gens.items()}
    _emit(_operators_output(list(gens.values()), reports, args.format), args.out)
    return EXIT_OK if all(r.passed for r in reports.values()) else EXIT_FAIL


def cmd_bracket(args) -> int:
    if len(args.row) != 2:
        raise MalformedInput("bracket needs exactly two --row arguments")
    k1, k2 = args.row
    a = CanonicalOperator.from_row(generate_eta_row(k1, args.n))
    b = CanonicalOperator.from_row(generate_eta_row(k2, args.n))
    result = lie_bracket(a, b)
    report = verify_restricted(result)
    _emit(_operators_output([result], {result.name: report}, args.format), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_kupershmidt(args) -> int:
    H = parse_polynomial(Path(args.h).read_text())
    s = args.s
    steps = []
    ok = True
    for _ in range(args.chain):
        if s <= 0:
            break
        divisible, prev = kupershmidt_check(H, s)
        steps.append({
            "s": s,
            "divisible": divisible,
            "H_prev": prev.to_text(),
            "weighted_degree": prev.weighted_degree(),
        })
        ok = ok and divisible
        if prev.is_zero():
            break
        H, s = prev, s - 1
    _emit(_dump({"schema": 1, "verdict": "pass" if ok else "fail", "steps": steps}), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    import numpy as np

    from .numeric import evolve
    from .numeric.config import initial_state, load_config, sim_params

    cfg = load_config(args.config)
    state = initial_state(cfg)
    params = sim_params(cfg, state)
    snapshots = max(1, int(cfg.get("snapshots", 1)))
    chunk = replace(params, T=params.T / snapshots)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    times = []
    for k in range(snapshots + 1):
        if k:
            state = evolve(state, chunk)
        times.append(state.time)
        for i in range(state.N + 1):
            data = np.column_stack([state.x, state.moments[i]])
            np.savetxt(out / f"A{i}_snap{k:03d}.csv", data, delimiter=",",
                       header=f"x,A{i}", comments="", fmt="%.17g")
    index = {"schema": 1, "N": state.N, "M": state.M, "L": state.L, "dt": params.dt,
             "closure": params.closure, "times": times}
    (out / "snapshots.json").write_text(_dump(index))
    return EXIT_OK


def cmd_defect(args) -> int:
    from .numeric import apply_group_transform, characteristic_speed, refinement_study
    from .numeric.config import initial_state, load_config, sim_params

    cfg = load_config(args.config)
    g = PointGeneratorId(args.gen)
    closure = cfg.get("closure", "streams")
    base = initial_state(cfg)
    moved = apply_group_transform(base, g, args.a, weight_offset=args.weight_offset)
    v_max = cfg.get("v_max") or 1.1 * max(characteristic_speed(base, closure),
                                          characteristic_speed(moved, closure) / (moved.L / base.L))
    sizes = [int(cfg["M"]) * 2 ** j for j in range(args.refine + 1)]
    study = refinement_study(
        lambda M: initial_state(cfg, M),
        lambda M: sim_params({**cfg, "M": M}, initial_state(cfg, M), v_max=float(v_max)),
        g, args.a, sizes, weight_offset=args.weight_offset, interp=args.interp,
    )
    result = {"schema": 1, "generator": g.value, "a": args.a, "closure": closure,
              "weight_offset": args.weight_offset, **study.to_json()}
    _emit(_dump(result), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="benney-sym", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit basis symmetry coordinates eta^i_k")
    p.add_argument("--k", type=int, default=3, help="last row index K (default 3)")
    p.add_argument("--n", type=int, default=10, help="horizon N (default 10)")
    p.add_argument("--format", choices=["text", "json", "latex"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="check operators against the determining equations")
    p.add_argument("--input", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--restricted", action="store_true")
    mode.add_argument("--jet", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("point-ops", help="the five prolonged point generators")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_point_ops)

    p = sub.add_parser("bracket", help="Lie bracket of two basis rows")
    p.add_argument("--row", type=int, action="append", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("kupershmidt", help="lowering identity for H^s polynomials")
    p.add_argument("--h", required=True, help="file holding H^s (text or JSON)")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--chain", type=int, default=1, help="number of lowering steps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kupershmidt)

    p = sub.add_parser("simulate", help="integrate the truncated moment chain")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="simulation")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("defect", help="numerical symmetry defect under grid refinement")
    p.add_argument("--config", required=True)
    p.add_argument("--gen", choices=["X2", "X3", "X5"], required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--refine", type=int, default=0, help="number of grid doublings")
    p.add_argument("--weight-offset", type=int, default=2)
    p.add_argument("--interp", choices=["fourier", "cubic"], default="fourier")
    p.add_argument("--out")
    p.set_defaults(func=cmd_defect)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ExactnessFailure as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except BlowUp as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (MalformedInput, DegreeMismatch, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
