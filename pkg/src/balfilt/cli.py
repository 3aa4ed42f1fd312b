"""Command-line interface.

Every subcommand reads a state document (``--input FILE`` or stdin) and
prints a JSON report.  Exit codes: 0 success, 1 a requested verdict is false,
2 bad input, 3 certification or integration fault.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .chain import balancing_chain, iterate_projected
from .documents import DocumentError, dumps, make_report, parse_state, rational_list, state_to_obj
from .exactq import as_rational, format_rational
from .solver import (
    BalancedResult,
    CertificationError,
    balanced_filtration,
    kkt_residual,
    oracle_balanced,
    verify_balanced,
)
from .states import complementedness, is_polystable, is_semistable, q_filt_contains

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_FAULT = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _matrix(m) -> list:
    return [rational_list(row) for row in m]


def _extended(x) -> str:
    return "inf" if x == math.inf else format_rational(x)


def balanced_to_obj(res: BalancedResult, certified: bool) -> dict:
    sl = res.slice
    return {
        "filtration": rational_list(res.filtration),
        "norm_sq": format_rational(res.norm_sq),
        "face": [list(c) for c in sl.face],
        "slice": state_to_obj(sl.sliced),
        "slice_embedding": _matrix(sl.embedding),
        "intrinsic": rational_list(res.intrinsic),
        "active_characters": [list(c) for c in res.active],
        "kkt_coefficients": rational_list(res.kkt),
        "kkt_residual": rational_list(kkt_residual(res)),
        "certified": certified,
    }


def _sequence(seq) -> list:
    return [rational_list(lam) for lam in seq]


def chain_to_obj(trace) -> list:
    steps = []
    for st in trace.steps:
        steps.append({
            "index": st.index,
            "state": state_to_obj(st.state),
            "embedding": _matrix(st.embedding),
            "filtration": rational_list(st.filtration),  # in the coordinates of the input state
            "balanced": balanced_to_obj(st.balanced, True),
            "lambda_state": state_to_obj(st.lambda_state) if st.lambda_state else None,
            "next_face": [list(c) for c in st.face],
            "next_state": state_to_obj(st.next_state) if st.next_state else None,
            "link": [list(row) for row in st.link.matrix] if st.link else None,
        })
    return steps


def _parse_vector(text: str, what: str) -> tuple:
    text = text.strip()
    try:
        if text.startswith("["):
            items = json.loads(text)
        else:
            items = [t for t in text.split(",")]
        return tuple(as_rational(x) if not isinstance(x, str) else as_rational(x.strip()) for x in items)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"{what}: malformed rational vector {text!r}") from exc


def _parse_float_vector(text: str, what: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"{what}: malformed vector {text!r}") from exc


def _read_input(args, stdin) -> str:
    if args.input:
        try:
            return Path(args.input).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"--input: {exc.strerror}: {args.input}") from exc
    return stdin.read()


def cmd_check(state, args):
    verdict = {"semistable": is_semistable(state), "polystable": is_polystable(state)}
    code = EXIT_OK
    if args.expect and not verdict[args.expect]:
        code = EXIT_FALSE
    return verdict, code


def cmd_balanced(state, args):
    _need_semistable(state)
    res = balanced_filtration(state)
    ok = verify_balanced(state, res.filtration)
    if not ok:
        raise CertificationError("solver output failed the recognition certificate")
    return balanced_to_obj(res, ok), EXIT_OK


def cmd_oracle(state, args):
    _need_semistable(state)
    try:
        lam = oracle_balanced(state)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return {"filtration": rational_list(lam)}, EXIT_OK


def cmd_iterate(state, args):
    _need_semistable(state)
    out = {"algorithm": args.algo}
    chain_seq = proj_seq = None
    if args.algo in ("chain", "both"):
        trace = balancing_chain(state)
        chain_seq = trace.sequence
        out["sequence"] = _sequence(chain_seq)
        out["chain"] = chain_to_obj(trace)
    if args.algo in ("projected", "both"):
        proj_seq = iterate_projected(state)
        out["sequence"] = _sequence(proj_seq)
    if args.algo == "both":
        out["agree"] = chain_seq == proj_seq
        if not out["agree"]:
            out["sequence_projected"] = _sequence(proj_seq)
            out["sequence"] = _sequence(chain_seq)
            raise CertificationError("chain and projected iterations disagree: " + json.dumps(out))
    return out, EXIT_OK


def cmd_kempf(state, args):
    _need_semistable(state)
    lam = _parse_vector(args.lam, "--lambda")
    if len(lam) != state.rank:
        raise InputError(f"--lambda: expected {state.rank} entries, got {len(lam)}")
    out = {"filtration": rational_list(lam), "is_filtration": q_filt_contains(state, lam)}
    if not out["is_filtration"]:
        raise InputError("--lambda is not a filtration of the state")
    out["complementedness"] = _extended(complementedness(state, lam))
    return out, EXIT_OK


def _random_starts(n: int, r: int, seed: int, radius: float = 3.0) -> List[list]:
    rng = random.Random(seed)
    starts = []
    for _ in range(n):
        d = [rng.gauss(0.0, 1.0) for _ in range(r)]
        norm = math.sqrt(sum(x * x for x in d)) or 1.0
        rad = radius * rng.random() ** (1.0 / r)
        starts.append([rad * x / norm for x in d])
    return starts


def cmd_flow(state, args):
    from .flow import FlowError, FlowProblem, residual_check, write_csv
    from .chain import iterated_balanced

    _need_semistable(state)
    if args.prediction:
        try:
            raw = json.loads(Path(args.prediction).read_text(encoding="utf-8"))
            prediction = [tuple(as_rational(x) for x in lam) for lam in raw]
        except (OSError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise InputError(f"--prediction: {exc}") from exc
        if any(len(lam) != state.rank for lam in prediction):
            raise InputError(f"--prediction: every vector needs {state.rank} entries")
    else:
        prediction = list(iterated_balanced(state))
    starts = [_parse_float_vector(s, "--start") for s in args.start or []]
    starts += _random_starts(args.starts, state.rank, args.seed)
    if not starts:
        raise InputError("no initial points (use --starts N or --start x,y,...)")
    runs = []
    for k, xi0 in enumerate(starts):
        if len(xi0) != state.rank:
            raise InputError(f"--start: expected {state.rank} entries")
        try:
            p = FlowProblem(state, xi0, tau0=args.tau0, tau_max=args.tau_max, rtol=args.rtol, atol=args.atol,
                            method=args.method, tail_fraction=args.tail, drift_threshold=args.drift_threshold)
            res = residual_check(p, prediction)
        except FlowError as exc:
            raise CertificationError(f"flow from start {k}: {exc}") from exc
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if args.csv:
            path = Path(args.csv)
            if len(starts) > 1:
                path = path.with_name(f"{path.stem}-{k}{path.suffix}")
            write_csv(res, path)
        runs.append({"start": [float(x) for x in xi0], **res.summary()})
    out = {
        "prediction": _sequence(prediction),
        "bounded": all(r["bounded"] for r in runs),
        "runs": runs,
    }
    code = EXIT_FALSE if args.expect_bounded and not out["bounded"] else EXIT_OK
    return out, code


def cmd_selftest(args):
    from .chain import is_sequential_filtration, iterated_balanced
    from .random_suite import DEFAULT_SEED, random_suite

    env = os.environ.get("BALFILT_SEED")
    try:
        seed = int(env) if env else DEFAULT_SEED
    except ValueError as exc:
        raise InputError(f"BALFILT_SEED: not an integer: {env!r}") from exc
    failures = []
    for i, s in enumerate(random_suite(args.count, seed)):
        res = balanced_filtration(s)
        if oracle_balanced(s) != res.filtration:
            failures.append(f"{i}: solver and oracle disagree")
        if not verify_balanced(s, res.filtration):
            failures.append(f"{i}: certificate rejected the solver output")
        seq = iterated_balanced(s)
        if seq != iterate_projected(s):
            failures.append(f"{i}: chain and projected iterations disagree")
        if not is_sequential_filtration(s, seq):
            failures.append(f"{i}: output is not a sequential filtration")
    out = {"seed": seed, "count": args.count, "failures": failures, "ok": not failures}
    return out, EXIT_OK if not failures else EXIT_FAULT


def _need_semistable(state) -> None:
    if not is_semistable(state):
        raise InputError("state is not semistable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="balfilt", description="Balanced filtrations of polarised torus states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", metavar="FILE", help="state document (default: stdin)")
        return p

    p = with_input("check", "semistability and polystability verdicts")
    p.add_argument("--expect", choices=("semistable", "polystable"), help="exit 1 if this verdict is false")
    with_input("balanced", "balanced filtration with its certificate")
    p = with_input("iterate", "iterated balanced filtration")
    p.add_argument("--algo", choices=("chain", "projected", "both"), default="chain")
    p = with_input("kempf", "complementedness of a filtration")
    p.add_argument("--lambda", dest="lam", required=True, metavar="VEC", help='e.g. "1,0" or \'["1/2", 0]\'')
    with_input("oracle", "brute-force balanced filtration")
    p = with_input("flow", "gradient-flow residual check")
    p.add_argument("--tau-max", type=float, default=1000.0)
    p.add_argument("--tau0", type=float, default=2.0)
    p.add_argument("--starts", type=int, default=5, help="number of random initial points, |xi0| <= 3")
    p.add_argument("--start", action="append", metavar="X,Y,...", help="explicit initial point (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prediction", metavar="FILE", help="JSON list of vectors (default: computed)")
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--tail", type=float, default=0.5, help="tail window as a fraction of the grid")
    p.add_argument("--drift-threshold", type=float, default=1e-2)
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--method", default="auto", help="scipy solve_ivp method (default: RK45, Radau when stiff)")
    p.add_argument("--expect-bounded", action="store_true", help="exit 1 unless every run is bounded")
    p = sub.add_parser("selftest", help="random-suite consistency checks (seed: BALFILT_SEED)")
    p.add_argument("--count", type=int, default=100)
    return parser


COMMANDS = {
    "check": cmd_check,
    "balanced": cmd_balanced,
    "iterate": cmd_iterate,
    "kempf": cmd_kempf,
    "oracle": cmd_oracle,
    "flow": cmd_flow,
}


def run_command(argv: List[str], stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    text = ""
    try:
        if args.command == "selftest":
            result, code = cmd_selftest(args)
        else:
            text = _read_input(args, stdin)
            state = parse_state(text)
            result, code = COMMANDS[args.command](state, args)
    except (InputError, DocumentError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except CertificationError as exc:
        print(f"certification fault: {exc}", file=stderr)
        return EXIT_FAULT
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    stdout.write(dumps(make_report(list(argv), text, result, __version__)))
    return code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
