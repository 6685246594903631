"""Command-line front end.

Exit codes: 0 success, 1 invalid parameters, 2 resource-limit refusal,
3 identity-check failure.  Diagnostics go to standard error; results to
standard output or to --out files.  PSPIN_THREADS provides the default
for --threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import (
    IdentityCheckError,
    InvalidParametersError,
    PspinError,
    ResourceLimitError,
)
from .harness import (
    ExperimentConfig,
    _constants_payload,
    _tabulate_text,
    _write_atomic,
    run_experiment,
)
from .model import free_energy, j_term
from .momentlab import quenched_moments
from .multiindex import ModelParams, sample_disorder
from .theory import REM_BETA, beta_p

__all__ = ["main", "cli_main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pspinlab",
        description="p-spin mean-field lab: exact enumeration, limit "
        "constants, and disorder-replica Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, n=False, p=True, beta=False, sampling=False):
        if n:
            sp.add_argument("--n", type=int, help="number of spins")
        if p:
            sp.add_argument("--p", type=int, required=True, help="interaction order")
        if beta:
            sp.add_argument("--beta", type=float, default=0.0, help="inverse temperature")
        if sampling:
            sp.add_argument("--replicas", type=int, default=100, help="disorder replicas")
            sp.add_argument("--seed", type=int, default=0, help="base seed")
            sp.add_argument("--out", help="output file path")
            sp.add_argument("--threads", type=int, default=None)

    sp = sub.add_parser("constants", help="limit constants for (p, beta)")
    common(sp, n=True, beta=True)

    sp = sub.add_parser("betap", help="critical temperature beta_p")
    common(sp)

    sp = sub.add_parser("tabulate-covariance", help="overlap-covariance table")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--out", help="write CSV here instead of stdout")

    sp = sub.add_parser("identities", help="per-replica combinatorial identity checks")
    sp.add_argument("--n", type=int, required=True)
    common(sp, beta=True, sampling=True)

    sp = sub.add_parser("run", help="disorder-replica experiment")
    sp.add_argument("--n", type=int, required=True)
    common(sp, beta=True, sampling=True)
    sp.add_argument(
        "--mode",
        required=True,
        choices=["theorem1", "theorem2", "jterm_clt", "identities", "constants", "tabulate"],
    )
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--allow-supercritical", action="store_true")

    sp = sub.add_parser("exact", help="single-disorder F_N, J_N, T_N dump")
    sp.add_argument("--n", type=int, required=True)
    common(sp, beta=True)
    sp.add_argument("--seed", type=int, default=0)

    return parser


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _cmd_constants(args) -> int:
    params = ModelParams(N=args.n if args.n else args.p, p=args.p, beta=args.beta)
    _emit(_constants_payload(params))
    return 0


def _cmd_betap(args) -> int:
    _emit({"p": args.p, "beta_p": beta_p(args.p), "rem_limit": REM_BETA})
    return 0


def _cmd_tabulate(args) -> int:
    text = _tabulate_text(args.n, args.p)
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_identities(args) -> int:
    config = ExperimentConfig(
        params=ModelParams(N=args.n, p=args.p, beta=args.beta),
        replicas=args.replicas,
        base_seed=args.seed,
        mode="identities",
        output_path=args.out,
    )
    report = run_experiment(config, threads=args.threads)
    doc = report.to_json_dict()
    _emit(doc)
    return 0 if doc["all_pass"] else 3


def _cmd_run(args) -> int:
    config = ExperimentConfig(
        params=ModelParams(N=args.n, p=args.p, beta=args.beta),
        replicas=args.replicas,
        base_seed=args.seed,
        mode=args.mode,
        output_path=args.out,
        format=args.format,
        allow_supercritical=args.allow_supercritical,
    )
    report = run_experiment(config, threads=args.threads)
    doc = report.to_json_dict()
    _emit(doc)
    if args.mode == "identities" and not doc.get("all_pass", True):
        return 3
    return 0


def _cmd_exact(args) -> int:
    params = ModelParams(N=args.n, p=args.p, beta=args.beta)
    disorder = sample_disorder(params, args.seed)
    f_n = free_energy(disorder, args.beta)
    j_n = j_term(disorder, args.beta)
    moments = quenched_moments(disorder, args.beta)
    _emit(
        {
            "n": args.n,
            "p": args.p,
            "beta": args.beta,
            "seed": args.seed,
            "f_n": f_n,
            "j_n": j_n,
            "t_n": moments.t_value,
            "m2": moments.m2,
            "m3": moments.m3,
            "m4": moments.m4,
            "h4": moments.h4,
            "ln_deflated": params.N * (f_n - j_n),
        }
    )
    return 0


_DISPATCH = {
    "constants": _cmd_constants,
    "betap": _cmd_betap,
    "tabulate-covariance": _cmd_tabulate,
    "identities": _cmd_identities,
    "run": _cmd_run,
    "exact": _cmd_exact,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; that slot is reserved for
        # resource-limit refusals here, so remap to invalid-parameters.
        return 0 if exc.code in (0, None) else 1
    try:
        return _DISPATCH[args.command](args)
    except InvalidParametersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IdentityCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PspinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
