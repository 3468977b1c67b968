"""Command-line interface: ``grover-qaoa <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 domain or precondition error,
4 resource limit, 1 anything else. Every file written records the full
invocation and the seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shlex
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from .charfn import EmpiricalCF, builtin_cf, load_spectrum, save_spectrum
from .ensemble import AngleSchedule, ep_full
from .errors import DomainError, PreconditionError, ResourceLimitError
from .experiments import convergence_study, landscape_scan, uniform_grid
from .fileio import write_json
from .optimize import TWO_PI, OptimizationConfig, minimize_ep
from .problems import npp_spectrum, rcm_spectrum, sample_npp, sample_rcm, save_instance
from .simulator import expectation, prepare_qaoa, sample_bitstrings

PROG = "grover-qaoa"
EXIT_OK, EXIT_FAILURE, EXIT_USAGE, EXIT_DOMAIN, EXIT_RESOURCE = 0, 1, 2, 3, 4

log = logging.getLogger(PROG)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so ``run`` owns the exit code."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps a value given before the subcommand from being reset here.
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker processes for multistart optimisation (0 = auto)")


def _add_angles(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gammas", type=_float_list, required=True, help="comma-separated, radians")
    p.add_argument("--betas", type=_float_list, required=True, help="comma-separated, radians")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Grover-mixer QAOA: ensemble expectations and angle optimisation.")
    parser.add_argument("--threads", type=int, default=1, help="worker processes (0 = auto)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("angles", help="optimise angles for a built-in ensemble")
    p.add_argument("--ensemble", required=True, help="gaussian (rcm) or chisq1 (npp)")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    _add_common(p)

    p = sub.add_parser("expectation", help="evaluate E_p at given angles")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ensemble")
    src.add_argument("--spectrum", type=Path, help="use the empirical cf of this spectrum file")
    _add_angles(p)
    _add_common(p)

    p = sub.add_parser("landscape", help="depth-1 landscape on a gamma x beta grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ensemble")
    src.add_argument("--spectrum", type=Path)
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=1.5)
    p.add_argument("--gamma-steps", type=int, default=61)
    p.add_argument("--beta-min", type=float, default=0.0)
    p.add_argument("--beta-max", type=float, default=TWO_PI)
    p.add_argument("--beta-steps", type=int, default=61)
    p.add_argument("--seed", type=int, default=0, help="recorded only; the scan is deterministic")
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("converge", help="finite-size convergence of optimal angles")
    p.add_argument("--problem", choices=("npp", "rcm"), required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--sizes", type=_int_list, default=[8, 12, 16])
    p.add_argument("--instances", type=int, default=30)
    p.add_argument("--starts", type=int, default=16, help="optimiser starts per instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("simulate", help="statevector expectation and optional samples")
    p.add_argument("--spectrum", type=Path, required=True)
    _add_angles(p)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="write a JSON record")
    _add_common(p)

    p = sub.add_parser("spectrum", help="sample an instance and write its spectrum")
    p.add_argument("--problem", choices=("npp", "rcm"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True,
                   help="spectrum file; the instance goes to <stem>.instance.json beside it")
    _add_common(p)
    return parser


def _workers(threads: int) -> int:
    if threads < 0:
        raise DomainError(f"--threads must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


def _schedule(args) -> AngleSchedule:
    if len(args.gammas) != len(args.betas):
        raise _UsageError(f"--gammas has {len(args.gammas)} values but --betas has {len(args.betas)}")
    return AngleSchedule(args.gammas, args.betas)


def _provenance(argv: list[str], args) -> dict:
    return {"command": " ".join([PROG, shlex.join(argv)]), "argv": list(argv), "seed": getattr(args, "seed", None)}


def _comments(prov: dict) -> list[str]:
    return [f"invocation: {prov['command']}", f"seed: {prov['seed']}"]


def _cmd_angles(args, prov) -> None:
    config = OptimizationConfig(starts=args.starts, seed=args.seed, workers=_workers(args.threads))
    result = minimize_ep(builtin_cf(args.ensemble), args.depth, config)
    doc = result.to_json()
    doc["ensemble"] = args.ensemble
    doc["invocation"] = prov
    if args.out:
        write_json(args.out, doc)
        print(repr(result.best_value))
    else:
        print(json.dumps(doc, indent=2))
    if not result.converged:
        log.warning("no start met the gradient tolerance; best value reported anyway")


def _cmd_expectation(args, prov) -> None:
    cf = builtin_cf(args.ensemble) if args.ensemble else EmpiricalCF(load_spectrum(args.spectrum))
    print(repr(ep_full(cf, _schedule(args))))


def _cmd_landscape(args, prov) -> None:
    gammas = uniform_grid(args.gamma_min, args.gamma_max, args.gamma_steps)
    betas = uniform_grid(args.beta_min, args.beta_max, args.beta_steps)
    source = builtin_cf(args.ensemble) if args.ensemble else load_spectrum(args.spectrum)
    landscape_scan(source, gammas, betas).to_csv(args.out, _comments(prov))


def _cmd_converge(args, prov) -> None:
    config = OptimizationConfig(starts=args.starts, seed=args.seed, workers=_workers(args.threads))
    table = convergence_study(args.problem, args.depth, args.sizes, args.instances, args.seed, config)
    table.to_csv(args.out, _comments(prov))


def _cmd_simulate(args, prov) -> None:
    spectrum = load_spectrum(args.spectrum)
    state = prepare_qaoa(spectrum, _schedule(args))
    value = expectation(state, spectrum)
    print(repr(value))
    doc = {"expectation": value, "shots": args.shots, "seed": args.seed, "invocation": prov}
    if args.shots:
        samples = sample_bitstrings(state, args.seed, args.shots)
        counts = Counter(int(z) for z in samples)
        doc["counts"] = {format(z, f"0{spectrum.n}b"): c for z, c in sorted(counts.items())}
        for z, c in counts.most_common():
            print(f"{z:0{spectrum.n}b} {c}")
    if args.out:
        write_json(args.out, doc)


def _cmd_spectrum(args, prov) -> None:
    if args.problem == "npp":
        inst = sample_npp(args.n, args.seed)
        spectrum = npp_spectrum(inst)
    else:
        inst = sample_rcm(args.n, args.seed)
        spectrum = rcm_spectrum(inst)
    out = Path(args.out)
    instance_path = out.with_name(out.stem + ".instance.json")
    save_instance(inst, instance_path, invocation=prov)
    save_spectrum(spectrum, out, _comments(prov))
    print(out)
    print(instance_path)


_COMMANDS = {
    "angles": _cmd_angles,
    "expectation": _cmd_expectation,
    "landscape": _cmd_landscape,
    "converge": _cmd_converge,
    "simulate": _cmd_simulate,
    "spectrum": _cmd_spectrum,
}


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args, _provenance(argv, args))
    except _UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"{PROG}: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, PreconditionError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, ValueError, KeyError) as exc:
        # unreadable or malformed input files
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as exc:  # pragma: no cover
        print(f"{PROG}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    sys.exit(run())
