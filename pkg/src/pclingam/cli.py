"""Command-line interface: ``pclingam {discover,simulate,evaluate}``.

Exit codes: 0 success, 2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

from .bench import run_experiment
from .discovery import DiscoveryConfig, pclingam
from .errors import InputError, InvalidArgumentError, PclingamError
from .graphs import DEFAULT_MAX_CLASS_SIZE, ngdag_pattern, pattern_to_json
from .scm import fig1_model, random_model, read_csv, sample, write_csv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("PCLINGAM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"PCLINGAM_SEED is not an integer: {env!r}") from None
    seed = secrets.randbelow(2**32)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _alpha(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def _nonnegative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return v


def _config(args) -> DiscoveryConfig:
    return DiscoveryConfig(ci_alpha=args.alpha, ng_alpha=args.ng_alpha, max_class_size=args.max_class_size)


def _write_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, ensure_ascii=False)
    if path is None:
        print(text)
        return
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def cmd_discover(args) -> int:
    data = read_csv(args.data)
    report = pclingam(data, _config(args))
    if args.out:
        _write_json(report.to_json(), args.out)
    if args.format == "json":
        _write_json(report.to_json(), None)
    else:
        print(report.summary())
        for name, p in zip(report.names, report.residual_p_values):
            print(f"  residual {name}: Anderson-Darling p = {p:.4f}")
        if report.repairs:
            print(f"  step-1 repairs: {report.repairs}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.preset == "fig1":
        model = fig1_model()
    else:
        model = random_model(args.nodes, args.edge_prob, args.ng_prob, seed)
    data = sample(model, args.samples, seed)
    out = Path(args.out)
    model_out = Path(args.model_out) if args.model_out else out.with_suffix(".json")
    try:
        write_csv(data, out)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror or exc}") from None
    doc = model.to_json()
    doc["seed"] = seed
    doc["pattern"] = pattern_to_json(ngdag_pattern(model.ngdag), model.names)
    _write_json(doc, str(model_out))
    print(f"wrote {out} ({data.n_vars} variables x {data.n_samples} samples) and {model_out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    seed = _resolve_seed(args.seed)
    result = run_experiment(
        n_runs=args.runs,
        node_count=args.nodes,
        n_samples=args.samples,
        step1=args.step1,
        config=_config(args),
        seed=seed,
        edge_prob=args.edge_prob,
        ng_prob=args.ng_prob,
    )
    repairs = [r.repairs for r in result.runs]
    if args.reports:
        try:
            with open(args.reports, "w", encoding="utf-8") as fh:
                for r in result.runs:
                    fh.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
        except OSError as exc:
            raise InputError(f"cannot write {args.reports}: {exc.strerror or exc}") from None
    doc = {
        "format_version": 1,
        "parameters": {
            "runs": args.runs,
            "nodes": args.nodes,
            "samples": args.samples,
            "step1": args.step1,
            "seed": seed,
            "edge_prob": args.edge_prob,
            "ng_prob": args.ng_prob,
            "config": _config(args).to_json(),
        },
        "matrix": result.matrix.to_json(),
        "diagonal_fraction": None if result.matrix.total == 0 else result.matrix.diagonal_fraction,
        "failures": result.failures,
        "repairs_per_run": repairs,
    }
    if args.out:
        _write_json(doc, args.out)
    if args.format == "json":
        _write_json(doc, None)
    else:
        print(f"step 1: {args.step1}, {args.runs} runs, {args.nodes} nodes, {args.samples} samples, seed {seed}")
        print(result.matrix.to_text())
        if result.failures:
            print(f"failed runs (excluded): {result.failures}")
        if args.step1 == "pc":
            print(f"step-1 repairs per run: {repairs}")
    return EXIT_OK


def _add_discovery_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=_alpha, default=0.01, help="PC conditional-independence significance")
    p.add_argument("--ng-alpha", type=_alpha, default=0.01, help="normality-test significance")
    p.add_argument("--max-class-size", type=_positive, default=DEFAULT_MAX_CLASS_SIZE)
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pclingam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="estimate the ngDAG pattern of a CSV data set")
    p.add_argument("data", help="CSV with a header row of variable names, one sample per row")
    p.add_argument("--out", help="write the JSON report here")
    _add_discovery_options(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("simulate", help="sample a data set from a random (or preset) linear SCM")
    p.add_argument("--nodes", type=_positive, default=6)
    p.add_argument("--samples", type=_positive, default=1000)
    p.add_argument("--edge-prob", type=_probability, default=None)
    p.add_argument("--ng-prob", type=_probability, default=0.5)
    p.add_argument("--preset", choices=("fig1",), default=None, help="fig1: x -> y -> z, uniform e_z")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--model-out", help="model JSON path (default: CSV path with .json suffix)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="Table-1 style confusion matrix over random models")
    p.add_argument("--runs", type=_nonnegative, default=20)
    p.add_argument("--nodes", type=_positive, default=6)
    p.add_argument("--samples", type=_positive, default=1000)
    p.add_argument("--step1", choices=("oracle", "pc"), default="oracle")
    p.add_argument("--edge-prob", type=_probability, default=None)
    p.add_argument("--ng-prob", type=_probability, default=0.5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="write the JSON summary here")
    p.add_argument("--reports", help="write per-run reports here as JSON lines")
    _add_discovery_options(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PclingamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
