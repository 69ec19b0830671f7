"""Command-line entry point: ``ctxattack attack|sweep|single``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from .backends.base import BackendSuite
from .backends.remote import API_KEY_ENV, RemoteTarget
from .backends.stubs import build_stub_suite, demo_suite
from .exceptions import AttackError, ConfigError, DatasetError
from .harness import DatasetSchema, export_adversarial, load_dataset, run_attacks, save_run, save_sweep, sweep
from .harness.metrics import format_table
from .harness.runner import SWEEP_AXES
from .search import attack
from .types import AttackConfig, AttackStatus

log = logging.getLogger("ctxattack")

USAGE_ERROR = 2


class UsageError(Exception):
    pass


def load_config_file(path) -> dict:
    """Read a YAML (or JSON) mapping of AttackConfig fields."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file {path} does not exist")
    try:
        values = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from None
    if not isinstance(values, dict):
        raise UsageError(f"{path} must hold a key-value mapping")
    return values


def effective_config(args) -> AttackConfig:
    """Defaults, then the config file, then command-line overrides."""
    values = load_config_file(args.config) if args.config else {}
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        values[key.strip()] = yaml.safe_load(raw)
    if args.query_budget is not None:
        values["query_budget"] = args.query_budget
    if args.max_rounds is not None:
        values["max_rounds"] = args.max_rounds
    try:
        return AttackConfig.from_mapping(values)
    except ConfigError as exc:
        raise UsageError(f"bad config key {exc.key!r}: {exc}") from None
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def resolve_backends(args) -> BackendSuite:
    name = args.backend_suite
    if name == "stub":
        suite = demo_suite()
    elif name.startswith("stub:"):
        spec_path = Path(name[5:])
        if not spec_path.is_file():
            raise UsageError(f"stub suite file {spec_path} does not exist")
        suite = build_stub_suite(json.loads(spec_path.read_text(encoding="utf-8")))
    elif name == "hf":
        from .backends import hf

        if not args.target_url and not args.target_model:
            raise UsageError("the hf suite needs --target-url or --target-model")
        target = hf.HFSequenceClassifier(args.target_model) if args.target_model else None
        suite = BackendSuite(
            target, hf.HFMaskedLM(), hf.SentenceTransformerEmbedder(), hf.GPT2Fluency(), hf.SpacyTagger()
        )
    else:
        raise UsageError(f"unknown backend suite {name!r}; use stub, stub:<file.json> or hf")
    if args.target_url:
        suite = suite.with_target(RemoteTarget.from_env(args.target_url))
    return suite


def _schema(args) -> DatasetSchema:
    return DatasetSchema(
        text_field=args.text_field,
        label_field=args.label_field,
        attack_field=args.attack_field,
        label_names=tuple(args.label_names.split(",")) if args.label_names else None,
    )


def _load(args):
    try:
        return load_dataset(args.dataset, fmt=args.format, schema=_schema(args), lenient=args.lenient)
    except DatasetError as exc:
        raise UsageError(str(exc)) from None


def _run_settings(args) -> dict:
    return {
        "backend_suite": args.backend_suite,
        "target_url": args.target_url,
        "dataset": str(args.dataset),
        "workers": args.workers,
    }


def cmd_attack(args) -> int:
    cfg = effective_config(args)
    dataset = _load(args)
    backends = resolve_backends(args)
    report = run_attacks(
        dataset, cfg, backends,
        sample_size=args.sample_size, seed=args.seed, repetitions=args.repetitions, workers=args.workers,
    )
    out = Path(args.out) if args.out else Path("runs") / Path(args.dataset).stem
    save_run(report, out, name=Path(args.dataset).stem, extra_settings=_run_settings(args))
    if args.export:
        n = export_adversarial(report.outcomes, args.export)
        print(f"exported {n} adversarial example(s) to {args.export}")
    print(format_table([(Path(args.dataset).stem, report.metrics)]), end="")
    print(f"run directory: {out}")
    return 0


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        raise UsageError(f"invalid axis {args.axis!r}; choose from {', '.join(SWEEP_AXES)}")
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise UsageError("--values is empty")
    cfg = effective_config(args)
    dataset = _load(args)
    backends = resolve_backends(args)
    try:
        runs = sweep(
            dataset, cfg, args.axis, values, backends,
            sample_size=args.sample_size, seed=args.seed, repetitions=args.repetitions, workers=args.workers,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out) if args.out else Path("runs") / f"sweep-{args.axis}"
    table = save_sweep(args.axis, runs, out, extra_settings=_run_settings(args))
    print(table, end="")
    print(f"sweep directory: {out}")
    return 0


def _highlight(words, indices) -> str:
    return " ".join(f"**{w}**" if i in indices else w for i, w in enumerate(words))


def cmd_single(args) -> int:
    if not args.text or not args.text.strip():
        raise UsageError("--text must not be empty")
    cfg = effective_config(args)
    backends = resolve_backends(args)
    result = attack(args.text, args.label, cfg, backends)
    changed = {s[0] for s in result.substitutions}
    print(f"status:      {result.status.value} (rounds {result.rounds}, queries {result.queries})")
    print(f"original:    {_highlight(result.original.words, changed)}")
    label = "adversarial" if result.status == AttackStatus.SUCCESS else "best-gap"
    print(f"{label + ':':<12} {_highlight(result.adversarial.words, changed)}")
    for i, old, new in result.substitutions:
        print(f"  [{i}] {old} -> {new}")
    print(f"semantic similarity: {result.semantic_similarity:.4f}   perturbation: {result.perturbation_pct:.1f}%")
    if result.error:
        print(f"error: {result.error}")
        return 1
    return 0


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML/JSON file of attack settings")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one attack setting")
    p.add_argument("--backend-suite", default="stub", help="stub, stub:<suite.json> or hf (default: stub)")
    p.add_argument("--target-url", help=f"remote /predict endpoint (API key from ${API_KEY_ENV})")
    p.add_argument("--target-model", help="transformers classifier for the hf suite")
    p.add_argument("--query-budget", type=int)
    p.add_argument("--max-rounds", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def _dataset_args(p: argparse.ArgumentParser):
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"))
    p.add_argument("--attack-field", choices=("text", "premise", "hypothesis"))
    p.add_argument("--text-field", default="text")
    p.add_argument("--label-field", default="label")
    p.add_argument("--label-names", help="comma-separated class names, in index order")
    p.add_argument("--lenient", action="store_true", help="skip malformed rows instead of failing")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxattack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="attack a dataset and write a run directory")
    _common(p)
    _dataset_args(p)
    p.add_argument("--export", help="write successful adversarial examples to this JSONL file")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="repeat a run over values of one hyperparameter")
    _common(p)
    _dataset_args(p)
    p.add_argument("--axis", required=True, help=f"one of {', '.join(SWEEP_AXES)}")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("single", help="attack one sentence and show the substitutions")
    _common(p)
    p.add_argument("--text", required=True)
    p.add_argument("--label", type=int, required=True)
    p.set_defaults(func=cmd_single)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except AttackError as exc:
        print(f"{parser.prog} {args.command}: fatal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
