"""Command-line orchestrator for the audit pipeline.

Subcommands: manifest, train, generate, evaluate, report, audit.
Exit codes: 0 ok, 2 config error, 3 stage failure, 4 validation failure.
"""

import argparse
import os
import sys

from . import pipeline
from .cohort import read_manifest, validate_manifest
from .config import load_config
from .errors import ConfigError, FairgenError, SizeError, VocabularyError
from .flowgen.checkpoint import load_checkpoint

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_VALIDATION = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fairgen",
        description="Seeded fairness-audit harness: balanced cohorts, "
        "flow-matching generation, demographic-parity reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in [
        ("manifest", "build and validate the balanced cohort manifest"),
        ("train", "train the generator and write a checkpoint"),
        ("generate", "sample one image per manifest row"),
        ("evaluate", "run the configured classifiers over the cohort"),
        ("report", "emit per-classifier and combined audit reports"),
        ("audit", "run the full pipeline end to end"),
    ]:
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--resume", action="store_true")
        p.add_argument("--preset", choices=["desk", "paper"], default=None)
    return parser


def _load(args):
    config = load_config(args.config, preset=args.preset)
    out_dir = args.out or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    return config, out_dir


def _manifest_path(out_dir):
    return os.path.join(out_dir, "manifest.tsv")


def _cmd_manifest(args):
    config, out_dir = _load(args)
    manifest, _ = pipeline.stage_manifest(config, out_dir)
    violations = validate_manifest(manifest)
    if violations:
        for v in violations[:10]:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{len(manifest)} rows")
    return EXIT_OK


def _cmd_train(args):
    config, out_dir = _load(args)
    pipeline.stage_train(config, out_dir)
    return EXIT_OK


def _cmd_generate(args):
    config, out_dir = _load(args)
    model = load_checkpoint(os.path.join(out_dir, "model.ckpt"), config.vocabulary)
    manifest = read_manifest(_manifest_path(out_dir))
    pipeline.stage_generate(
        config, model, manifest, out_dir, workers=args.workers, resume=args.resume
    )
    print(f"{len(manifest)} images")
    return EXIT_OK


def _cmd_evaluate(args):
    config, out_dir = _load(args)
    manifest = read_manifest(_manifest_path(out_dir))
    image_dir = os.path.join(out_dir, "images")
    pred_paths = pipeline.stage_evaluate(config, manifest, image_dir, out_dir)
    for name, path in sorted(pred_paths.items()):
        print(f"{name}: {path}")
    return EXIT_OK


def _cmd_report(args):
    config, out_dir = _load(args)
    manifest = read_manifest(_manifest_path(out_dir))
    pred_paths = {
        spec.name: os.path.join(out_dir, f"{spec.name}.predictions.tsv")
        for spec in config.classifiers
    }
    reports, outputs = pipeline.stage_report(config, manifest, pred_paths, out_dir)
    for path in outputs:
        print(path)
    return EXIT_OK


def _cmd_audit(args):
    config, out_dir = _load(args)
    reports, stage_hashes = pipeline.run_audit(
        config, out_dir, workers=args.workers, resume=args.resume
    )
    for stage, digest in stage_hashes.items():
        print(f"{stage}: {digest[:16]}")
    return EXIT_OK


_COMMANDS = {
    "manifest": _cmd_manifest,
    "train": _cmd_train,
    "generate": _cmd_generate,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "audit": _cmd_audit,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, VocabularyError, SizeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FairgenError as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except OSError as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
