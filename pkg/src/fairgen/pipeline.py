"""Stage implementations behind the CLI subcommands.

Each stage reads/writes persisted artifacts so it can be re-run in
isolation. Generation uses fixed 256-row chunks regardless of the worker
count, so parallel schedules are bit-identical to sequential runs.
"""

import concurrent.futures
import hashlib
import os

import numpy as np

from . import adapters, fairmetrics, images
from .cohort import build_manifest, read_manifest, validate_manifest, write_manifest
from .errors import AdapterError, CompatibilityError, FairgenError
from .flowgen.checkpoint import load_checkpoint, save_checkpoint
from .flowgen.model import VelocityModel
from .flowgen.sampler import sample_batch
from .flowgen.training import train
from .lesionworld import build_dataset

GENERATE_CHUNK = 256


def stage_manifest(config, out_dir):
    manifest = build_manifest(config.cohort_spec())
    path = os.path.join(out_dir, "manifest.tsv")
    write_manifest(manifest, path)
    return manifest, path


def stage_train(config, out_dir, log=print):
    vocab = config.vocabulary
    world = config.world
    dataset = build_dataset(world, vocab, config.world_n_per_cell, config.master_seed)
    pairs = [(s.image, s.profile) for s in dataset]
    rng = np.random.Generator(np.random.PCG64(config.master_seed))
    model = VelocityModel.create(
        vocab, world.image_side**2, config.hidden_dims, rng
    )
    model, trace = train(model, pairs, config.train)
    ckpt_path = os.path.join(out_dir, "model.ckpt")
    save_checkpoint(model, ckpt_path)
    trace_path = os.path.join(out_dir, "loss_trace.csv")
    with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,loss\n")
        for i, loss in enumerate(trace):
            fh.write(f"{i},{loss:.8f}\n")
    if trace:
        log(f"trained {len(trace)} steps, final loss {trace[-1]:.5f}")
    return model, ckpt_path, trace


def _generate_chunk(model, rows, steps, guidance_scale):
    profiles = [r.profile for r in rows]
    seeds = [r.derived_seed for r in rows]
    return sample_batch(model, profiles, seeds, steps, guidance_scale)


def stage_generate(config, model, manifest, out_dir, workers=1, resume=False):
    if model.vocab.vocab_hash() != manifest.spec.vocabulary.vocab_hash():
        raise CompatibilityError("checkpoint vocabulary does not match manifest")
    image_dir = os.path.join(out_dir, "images")
    os.makedirs(image_dir, exist_ok=True)
    side = config.world.image_side
    chunks = [
        manifest.rows[i : i + GENERATE_CHUNK]
        for i in range(0, len(manifest.rows), GENERATE_CHUNK)
    ]
    paths = {
        row.sample_id: os.path.join(image_dir, f"{row.sample_id}.png")
        for row in manifest.rows
    }
    todo = []
    for chunk in chunks:
        if resume and all(os.path.exists(paths[r.sample_id]) for r in chunk):
            continue
        todo.append(chunk)
    steps, w = config.sampler.steps, config.sampler.guidance_scale
    if workers <= 1 or len(todo) <= 1:
        results = ((chunk, _generate_chunk(model, chunk, steps, w)) for chunk in todo)
        for chunk, block in results:
            for row, img in zip(chunk, block):
                images.write_png(img, side, paths[row.sample_id])
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_generate_chunk, model, chunk, steps, w) for chunk in todo
            ]
            for chunk, fut in zip(todo, futures):
                for row, img in zip(chunk, fut.result()):
                    images.write_png(img, side, paths[row.sample_id])
    return image_dir


def stage_evaluate(config, manifest, image_dir, out_dir):
    vocab = config.vocabulary
    pred_paths = {}
    for spec in config.classifiers:
        handle = spec.build(vocab)
        image_paths = None
        if isinstance(handle, adapters.ExternalClassifier):
            image_paths = []
            for row in manifest.rows:
                path = os.path.join(image_dir, f"{row.sample_id}.png")
                if not os.path.exists(path):
                    raise AdapterError(
                        f"classifier {spec.name}: missing image for id {row.sample_id}"
                    )
                image_paths.append(path)
        try:
            records = adapters.classify_batch(
                handle, manifest.rows, vocab, image_paths
            )
        except FairgenError as exc:
            raise AdapterError(f"classifier {spec.name}: {exc}") from exc
        path = os.path.join(out_dir, f"{spec.name}.predictions.tsv")
        adapters.write_predictions(records, path)
        pred_paths[spec.name] = path
    return pred_paths


def stage_report(config, manifest, pred_paths, out_dir):
    reports = []
    outputs = []
    for name, pred_path in sorted(pred_paths.items()):
        records = adapters.read_predictions(pred_path)
        report = fairmetrics.build_report(name, manifest, records)
        reports.append(report)
        for fmt, suffix in [
            ("csv", "audit.csv"),
            ("markdown", "audit.md"),
            ("plotdata", "plotdata.csv"),
        ]:
            path = os.path.join(out_dir, f"{name}.{suffix}")
            with open(path, "wb") as fh:
                fh.write(fairmetrics.emit_report(report, fmt))
            outputs.append(path)
    if reports:
        combined = os.path.join(out_dir, "combined.audit.md")
        with open(combined, "wb") as fh:
            fh.write(fairmetrics.combined_table(reports, "markdown"))
        outputs.append(combined)
    return reports, outputs


def _hash_file(path, canonical=False):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        data = fh.read()
    if canonical:
        # stage hashes must be run-invariant, so timestamp lines are excluded
        data = b"\n".join(
            line for line in data.splitlines() if b"timestamp" not in line
        )
    h.update(data)
    return h.hexdigest()


def _hash_tree(paths, canonical=False):
    h = hashlib.sha256()
    for path in sorted(paths):
        h.update(os.path.basename(path).encode())
        h.update(bytes.fromhex(_hash_file(path, canonical=canonical)))
    return h.hexdigest()


def run_audit(config, out_dir, workers=1, resume=False, log=print):
    """Full pipeline: train -> manifest -> generate -> evaluate -> report."""
    os.makedirs(out_dir, exist_ok=True)
    stage_hashes = {}

    model, ckpt_path, _ = stage_train(config, out_dir, log=log)
    stage_hashes["train"] = _hash_file(ckpt_path)

    manifest, manifest_path = stage_manifest(config, out_dir)
    violations = validate_manifest(manifest)
    if violations:
        raise FairgenError(f"manifest validation failed: {violations[:3]}")
    stage_hashes["manifest"] = _hash_file(manifest_path)
    log(f"{len(manifest)} rows")

    image_dir = stage_generate(
        config, model, manifest, out_dir, workers=workers, resume=resume
    )
    image_files = [
        os.path.join(image_dir, f"{row.sample_id}.png") for row in manifest.rows
    ]
    stage_hashes["generate"] = _hash_tree(image_files)

    pred_paths = stage_evaluate(config, manifest, image_dir, out_dir)
    stage_hashes["evaluate"] = _hash_tree(pred_paths.values())

    reports, report_files = stage_report(config, manifest, pred_paths, out_dir)
    stage_hashes["report"] = _hash_tree(report_files, canonical=True)

    summary_path = os.path.join(out_dir, "run_summary.txt")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("FAIRGEN-RUN 1\n")
        for line in config.echo_lines():
            fh.write(f"config.{line}\n")
        for stage, digest in stage_hashes.items():
            fh.write(f"stage.{stage}={digest}\n")
    return reports, stage_hashes


def load_manifest_checked(path):
    manifest = read_manifest(path)
    return manifest
