"""Pluggable classifier boundary.

Two kinds of classifier handle:

* builtin planted-bias oracles — per-sample seeded verdicts with exactly
  known per-group accuracies, used to verify the audit end to end;
* external processes speaking the FAIRGEN-PROTO 1 line protocol over
  stdin/stdout (handshake, PREDICT/RESULT lines, END terminator).

Oracle verdicts depend only on (handle seed, sample_id), never on batch
composition, so any chunking or parallel schedule gives identical output.
"""

import hashlib
import queue
import subprocess
import threading
from dataclasses import dataclass, field

import numpy as np

from .cohort import seed_mix
from .errors import AdapterError, ConfigError

PROTO_HANDSHAKE = "FAIRGEN-PROTO 1"
PROTO_END = "END"
CHUNK_SIZE = 256
DEFAULT_TIMEOUT = 120.0


@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    predicted_label: str
    score: float


@dataclass(frozen=True)
class OracleClassifier:
    kind = "builtin-oracle"
    attribute: str
    accuracy_table: dict
    seed: int


@dataclass(frozen=True)
class ExternalClassifier:
    kind = "external-process"
    command: tuple
    workdir: str = None
    timeout: float = DEFAULT_TIMEOUT


def planted_oracle(attribute, accuracy_table, seed, vocab):
    """Oracle whose per-group accuracy is exactly the given table."""
    fields = vocab.fields()
    if attribute not in fields:
        raise ConfigError(f"unknown attribute {attribute!r}")
    missing = [v for v in fields[attribute] if v not in accuracy_table]
    if missing:
        raise ConfigError(f"accuracy table missing values: {missing}")
    for v, acc in accuracy_table.items():
        if not 0.0 <= acc <= 1.0:
            raise ConfigError(f"accuracy {acc} for {v!r} outside [0, 1]")
    return OracleClassifier(
        attribute=attribute, accuracy_table=dict(accuracy_table), seed=seed
    )


def _id_hash(sample_id):
    digest = hashlib.blake2b(sample_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _oracle_predict(handle, row, vocab):
    surf = row.profile.surface(vocab)
    value = surf[handle.attribute]
    acc = handle.accuracy_table[value]
    rng = np.random.Generator(
        np.random.PCG64(seed_mix(handle.seed, _id_hash(row.sample_id)))
    )
    correct = rng.uniform() < acc
    if correct:
        return PredictionRecord(row.sample_id, surf["diagnosis"], acc)
    return PredictionRecord(row.sample_id, "other", 1.0 - acc)


class _LineReader:
    """Background reader so protocol reads can time out cleanly."""

    def __init__(self, stream):
        self._queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        for line in stream:
            self._queue.put(line)
        self._queue.put(None)

    def readline(self, timeout):
        try:
            line = self._queue.get(timeout=timeout)
        except queue.Empty:
            raise AdapterError(f"external classifier timed out after {timeout}s")
        if line is None:
            raise AdapterError("external classifier closed its output early")
        return line.rstrip("\n")


def _parse_result(line, expected_id):
    parts = line.split()
    if len(parts) != 4 or parts[0] != "RESULT":
        raise AdapterError(f"malformed response line: {line!r}")
    _, sid, label, score_text = parts
    if sid != expected_id:
        raise AdapterError(f"response id {sid!r} != requested id {expected_id!r}")
    try:
        score = float(score_text)
    except ValueError:
        raise AdapterError(f"non-numeric score in response line: {line!r}")
    if not 0.0 <= score <= 1.0:
        raise AdapterError(f"score {score} outside [0, 1] in line: {line!r}")
    return PredictionRecord(sid, label, score)


def _external_classify(handle, rows, image_paths):
    if image_paths is None or len(image_paths) != len(rows):
        raise AdapterError("external classifier needs one image path per row")
    proc = subprocess.Popen(
        list(handle.command),
        cwd=handle.workdir,
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        bufsize=1,
    )
    records = []
    try:
        reader = _LineReader(proc.stdout)
        proc.stdin.write(PROTO_HANDSHAKE + "\n")
        proc.stdin.flush()
        greeting = reader.readline(handle.timeout)
        if greeting != PROTO_HANDSHAKE:
            raise AdapterError(f"bad handshake from classifier: {greeting!r}")
        for start in range(0, len(rows), CHUNK_SIZE):
            chunk = rows[start : start + CHUNK_SIZE]
            paths = image_paths[start : start + CHUNK_SIZE]
            for row, path in zip(chunk, paths):
                proc.stdin.write(f"PREDICT {row.sample_id} {path}\n")
            proc.stdin.flush()
            for row in chunk:
                line = reader.readline(handle.timeout)
                if line == PROTO_END:
                    raise AdapterError(
                        f"classifier ended early; missing id {row.sample_id}"
                    )
                records.append(_parse_result(line, row.sample_id))
        proc.stdin.write(PROTO_END + "\n")
        proc.stdin.flush()
        terminator = reader.readline(handle.timeout)
        if terminator != PROTO_END:
            raise AdapterError(f"expected END terminator, got {terminator!r}")
        proc.stdin.close()
        rc = proc.wait(timeout=handle.timeout)
        if rc != 0:
            raise AdapterError(f"external classifier exited with status {rc}")
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
    return records


def classify_batch(handle, rows, vocab, image_paths=None):
    """One PredictionRecord per row, order preserved."""
    if isinstance(handle, OracleClassifier):
        return [_oracle_predict(handle, row, vocab) for row in rows]
    if isinstance(handle, ExternalClassifier):
        return _external_classify(handle, rows, image_paths)
    raise ConfigError(f"unknown classifier handle {handle!r}")


def write_predictions(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("FAIRGEN-PREDICTIONS 1\n")
        for r in records:
            fh.write(f"{r.sample_id}\t{r.predicted_label}\t{r.score:.6f}\n")


def read_predictions(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("FAIRGEN-PREDICTIONS"):
        raise ConfigError(f"{path}: not a predictions file")
    records = []
    for line in lines[1:]:
        sid, label, score = line.split("\t")
        records.append(PredictionRecord(sid, label, float(score)))
    return records


@dataclass
class ConformanceCheck:
    name: str
    passed: bool
    detail: str = ""


def run_conformance(command, workdir=None, timeout=30.0):
    """Protocol conformance checks against an external classifier command.

    Sends the handshake and 10 PREDICT requests with synthetic ids, then
    END; verifies greeting, response count, id echo/ordering, score range,
    and the END terminator. Returns a list of ConformanceCheck results.
    """
    checks = []
    rows = [
        type("Row", (), {"sample_id": f"conf{i:03d}", "profile": None})()
        for i in range(10)
    ]
    handle = ExternalClassifier(
        command=tuple(command), workdir=workdir, timeout=timeout
    )
    try:
        records = _external_classify(handle, rows, ["/dev/null"] * len(rows))
    except AdapterError as exc:
        checks.append(ConformanceCheck("protocol-session", False, str(exc)))
        return checks
    checks.append(ConformanceCheck("protocol-session", True))
    checks.append(
        ConformanceCheck(
            "response-count",
            len(records) == len(rows),
            f"{len(records)} responses for {len(rows)} requests",
        )
    )
    order_ok = all(r.sample_id == row.sample_id for r, row in zip(records, rows))
    checks.append(ConformanceCheck("id-ordering", order_ok))
    scores_ok = all(0.0 <= r.score <= 1.0 for r in records)
    checks.append(ConformanceCheck("score-range", scores_ok))
    return checks
