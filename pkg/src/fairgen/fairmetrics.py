"""Subgroup accuracy, demographic parity, and report construction.

Demographic parity (DP) for one protected attribute is the difference
between the maximum and minimum subgroup accuracy. Subgroup intervals use
the Wilson score, which stays sane at accuracies near 0 or 1. Ties in
max/min are broken by vocabulary order so reports are reproducible.
"""

import datetime
import io
import math
from dataclasses import dataclass, field

from .errors import InputError, JoinError

REPORT_VERSION = 1
HARNESS_VERSION = "0.1.0"


@dataclass(frozen=True)
class SubgroupMetrics:
    attribute: str
    value: str
    n: int
    correct: int
    ci_low: float
    ci_high: float

    @property
    def accuracy(self):
        return self.correct / self.n


@dataclass(frozen=True)
class DisparityRow:
    attribute: str
    max_accuracy: float
    min_accuracy: float
    dp: float
    argmax_group: str
    argmin_group: str


@dataclass
class AuditReport:
    model_id: str
    disparities: list
    subgroups: list
    cohort_echo: str
    timestamp: str = ""
    harness_version: str = HARNESS_VERSION


@dataclass(frozen=True)
class JoinedRow:
    row: object
    record: object
    correct: bool


def join_predictions(manifest, records):
    """Pair every manifest row with exactly one prediction record."""
    by_id = {}
    for rec in records:
        if rec.sample_id in by_id:
            raise JoinError(f"duplicate prediction for id {rec.sample_id}")
        by_id[rec.sample_id] = rec
    known = {row.sample_id for row in manifest.rows}
    foreign = sorted(set(by_id) - known)
    if foreign:
        raise JoinError(f"predictions for unknown ids: {foreign[:5]}")
    missing = sorted(sid for sid in known if sid not in by_id)
    if missing:
        raise JoinError(f"missing predictions for ids: {missing[:5]}")
    vocab = manifest.spec.vocabulary
    joined = []
    for row in manifest.rows:
        rec = by_id[row.sample_id]
        truth = vocab.diagnoses[row.profile.diagnosis]
        joined.append(JoinedRow(row, rec, rec.predicted_label == truth))
    return joined


def wilson_interval(correct, n, z=1.96):
    """Wilson score interval for a binomial proportion, clamped to [0,1]."""
    if n < 1:
        raise InputError("wilson_interval requires n >= 1")
    if not 0 <= correct <= n:
        raise InputError(f"correct={correct} outside [0, {n}]")
    p = correct / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    # at the extremes the bound is exactly 0/1 algebraically; avoid float dust
    if correct == 0:
        low = 0.0
    if correct == n:
        high = 1.0
    return min(low, p), max(high, p)


def subgroup_accuracy(joined, attribute, vocab):
    """One SubgroupMetrics per attribute value present, in vocabulary order."""
    fields = vocab.fields()
    if attribute not in fields:
        raise InputError(f"unknown attribute {attribute!r}")
    counts = {v: [0, 0] for v in fields[attribute]}
    for j in joined:
        value = j.row.profile.surface(vocab)[attribute]
        counts[value][0] += 1
        counts[value][1] += int(j.correct)
    out = []
    for value in fields[attribute]:
        n, correct = counts[value]
        if n == 0:
            continue
        low, high = wilson_interval(correct, n)
        out.append(SubgroupMetrics(attribute, value, n, correct, low, high))
    return out


def demographic_parity(metrics):
    """Max-minus-min subgroup accuracy; ties broken by input (vocab) order."""
    if len(metrics) < 2:
        raise InputError("demographic parity needs at least 2 subgroups")
    best = max(metrics, key=lambda m: m.accuracy)
    worst = min(metrics, key=lambda m: m.accuracy)
    # max()/min() already keep the first of equals, i.e. vocabulary order
    return DisparityRow(
        attribute=metrics[0].attribute,
        max_accuracy=best.accuracy,
        min_accuracy=worst.accuracy,
        dp=best.accuracy - worst.accuracy,
        argmax_group=best.value,
        argmin_group=worst.value,
    )


def report_attributes(vocab):
    """Attributes that get a DisparityRow: every field with >= 2 values."""
    return [name for name, values in vocab.fields().items() if len(values) >= 2]


def build_report(model_id, manifest, records):
    joined = join_predictions(manifest, records)
    vocab = manifest.spec.vocabulary
    disparities = []
    subgroups = []
    for attribute in report_attributes(vocab):
        metrics = subgroup_accuracy(joined, attribute, vocab)
        subgroups.extend(metrics)
        disparities.append(demographic_parity(metrics))
    echo = (
        f"vocab_hash={vocab.vocab_hash()};n_per_cell={manifest.spec.n_per_cell};"
        f"master_seed={manifest.spec.master_seed}"
    )
    return AuditReport(
        model_id=model_id,
        disparities=disparities,
        subgroups=subgroups,
        cohort_echo=echo,
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )


def _require(report):
    if not report.subgroups or not report.disparities:
        raise InputError("report has no subgroup metrics")


def emit_report(report, fmt):
    """Render a report as csv, markdown, or long-form plot data (bytes)."""
    _require(report)
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "markdown":
        return _emit_markdown(report)
    if fmt == "plotdata":
        return _emit_plotdata(report)
    raise InputError(f"unknown report format {fmt!r}")


def _emit_csv(report):
    buf = io.StringIO()
    buf.write(f"# fairgen-report v{REPORT_VERSION}\n")
    buf.write(f"# model={report.model_id}\n")
    buf.write(f"# cohort={report.cohort_echo}\n")
    buf.write(f"# timestamp={report.timestamp}\n")
    buf.write("model,attribute,max,min,dp,argmax_group,argmin_group\n")
    for d in report.disparities:
        buf.write(
            f"{report.model_id},{d.attribute},{d.max_accuracy:.4f},"
            f"{d.min_accuracy:.4f},{d.dp:.4f},{d.argmax_group},{d.argmin_group}\n"
        )
    return buf.getvalue().encode("utf-8")


def _emit_markdown(report):
    buf = io.StringIO()
    buf.write(f"<!-- fairgen-report v{REPORT_VERSION} -->\n")
    buf.write(f"<!-- timestamp={report.timestamp} -->\n")
    header = ["Model"]
    for d in report.disparities:
        header += [f"{d.attribute} Max", "Min", "DP"]
    buf.write("| " + " | ".join(header) + " |\n")
    buf.write("|" + "---|" * len(header) + "\n")
    cells = [report.model_id]
    for d in report.disparities:
        cells += [f"{d.max_accuracy:.4f}", f"{d.min_accuracy:.4f}", f"{d.dp:.4f}"]
    buf.write("| " + " | ".join(cells) + " |\n")
    return buf.getvalue().encode("utf-8")


def _emit_plotdata(report):
    buf = io.StringIO()
    buf.write(f"# fairgen-plotdata v{REPORT_VERSION}\n")
    buf.write(f"# model={report.model_id}\n")
    buf.write(f"# timestamp={report.timestamp}\n")
    buf.write("attribute,group,n,accuracy,ci_low,ci_high\n")
    for m in report.subgroups:
        buf.write(
            f"{m.attribute},{m.value},{m.n},{m.accuracy:.4f},"
            f"{m.ci_low:.4f},{m.ci_high:.4f}\n"
        )
    return buf.getvalue().encode("utf-8")


def combined_table(reports, fmt="markdown"):
    """Table-3-shaped comparison: one line per model, shared attributes."""
    if not reports:
        raise InputError("no reports to combine")
    attrs = [d.attribute for d in reports[0].disparities]
    buf = io.StringIO()
    if fmt == "markdown":
        header = ["Model"]
        for a in attrs:
            header += [f"{a} Max", "Min", "DP"]
        buf.write("| " + " | ".join(header) + " |\n")
        buf.write("|" + "---|" * len(header) + "\n")
        for rep in reports:
            cells = [rep.model_id]
            for d in rep.disparities:
                cells += [
                    f"{d.max_accuracy:.4f}",
                    f"{d.min_accuracy:.4f}",
                    f"{d.dp:.4f}",
                ]
            buf.write("| " + " | ".join(cells) + " |\n")
    elif fmt == "csv":
        buf.write("model," + ",".join(f"{a}_max,{a}_min,{a}_dp" for a in attrs) + "\n")
        for rep in reports:
            cells = [rep.model_id]
            for d in rep.disparities:
                cells += [
                    f"{d.max_accuracy:.4f}",
                    f"{d.min_accuracy:.4f}",
                    f"{d.dp:.4f}",
                ]
            buf.write(",".join(cells) + "\n")
    else:
        raise InputError(f"unknown combined-table format {fmt!r}")
    return buf.getvalue().encode("utf-8")
