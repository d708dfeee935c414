import math

import pytest
from hypothesis import given, strategies as st

from fairgen.adapters import PredictionRecord, classify_batch, planted_oracle
from fairgen.cohort import CohortSpec, build_manifest
from fairgen.errors import InputError, JoinError
from fairgen.fairmetrics import (
    SubgroupMetrics,
    build_report,
    combined_table,
    demographic_parity,
    emit_report,
    join_predictions,
    subgroup_accuracy,
    wilson_interval,
)

# Published Max/Min/DP triples (model, attribute) -> (max, min, dp)
TABLE3 = {
    ("DeepGuide", "sex"): (0.0179, 0.0031, 0.0148),
    ("DeepGuide", "age"): (0.0258, 0.0017, 0.0241),
    ("DeepGuide", "skin_type"): (0.0312, 0.0038, 0.0274),
    ("MelaNet", "sex"): (0.2402, 0.0762, 0.1640),
    ("MelaNet", "age"): (0.2575, 0.0633, 0.1942),
    ("MelaNet", "skin_type"): (0.2062, 0.0662, 0.1400),
    ("SkinLesionDensenet", "sex"): (0.4040, 0.3708, 0.0332),
    ("SkinLesionDensenet", "age"): (0.6200, 0.1792, 0.4408),
    ("SkinLesionDensenet", "skin_type"): (0.4494, 0.3012, 0.1482),
}


def metrics_from_accuracies(attribute, accuracies, n=10_000):
    return [
        SubgroupMetrics(attribute, f"g{i}", n, round(a * n), 0.0, 1.0)
        for i, a in enumerate(accuracies)
    ]


def perfect_records(manifest):
    return [
        PredictionRecord(row.sample_id, "melanoma", 1.0) for row in manifest.rows
    ]


@pytest.fixture
def manifest(vocab):
    return build_manifest(CohortSpec(vocabulary=vocab, n_per_cell=2, master_seed=8))


class TestJoin:
    def test_complete_match(self, manifest):
        joined = join_predictions(manifest, perfect_records(manifest))
        assert len(joined) == len(manifest)
        assert all(j.correct for j in joined)

    def test_foreign_id_named(self, manifest):
        records = perfect_records(manifest) + [
            PredictionRecord("zzz999", "melanoma", 1.0)
        ]
        with pytest.raises(JoinError, match="zzz999"):
            join_predictions(manifest, records)

    def test_missing_prediction_listed(self, manifest):
        records = perfect_records(manifest)[:-1]
        missing_id = manifest.rows[-1].sample_id
        with pytest.raises(JoinError, match=missing_id):
            join_predictions(manifest, records)


class TestSubgroupAccuracy:
    def test_all_correct(self, vocab, manifest):
        joined = join_predictions(manifest, perfect_records(manifest))
        for m in subgroup_accuracy(joined, "skin_type", vocab):
            assert m.accuracy == 1.0

    def test_three_of_four(self, vocab, manifest):
        records = perfect_records(manifest)
        # break exactly one male prediction; males are rows 0..111 at n=2
        records[0] = PredictionRecord(records[0].sample_id, "other", 0.1)
        joined = join_predictions(manifest, records)
        male = subgroup_accuracy(joined, "sex", vocab)[0]
        assert male.value == "male"
        assert male.accuracy == (male.n - 1) / male.n

    def test_balanced_default_manifest_counts(self, vocab):
        manifest = build_manifest(CohortSpec(vocabulary=vocab, n_per_cell=100))
        joined = join_predictions(manifest, perfect_records(manifest))
        assert {m.n for m in subgroup_accuracy(joined, "sex", vocab)} == {5600}
        assert {m.n for m in subgroup_accuracy(joined, "age", vocab)} == {1400}
        assert {m.n for m in subgroup_accuracy(joined, "skin_type", vocab)} == {1600}

    def test_unknown_attribute(self, vocab, manifest):
        joined = join_predictions(manifest, perfect_records(manifest))
        with pytest.raises(InputError):
            subgroup_accuracy(joined, "height", vocab)

    def test_counts_partition_the_joined_set(self, vocab, manifest):
        joined = join_predictions(manifest, perfect_records(manifest))
        for attr in ("sex", "age", "skin_type"):
            assert sum(m.n for m in subgroup_accuracy(joined, attr, vocab)) == len(
                joined
            )


class TestDemographicParity:
    @pytest.mark.parametrize("key,expected", sorted(TABLE3.items()))
    def test_published_triples_reproduced(self, key, expected):
        mx, mn, dp = expected
        row = demographic_parity(
            metrics_from_accuracies(key[1], [mx, mn])
        )
        assert abs(row.dp - dp) < 1e-9

    def test_equal_accuracies_tie_break_first(self):
        row = demographic_parity(metrics_from_accuracies("sex", [0.5, 0.5, 0.5]))
        assert row.dp == 0.0
        assert row.argmax_group == row.argmin_group == "g0"

    def test_needs_two_subgroups(self):
        with pytest.raises(InputError):
            demographic_parity(metrics_from_accuracies("sex", [0.4]))

    @given(
        st.lists(st.integers(min_value=0, max_value=1000), min_size=2, max_size=8),
        st.randoms(use_true_random=False),
    )
    def test_dp_invariant_under_permutation(self, corrects, rnd):
        base = [
            SubgroupMetrics("a", f"g{i}", 1000, c, 0.0, 1.0)
            for i, c in enumerate(corrects)
        ]
        row = demographic_parity(base)
        assert row.dp >= 0.0
        shuffled = list(base)
        rnd.shuffle(shuffled)
        row2 = demographic_parity(shuffled)
        assert row2.dp == row.dp
        assert row2.max_accuracy == row.max_accuracy
        assert row2.min_accuracy == row.min_accuracy

    @given(st.lists(st.floats(0.0, 0.5), min_size=2, max_size=6),
           st.floats(0.0, 0.5))
    def test_dp_invariant_under_constant_shift(self, accs, c):
        n = 10**6
        base = metrics_from_accuracies("a", accs, n)
        shifted = metrics_from_accuracies("a", [a + c for a in accs], n)
        dp0 = demographic_parity(base).dp
        dp1 = demographic_parity(shifted).dp
        assert dp1 == pytest.approx(dp0, abs=5e-6)

    def test_dp_zero_iff_all_equal(self):
        equal = demographic_parity(metrics_from_accuracies("a", [0.3, 0.3]))
        assert equal.dp == 0.0
        unequal = demographic_parity(metrics_from_accuracies("a", [0.3, 0.4]))
        assert unequal.dp > 0.0


class TestWilson:
    def test_boundaries(self):
        low, high = wilson_interval(100, 100)
        assert high == 1.0 and low < 1.0
        low, high = wilson_interval(0, 50)
        assert low == 0.0 and high > 0.0

    def test_frozen_formula_evaluation(self):
        # independent evaluation of the score interval at (50, 100, 1.96)
        z = 1.96
        p, n = 0.5, 100
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        low, high = wilson_interval(50, 100)
        assert low == pytest.approx(center - half, rel=1e-12)
        assert high == pytest.approx(center + half, rel=1e-12)

    def test_rejects_empty_group(self):
        with pytest.raises(InputError):
            wilson_interval(0, 0)

    @given(st.integers(0, 500), st.integers(1, 500))
    def test_contains_point_estimate_within_unit_interval(self, correct, n):
        correct = min(correct, n)
        low, high = wilson_interval(correct, n)
        assert 0.0 <= low <= correct / n <= high <= 1.0


class TestReports:
    def test_uniform_perfect_oracle_all_zero_dp(self, vocab, manifest):
        report = build_report("perfect", manifest, perfect_records(manifest))
        assert report.disparities
        assert all(d.dp == 0.0 for d in report.disparities)

    def test_planted_skin_bias_recovered(self, vocab):
        manifest = build_manifest(CohortSpec(vocabulary=vocab, n_per_cell=18))
        table = {v: 0.95 - 0.05 * i for i, v in enumerate(vocab.skin_types)}
        handle = planted_oracle("skin_type", table, 4, vocab)
        records = classify_batch(handle, manifest.rows, vocab)
        report = build_report("biased", manifest, records)
        skin = next(d for d in report.disparities if d.attribute == "skin_type")
        assert skin.dp == pytest.approx(0.30, abs=0.08)
        assert skin.argmin_group == "unknown"

    def test_rebuild_is_deterministic_after_timestamp_canonicalization(
        self, vocab, manifest
    ):
        records = perfect_records(manifest)
        outs = []
        for _ in range(2):
            report = build_report("m", manifest, records)
            text = emit_report(report, "csv").decode()
            outs.append(
                "\n".join(
                    l for l in text.splitlines() if not l.startswith("# timestamp")
                )
            )
        assert outs[0] == outs[1]

    def test_csv_round_trips_at_four_decimals(self, vocab, manifest):
        table = {v: 0.9 - 0.1 * i for i, v in enumerate(vocab.sexes)}
        handle = planted_oracle("sex", table, 2, vocab)
        records = classify_batch(handle, manifest.rows, vocab)
        report = build_report("m", manifest, records)
        lines = [
            l
            for l in emit_report(report, "csv").decode().splitlines()
            if l and not l.startswith("#")
        ]
        header = lines[0].split(",")
        for line in lines[1:]:
            row = dict(zip(header, line.split(",")))
            d = next(x for x in report.disparities if x.attribute == row["attribute"])
            assert float(row["dp"]) == pytest.approx(d.dp, abs=5e-5)
            assert float(row["max"]) == round(d.max_accuracy, 4)

    def test_published_line_renders_verbatim(self):
        disparities = [
            metrics_from_accuracies("sex", [0.0179, 0.0031]),
            metrics_from_accuracies("age", [0.0258, 0.0017]),
            metrics_from_accuracies("skin_type", [0.0312, 0.0038]),
        ]
        from fairgen.fairmetrics import AuditReport, DisparityRow

        rows = [demographic_parity(m) for m in disparities]
        report = AuditReport(
            model_id="DeepGuide",
            disparities=rows,
            subgroups=[m for group in disparities for m in group],
            cohort_echo="test",
        )
        md = emit_report(report, "markdown").decode()
        assert (
            "| DeepGuide | 0.0179 | 0.0031 | 0.0148 | 0.0258 | 0.0017 | 0.0241 "
            "| 0.0312 | 0.0038 | 0.0274 |" in md
        )

    def test_empty_report_rejected(self):
        from fairgen.fairmetrics import AuditReport

        empty = AuditReport("m", [], [], "echo")
        with pytest.raises(InputError):
            emit_report(empty, "csv")

    def test_unknown_format_rejected(self, vocab, manifest):
        report = build_report("m", manifest, perfect_records(manifest))
        with pytest.raises(InputError):
            emit_report(report, "yaml")

    def test_plotdata_long_form(self, vocab, manifest):
        report = build_report("m", manifest, perfect_records(manifest))
        lines = emit_report(report, "plotdata").decode().splitlines()
        data = [l for l in lines if l and not l.startswith("#")]
        # header + one line per subgroup
        assert len(data) == 1 + len(report.subgroups)
        assert data[0] == "attribute,group,n,accuracy,ci_low,ci_high"

    def test_combined_table_two_models(self, vocab, manifest):
        records = perfect_records(manifest)
        reports = [build_report(m, manifest, records) for m in ("a", "b")]
        md = combined_table(reports, "markdown").decode()
        assert md.count("\n| ") == 2 or md.count("| a |") + md.count("| b |") == 2
