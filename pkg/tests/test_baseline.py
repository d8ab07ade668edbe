import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwoa_cvrp import baseline, cvrp
from qwoa_cvrp.errors import ValidationError
from qwoa_cvrp.optimize import OptimizationRun
from qwoa_cvrp.qwoa import VariationalParams


def brute_force_expected_min(qualities, samples):
    """Average the minimum over every ordered draw tuple (test oracle)."""
    total = 0.0
    for draw in itertools.product(range(len(qualities)), repeat=samples):
        total += min(qualities[i] for i in draw)
    return total / len(qualities) ** samples


def fake_run(depth, value):
    params = VariationalParams((0.0,) * depth, (0.0,) * depth)
    return OptimizationRun(
        depth=depth,
        initial_params=params,
        best_params=params,
        best_objective=value,
        evaluations=1,
        restarts=0,
        restart_index=0,
        budget_exhausted=False,
    )


class TestExpectedBestOf:
    def test_one_sample_is_mean(self, example_table):
        assert baseline.expected_best_of(example_table, 1) == pytest.approx(
            example_table.mean_quality, abs=1e-12
        )

    def test_two_quality_toy_table(self):
        table = cvrp.QualityTable.from_qualities([1.0, 2.0, 2.0, 2.0])
        # 16 ordered pairs: min is 1 unless both draws hit quality 2.
        assert baseline.expected_best_of(table, 2) == pytest.approx(1.5625, abs=1e-15)

    def test_many_samples_approach_minimum(self, example_table):
        value = baseline.expected_best_of(example_table, 10**6)
        assert value == pytest.approx(example_table.min_quality, abs=1e-6)

    def test_non_increasing_in_samples(self, example_table):
        values = [baseline.expected_best_of(example_table, s) for s in range(1, 40)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
        assert all(
            example_table.min_quality <= v <= example_table.mean_quality + 1e-12
            for v in values
        )

    @pytest.mark.parametrize("samples", [1, 2, 3])
    def test_matches_brute_force_tuples(self, samples):
        qualities = [3.0, 1.0, 4.0, 1.0, 3.0, 2.0]
        table = cvrp.QualityTable.from_qualities(qualities)
        expected = brute_force_expected_min(qualities, samples)
        assert baseline.expected_best_of(table, samples) == pytest.approx(
            expected, abs=1e-12
        )

    def test_rejects_zero_samples(self, example_table):
        with pytest.raises(ValidationError):
            baseline.expected_best_of(example_table, 0)

    @given(
        qualities=st.lists(
            st.integers(min_value=1, max_value=30), min_size=2, max_size=12
        ),
        samples=st.integers(min_value=1, max_value=6),
    )
    @settings(max_examples=80, deadline=None)
    def test_bounded_and_monotone_random_tables(self, qualities, samples):
        table = cvrp.QualityTable.from_qualities([float(q) for q in qualities])
        value = baseline.expected_best_of(table, samples)
        nxt = baseline.expected_best_of(table, samples + 1)
        assert table.min_quality - 1e-12 <= value <= table.mean_quality + 1e-12
        assert nxt <= value + 1e-12


class TestMonteCarloBestOf:
    def test_deterministic(self, example_table):
        a = baseline.monte_carlo_best_of(example_table, 5, 2000, seed=3)
        b = baseline.monte_carlo_best_of(example_table, 5, 2000, seed=3)
        assert a == b

    def test_single_trial_is_legal(self, example_table):
        estimate, stderr = baseline.monte_carlo_best_of(example_table, 4, 1, seed=0)
        assert estimate in set(example_table.qualities)
        assert stderr == 0.0

    def test_consistent_with_exact(self, example_table):
        estimate, stderr = baseline.monte_carlo_best_of(
            example_table, 10, 100_000, seed=11
        )
        exact = baseline.expected_best_of(example_table, 10)
        assert abs(estimate - exact) < 4 * stderr

    def test_stderr_shrinks_with_trials(self, example_table):
        _, small = baseline.monte_carlo_best_of(example_table, 3, 1000, seed=5)
        _, large = baseline.monte_carlo_best_of(example_table, 3, 64_000, seed=5)
        # stderr ~ 1/sqrt(trials): 64x the trials is 8x smaller.
        assert large == pytest.approx(small / 8, rel=0.35)


class TestFitPowerLaw:
    def make_records(self, gaps, target=100.0):
        return [
            baseline.ConvergenceRecord(
                r=r, qwoa_expectation=target + gap, classical_expected_best=target + gap, target=target
            )
            for r, gap in enumerate(gaps, start=1)
        ]

    def test_exact_power_law(self):
        records = self.make_records([r ** -0.5 for r in range(1, 11)])
        fit = baseline.fit_power_law(records, "qwoa")
        assert fit.alpha == pytest.approx(0.5, abs=1e-6)
        assert fit.residual < 1e-12
        assert (fit.r_min, fit.r_max) == (1, 10)

    def test_constant_curve(self):
        records = self.make_records([2.5] * 8)
        fit = baseline.fit_power_law(records, "classical")
        assert fit.alpha == pytest.approx(0.0, abs=1e-6)

    def test_scale_invariance(self):
        gaps = [1.7 * r ** -0.33 for r in range(1, 9)]
        a = baseline.fit_power_law(self.make_records(gaps), "qwoa").alpha
        b = baseline.fit_power_law(
            self.make_records([90.0 * g for g in gaps]), "qwoa"
        ).alpha
        assert a == pytest.approx(b, abs=1e-12)

    def test_range_filter(self):
        gaps = [r ** -1.0 for r in range(1, 11)]
        fit = baseline.fit_power_law(self.make_records(gaps), "qwoa", r_min=3, r_max=8)
        assert (fit.r_min, fit.r_max) == (3, 8)
        assert fit.alpha == pytest.approx(1.0, abs=1e-9)

    def test_non_positive_gap_rejected(self):
        records = self.make_records([1.0, 0.0, 0.5])
        with pytest.raises(ValidationError):
            baseline.fit_power_law(records, "qwoa")

    def test_too_few_records(self):
        records = self.make_records([1.0, 0.5])
        with pytest.raises(ValidationError):
            baseline.fit_power_law(records, "qwoa")

    def test_unknown_column(self):
        records = self.make_records([1.0, 0.5, 0.3])
        with pytest.raises(ValidationError):
            baseline.fit_power_law(records, "nope")


class TestCompare:
    def test_records_shape(self, example_table):
        runs = [fake_run(r, 120.0 - r) for r in (1, 2, 3)]
        records = baseline.compare(example_table, runs)
        assert [rec.r for rec in records] == [1, 2, 3]
        for rec, run in zip(records, runs):
            assert rec.qwoa_expectation == run.best_objective
            assert rec.classical_expected_best == baseline.expected_best_of(
                example_table, 2 * rec.r
            )
            assert rec.target == example_table.min_quality

    def test_classical_column_strictly_decreasing(self, example_table):
        runs = [fake_run(r, 120.0) for r in range(1, 9)]
        records = baseline.compare(example_table, runs)
        col = [rec.classical_expected_best for rec in records]
        assert all(b < a for a, b in zip(col, col[1:]))

    def test_target_is_brute_force_optimum(self, example_instance, example_table):
        best, _ = cvrp.brute_force_optimum(example_instance, table=example_table)
        records = baseline.compare(example_table, [fake_run(1, 120.0)])
        assert records[0].target == best

    def test_rejects_unsorted_runs(self, example_table):
        with pytest.raises(ValidationError):
            baseline.compare(example_table, [fake_run(2, 1.0), fake_run(1, 2.0)])
