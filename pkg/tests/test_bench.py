import logging

import numpy as np
import pytest

from tlradapt.bench import (
    CSV_HEADER,
    ConfigResult,
    ExperimentReport,
    GridSpec,
    emit_report,
    grid_search,
    read_report_csv,
    relative_kernel_gap,
    relative_latent_gap,
    run_protocol_ixmas_style,
)
from tlradapt.classify import knn1_predict, accuracy
from tlradapt.dataset import DomainPair, LabeledMatrix, synth_shift_pair
from tlradapt.kernels import JointKernel, KernelSpec, build_joint_kernel
from tlradapt.tlr import TlrHyperparams, fit


def small_pair(seed=0, n_per_class=8, classes=3, d=5):
    return synth_shift_pair(
        n_per_class, d, classes=classes, rotation_deg=20.0, translation=0.5,
        noise_std=0.6, seed=seed,
    )


SMALL_GRID = GridSpec(alphas=(0.01, 1.0), betas=(0.1, 1.0), ks=(2, 5, 9))


class TestGridSpec:
    def test_default_axes(self):
        grid = GridSpec.default()
        assert grid.alphas == tuple(10.0**e for e in range(-5, 1))
        assert grid.betas == grid.alphas
        assert grid.ks == tuple(range(10, 201, 10))
        assert len(grid.configurations()) == 720

    def test_enumeration_order(self):
        grid = GridSpec(alphas=(1.0, 2.0), betas=(3.0,), ks=(4, 5))
        assert grid.configurations() == [
            (1.0, 3.0, 4), (1.0, 3.0, 5), (2.0, 3.0, 4), (2.0, 3.0, 5),
        ]

    def test_rejects_empty_axis(self):
        with pytest.raises(ValueError, match="non-empty"):
            GridSpec(alphas=(), betas=(1.0,), ks=(1,))

    def test_rejects_non_positive_weight(self):
        with pytest.raises(ValueError, match="positive finite"):
            GridSpec(alphas=(0.0,), betas=(1.0,), ks=(1,))

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError, match=">= 1"):
            GridSpec(alphas=(1.0,), betas=(1.0,), ks=(0,))

    def test_coerces_to_tuples(self):
        grid = GridSpec(alphas=[1], betas=[2], ks=[3])
        assert grid.alphas == (1.0,) and grid.betas == (2.0,) and grid.ks == (3,)


class TestGridSearch:
    def test_matches_per_config_reference(self):
        # the grouped shared-basis path must agree with fitting each
        # configuration independently and scoring its latents directly
        pair = small_pair(seed=1)
        report = grid_search(pair, SMALL_GRID, pair_id="ref")
        assert len(report.records) == len(SMALL_GRID.configurations())
        for record in report.records:
            hyper = TlrHyperparams(alpha=record.alpha, beta=record.beta, k=record.k)
            _, latent_s, latent_t = fit(pair, hyper)
            predicted = knn1_predict(latent_s, pair.source.labels, latent_t).predicted
            expected = accuracy(predicted, pair.target.labels)
            assert record.accuracies == (expected,)

    def test_deterministic_for_fixed_seed(self):
        pair = small_pair(seed=2)
        first = grid_search(pair, SMALL_GRID, runs=3, seed=7, per_class=4)
        second = grid_search(pair, SMALL_GRID, runs=3, seed=7, per_class=4)
        assert first.records == second.records
        assert first.train_sizes == second.train_sizes

    def test_parallel_matches_serial(self):
        pair = small_pair(seed=3)
        serial = grid_search(pair, SMALL_GRID, runs=2, seed=5, per_class=4, jobs=1)
        parallel = grid_search(pair, SMALL_GRID, runs=2, seed=5, per_class=4, jobs=4)
        assert serial.records == parallel.records

    def test_oversized_widths_skipped_and_logged(self, caplog):
        pair = small_pair(seed=4, n_per_class=2, classes=2, d=3)  # n_total = 8
        grid = GridSpec(alphas=(1.0,), betas=(1.0, 2.0), ks=(2, 8, 9))
        with caplog.at_level(logging.WARNING, logger="tlradapt.bench"):
            report = grid_search(pair, grid)
        assert len(report.records) == 2
        assert len(report.skipped) == 4
        assert report.total_configurations == 6
        assert all(entry.reason == f"k={entry.k} >= n1+n2=8" for entry in report.skipped)
        skip_lines = [r.message for r in caplog.records if "skipping" in r.message]
        assert skip_lines == [
            "skipping 2 configuration(s) with k=8: k >= n1+n2=8",
            "skipping 2 configuration(s) with k=9: k >= n1+n2=8",
        ]

    def test_all_widths_oversized_raises(self):
        pair = small_pair(seed=5, n_per_class=2, classes=2, d=3)
        grid = GridSpec(alphas=(1.0,), betas=(1.0,), ks=(50,))
        with pytest.raises(ValueError, match="empty effective grid"):
            grid_search(pair, grid)

    def test_target_labels_required(self):
        base = small_pair(seed=6)
        pair = DomainPair(
            source=base.source,
            target=LabeledMatrix(features=base.target.features, labels=None),
        )
        with pytest.raises(ValueError, match="target labels are required"):
            grid_search(pair, SMALL_GRID)

    def test_per_class_controls_training_size(self):
        pair = small_pair(seed=7, n_per_class=8, classes=3)
        report = grid_search(pair, SMALL_GRID, runs=2, per_class=4)
        assert report.train_sizes == (12, 12)

    def test_without_per_class_uses_full_source(self):
        pair = small_pair(seed=8)
        report = grid_search(pair, SMALL_GRID)
        assert report.train_sizes == (pair.source.n,)

    def test_runs_recorded_per_config(self):
        pair = small_pair(seed=9)
        report = grid_search(pair, SMALL_GRID, runs=3, per_class=4)
        assert all(len(record.accuracies) == 3 for record in report.records)
        assert len(report.run_seconds) == 3
        assert report.wall_time_seconds >= sum(report.run_seconds) * 0.5

    def test_accuracies_are_valid_fractions(self):
        pair = small_pair(seed=10)
        report = grid_search(pair, SMALL_GRID)
        n_t = pair.target.n
        for record in report.records:
            for value in record.accuracies:
                assert 0.0 <= value <= 1.0
                assert abs(value * n_t - round(value * n_t)) < 1e-9

    def test_invalid_counts_rejected(self):
        pair = small_pair(seed=11)
        with pytest.raises(ValueError, match="runs must be"):
            grid_search(pair, SMALL_GRID, runs=0)
        with pytest.raises(ValueError, match="jobs must be"):
            grid_search(pair, SMALL_GRID, jobs=0)


class TestProtocol:
    def test_repeated_draw_wiring(self):
        pair = small_pair(seed=12, n_per_class=10, classes=3)
        report = run_protocol_ixmas_style(
            pair, per_class=5, runs=4, grid=SMALL_GRID, seed=3, pair_id="proto"
        )
        assert report.pair_id == "proto"
        assert report.train_sizes == (15, 15, 15, 15)
        assert all(len(record.accuracies) == 4 for record in report.records)

    def test_draws_differ_across_runs(self):
        # two runs with per-class sampling almost surely pick different rows,
        # so at least one configuration should score differently
        pair = small_pair(seed=13, n_per_class=12, classes=3)
        report = run_protocol_ixmas_style(
            pair, per_class=4, runs=2, grid=SMALL_GRID, seed=0
        )
        spread = [len(set(record.accuracies)) for record in report.records]
        assert max(spread) > 1


class TestBestSelection:
    def make_report(self, *means):
        records = tuple(
            ConfigResult(alpha=1.0, beta=1.0, k=i + 1, accuracies=(m,))
            for i, m in enumerate(means)
        )
        return ExperimentReport(
            pair_id="x", records=records, skipped=(), train_sizes=(1,),
            run_seconds=(0.0,), wall_time_seconds=0.0,
        )

    def test_argmax_of_mean(self):
        assert self.make_report(0.2, 0.9, 0.5).best.k == 2

    def test_ties_go_to_earliest(self):
        assert self.make_report(0.4, 0.9, 0.9).best.k == 2


class TestRelativeGaps:
    def test_latent_gap_hand_oracle(self):
        # means (1,0) and (0,1): squared gap 2 over unit mean energy
        value = relative_latent_gap(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
        assert value == pytest.approx(2.0)

    def test_latent_gap_scale_invariant(self):
        rng = np.random.default_rng(14)
        ps, pt = rng.standard_normal((6, 3)), rng.standard_normal((8, 3)) + 1.0
        base = relative_latent_gap(ps, pt)
        assert relative_latent_gap(5.0 * ps, 5.0 * pt) == pytest.approx(base, rel=1e-12)

    def test_kernel_gap_hand_oracle(self):
        joint = JointKernel(K=np.eye(2), n1=1, n2=1, spec=KernelSpec())
        assert relative_kernel_gap(joint) == pytest.approx(2.0)

    def test_kernel_gap_zero_for_identical_domains(self):
        x = np.random.default_rng(15).standard_normal((7, 3))
        joint = build_joint_kernel(x, x)
        assert relative_kernel_gap(joint) <= 1e-12


class TestReportEmission:
    def run_small(self):
        return grid_search(small_pair(seed=16), SMALL_GRID, runs=2, per_class=4, seed=1)

    def test_csv_round_trip_exact(self, tmp_path):
        report = self.run_small()
        path = tmp_path / "report.csv"
        emit_report(report, path)
        rows = read_report_csv(path)
        assert len(rows) == len(report.records) * 2
        cursor = 0
        for record in report.records:
            for run, value in enumerate(record.accuracies):
                row = rows[cursor]
                assert (row.pair, row.alpha, row.beta, row.k, row.run) == (
                    "pair", record.alpha, record.beta, record.k, run,
                )
                assert row.accuracy == value
                cursor += 1

    def test_csv_header(self, tmp_path):
        path = tmp_path / "report.csv"
        emit_report(self.run_small(), path)
        with open(path) as handle:
            assert handle.readline().rstrip("\n") == ",".join(CSV_HEADER)

    def test_reader_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="unexpected report header"):
            read_report_csv(path)

    def test_markdown_contents(self, tmp_path):
        report = self.run_small()
        path = tmp_path / "report.md"
        emit_report(report, path, format="markdown")
        text = path.read_text()
        best = report.best
        assert f"# Benchmark: {report.pair_id}" in text
        assert f"mean accuracy {best.mean_accuracy:.4f}" in text
        assert "| alpha | beta | k | mean accuracy |" in text
        assert f"**{best.mean_accuracy:.4f}**" in text

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="format must be"):
            emit_report(self.run_small(), tmp_path / "x", format="json")
