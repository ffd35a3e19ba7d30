"""Tests for the JSON and CSV readers and writers."""

import json
from pathlib import Path

import numpy as np
import pytest

from tests.conftest import PointMassFactory
from tests.factories import gaussian, unit_report
from trimbary.aggregation import aggregate
from trimbary.datagen import benchmark_mixture
from trimbary.exceptions import InputError
from trimbary.models import (
    SampleMatrix,
    SolverConfig,
    UnitReport,
    WeightedDistributionSet,
)
from trimbary.serialization import (
    SWEEP_HEADER,
    aggregation_document,
    dumps,
    load_json,
    mixture_document,
    parse_aggregation,
    parse_problem,
    parse_reports,
    parse_solution,
    problem_document,
    read_mixture,
    read_sample_csv,
    read_sweep_csv,
    read_trim_counts_csv,
    reports_document,
    sample_csv,
    solution_document,
    sweep_csv,
    trim_counts_csv,
    write_json,
    write_sample_csv,
)
from trimbary.solver import solve_trimmed_kbarycenter, trimmed_variation
from trimbary.sweep import trim_sweep


class TestJsonFiles:
    """Tests for load_json and dumps."""

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(InputError, match="cannot read"):
            load_json(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path: Path) -> None:
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(InputError, match="invalid JSON"):
            load_json(path)

    def test_rejects_nan(self) -> None:
        with pytest.raises(ValueError):
            dumps({"value": float("nan")})

    def test_top_level_must_be_object(self) -> None:
        with pytest.raises(InputError, match="JSON object"):
            parse_problem([1, 2, 3])


class TestDocuments:
    """Tests for the problem, report and solution documents."""

    def test_problem_document_reads_back(self) -> None:
        items = (
            gaussian([0.0, 1.0], [[2.0, 0.3], [0.3, 1.0]]),
            gaussian([0.1, 0.2], [[1.0, 0.0], [0.0, 1.0]]),
        )
        dset = WeightedDistributionSet(items, np.array([0.3, 0.7]))
        document = json.loads(dumps(problem_document(dset)))
        assert document["dim"] == 2
        again = parse_problem(document)
        assert again.items == dset.items
        np.testing.assert_array_equal(again.weights, dset.weights)

    def test_reports_document_reads_back(self) -> None:
        reports = [unit_report("a", [0.0, 4.0], [0.25, 0.75], sample_size=40)]
        again = parse_reports(json.loads(dumps(reports_document(reports))))
        assert again[0].unit_id == "a"
        assert again[0].features == reports[0].features
        assert again[0].sample_size == 40

    def test_solution_document(self, three_points: WeightedDistributionSet) -> None:
        solution = solve_trimmed_kbarycenter(three_points, SolverConfig(1, 1 / 3))
        variation = trimmed_variation(three_points, solution)
        text = dumps(solution_document(three_points, solution, variation))
        document = json.loads(text)
        assert document["objective"] == pytest.approx(0.25)
        assert document["trimmed_items"] == [2]
        assert document["items"][2]["cluster"] is None
        assert len(document["starts"]) == 10
        again = parse_solution(document)
        assert again.objective == solution.objective
        np.testing.assert_array_equal(again.kept_mass, solution.kept_mass)
        assert again.assignments == solution.assignments
        assert again.starts == solution.starts

    def test_malformed_solution(self) -> None:
        with pytest.raises(InputError, match="malformed"):
            parse_solution({"space": "quantile1d", "centers": []})

    def test_aggregation_document_reads_back(
        self, corrupted_reports: list[UnitReport]
    ) -> None:
        result = aggregate(corrupted_reports, 3, 0.1)
        again = parse_aggregation(json.loads(dumps(aggregation_document(result))))
        record = result.record
        assert again.consensus == record.consensus
        np.testing.assert_array_equal(again.agg_weights, record.agg_weights)
        assert again.trim_report == record.trim_report
        assert again.objective == record.objective
        assert again.alpha == 0.1

    def test_malformed_aggregation(self) -> None:
        with pytest.raises(InputError, match="malformed"):
            parse_aggregation({"consensus": [], "weights": []})

    def test_mixture_document_reads_back(self, tmp_path: Path) -> None:
        spec = benchmark_mixture(extra_noise_dims=2)
        path = tmp_path / "mixture.json"
        write_json(path, mixture_document(spec))
        again = read_mixture(path)
        assert again.components == spec.components
        assert again.noise == spec.noise
        assert again.extra_noise_dims == 2


class TestSampleCsv:
    """Tests for the sample CSV format."""

    def test_write_and_read(self, tmp_path: Path) -> None:
        sample = SampleMatrix(np.array([[0.1, 2.0], [1 / 3, -4.5]]), np.array([0, -1]))
        path = tmp_path / "sample.csv"
        write_sample_csv(path, sample)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "x1,x2,label"
        again = read_sample_csv(path)
        np.testing.assert_array_equal(again.data, sample.data)
        np.testing.assert_array_equal(again.labels, sample.labels)

    def test_without_labels(self, tmp_path: Path) -> None:
        path = tmp_path / "plain.csv"
        path.write_text("x1\n1.5\n2.5\n", encoding="utf-8")
        sample = read_sample_csv(path)
        assert sample.dim == 1
        assert sample.labels.tolist() == [-1, -1]

    def test_ragged_row(self, tmp_path: Path) -> None:
        path = tmp_path / "ragged.csv"
        path.write_text("x1,x2,label\n1.0,2.0,0\n3.0,1\n", encoding="utf-8")
        with pytest.raises(InputError, match="line 3"):
            read_sample_csv(path)

    def test_stable_text(self) -> None:
        sample = SampleMatrix(np.array([[0.1], [0.2]]))
        assert sample_csv(sample) == "x1,label\n0.1,-1\n0.2,-1\n"


class TestSweepCsv:
    """Tests for the sweep CSV files."""

    def test_header_and_rows(self, point_masses: PointMassFactory) -> None:
        dset = point_masses([0.0, 0.1, 10.0, 10.1, 100.0])
        result = trim_sweep(dset, [2], [0.0, 0.2])
        lines = sweep_csv(result).splitlines()
        assert lines[0] == ",".join(SWEEP_HEADER)
        assert lines[1].endswith(",0,,")
        assert lines[2].split(",")[5] == "4"
        counts = trim_counts_csv(result).splitlines()
        assert counts[0] == "item,trim_count"
        assert counts[5] == "4,1"

    def test_files_read_back(
        self, tmp_path: Path, point_masses: PointMassFactory
    ) -> None:
        dset = point_masses([0.0, 0.1, 10.0, 10.1, 100.0])
        result = trim_sweep(dset, [1, 2], [0.0, 0.2, 0.4])
        rows_path = tmp_path / "sweep.csv"
        rows_path.write_text(sweep_csv(result), encoding="utf-8")
        counts_path = tmp_path / "counts.csv"
        counts_path.write_text(trim_counts_csv(result), encoding="utf-8")
        assert read_sweep_csv(rows_path) == result.rows
        np.testing.assert_array_equal(
            read_trim_counts_csv(counts_path), result.trim_counts
        )

    def test_wrong_header(self, tmp_path: Path) -> None:
        path = tmp_path / "counts.csv"
        path.write_text("item,count\n0,1\n", encoding="utf-8")
        with pytest.raises(InputError, match="expected header"):
            read_trim_counts_csv(path)

    def test_count_disagrees_with_items(self, tmp_path: Path) -> None:
        path = tmp_path / "sweep.csv"
        row = "2,0.2,0.5,0.2,2,4,"
        text = ",".join(SWEEP_HEADER) + "\n" + row + "\n"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(InputError, match="does not match"):
            read_sweep_csv(path)
