"""Tests for the management commands and the console script."""

import json
from io import StringIO
from pathlib import Path

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from tests.conftest import PointMassFactory
from tests.factories import gaussian, point_mass, univariate
from trimbary.cli import main
from trimbary.exceptions import BarycenterConvergenceError
from trimbary.models import (
    GaussianDistribution,
    UnitReport,
    WeightedDistributionSet,
)
from trimbary.serialization import problem_document, reports_document, write_json


def write_problem(path: Path, dset: WeightedDistributionSet) -> str:
    write_json(path, problem_document(dset))
    return str(path)


def run(name: str, *args: str, **options: object) -> str:
    out = StringIO()
    call_command(name, *args, stdout=out, **options)
    return out.getvalue()


@pytest.fixture
def gaussian_files(
    tmp_path: Path, gaussian_pair: tuple[GaussianDistribution, GaussianDistribution]
) -> tuple[str, str]:
    p, q = gaussian_pair
    return (
        write_problem(tmp_path / "p.json", WeightedDistributionSet.uniform([p])),
        write_problem(tmp_path / "q.json", WeightedDistributionSet.uniform([q])),
    )


@pytest.fixture
def three_point_file(tmp_path: Path, three_points: WeightedDistributionSet) -> str:
    return write_problem(tmp_path / "three.json", three_points)


class TestDistCommand:
    """Tests for the dist command."""

    def test_gaussian_pair(self, gaussian_files: tuple[str, str]) -> None:
        assert run("dist", *gaussian_files) == "5.19615242271\n"

    def test_identical_files(self, gaussian_files: tuple[str, str]) -> None:
        first, _ = gaussian_files
        assert run("dist", first, first) == "0\n"

    def test_mixed_spaces(
        self, tmp_path: Path, gaussian_files: tuple[str, str]
    ) -> None:
        quantile = write_problem(
            tmp_path / "point.json", WeightedDistributionSet.uniform([point_mass(0.0)])
        )
        with pytest.raises(CommandError) as excinfo:
            run("dist", gaussian_files[0], quantile)
        assert excinfo.value.returncode == 2

    def test_needs_single_item(
        self, three_point_file: str, gaussian_files: tuple[str, str]
    ) -> None:
        with pytest.raises(CommandError, match="one distribution") as excinfo:
            run("dist", three_point_file, gaussian_files[0])
        assert excinfo.value.returncode == 2

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(CommandError) as excinfo:
            run("dist", str(tmp_path / "a.json"), str(tmp_path / "b.json"))
        assert excinfo.value.returncode == 2


class TestBarycenterCommand:
    """Tests for the barycenter command."""

    def test_quantile_barycenter(
        self, tmp_path: Path, point_masses: PointMassFactory
    ) -> None:
        path = write_problem(tmp_path / "p.json", point_masses([0.0, 1.0], [1, 3]))
        document = json.loads(run("barycenter", path))
        assert document["barycenter"]["values"] == [0.75]
        assert document["frechet_value"] == pytest.approx(0.1875)

    def test_gaussian_barycenter(self, tmp_path: Path) -> None:
        dset = WeightedDistributionSet.uniform(
            [univariate(0.0, 1.0), univariate(0.0, 9.0)]
        )
        path = write_problem(tmp_path / "g.json", dset)
        document = json.loads(run("barycenter", path))
        assert document["barycenter"]["cov"][0][0] == pytest.approx(4.0)
        assert document["generalized_variance"] == pytest.approx(1.0)
        assert document["residual"] <= 1e-7


class TestKbaryCommand:
    """Tests for the kbary command."""

    def test_trims_outlier(self, three_point_file: str) -> None:
        document = json.loads(run("kbary", three_point_file, k=1, alpha=1 / 3))
        assert document["objective"] == pytest.approx(0.25)
        assert document["trimmed_items"] == [2]
        assert document["centers"][0]["values"] == [pytest.approx(0.5)]

    def test_k_equals_support(self, three_point_file: str) -> None:
        document = json.loads(run("kbary", three_point_file, k=3, alpha=0.0))
        assert document["objective"] == 0.0

    def test_byte_identical_reruns(self, tmp_path: Path) -> None:
        cov = [[1.0, 0.2], [0.2, 0.5]]
        items = [gaussian([float(i % 4), float(i // 4)], cov) for i in range(12)]
        dset = WeightedDistributionSet.uniform(items)
        path = write_problem(tmp_path / "grid.json", dset)
        first, second = tmp_path / "first.json", tmp_path / "second.json"
        run("kbary", path, k=3, alpha=0.1, seed=17, out=str(first))
        run("kbary", path, k=3, alpha=0.1, seed=17, out=str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_k_exceeds_support(self, three_point_file: str) -> None:
        with pytest.raises(CommandError) as excinfo:
            run("kbary", three_point_file, k=4)
        assert excinfo.value.returncode == 2

    def test_numerical_failure(
        self,
        monkeypatch: pytest.MonkeyPatch,
        tmp_path: Path,
        gaussian_pair: tuple[GaussianDistribution, GaussianDistribution],
    ) -> None:
        def stalled(_: WeightedDistributionSet) -> GaussianDistribution:
            raise BarycenterConvergenceError("stalled", residual=1.0, iterations=500)

        monkeypatch.setattr("trimbary.solver.barycenter", stalled)
        path = write_problem(
            tmp_path / "pair.json", WeightedDistributionSet.uniform(gaussian_pair)
        )
        with pytest.raises(CommandError) as excinfo:
            run("kbary", path, k=1)
        assert excinfo.value.returncode == 3


class TestAggregateCommand:
    """Tests for the aggregate command."""

    def test_identical_units(
        self, tmp_path: Path, clean_reports: list[UnitReport]
    ) -> None:
        path = tmp_path / "reports.json"
        write_json(path, reports_document(clean_reports))
        document = json.loads(run("aggregate", str(path), alpha=0.0))
        assert document["objective"] == pytest.approx(0.0, abs=1e-9)
        assert document["trimmed"] == []
        assert document["weights"] == [pytest.approx(1 / 3)] * 3

    def test_corrupted_unit(
        self, tmp_path: Path, corrupted_reports: list[UnitReport]
    ) -> None:
        path = tmp_path / "reports.json"
        write_json(path, reports_document(corrupted_reports))
        document = json.loads(run("aggregate", str(path), alpha=0.1))
        dropped = {
            t["unit"] for t in document["trimmed"] if t["kept_mass"] <= t["weight"] / 2
        }
        assert dropped == {"unit-9"}

    def test_missing_field(
        self, tmp_path: Path, clean_reports: list[UnitReport]
    ) -> None:
        document = reports_document(clean_reports)
        del document["units"][0]["weights"]
        path = tmp_path / "reports.json"
        write_json(path, document)
        with pytest.raises(CommandError, match="weights") as excinfo:
            run("aggregate", str(path), alpha=0.1)
        assert excinfo.value.returncode == 2

    def test_zero_k_rejected(
        self, tmp_path: Path, clean_reports: list[UnitReport]
    ) -> None:
        path = tmp_path / "reports.json"
        write_json(path, reports_document(clean_reports))
        with pytest.raises(CommandError, match="k must be positive") as excinfo:
            run("aggregate", str(path), alpha=0.1, k=0)
        assert excinfo.value.returncode == 2


class TestPipelineCommands:
    """Tests for simulate, fit_units and sweep."""

    def test_simulate(self) -> None:
        text = run("simulate", n=100, seed=1)
        lines = text.splitlines()
        assert lines[0] == "x1,x2,label"
        assert len(lines) == 101
        assert run("simulate", n=100, seed=1) == text

    def test_simulate_padding(self) -> None:
        header = run("simulate", n=5, extra_noise_dims=2).splitlines()[0]
        assert header == "x1,x2,x3,x4,label"

    def test_fit_units(self, tmp_path: Path) -> None:
        sample = tmp_path / "sample.csv"
        run("simulate", n=400, seed=2, out=str(sample))
        document = json.loads(run("fit_units", str(sample), m=2, k=2, starts=2))
        assert [u["id"] for u in document["units"]] == ["unit-0", "unit-1"]
        assert all(u["n"] == 200 for u in document["units"])

    def test_sweep(self, tmp_path: Path, point_masses: PointMassFactory) -> None:
        path = write_problem(
            tmp_path / "p.json", point_masses([0.0, 0.1, 10.0, 10.1, 100.0])
        )
        counts = tmp_path / "counts.csv"
        text = run(
            "sweep", path, k_range="2", alpha_range="0,1/5", counts_out=str(counts)
        )
        assert len(text.splitlines()) == 3
        assert counts.read_text(encoding="utf-8").splitlines()[5] == "4,1"

    def test_sweep_empty_range(
        self, tmp_path: Path, point_masses: PointMassFactory
    ) -> None:
        path = write_problem(tmp_path / "p.json", point_masses([0.0, 1.0]))
        with pytest.raises(CommandError) as excinfo:
            run("sweep", path, k_range="2:1", alpha_range="0")
        assert excinfo.value.returncode == 2


class TestConsoleScript:
    """Tests for the ot-trimbary entry point."""

    def test_hyphenated_command(
        self, capsys: pytest.CaptureFixture[str], gaussian_files: tuple[str, str]
    ) -> None:
        main(["ot-trimbary", "dist", *gaussian_files])
        assert capsys.readouterr().out == "5.19615242271\n"

    def test_exit_code(
        self, tmp_path: Path, gaussian_files: tuple[str, str]
    ) -> None:
        quantile = write_problem(
            tmp_path / "point.json", WeightedDistributionSet.uniform([point_mass(0.0)])
        )
        with pytest.raises(SystemExit) as excinfo:
            main(["ot-trimbary", "dist", gaussian_files[0], quantile])
        assert excinfo.value.code == 2

    def test_fit_units_alias(self, tmp_path: Path) -> None:
        sample = tmp_path / "sample.csv"
        run("simulate", n=300, seed=4, out=str(sample))
        out = tmp_path / "reports.json"
        args = ["fit-units", str(sample), "--m", "3", "--k", "2", "--out", str(out)]
        main(["ot-trimbary", *args])
        assert len(json.loads(out.read_text(encoding="utf-8"))["units"]) == 3
