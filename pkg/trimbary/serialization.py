"""Reading and writing the JSON and CSV files of the command-line tools.

Floats go through ``repr``, the shortest text that parses back to the same
double, so every writer's output re-reads to an equal value. Documents carry
no timestamps and are written with a fixed key order.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any, TypedDict

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import InputError
from .forms import (
    FORMAT_VERSION,
    MixtureFileForm,
    ProblemFileForm,
    ReportFileForm,
    parse_items,
    validated,
)
from .models import (
    AggregationResult,
    ConsensusRecord,
    Distribution,
    GaussianDistribution,
    IntArray,
    MixtureSpec,
    SampleMatrix,
    Space,
    StartSummary,
    TrimmedFeature,
    TrimSolution,
    UnitReport,
    VariationBreakdown,
    WeightedDistributionSet,
)
from .sweep import SweepResult, SweepRow


class GaussianItem(TypedDict, total=False):
    mean: list[float]
    cov: list[list[float]]
    family: str
    weight: float


class QuantileItem(TypedDict, total=False):
    values: list[float]
    weight: float


class ItemAssignment(TypedDict):
    kept_mass: float
    cluster: int | None
    distance_sq: float


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"
        ) from exc


def dumps(document: Any) -> str:
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def write_json(path: str | Path, document: Any) -> None:
    Path(path).write_text(dumps(document), encoding="utf-8")


def _object(payload: Any, source: str) -> dict[str, Any]:
    if not isinstance(payload, dict):
        raise InputError(f"{source}: top level must be a JSON object")
    return payload


def distribution_document(dist: Distribution) -> GaussianItem | QuantileItem:
    if isinstance(dist, GaussianDistribution):
        item: GaussianItem = {
            "mean": dist.mean.tolist(),
            "cov": dist.cov.entries.tolist(),
        }
        if dist.family_tag:
            item["family"] = dist.family_tag
        return item
    return {"values": dist.values.tolist()}


def _size_key(dist: Distribution) -> tuple[str, int]:
    if isinstance(dist, GaussianDistribution):
        return "dim", dist.dim
    return "grid_size", dist.grid_size


def problem_document(dset: WeightedDistributionSet) -> dict[str, Any]:
    key, size = _size_key(dset.items[0])
    items = []
    for dist, weight in zip(dset.items, dset.weights, strict=True):
        item = distribution_document(dist)
        item["weight"] = float(weight)
        items.append(item)
    return {
        "format_version": FORMAT_VERSION,
        "space": str(dset.space),
        key: size,
        "items": items,
    }


def parse_problem(payload: Any, source: str = "problem") -> WeightedDistributionSet:
    form = ProblemFileForm(_object(payload, source))
    dset: WeightedDistributionSet = validated(form, source)["distribution_set"]
    return dset


def read_problem(path: str | Path) -> WeightedDistributionSet:
    return parse_problem(load_json(path), str(path))


def reports_document(reports: Sequence[UnitReport]) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "units": [
            {
                "id": report.unit_id,
                "n": report.sample_size,
                "weights": report.weights.tolist(),
                "features": [distribution_document(f) for f in report.features],
            }
            for report in reports
        ],
    }


def parse_reports(payload: Any, source: str = "reports") -> list[UnitReport]:
    form = ReportFileForm(_object(payload, source))
    reports: list[UnitReport] = validated(form, source)["reports"]
    return reports


def read_reports(path: str | Path) -> list[UnitReport]:
    return parse_reports(load_json(path), str(path))


def mixture_document(spec: MixtureSpec) -> dict[str, Any]:
    def component(dist: GaussianDistribution, proportion: float) -> dict[str, Any]:
        return {**distribution_document(dist), "proportion": proportion}

    document: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "components": [component(d, p) for d, p in spec.components],
    }
    if spec.noise is not None:
        document["noise"] = component(*spec.noise)
    document["extra_noise_dims"] = spec.extra_noise_dims
    return document


def read_mixture(path: str | Path) -> MixtureSpec:
    form = MixtureFileForm(_object(load_json(path), str(path)))
    spec: MixtureSpec = validated(form, str(path))["mixture"]
    return spec


def _start_document(summary: StartSummary) -> dict[str, Any]:
    return {
        "start_index": summary.start_index,
        "explicit": summary.explicit,
        "iterations": summary.iterations,
        "objective": summary.objective,
        "converged": summary.converged,
    }


def solution_document(
    dset: WeightedDistributionSet,
    solution: TrimSolution,
    variation: VariationBreakdown,
) -> dict[str, Any]:
    """A solved problem: centers, per-item trimming and per-start diagnostics."""
    items: list[ItemAssignment] = [
        {"kept_mass": float(kept), "cluster": cluster, "distance_sq": float(dist)}
        for kept, cluster, dist in zip(
            solution.kept_mass,
            solution.assignments,
            solution.distances_sq,
            strict=True,
        )
    ]
    return {
        "format_version": FORMAT_VERSION,
        "space": str(dset.space),
        "k": solution.k,
        "alpha": solution.alpha,
        "objective": solution.objective,
        "trim_radius": solution.trim_radius,
        "iterations": solution.iterations,
        "start_index": solution.start_index,
        "converged": solution.converged,
        "centers": [distribution_document(c) for c in solution.centers],
        "variation": {
            "total": variation.total,
            "per_cluster": list(variation.per_cluster),
        },
        "trimmed_items": solution.trimmed_indices(dset.weights),
        "items": items,
        "trace": list(solution.trace),
        "starts": [_start_document(s) for s in solution.starts],
    }


def parse_solution(payload: Any, source: str = "solution") -> TrimSolution:
    """Rebuild a ``TrimSolution`` from ``solution_document`` output."""
    document = _object(payload, source)
    try:
        centers = tuple(
            item["distribution"]
            for item in parse_items(document["centers"], document["space"], "centers")
        )
        items = document["items"]
        return TrimSolution(
            centers=centers,
            kept_mass=np.array([item["kept_mass"] for item in items], dtype=float),
            assignments=tuple(item["cluster"] for item in items),
            distances_sq=np.array([item["distance_sq"] for item in items], dtype=float),
            objective=float(document["objective"]),
            trim_radius=float(document["trim_radius"]),
            alpha=float(document["alpha"]),
            iterations=int(document["iterations"]),
            start_index=int(document["start_index"]),
            trace=tuple(float(v) for v in document["trace"]),
            converged=bool(document["converged"]),
            starts=tuple(
                StartSummary(
                    int(s["start_index"]),
                    int(s["iterations"]),
                    float(s["objective"]),
                    bool(s["converged"]),
                    bool(s["explicit"]),
                )
                for s in document["starts"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{source}: malformed solution document ({exc})") from exc
    except ValidationError as exc:
        raise InputError(f"{source}: {'; '.join(exc.messages)}") from exc


def aggregation_document(result: AggregationResult) -> dict[str, Any]:
    record = result.record
    return {
        "format_version": FORMAT_VERSION,
        "k": len(record.consensus),
        "alpha": record.alpha,
        "objective": record.objective,
        "consensus": [distribution_document(c) for c in record.consensus],
        "weights": record.agg_weights.tolist(),
        "trimmed": [
            {
                "unit": t.unit_id,
                "feature": t.feature_index,
                "weight": t.weight,
                "kept_mass": t.kept_mass,
            }
            for t in record.trim_report
        ],
        "iterations": result.solution.iterations,
        "start_index": result.solution.start_index,
        "starts": [_start_document(s) for s in result.solution.starts],
    }


def parse_aggregation(payload: Any, source: str = "aggregation") -> ConsensusRecord:
    """Rebuild the consensus, weights and trim report of an aggregation file."""
    document = _object(payload, source)
    try:
        consensus = tuple(
            item["distribution"]
            for item in parse_items(document["consensus"], Space.GAUSSIAN, "consensus")
        )
        return ConsensusRecord(
            consensus=consensus,
            agg_weights=np.array(document["weights"], dtype=float),
            trim_report=tuple(
                TrimmedFeature(
                    str(t["unit"]),
                    int(t["feature"]),
                    float(t["weight"]),
                    float(t["kept_mass"]),
                )
                for t in document["trimmed"]
            ),
            objective=float(document["objective"]),
            alpha=float(document["alpha"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{source}: malformed aggregation document ({exc})") from exc
    except ValidationError as exc:
        raise InputError(f"{source}: {'; '.join(exc.messages)}") from exc


def read_aggregation(path: str | Path) -> ConsensusRecord:
    return parse_aggregation(load_json(path), str(path))


def _number(value: float) -> str:
    return repr(float(value))


def _csv_rows(path: str | Path) -> list[list[str]]:
    try:
        with Path(path).open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from exc
    if not rows:
        raise InputError(f"{path}: empty CSV file")
    return rows


def _table(path: str | Path, header: Sequence[str]) -> list[list[str]]:
    """Data rows of a CSV file whose header must be exactly ``header``."""
    rows = _csv_rows(path)
    if [name.strip() for name in rows[0]] != list(header):
        raise InputError(f"{path}: expected header {','.join(header)}")
    for index, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise InputError(
                f"{path}: line {index + 2} has {len(row)} fields, "
                f"expected {len(header)}"
            )
    return rows[1:]


def sample_csv(sample: SampleMatrix) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*(f"x{j + 1}" for j in range(sample.dim)), "label"])
    for row, label in zip(sample.data, sample.labels, strict=True):
        writer.writerow([*(_number(v) for v in row), int(label)])
    return buffer.getvalue()


def write_sample_csv(path: str | Path, sample: SampleMatrix) -> None:
    Path(path).write_text(sample_csv(sample), encoding="utf-8")


def read_sample_csv(path: str | Path) -> SampleMatrix:
    """Rows of ``x1,...,xd[,label]``; a missing label column reads as noise."""
    rows = _csv_rows(path)
    header = [name.strip() for name in rows[0]]
    has_label = bool(header) and header[-1] == "label"
    width = len(header) - int(has_label)
    if width < 1:
        raise InputError(f"{path}: no coordinate columns")
    data = np.empty((len(rows) - 1, width))
    labels = np.full(len(rows) - 1, -1, dtype=np.int64)
    for index, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise InputError(
                f"{path}: line {index + 2} has {len(row)} fields, "
                f"expected {len(header)}"
            )
        try:
            data[index] = [float(v) for v in row[:width]]
            if has_label:
                labels[index] = int(row[-1])
        except ValueError as exc:
            raise InputError(f"{path}: line {index + 2}: {exc}") from exc
    return SampleMatrix(data, labels)


SWEEP_HEADER = (
    "k",
    "alpha",
    "objective",
    "trimmed_mass",
    "n_trimmed",
    "trimmed_items",
    "center_displacement",
)


def sweep_csv(result: SweepResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in result.rows:
        writer.writerow(
            [
                row.k,
                _number(row.alpha),
                _number(row.objective),
                _number(row.trimmed_mass),
                row.n_trimmed,
                ";".join(str(i) for i in row.trimmed_items),
                ""
                if row.center_displacement is None
                else _number(row.center_displacement),
            ]
        )
    return buffer.getvalue()


def trim_counts_csv(result: SweepResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["item", "trim_count"])
    for item, count in enumerate(result.trim_counts):
        writer.writerow([item, int(count)])
    return buffer.getvalue()


def read_sweep_csv(path: str | Path) -> tuple[SweepRow, ...]:
    rows = []
    for index, row in enumerate(_table(path, SWEEP_HEADER)):
        k, alpha, objective, mass, count, items, displacement = row
        try:
            trimmed = tuple(int(i) for i in items.split(";") if i)
            listed = int(count)
            parsed = SweepRow(
                k=int(k),
                alpha=float(alpha),
                objective=float(objective),
                trimmed_mass=float(mass),
                trimmed_items=trimmed,
                center_displacement=float(displacement) if displacement else None,
            )
        except ValueError as exc:
            raise InputError(f"{path}: line {index + 2}: {exc}") from exc
        if parsed.n_trimmed != listed:
            raise InputError(
                f"{path}: line {index + 2}: n_trimmed {count} does not match "
                f"{parsed.n_trimmed} listed items"
            )
        rows.append(parsed)
    return tuple(rows)


def read_trim_counts_csv(path: str | Path) -> IntArray:
    rows = _table(path, ("item", "trim_count"))
    try:
        items = [int(item) for item, _ in rows]
        counts = np.array([int(count) for _, count in rows], dtype=np.int64)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if items != list(range(len(items))):
        raise InputError(f"{path}: items must be listed as 0, 1, 2, ...")
    return counts
