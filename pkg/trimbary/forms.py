"""Forms validating the JSON documents read by the management commands.

Each form is bound to an already-decoded JSON object. ``clean()`` builds the
domain value, so a valid form always carries something the library accepts.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np
from django import forms
from django.core.exceptions import ValidationError

from .exceptions import InputError, TrimbaryError
from .models import (
    Distribution,
    GaussianDistribution,
    MixtureSpec,
    QuantileFunction,
    Space,
    UnitReport,
    WeightedDistributionSet,
)

FORMAT_VERSION = 1


class VersionedForm(forms.Form):
    """Shared ``format_version`` field; a missing version reads as the current one."""

    format_version = forms.IntegerField(
        required=False, min_value=FORMAT_VERSION, max_value=FORMAT_VERSION
    )


def form_errors(form: forms.Form, source: str = "") -> str:
    """Flatten a form's errors into one line per field."""
    lines = []
    for name, errors in form.errors.as_data().items():
        label = "document" if name == "__all__" else name
        for error in errors:
            for message in error.messages:
                lines.append(f"{label}: {message}")
    prefix = f"{source}: " if source else ""
    return prefix + "; ".join(lines)


def validated(form: forms.Form, source: str = "") -> dict[str, Any]:
    """cleaned_data of a valid form; raise ``InputError`` otherwise."""
    if not form.is_valid():
        raise InputError(form_errors(form, source))
    return form.cleaned_data


def _as_object(payload: Any, what: str) -> dict[str, Any]:
    if not isinstance(payload, dict):
        raise ValidationError(f"{what} must be a JSON object")
    return payload


def _as_list(payload: Any, what: str) -> list[Any]:
    if not isinstance(payload, list):
        raise ValidationError(f"{what} must be a JSON array")
    return payload


def _nested(form: forms.Form, where: str) -> dict[str, Any]:
    if not form.is_valid():
        raise ValidationError(form_errors(form, where))
    return form.cleaned_data


def _build(factory: Any, *args: Any) -> Any:
    try:
        return factory(*args)
    except (TrimbaryError, ValueError, TypeError) as exc:
        raise ValidationError(str(exc)) from exc


class GaussianItemForm(forms.Form):
    """``{"mean": [...], "cov": [[...]], "weight": w}``"""

    mean = forms.JSONField()
    cov = forms.JSONField()
    weight = forms.FloatField(required=False, min_value=0.0)
    family = forms.CharField(required=False)

    def clean(self) -> dict[str, Any]:
        cleaned = super().clean() or {}
        if self.errors:
            return cleaned
        cleaned["distribution"] = _build(
            GaussianDistribution.from_arrays,
            cleaned["mean"],
            cleaned["cov"],
            cleaned.get("family") or None,
        )
        return cleaned


class QuantileItemForm(forms.Form):
    """``{"values": [...], "weight": w}``"""

    values = forms.JSONField()
    weight = forms.FloatField(required=False, min_value=0.0)

    def clean(self) -> dict[str, Any]:
        cleaned = super().clean() or {}
        if self.errors:
            return cleaned
        cleaned["distribution"] = _build(QuantileFunction, cleaned["values"])
        return cleaned


ITEM_FORMS: dict[str, type[forms.Form]] = {
    Space.GAUSSIAN: GaussianItemForm,
    Space.QUANTILE1D: QuantileItemForm,
}


def parse_items(payload: Any, space: str, what: str = "items") -> list[dict[str, Any]]:
    """Validate a list of distribution objects of one space."""
    form_class = ITEM_FORMS[space]
    cleaned = []
    for index, item in enumerate(_as_list(payload, what)):
        where = f"{what}[{index}]"
        cleaned.append(_nested(form_class(_as_object(item, where)), where))
    return cleaned


class ProblemFileForm(VersionedForm):
    """A weighted set of distributions of one space.

    Weights default to uniform when no item gives one; giving weights for
    some items but not others is an error.
    """

    space = forms.ChoiceField(choices=Space.choices)
    dim = forms.IntegerField(required=False, min_value=1)
    grid_size = forms.IntegerField(required=False, min_value=1)
    items = forms.JSONField()

    def clean(self) -> dict[str, Any]:
        cleaned = super().clean() or {}
        if self.errors:
            return cleaned
        space = cleaned["space"]
        items = parse_items(cleaned["items"], space)
        if not items:
            raise ValidationError("a problem needs at least one item")
        weights = [item.get("weight") for item in items]
        given = [w is not None for w in weights]
        if any(given) and not all(given):
            raise ValidationError("either every item has a weight or none does")
        values = weights if all(given) else [1.0] * len(items)
        distributions: list[Distribution] = [item["distribution"] for item in items]
        declared = cleaned.get("dim" if space == Space.GAUSSIAN else "grid_size")
        actual = (
            distributions[0].dim
            if isinstance(distributions[0], GaussianDistribution)
            else distributions[0].grid_size
        )
        if declared is not None and declared != actual:
            raise ValidationError(f"declared size {declared} but items have {actual}")
        cleaned["distribution_set"] = _build(
            WeightedDistributionSet, tuple(distributions), np.array(values, dtype=float)
        )
        return cleaned


class UnitForm(forms.Form):
    """One unit report: id, sample size, weights and Gaussian features."""

    id = forms.CharField()
    n = forms.IntegerField(min_value=1)
    weights = forms.JSONField()
    features = forms.JSONField()

    def clean(self) -> dict[str, Any]:
        cleaned = super().clean() or {}
        if self.errors:
            return cleaned
        features = [
            item["distribution"]
            for item in parse_items(cleaned["features"], Space.GAUSSIAN, "features")
        ]
        weights = _as_list(cleaned["weights"], "weights")
        cleaned["report"] = _build(
            UnitReport, cleaned["id"], tuple(features), weights, cleaned["n"]
        )
        return cleaned


class ReportFileForm(VersionedForm):
    """``{"units": [unit, ...]}``"""

    units = forms.JSONField()

    def clean(self) -> dict[str, Any]:
        cleaned = super().clean() or {}
        if self.errors:
            return cleaned
        reports = []
        for index, unit in enumerate(_as_list(cleaned["units"], "units")):
            where = f"units[{index}]"
            reports.append(_nested(UnitForm(_as_object(unit, where)), where)["report"])
        if not reports:
            raise ValidationError("at least one unit is required")
        cleaned["reports"] = reports
        return cleaned


class MixtureComponentForm(GaussianItemForm):
    proportion = forms.FloatField(min_value=0.0)


class MixtureFileForm(VersionedForm):
    """Gaussian components with proportions, optional noise and padding dims."""

    components = forms.JSONField()
    noise = forms.JSONField(required=False)
    extra_noise_dims = forms.IntegerField(required=False, min_value=0)

    def clean(self) -> dict[str, Any]:
        cleaned = super().clean() or {}
        if self.errors:
            return cleaned
        components = []
        for index, part in enumerate(_as_list(cleaned["components"], "components")):
            where = f"components[{index}]"
            data = _nested(MixtureComponentForm(_as_object(part, where)), where)
            components.append((data["distribution"], data["proportion"]))
        noise = None
        if cleaned.get("noise"):
            data = _nested(
                MixtureComponentForm(_as_object(cleaned["noise"], "noise")), "noise"
            )
            noise = (data["distribution"], data["proportion"])
        cleaned["mixture"] = _build(
            MixtureSpec,
            tuple(components),
            noise,
            cleaned.get("extra_noise_dims") or 0,
        )
        return cleaned


def parse_range(text: str) -> list[Fraction]:
    """Values of a comma list (``0,1/36,2/36``) or ``start:stop[:step]``.

    The colon form includes ``stop`` when the steps land on it; the step
    defaults to 1. Fractions and decimals are read exactly.
    """
    spec = text.strip()
    parts = spec.split(":") if ":" in spec else spec.split(",")
    if ":" in spec and len(parts) not in (2, 3):
        raise InputError(f"range {text!r} must be start:stop[:step]")
    try:
        numbers = [Fraction(part) for part in parts if part.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot read range {text!r}: {exc}") from exc
    if ":" not in spec:
        values = numbers
    else:
        if len(numbers) != len(parts):
            raise InputError(f"range {text!r} must be start:stop[:step]")
        start, stop = numbers[0], numbers[1]
        step = numbers[2] if len(numbers) == 3 else Fraction(1)
        if step <= 0:
            raise InputError(f"range {text!r} needs a positive step")
        values = []
        current = start
        while current <= stop:
            values.append(current)
            current += step
    if not values:
        raise InputError(f"range {text!r} is empty")
    return values


def parse_int_range(text: str) -> list[int]:
    values = parse_range(text)
    if any(value.denominator != 1 for value in values):
        raise InputError(f"range {text!r} must contain integers only")
    return [int(value) for value in values]


def parse_float_range(text: str) -> list[float]:
    return [float(value) for value in parse_range(text)]
