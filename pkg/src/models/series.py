"""
Annual Series Models

``AnnualSeries`` is the universal unit of analysis: one annualized statistic
per calendar year for a ``DatasetKey``. Construction only checks structure;
content checks live in ``validate_series`` so that suspect data can be
inspected before it is rejected.

Usage:
    from src.models.series import AnnualSeries, validate_series

    report = validate_series(series, outlier_k=10.0)
    if not report.ok:
        print(report.summary())
"""

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.errors import SeriesValidationError
from src.models.identifiers import DatasetKey, VariableId
from src.models.params import ObservationWindow


class AnnualSeries(BaseModel):
    """One value per calendar year, starting at ``base_year``."""

    model_config = ConfigDict(frozen=True)

    key: DatasetKey
    base_year: int = 2015
    values: Tuple[float, ...] = Field(min_length=1)

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, v):
        return tuple(float(x) for x in np.asarray(v, dtype=float).ravel())

    @property
    def span(self) -> int:
        return len(self.values)

    @property
    def last_year(self) -> int:
        return self.base_year + self.span - 1

    @property
    def window(self) -> ObservationWindow:
        return ObservationWindow(base_year=self.base_year, span=self.span)

    def years(self) -> np.ndarray:
        return np.arange(self.base_year, self.base_year + self.span)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def with_values(self, values, **changes) -> "AnnualSeries":
        """Copy with new values (and optionally a new key or base year)."""
        return AnnualSeries(
            key=changes.get("key", self.key),
            base_year=changes.get("base_year", self.base_year),
            values=values,
        )


class IssueKind(str, Enum):
    LENGTH = "length"
    NON_FINITE = "non_finite"
    NON_POSITIVE = "non_positive"
    OUTLIER = "outlier"


HARD_ISSUES = frozenset({IssueKind.LENGTH, IssueKind.NON_FINITE, IssueKind.NON_POSITIVE})


class SeriesIssue(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: IssueKind
    message: str
    year: Optional[int] = None
    value: Optional[float] = None


class SeriesValidationReport(BaseModel):
    """Issues found in one series; empty means clean."""

    model_config = ConfigDict(frozen=True)

    slug: str
    issues: Tuple[SeriesIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def has_hard_issues(self) -> bool:
        return any(issue.kind in HARD_ISSUES for issue in self.issues)

    def of_kind(self, kind: IssueKind) -> List[SeriesIssue]:
        return [issue for issue in self.issues if issue.kind == kind]

    def summary(self) -> str:
        if self.ok:
            return f"{self.slug}: ok"
        return f"{self.slug}: " + "; ".join(issue.message for issue in self.issues)


def validate_series(
    series: AnnualSeries,
    expected_span: Optional[int] = None,
    outlier_k: float = 10.0,
) -> SeriesValidationReport:
    """
    Report structural and content problems without touching the data.

    Args:
        series: Series to check
        expected_span: Required length P (defaults to the configured span)
        outlier_k: Flag values further than k * IQR from the median

    Returns:
        SeriesValidationReport
    """
    if expected_span is None:
        from src.core.config import settings
        expected_span = settings.span

    issues: List[SeriesIssue] = []
    x = series.to_array()
    years = series.years()

    if x.size != expected_span:
        issues.append(SeriesIssue(
            kind=IssueKind.LENGTH,
            message=f"expected {expected_span} values, found {x.size}",
        ))

    finite = np.isfinite(x)
    for year, value in zip(years[~finite], x[~finite]):
        issues.append(SeriesIssue(
            kind=IssueKind.NON_FINITE, message=f"non-finite value in {year}",
            year=int(year), value=float(value),
        ))

    if series.key.variable == VariableId.TAS and series.key.statistic.value != "negmin":
        bad = finite & (x <= 0)
        for year, value in zip(years[bad], x[bad]):
            issues.append(SeriesIssue(
                kind=IssueKind.NON_POSITIVE,
                message=f"non-positive temperature {value:g} K in {year}",
                year=int(year), value=float(value),
            ))

    if finite.sum() >= 2:
        clean = x[finite]
        median = float(np.median(clean))
        q25, q75 = np.percentile(clean, [25, 75])
        iqr = float(q75 - q25)
        if iqr > 0:
            outlying = finite & (np.abs(x - median) > outlier_k * iqr)
            for year, value in zip(years[outlying], x[outlying]):
                issues.append(SeriesIssue(
                    kind=IssueKind.OUTLIER,
                    message=f"outlier {value:g} in {year} (median {median:g}, IQR {iqr:g})",
                    year=int(year), value=float(value),
                ))

    return SeriesValidationReport(slug=series.key.slug(), issues=tuple(issues))


def require_valid(
    series: AnnualSeries,
    expected_span: Optional[int] = None,
    reject_outliers: bool = False,
    outlier_k: float = 10.0,
) -> SeriesValidationReport:
    """Raise SeriesValidationError on hard issues (and on outliers when asked)."""
    report = validate_series(series, expected_span=expected_span, outlier_k=outlier_k)
    if report.has_hard_issues or (reject_outliers and report.of_kind(IssueKind.OUTLIER)):
        raise SeriesValidationError(report.summary(), slug=report.slug)
    return report
