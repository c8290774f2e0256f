"""
Identifier Models

Vocabulary types naming every dataset that flows through the pipeline:
variables, scenarios, ensemble members, statistics, climate zones and the
composite ``DatasetKey``.

Usage:
    from src.models.identifiers import DatasetKey, EnsembleId

    ens = EnsembleId.parse("r1i1p1f2")
    key = DatasetKey(gcm="UK", variable="tas", scenario="SSP585",
                     ensemble=ens, statistic="max", zone="Global")
    key.slug()  # 'tas__max__Global__UK__SSP585__r1i1p1f2'
"""

import re
from enum import Enum
from typing import Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from src.core.errors import EnsembleParseError

LABEL_PATTERN = r"^[A-Za-z0-9-]+$"
SLUG_SEPARATOR = "__"


class VariableId(str, Enum):
    """Climate variables analysed, with their units."""
    RSDS = "rsds"
    SFC_WIND = "sfcWind"
    SFC_WIND_MAX = "sfcWindmax"
    TAS = "tas"

    @property
    def unit(self) -> str:
        return _UNITS[self]


_UNITS = {
    VariableId.RSDS: "Wm-2",
    VariableId.SFC_WIND: "ms-1",
    VariableId.SFC_WIND_MAX: "ms-1",
    VariableId.TAS: "K",
}


class ScenarioId(str, Enum):
    """Climate scenarios; SSP126 (index 1) is the mixed-model reference level."""
    SSP126 = "SSP126"
    SSP245 = "SSP245"
    SSP585 = "SSP585"

    @property
    def index(self) -> int:
        return _SCENARIO_INDEX[self]

    @classmethod
    def from_index(cls, j: int) -> "ScenarioId":
        for scenario, index in _SCENARIO_INDEX.items():
            if index == j:
                return scenario
        raise ValueError(f"No scenario with index {j}")


_SCENARIO_INDEX = {ScenarioId.SSP126: 1, ScenarioId.SSP245: 2, ScenarioId.SSP585: 3}


class Statistic(str, Enum):
    """Annualized statistic; NEGMIN is the maximum of negated minima."""
    MAX = "max"
    MIN = "min"
    MEAN = "mean"
    NEGMIN = "negmin"


class ZoneId(str, Enum):
    """Latitude-band climate zones plus the whole globe."""
    ANTARCTIC = "Antarctic"
    TEMPERATE_SOUTH = "TemperateSouth"
    TROPICAL = "Tropical"
    TEMPERATE_NORTH = "TemperateNorth"
    ARCTIC = "Arctic"
    GLOBAL = "Global"

    @property
    def bounds(self) -> Optional[Tuple[float, float]]:
        """Latitude bounds in degrees, ``None`` for Global."""
        return ZONE_BOUNDS.get(self)

    @property
    def short_code(self) -> str:
        return _SHORT_CODES[self]

    @classmethod
    def bands(cls) -> Tuple["ZoneId", ...]:
        """The five latitude bands, south to north."""
        return tuple(ZONE_BOUNDS)


# Half-open [lower, upper); the Arctic band is closed at +90.
ZONE_BOUNDS = {
    ZoneId.ANTARCTIC: (-90.0, -66.5),
    ZoneId.TEMPERATE_SOUTH: (-66.5, -23.5),
    ZoneId.TROPICAL: (-23.5, 23.5),
    ZoneId.TEMPERATE_NORTH: (23.5, 66.5),
    ZoneId.ARCTIC: (66.5, 90.0),
}

_SHORT_CODES = {
    ZoneId.GLOBAL: "GL",
    ZoneId.ANTARCTIC: "AN",
    ZoneId.TEMPERATE_SOUTH: "TS",
    ZoneId.TROPICAL: "TR",
    ZoneId.TEMPERATE_NORTH: "TN",
    ZoneId.ARCTIC: "AR",
}


class EnsembleId(BaseModel):
    """Ensemble member identifier ``r{r}i{i}p{p}f{f}``."""

    model_config = ConfigDict(frozen=True)

    realization: PositiveInt
    initialization: PositiveInt
    physics: PositiveInt
    forcing: PositiveInt

    @classmethod
    def parse(cls, text: str) -> "EnsembleId":
        """
        Parse canonical ensemble text.

        Raises:
            EnsembleParseError: naming the first token that breaks the pattern
        """
        values = []
        pos = 0
        for letter in "ripf":
            if pos >= len(text) or text[pos] != letter:
                raise EnsembleParseError(text, _token_at(text, pos))
            pos += 1
            match = re.match(r"\d+", text[pos:])
            if match is None:
                raise EnsembleParseError(text, _token_at(text, pos))
            digits = match.group(0)
            if len(digits) > 1 and digits.startswith("0") or int(digits) == 0:
                raise EnsembleParseError(text, letter + digits)
            values.append(int(digits))
            pos += len(digits)
        if pos != len(text):
            raise EnsembleParseError(text, text[pos:])
        return cls(realization=values[0], initialization=values[1],
                   physics=values[2], forcing=values[3])

    def __str__(self) -> str:
        return f"r{self.realization}i{self.initialization}p{self.physics}f{self.forcing}"


def _token_at(text: str, pos: int) -> str:
    if pos >= len(text):
        return "<end of text>"
    match = re.match(r"[A-Za-z]+|\d+|.", text[pos:])
    return match.group(0) if match else text[pos:]


def parse_ensemble_id(text: str) -> EnsembleId:
    """Parse ``r{r}i{i}p{p}f{f}`` text into an EnsembleId."""
    return EnsembleId.parse(text)


ZoneOrPoint = Union[ZoneId, str]


class DatasetKey(BaseModel):
    """Identity of one annualized dataset."""

    model_config = ConfigDict(frozen=True)

    gcm: str = Field(pattern=LABEL_PATTERN, description="GCM short tag, e.g. 'UK'")
    variable: VariableId
    scenario: ScenarioId
    ensemble: EnsembleId
    statistic: Statistic
    zone: ZoneOrPoint = Field(description="Climate zone or point-location label")

    @field_validator("ensemble", mode="before")
    @classmethod
    def _parse_ensemble(cls, v):
        if isinstance(v, str):
            return EnsembleId.parse(v)
        return v

    @field_validator("zone", mode="before")
    @classmethod
    def _parse_zone(cls, v):
        if isinstance(v, ZoneId):
            return v
        try:
            return ZoneId(v)
        except ValueError:
            if not isinstance(v, str) or not re.match(LABEL_PATTERN, v):
                raise ValueError(f"Invalid zone or point label: {v!r}")
            return v

    @model_validator(mode="after")
    def _minima_only_for_tas(self) -> "DatasetKey":
        if self.statistic in (Statistic.MIN, Statistic.NEGMIN) and self.variable != VariableId.TAS:
            raise ValueError(f"statistic {self.statistic.value} is only permitted for tas")
        return self

    @property
    def zone_label(self) -> str:
        return self.zone.value if isinstance(self.zone, ZoneId) else self.zone

    @property
    def is_point(self) -> bool:
        return not isinstance(self.zone, ZoneId)

    def slug(self) -> str:
        """Filename-safe, lossless encoding of the key."""
        return SLUG_SEPARATOR.join([
            self.variable.value,
            self.statistic.value,
            self.zone_label,
            self.gcm,
            self.scenario.value,
            str(self.ensemble),
        ])

    @classmethod
    def from_slug(cls, slug: str) -> "DatasetKey":
        """Inverse of ``slug``; trailing file suffixes after the first '.' are ignored."""
        stem = slug.split(".", 1)[0]
        parts = stem.split(SLUG_SEPARATOR)
        if len(parts) != 6:
            raise ValueError(f"Not a dataset slug: {slug!r}")
        variable, statistic, zone, gcm, scenario, ensemble = parts
        return cls(gcm=gcm, variable=variable, scenario=scenario,
                   ensemble=ensemble, statistic=statistic, zone=zone)

    def with_(self, **changes) -> "DatasetKey":
        """Copy with validated field changes."""
        data = self.model_dump()
        data["ensemble"] = self.ensemble
        data["zone"] = self.zone
        data.update(changes)
        return DatasetKey(**data)

    def to_record(self) -> dict:
        """Flat string record (manifest / table layout)."""
        return {
            "gcm": self.gcm,
            "variable": self.variable.value,
            "scenario": self.scenario.value,
            "ensemble": str(self.ensemble),
            "statistic": self.statistic.value,
            "zone": self.zone_label,
        }
