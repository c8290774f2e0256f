"""
Simulation Models

Specifications for synthetic data with known truth and the coverage
report produced by the recovery experiment. Spec files are JSON documents
discriminated by ``kind``.

Usage:
    from src.models.simulation import load_simulation_spec

    spec = load_simulation_spec('{"kind": "gevr", "truth": {"mu0": 30, "sigma0": 2}}')
"""

from typing import Annotated, Dict, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from src.models.identifiers import LABEL_PATTERN, ScenarioId, Statistic, VariableId, ZoneOrPoint
from src.models.params import GevrParams, NhgrParams


class _SeriesSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    base_year: int = 2015
    span: int = Field(default=86, ge=2)
    n_replicates: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    gcm: str = Field(default="SIM", pattern=LABEL_PATTERN)
    variable: VariableId = VariableId.SFC_WIND
    scenario: ScenarioId = ScenarioId.SSP585
    zone: ZoneOrPoint = "Global"


class GevrSyntheticSpec(_SeriesSpec):
    """Synthetic annual maxima from a known GEVR truth."""

    kind: Literal["gevr"] = "gevr"
    truth: GevrParams
    statistic: Statistic = Statistic.MAX

    @model_validator(mode="after")
    def _truth_in_support(self) -> "GevrSyntheticSpec":
        violation = self.truth.support_violation()
        if violation:
            raise ValueError(f"truth violates the prior support of {violation}")
        return self


class NhgrSyntheticSpec(_SeriesSpec):
    """Synthetic annual means from a known NHGR truth."""

    kind: Literal["nhgr"] = "nhgr"
    truth: NhgrParams
    statistic: Statistic = Statistic.MEAN
    require_positive_mean: bool = True

    @model_validator(mode="after")
    def _truth_in_support(self) -> "NhgrSyntheticSpec":
        violation = self.truth.support_violation(self.require_positive_mean)
        if violation:
            raise ValueError(f"truth violates the prior support of {violation}")
        return self


SyntheticSpec = Union[GevrSyntheticSpec, NhgrSyntheticSpec]


class LmmTruth(BaseModel):
    """Mixed-model truth: intercept, scenario effects and the three standard deviations."""

    model_config = ConfigDict(frozen=True)

    iota: float = 0.0
    gamma: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    tau_delta: float = Field(default=0.0, ge=0.0)
    tau_zeta: float = Field(default=0.0, ge=0.0)
    tau_eps: float = Field(default=1.0, ge=0.0)


class LmmSimulationSpec(BaseModel):
    """Balanced scenario x model x ensemble design with n observations per cell."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["lmm"] = "lmm"
    truth: LmmTruth = LmmTruth()
    n_models: int = Field(default=5, ge=1)
    n_ensembles: int = Field(default=3, ge=1)
    n_per_cell: int = Field(default=50, ge=1)
    n_scenarios: int = Field(default=3, ge=1, le=3)
    n_replicates: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)


SimulationSpec = Union[GevrSyntheticSpec, NhgrSyntheticSpec, LmmSimulationSpec]

_spec_adapter = TypeAdapter(Annotated[SimulationSpec, Field(discriminator="kind")])


def load_simulation_spec(text: str) -> SimulationSpec:
    """Validate a JSON spec document, dispatching on ``kind``."""
    return _spec_adapter.validate_json(text)


class ParameterCoverage(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    covered: int
    total: int
    fraction: float
    ci_low: float
    ci_high: float


class CoverageReport(BaseModel):
    """Outcome of the simulate-fit-check recovery experiment."""

    model_config = ConfigDict(frozen=True)

    model: str
    n_datasets: int
    n_failed: int
    level: float = 0.95
    parameters: Tuple[ParameterCoverage, ...]
    delta: Optional[ParameterCoverage] = None
    indicators: Dict[str, Tuple[int, ...]] = Field(
        default_factory=dict, description="Per-replicate 0/1 coverage indicators by parameter"
    )

    def coverage(self, name: str) -> ParameterCoverage:
        for item in self.parameters:
            if item.name == name:
                return item
        if self.delta is not None and self.delta.name == name:
            return self.delta
        raise KeyError(name)
