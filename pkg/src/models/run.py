"""
Run Configuration Models

``RunConfig`` is the merged view of settings and command-line flags for one
invocation. It is echoed verbatim into the ``run_metadata.json`` sidecar of
every output directory, together with input hashes.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.models.chain import ChainConfig
from src.models.params import ObservationWindow, ReturnSpec

ARTIFACT_VERSION = "1.0.0"


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: str
    out: str
    seed: int = 0
    window: ObservationWindow = ObservationWindow()
    chain: Optional[ChainConfig] = None
    returns: Optional[ReturnSpec] = None
    manifest: Optional[str] = None
    jobs: int = Field(default=1, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict, description="Subcommand parameters")


class RunMetadata(BaseModel):
    """Reproducibility sidecar; contains no wall-clock values."""

    artifact_version: str = ARTIFACT_VERSION
    command: str
    config: Dict[str, Any]
    seed: int
    inputs: Dict[str, str] = Field(default_factory=dict, description="path -> sha256")
    outputs: List[str] = Field(default_factory=list)
    failures: List[Dict[str, Any]] = Field(default_factory=list)

    @classmethod
    def for_run(cls, run: RunConfig, inputs: Dict[str, str], outputs: List[str],
                failures: Optional[List[Dict[str, Any]]] = None) -> "RunMetadata":
        return cls(
            command=run.command,
            config=run.model_dump(mode="json"),
            seed=run.seed,
            inputs=dict(sorted(inputs.items())),
            outputs=sorted(outputs),
            failures=failures or [],
        )
