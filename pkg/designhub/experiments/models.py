"""
Run configuration: the YAML document behind `designhub run`
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from ..coordinator.models import CoordinatorConfig
from ..domain.models import ProteinStructure
from ..executors.manager import ExecutorConfig
from ..protocol.models import PipelineSpec, Policy
from ..scheduler.clock import Clock, ClockMode
from ..scheduler.pool import ResourcePool


class PoolConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cpu_cores: int = Field(28, ge=1)
    gpus: int = Field(4, ge=0)


class StructureConfig(BaseModel):
    """An input structure: a file on disk, or a bare id for synthetic runs"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    path: Optional[str] = None
    latent_fitness: Optional[float] = Field(None, ge=0.0, le=1.0)

    @field_validator("path")
    @classmethod
    def _exists(cls, value: Optional[str], info: ValidationInfo) -> Optional[str]:
        if value is None:
            return value
        base = Path((info.context or {}).get("base_dir", "."))
        path = Path(value)
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise ValueError(f"structure file not found: {path}")
        return str(path.resolve())

    def to_structure(self) -> ProteinStructure:
        return ProteinStructure(id=self.id, payload=self.path or "", latent_fitness=self.latent_fitness)


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    structures: List[StructureConfig] = Field(..., min_length=1)
    cycles: int = Field(4, ge=1)
    sequences_per_structure: int = Field(10, ge=1)
    retry_limit: int = Field(10, ge=0)
    policy: Policy = Policy.ADAPTIVE
    generation_params: Dict[str, Any] = Field(default_factory=dict)

    def to_spec(self) -> PipelineSpec:
        return PipelineSpec(
            id=self.id,
            input_structures=[s.to_structure() for s in self.structures],
            cycles=self.cycles,
            sequences_per_structure=self.sequences_per_structure,
            retry_limit=self.retry_limit,
            policy=self.policy,
            generation_params=self.generation_params,
        )


class RunConfig(BaseModel):
    """A complete, strictly validated experiment description"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "run"
    seed: Optional[int] = None
    clock: ClockMode = ClockMode.SIMULATED
    pool: PoolConfig = Field(default_factory=PoolConfig)
    executor: ExecutorConfig = Field(default_factory=ExecutorConfig)
    pipelines: List[PipelineConfig] = Field(..., min_length=1)
    coordinator: CoordinatorConfig = Field(default_factory=CoordinatorConfig)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.executor.uses_synthetic and self.seed is None:
            raise ValueError("seed is mandatory when the synthetic executor is used")
        if "root_seed" in self.coordinator.model_fields_set:
            raise ValueError("set the root seed with the top-level 'seed' field")
        synthetic = self.executor.synthetic
        if "pae_max" in synthetic.model_fields_set and synthetic.pae_max != self.coordinator.pae_max:
            raise ValueError(
                f"executor.synthetic.pae_max ({synthetic.pae_max}) differs from coordinator.pae_max "
                f"({self.coordinator.pae_max}); set it once under coordinator"
            )
        ids = [p.id for p in self.pipelines]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ValueError(f"duplicate pipeline ids: {', '.join(dupes)}")
        return self

    def coordinator_config(self) -> CoordinatorConfig:
        return self.coordinator.model_copy(update={"root_seed": self.seed or 0})

    def executor_config(self) -> ExecutorConfig:
        """Executor config with the synthetic PAE ceiling taken from the coordinator"""
        synthetic = self.executor.synthetic.model_copy(update={"pae_max": self.coordinator.pae_max})
        return self.executor.model_copy(update={"synthetic": synthetic})

    def specs(self) -> List[PipelineSpec]:
        return [p.to_spec() for p in self.pipelines]

    def make_pool(self) -> ResourcePool:
        return ResourcePool(self.pool.cpu_cores, self.pool.gpus)

    def make_clock(self) -> Clock:
        return Clock(self.clock)

    def snapshot(self) -> dict:
        """Resolved document; reloads to an equal config"""
        document = self.model_dump(mode="json", exclude_none=True)
        document.get("coordinator", {}).pop("root_seed", None)
        document.get("executor", {}).get("synthetic", {}).pop("pae_max", None)
        return document
