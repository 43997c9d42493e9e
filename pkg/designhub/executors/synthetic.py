"""
Deterministic synthetic executor built on a latent-fitness model.

Every structure carries a hidden quality f in [0, 1]. Generation draws K
candidates around f and scores them with a log-likelihood that tracks their
quality; prediction maps a candidate's quality to noisy metrics and hands the
quality on to the predicted structure, which is what makes hill climbing
across cycles possible.
"""

import hashlib
from typing import List, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from ..domain.models import (
    AMINO_ACIDS,
    CandidateSequence,
    OriginKind,
    ProteinStructure,
    QualityMetrics,
    StructureOrigin,
)
from ..domain.scoring import DEFAULT_PAE_MAX
from ..errors import ArgumentError, MetricDomainError
from .base import (
    ExecutorBase,
    GenerationOutput,
    GenerationPayload,
    PredictionOutput,
    PredictionPayload,
    TaskResult,
    TaskSpec,
    TaskStatus,
)

logger = structlog.get_logger()

_ALPHABET = np.array(list(AMINO_ACIDS))


class SyntheticParams(BaseModel):
    """Constants of the latent-fitness model"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    default_fitness: float = Field(0.5, ge=0.0, le=1.0)
    noise_sigma: float = Field(0.02, ge=0.0, description="Spread of candidate quality around f")
    mutation_drift: float = Field(0.0, description="Mean quality change of every candidate")
    ll_lambda: float = Field(5.0, gt=0.0)
    ll_jitter_sigma: float = Field(0.1, ge=0.0)
    obs_sigma_plddt: float = Field(8.0, ge=0.0)
    obs_sigma_ptm: float = Field(0.02, ge=0.0)
    obs_sigma_pae: float = Field(0.5, ge=0.0)
    residue_length: int = Field(60, ge=1)
    pae_max: float = Field(DEFAULT_PAE_MAX, gt=0.0)
    failure_rate: float = Field(0.0, ge=0.0, le=1.0)


class LatentFitness(BaseModel):
    """Hidden design quality of one structure plus its inheritance rule"""
    model_config = ConfigDict(frozen=True)

    f: float
    noise_sigma: float = Field(0.02, ge=0.0)
    drift: float = 0.0

    def model_post_init(self, __context) -> None:
        object.__setattr__(self, "f", clamp(self.f, 0.0, 1.0))

    def inherit(self, q: float) -> "LatentFitness":
        return self.model_copy(update={"f": clamp(q, 0.0, 1.0)})


def clamp(value: float, low: float, high: float) -> float:
    return float(min(max(value, low), high))


def derive_seed(root_seed: int, task_id: str) -> int:
    """Stable per-task seed; independent of execution order"""
    digest = hashlib.blake2b(f"{root_seed}:{task_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def synth_generate(
    f: LatentFitness,
    k: int,
    seed: int,
    params: SyntheticParams | None = None,
    structure_id: str = "structure",
    id_prefix: str = "seq",
) -> List[CandidateSequence]:
    """
    Draw k candidates: q_i = clamp(f + drift + eta_i), eta_i ~ N(0, sigma), and
    log_likelihood = lambda * (q_i - 1) + jitter.
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    params = params or SyntheticParams()
    quality_rng, jitter_rng, residue_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )

    eta = quality_rng.normal(0.0, f.noise_sigma, size=k)
    jitter = jitter_rng.normal(0.0, params.ll_jitter_sigma, size=k)
    residues = residue_rng.integers(0, len(_ALPHABET), size=(k, params.residue_length))

    width = len(str(k))
    batch = []
    for i in range(k):
        q = clamp(f.f + f.drift + float(eta[i]), 0.0, 1.0)
        batch.append(CandidateSequence(
            id=f"{id_prefix}-{i + 1:0{width}d}",
            residues="".join(_ALPHABET[residues[i]]),
            log_likelihood=params.ll_lambda * (q - 1.0) + float(jitter[i]),
            source_structure=structure_id,
            latent_fitness=q,
        ))
    return batch


def synth_predict(
    seq: CandidateSequence,
    q: float,
    seed: int,
    params: SyntheticParams | None = None,
    structure_id: Optional[str] = None,
    cycle: int = 1,
) -> Tuple[ProteinStructure, QualityMetrics]:
    """Map latent quality to noisy metrics; the predicted structure inherits q"""
    if not 0.0 <= q <= 1.0:
        raise MetricDomainError("latent_fitness", q, (0.0, 1.0))
    params = params or SyntheticParams()
    rng = np.random.default_rng(seed)
    eps_plddt, eps_ptm, eps_pae = rng.normal(
        0.0, [params.obs_sigma_plddt, params.obs_sigma_ptm, params.obs_sigma_pae]
    )
    pae_max = params.pae_max

    metrics = QualityMetrics(
        plddt=clamp(100.0 * (0.4 + 0.55 * q) + float(eps_plddt), 0.0, 100.0),
        ptm=clamp(0.3 + 0.65 * q + float(eps_ptm), 0.0, 1.0),
        iface_pae=clamp(pae_max * (0.8 - 0.7 * q) + float(eps_pae), 0.0, pae_max),
    )
    sid = structure_id or f"{seq.id}.model"
    structure = ProteinStructure(
        id=sid,
        payload=f"synthetic://{sid}",
        origin=StructureOrigin(kind=OriginKind.PREDICTED, cycle=cycle, sequence_id=seq.id),
        metrics=metrics,
        latent_fitness=q,
    )
    return structure, metrics


class SyntheticExecutor(ExecutorBase):
    """Executes tasks against the latent-fitness model, seeded per task id"""

    name = "synthetic"

    def __init__(self, params: SyntheticParams | None = None, root_seed: int = 0):
        super().__init__()
        self.params = params or SyntheticParams()
        self.root_seed = root_seed

    def _fails(self, seed: int) -> bool:
        if self.params.failure_rate <= 0.0:
            return False
        return bool(np.random.default_rng(seed ^ 0x5EED).random() < self.params.failure_rate)

    async def _run(self, task: TaskSpec) -> TaskResult:
        seed = derive_seed(self.root_seed, task.id)
        if self._fails(seed):
            return TaskResult.failed(task.id, "synthetic failure injected")

        payload = task.payload
        if isinstance(payload, GenerationPayload):
            structure = payload.structure
            fitness = LatentFitness(
                f=structure.latent_fitness
                if structure.latent_fitness is not None
                else self.params.default_fitness,
                noise_sigma=self.params.noise_sigma,
                drift=self.params.mutation_drift,
            )
            sequences = synth_generate(
                fitness,
                payload.num_sequences,
                seed,
                self.params,
                structure_id=structure.id,
                id_prefix=task.id,
            )
            return TaskResult(
                task_id=task.id,
                status=TaskStatus.SUCCEEDED,
                outputs=GenerationOutput(sequences=sequences),
            )

        assert isinstance(payload, PredictionPayload)
        q = payload.sequence.latent_fitness
        if q is None:
            return TaskResult.failed(task.id, "sequence carries no latent fitness")
        structure, metrics = synth_predict(
            payload.sequence,
            q,
            seed,
            self.params,
            structure_id=f"{task.id}.model",
            cycle=task.provenance.cycle,
        )
        return TaskResult(
            task_id=task.id,
            status=TaskStatus.SUCCEEDED,
            outputs=PredictionOutput(structure=structure, metrics=metrics),
        )
