"""Shared fixtures for the designhub test suite."""

import logging
from pathlib import Path
from typing import List

import pytest
import structlog

from designhub.domain.models import ProteinStructure
from designhub.executors.synthetic import SyntheticParams
from designhub.protocol.models import PipelineSpec, Policy

CONFIGS_DIR = Path(__file__).parent.parent / "configs"


def quiet_logging() -> None:
    structlog.reset_defaults()
    structlog.configure(
        processors=[structlog.processors.JSONRenderer()],
        wrapper_class=structlog.make_filtering_bound_logger(logging.WARNING),
    )


quiet_logging()


@pytest.fixture
def configs_dir() -> Path:
    """Directory of the bundled run configurations."""
    return CONFIGS_DIR


def make_structures(n: int, fitness: float = 0.5, prefix: str = "s") -> List[ProteinStructure]:
    return [
        ProteinStructure(id=f"{prefix}{i + 1}", latent_fitness=fitness)
        for i in range(n)
    ]


def make_spec(
    pipeline_id: str = "p",
    lanes: int = 1,
    policy: Policy = Policy.ADAPTIVE,
    fitness: float = 0.5,
    **kwargs,
) -> PipelineSpec:
    return PipelineSpec(
        id=pipeline_id,
        input_structures=make_structures(lanes, fitness),
        policy=policy,
        **kwargs,
    )


@pytest.fixture
def noiseless() -> SyntheticParams:
    """Synthetic model with every noise source switched off."""
    return SyntheticParams(
        noise_sigma=0.0,
        ll_jitter_sigma=0.0,
        obs_sigma_plddt=0.0,
        obs_sigma_ptm=0.0,
        obs_sigma_pae=0.0,
    )


@pytest.fixture
def hill_climb(noiseless) -> SyntheticParams:
    """Noiseless model where every candidate is strictly better than its parent."""
    return noiseless.model_copy(update={"mutation_drift": 0.05})


@pytest.fixture
def always_declines(noiseless) -> SyntheticParams:
    """Noiseless model where every candidate is strictly worse than its parent."""
    return noiseless.model_copy(update={"mutation_drift": -0.02})
