"""
Metric arithmetic: composite score, improvement predicate and sequence ranking
"""

import math
from typing import Iterable, List

from ..errors import ArgumentError, MetricDomainError
from .models import CandidateSequence, QualityMetrics, ScoreWeights

# Interchain pAE ceiling of the structure predictor (run-level constant)
DEFAULT_PAE_MAX = 31.75

# Float noise below this is a tie, and ties count as decline
_TIE_TOLERANCE = 1e-12


def _check(field: str, value: float, low: float, high: float) -> None:
    if not (low <= value <= high):  # also rejects NaN
        raise MetricDomainError(field, value, (low, high))


def composite_score(
    m: QualityMetrics,
    w: ScoreWeights | None = None,
    pae_max: float = DEFAULT_PAE_MAX,
) -> float:
    """
    Collapse a metric triple to one scalar.

    Each metric is normalized onto [0, 1] with 1 = best, then weighted:
    w_plddt * plddt/100 + w_ptm * ptm + w_pae * (1 - iface_pae/pae_max).
    """
    if not pae_max > 0:
        raise ArgumentError(f"pae_max must be positive, got {pae_max!r}")
    w = w or ScoreWeights()
    _check("plddt", m.plddt, 0.0, 100.0)
    _check("ptm", m.ptm, 0.0, 1.0)
    _check("iface_pae", m.iface_pae, 0.0, pae_max)

    return (
        w.w_plddt * (m.plddt / 100.0)
        + w.w_ptm * m.ptm
        + w.w_pae * (1.0 - m.iface_pae / pae_max)
    )


def improved(
    prev: QualityMetrics,
    next: QualityMetrics,
    w: ScoreWeights | None = None,
    pae_max: float = DEFAULT_PAE_MAX,
) -> bool:
    """True iff next beats prev by more than the epsilon margin"""
    w = w or ScoreWeights()
    gain = composite_score(next, w, pae_max) - composite_score(prev, w, pae_max)
    return gain - w.epsilon > _TIE_TOLERANCE


def rank_sequences(batch: Iterable[CandidateSequence]) -> List[CandidateSequence]:
    """
    Sort a generation batch by descending log-likelihood and assign ranks 1..K.

    Equal scores are ordered by ascending sequence id.
    """
    batch = list(batch)
    if not batch:
        raise ArgumentError("cannot rank an empty batch")
    for seq in batch:
        if not math.isfinite(seq.log_likelihood):
            raise MetricDomainError("log_likelihood", seq.log_likelihood, (-math.inf, math.inf))

    ordered = sorted(batch, key=lambda s: (-s.log_likelihood, s.id))
    return [seq.model_copy(update={"rank": i}) for i, seq in enumerate(ordered, start=1)]
