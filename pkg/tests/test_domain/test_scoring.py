"""Tests for the composite score, the improvement predicate and ranking."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from designhub.domain.models import CandidateSequence, QualityMetrics, ScoreWeights
from designhub.domain.scoring import DEFAULT_PAE_MAX, composite_score, improved, rank_sequences
from designhub.errors import ArgumentError, MetricDomainError

plddts = st.floats(0.0, 100.0, allow_nan=False)
ptms = st.floats(0.0, 1.0, allow_nan=False)
paes = st.floats(0.0, DEFAULT_PAE_MAX, allow_nan=False)
triples = st.builds(QualityMetrics, plddt=plddts, ptm=ptms, iface_pae=paes)


def seq(seq_id: str, ll: float) -> CandidateSequence:
    return CandidateSequence(id=seq_id, residues="MKV", log_likelihood=ll, source_structure="s1")


def test_composite_best_and_worst_bounds():
    """All metrics at their best bound score 3, at the worst bound 0."""
    assert composite_score(QualityMetrics(plddt=100, ptm=1, iface_pae=0)) == pytest.approx(3.0)
    worst = QualityMetrics(plddt=0, ptm=0, iface_pae=DEFAULT_PAE_MAX)
    assert composite_score(worst) == pytest.approx(0.0)


def test_composite_hand_computed():
    m = QualityMetrics(plddt=75, ptm=0.8, iface_pae=10)
    assert composite_score(m, pae_max=31.75) == pytest.approx(2.23503937, abs=1e-8)


def test_composite_weights_apply():
    m = QualityMetrics(plddt=50, ptm=0.5, iface_pae=0)
    only_plddt = ScoreWeights(w_plddt=2.0, w_ptm=0.0, w_pae=0.0)
    assert composite_score(m, only_plddt) == pytest.approx(1.0)


def test_composite_rejects_pae_above_ceiling():
    """Interchain pAE beyond pae_max names the violating field."""
    with pytest.raises(MetricDomainError) as exc:
        composite_score(QualityMetrics(plddt=80, ptm=0.7, iface_pae=40))
    assert exc.value.field == "iface_pae"


def test_composite_rejects_nonpositive_pae_max():
    with pytest.raises(ArgumentError):
        composite_score(QualityMetrics(plddt=80, ptm=0.7, iface_pae=1), pae_max=0)


def test_improved_examples():
    prev = QualityMetrics(plddt=80, ptm=0.70, iface_pae=10)
    assert improved(prev, QualityMetrics(plddt=85, ptm=0.75, iface_pae=9))
    assert not improved(prev, prev)
    # the plddt gain exactly cancels the ptm loss
    assert not improved(prev, QualityMetrics(plddt=90, ptm=0.60, iface_pae=10))


def test_improved_respects_epsilon():
    prev = QualityMetrics(plddt=80, ptm=0.70, iface_pae=10)
    nxt = QualityMetrics(plddt=81, ptm=0.70, iface_pae=10)
    assert improved(prev, nxt)
    assert not improved(prev, nxt, ScoreWeights(epsilon=0.01))
    assert not improved(prev, nxt, ScoreWeights(epsilon=0.02))


@given(m=triples, bump=st.floats(0.0, 100.0, allow_nan=False))
def test_composite_monotone_in_plddt(m, bump):
    higher = m.model_copy(update={"plddt": min(100.0, m.plddt + bump)})
    assert composite_score(higher) >= composite_score(m)


@given(m=triples, bump=st.floats(0.0, 1.0, allow_nan=False))
def test_composite_monotone_in_ptm(m, bump):
    higher = m.model_copy(update={"ptm": min(1.0, m.ptm + bump)})
    assert composite_score(higher) >= composite_score(m)


@given(m=triples, bump=st.floats(0.0, DEFAULT_PAE_MAX, allow_nan=False))
def test_composite_antitone_in_pae(m, bump):
    worse = m.model_copy(update={"iface_pae": min(DEFAULT_PAE_MAX, m.iface_pae + bump)})
    assert composite_score(worse) <= composite_score(m)


@given(a=triples, b=triples, epsilon=st.floats(0.0, 1.0, allow_nan=False))
def test_improved_never_both_ways(a, b, epsilon):
    w = ScoreWeights(epsilon=epsilon)
    assert not (improved(a, b, w) and improved(b, a, w))


def test_rank_sequences_descending():
    ranked = rank_sequences([seq("a", -1.2), seq("b", -0.5), seq("c", -0.9)])
    assert [s.log_likelihood for s in ranked] == [-0.5, -0.9, -1.2]
    assert [s.rank for s in ranked] == [1, 2, 3]


def test_rank_sequences_ties_by_id():
    ranked = rank_sequences([seq("z", -1.0), seq("m", -1.0), seq("a", -2.0)])
    assert [s.id for s in ranked] == ["m", "z", "a"]


def test_rank_sequences_errors():
    with pytest.raises(ArgumentError):
        rank_sequences([])
    with pytest.raises(MetricDomainError):
        rank_sequences([seq("a", -1.0), seq("b", math.inf)])


@given(st.lists(st.floats(-50.0, 0.0, allow_nan=False), min_size=1, max_size=30))
def test_rank_sequences_permutation_and_idempotent(scores):
    batch = [seq(f"s{i:02d}", ll) for i, ll in enumerate(scores)]
    ranked = rank_sequences(batch)
    assert sorted(s.id for s in ranked) == sorted(s.id for s in batch)
    assert [s.rank for s in ranked] == list(range(1, len(batch) + 1))
    assert rank_sequences(ranked) == ranked
