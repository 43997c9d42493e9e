"""Tests for policy sweeps and report comparison."""

from collections import defaultdict

import pytest

from designhub.domain.scoring import composite_score
from designhub.experiments import compare_reports, final_cycle_drop, load_run_config, run_once, run_sweep, with_policy
from designhub.protocol import Policy

SWEEP_SEEDS = range(1, 26)


@pytest.fixture
def imrp(configs_dir):
    return load_run_config(configs_dir / "im-rp.example.yaml")


def test_with_policy_keeps_inputs(imrp):
    control = with_policy(imrp, Policy.CONTROL, seed=99)
    assert control.seed == 99
    assert {p.policy for p in control.pipelines} == {Policy.CONTROL}
    assert control.coordinator.subpipelines.enabled is False
    assert [p.structures for p in control.pipelines] == [p.structures for p in imrp.pipelines]

    adaptive = with_policy(imrp, Policy.ADAPTIVE, seed=99)
    assert adaptive.coordinator.subpipelines.enabled is True


@pytest.mark.asyncio
async def test_run_once_and_self_comparison(configs_dir):
    config = load_run_config(configs_dir / "cont-v.example.yaml", overrides=["pipelines.0.cycles=2"])
    report = await run_once(config)
    assert report.counts.trajectories == 8

    comparison = compare_reports(report, report)
    assert comparison["counts"]["trajectories"] == {"a": 8, "b": 8, "difference": 0}
    for entry in comparison["net_deltas"].values():
        assert entry["difference"] == 0
        assert entry["relative_pct"] == 0.0
    assert comparison["makespan"]["total"]["difference"] == 0


@pytest.mark.asyncio
async def test_lowered_pae_ceiling_still_produces_trajectories(configs_dir):
    config = load_run_config(
        configs_dir / "cont-v.example.yaml", overrides=["pipelines.0.cycles=2", "coordinator.pae_max=10"]
    )
    report = await run_once(config)
    assert report.counts.trajectories == 8
    assert report.counts.lanes_terminated == {}
    assert all(record.metrics.iface_pae <= 10 for record in report.trajectories)


@pytest.mark.asyncio
async def test_final_cycle_drop_needs_two_cycles(configs_dir):
    config = load_run_config(configs_dir / "cont-v.example.yaml", overrides=["pipelines.0.cycles=1"])
    report = await run_once(config)
    assert final_cycle_drop(report) is None


@pytest.mark.asyncio
async def test_small_sweep_pairs_every_seed(imrp):
    result = await run_sweep(imrp, seeds=[1, 2])
    assert sorted(result.by_policy(Policy.ADAPTIVE)) == [1, 2]
    assert sorted(result.by_policy(Policy.CONTROL)) == [1, 2]
    assert result.summary.seeds == 2
    assert 0.0 <= result.summary.adaptive_wins <= 1.0


@pytest.mark.slow
@pytest.mark.asyncio
async def test_adaptive_policy_beats_control_across_seeds(imrp):
    result = await run_sweep(imrp, seeds=SWEEP_SEEDS)
    summary = result.summary
    assert summary.adaptive_median_composite > summary.control_median_composite
    assert summary.adaptive_more_consistent >= 0.7


@pytest.mark.slow
@pytest.mark.asyncio
async def test_adaptive_lanes_only_accept_improvements(imrp):
    for seed in SWEEP_SEEDS:
        report = await run_once(with_policy(imrp, Policy.ADAPTIVE, seed))
        accepted = defaultdict(list)
        for record in report.trajectories:
            if record.accepted:
                accepted[(record.pipeline_id, record.lane)].append(composite_score(record.metrics))
        for scores in accepted.values():
            assert all(b > a for a, b in zip(scores, scores[1:]))


@pytest.mark.slow
@pytest.mark.asyncio
async def test_unconditional_last_cycle_often_drops(configs_dir):
    config = load_run_config(
        configs_dir / "im-rp.example.yaml", overrides=["coordinator.final_cycle_adaptive=false"]
    )
    drops = []
    for seed in SWEEP_SEEDS:
        report = await run_once(with_policy(config, Policy.ADAPTIVE, seed))
        drops.append(final_cycle_drop(report))
    assert sum(d is True for d in drops) / len(drops) >= 0.6
