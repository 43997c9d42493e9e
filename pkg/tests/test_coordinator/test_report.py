"""Tests for run report assembly and loading."""

import pytest

from designhub.coordinator import CoordinatorConfig, RunReport
from designhub.errors import ReportSchemaError
from designhub.telemetry.export import dump_yaml
from tests.conftest import make_spec
from tests.test_coordinator.helpers import execute


@pytest.mark.asyncio
async def test_report_survives_a_yaml_round_trip(tmp_path, hill_climb):
    report, _ = await execute([make_spec(lanes=2, cycles=3)], params=hill_climb)
    path = tmp_path / "report.yaml"
    path.write_text(dump_yaml(report.to_document()))
    assert RunReport.load(path).to_document() == report.to_document()


@pytest.mark.asyncio
async def test_report_summaries(hill_climb):
    report, coordinator = await execute([make_spec(lanes=2, cycles=3)], params=hill_climb)
    (pipeline,) = report.pipelines
    assert [lane.cycles_accepted for lane in pipeline.lanes] == [3, 3]
    assert all(lane.final_structure.endswith(".model") for lane in pipeline.lanes)
    assert report.counts.lanes == 2
    assert report.makespan.total > report.makespan.running > 0
    assert report.makespan.bootstrap == CoordinatorConfig().bootstrap_seconds
    assert 0 < report.utilization.gpu_pct <= 100
    assert report.trajectories == coordinator.ledger
    assert report.final_plddt_half_std == 0.0


def test_load_rejects_documents_that_are_not_reports(tmp_path):
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("42\n")
    with pytest.raises(ReportSchemaError, match="mapping"):
        RunReport.load(scalar)

    partial = tmp_path / "partial.yaml"
    partial.write_text("counts: {pipelines: 1}\n")
    with pytest.raises(ReportSchemaError, match="schema error"):
        RunReport.load(partial)

    broken = tmp_path / "broken.yaml"
    broken.write_text("counts: [1, 2\n")
    with pytest.raises(ReportSchemaError, match="not valid YAML"):
        RunReport.load(broken)
