"""Tests for run configuration loading."""

import textwrap

import pytest
import yaml

from designhub.errors import ConfigError
from designhub.experiments import apply_override, load_run_config
from designhub.protocol import Policy
from designhub.scheduler import ClockMode

MINIMAL = """\
name: tiny
seed: 3
pool:
  cpu_cores: 8
  gpus: 1
pipelines:
  - id: p
    structures:
      - {id: s1}
"""


def write(tmp_path, text: str, name: str = "run.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def test_bundled_configs_load(configs_dir):
    contv = load_run_config(configs_dir / "cont-v.example.yaml")
    assert contv.seed == 7
    assert contv.coordinator.max_inflight_tasks == 1
    assert [s.policy for s in contv.specs()] == [Policy.CONTROL]
    assert len(contv.specs()[0].input_structures) == 4

    imrp = load_run_config(configs_dir / "im-rp.example.yaml")
    assert [p.id for p in imrp.pipelines] == ["imrp-a", "imrp-b"]
    assert imrp.coordinator.subpipelines.max_subpipelines == 7
    assert imrp.coordinator_config().root_seed == 7

    real = load_run_config(configs_dir / "subprocess.example.yaml")
    assert real.clock == ClockMode.WALL
    assert real.executor.kind == "subprocess"
    assert real.pipelines[0].structures[0].path.endswith("pdz1.pdb")

    pdz70 = load_run_config(configs_dir / "pdz70.example.yaml")
    spec = pdz70.specs()[0]
    assert len(spec.input_structures) == 70
    assert len({s.id for s in spec.input_structures}) == 70
    assert spec.cycles == 4 and spec.policy == Policy.ADAPTIVE
    assert pdz70.coordinator.final_cycle_adaptive is False
    assert pdz70.coordinator.subpipelines.enabled is True
    assert pdz70.coordinator_config().protocol_params().final_cycle_adaptive is False


def test_unknown_field_reports_line_and_path(tmp_path):
    path = write(tmp_path, MINIMAL.replace("  gpus: 1", "  gpu: 1"))
    with pytest.raises(ConfigError) as exc:
        load_run_config(path)
    assert any(d.startswith("line 5: pool.gpu:") for d in exc.value.diagnostics)


def test_yaml_syntax_error_reports_position(tmp_path):
    path = write(tmp_path, "name: x\npipelines: [\n")
    with pytest.raises(ConfigError) as exc:
        load_run_config(path)
    assert exc.value.diagnostics[0].startswith("line ")
    assert ", column " in exc.value.diagnostics[0]


@pytest.mark.parametrize(
    "text, fragment",
    [
        (MINIMAL.replace("seed: 3\n", ""), "seed is mandatory"),
        (MINIMAL + "coordinator:\n  root_seed: 4\n", "top-level 'seed'"),
        (MINIMAL.replace("{id: s1}", "{id: s1, path: missing.pdb}"), "structure file not found"),
        (MINIMAL.replace("{id: s1}", "{id: s1, latent_fitness: 1.5}"), "latent_fitness"),
        (MINIMAL + "  - id: p\n    structures: [{id: s2}]\n", "duplicate pipeline ids: p"),
        ("- just\n- a list\n", "must be a mapping"),
    ],
)
def test_invalid_configs(tmp_path, text, fragment):
    with pytest.raises(ConfigError) as exc:
        load_run_config(write(tmp_path, text))
    assert fragment in str(exc.value) + " ".join(exc.value.diagnostics)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_run_config(tmp_path / "absent.yaml")


def test_overrides_and_seed(tmp_path):
    path = write(tmp_path, MINIMAL)
    config = load_run_config(
        path, overrides=["pipelines.0.cycles=3", "coordinator.final_cycle_adaptive=false"], seed=11
    )
    assert config.pipelines[0].cycles == 3
    assert config.coordinator.final_cycle_adaptive is False
    assert config.seed == 11


@pytest.mark.parametrize(
    "assignment",
    ["pipelines.4.cycles=3", "pipelines.x.cycles=3", "name.inner=1", "no-equals-sign", "=3"],
)
def test_bad_overrides(assignment):
    data = yaml.safe_load(MINIMAL)
    with pytest.raises(ConfigError):
        apply_override(data, assignment)


def test_override_creates_nested_mappings():
    data = yaml.safe_load(MINIMAL)
    apply_override(data, "coordinator.subpipelines.enabled=true")
    assert data["coordinator"] == {"subpipelines": {"enabled": True}}


def test_snapshot_reloads_to_an_equal_config(tmp_path, configs_dir):
    for name in ("im-rp.example.yaml", "pdz70.example.yaml", "subprocess.example.yaml"):
        config = load_run_config(configs_dir / name)
        path = tmp_path / f"resolved-{name}"
        path.write_text(yaml.safe_dump(config.snapshot(), sort_keys=False))
        assert load_run_config(path).snapshot() == config.snapshot()


def test_pae_ceiling_is_shared_with_the_synthetic_model(tmp_path):
    config = load_run_config(write(tmp_path, MINIMAL), overrides=["coordinator.pae_max=10"])
    assert config.executor.synthetic.pae_max != 10
    assert config.executor_config().synthetic.pae_max == 10


def test_conflicting_pae_ceilings_are_rejected(tmp_path):
    text = MINIMAL + "executor:\n  synthetic:\n    pae_max: 25\ncoordinator:\n  pae_max: 10\n"
    with pytest.raises(ConfigError) as exc:
        load_run_config(write(tmp_path, text))
    assert "set it once under coordinator" in str(exc.value) + " ".join(exc.value.diagnostics)


def test_snapshot_with_lowered_pae_ceiling_reloads(tmp_path):
    config = load_run_config(write(tmp_path, MINIMAL), overrides=["coordinator.pae_max=10"])
    path = tmp_path / "resolved.yaml"
    path.write_text(yaml.safe_dump(config.snapshot(), sort_keys=False))
    reloaded = load_run_config(path)
    assert reloaded.snapshot() == config.snapshot()
    assert reloaded.executor_config().synthetic.pae_max == 10
