import json
from pathlib import Path

import pytest

from config import (
    ExperimentConfig,
    StateSpec,
    SweepSpec,
    load_config,
    substitute_env_vars,
)
from errors import ConfigError
from photon.states import moment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

BASE = {
    "name": "coherent_mean1",
    "state": {"kind": "coherent", "mean": 1.0},
    "design": {
        "efficiencies": [0.01, 0.02, 0.03, 0.04, 0.05],
        "shots_per_channel": 1000000,
        "seed": 20240101,
    },
}


def with_keys(**changes) -> dict:
    data = json.loads(json.dumps(BASE))
    data.update(changes)
    return data


def test_minimal_config_uses_defaults():
    config = ExperimentConfig.from_dict(BASE)
    assert config.estimator == "two_step_moments"
    assert config.noiseless is False
    assert config.solver.maxent_tol == 1e-8
    assert config.solver.povm_cutoff == 40
    assert config.sweep.n1_offsets == (-0.05, -0.025, 0.0, 0.025, 0.05)
    assert [e.eta for e in config.design.efficiencies] == [0.01, 0.02, 0.03, 0.04, 0.05]
    assert config.design.seed == 20240101


def test_config_echo_survives_reload():
    config = ExperimentConfig.from_dict(BASE)
    assert ExperimentConfig.from_dict(json.loads(config.to_json())).to_dict() == config.to_dict()


def test_efficiency_range():
    config = ExperimentConfig.from_dict(
        with_keys(design={"efficiencies": {"start": 0.01, "stop": 0.05, "count": 5}})
    )
    etas = [e.eta for e in config.design.efficiencies]
    assert etas == pytest.approx([0.01, 0.02, 0.03, 0.04, 0.05])
    assert config.design.shots_per_channel == 1_000_000


@pytest.mark.parametrize(
    "data",
    [
        with_keys(unexpected=True),
        {"state": BASE["state"]},
        {"design": BASE["design"]},
        with_keys(estimator="bayesian"),
        with_keys(state={"kind": "squeezed", "mean": 1.0}),
        with_keys(state={"kind": "fock"}),
        with_keys(state={"kind": "coherent", "mean": "bright"}),
        with_keys(design={"efficiencies": [0.02, 0.01]}),
        with_keys(design={"efficiencies": 0.01}),
        with_keys(design={"efficiencies": {"start": 0.01, "count": 5}}),
        with_keys(solver={"tolerance": 1e-3}),
        with_keys(sweep={"n1_offsets": [0.6]}),
        with_keys(sweep={"n2_offsets": []}),
        [],
    ],
)
def test_invalid_config_raises(data):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(with_keys(unexpected=True))


@pytest.mark.parametrize(
    "state, n1, n2",
    [
        ({"kind": "coherent", "mean": 2.0}, 2.0, 6.0),
        ({"kind": "thermal", "mean": 1.0}, 1.0, 3.0),
        ({"kind": "fock", "m": 2}, 2.0, 4.0),
        ({"kind": "explicit", "probs": [0.5, 0.0, 0.5]}, 1.0, 2.0),
    ],
)
def test_state_spec_builds_distribution(state, n1, n2):
    dist = StateSpec.from_dict(state).build(1e-12)
    assert moment(dist, 1) == pytest.approx(n1, rel=1e-9)
    assert moment(dist, 2) == pytest.approx(n2, rel=1e-9)
    assert StateSpec.from_dict(state).to_dict() == state


def test_with_overrides():
    config = ExperimentConfig.from_dict(BASE)
    changed = config.with_overrides(seed=7, output_dir="elsewhere", noiseless=True)
    assert changed.design.seed == 7
    assert changed.design.efficiencies == config.design.efficiencies
    assert changed.output_dir == "elsewhere"
    assert changed.noiseless is True
    assert changed.estimator == config.estimator
    assert config.with_overrides() == config


def test_sweep_spec_defaults_and_bounds():
    assert SweepSpec().n2_offsets == (-0.05, -0.025, 0.0, 0.025, 0.05)
    SweepSpec(n1_offsets=(-0.5, 0.5))
    with pytest.raises(ConfigError):
        SweepSpec(n1_offsets=(-0.51,))


def test_substitute_env_vars(monkeypatch):
    monkeypatch.setenv("RUNS_DIR", "runs")
    monkeypatch.setenv("NESTED", "${RUNS_DIR}/inner")
    monkeypatch.delenv("MISSING_VAR", raising=False)
    data = {"a": "${RUNS_DIR}/x", "b": ["${NESTED}", 3], "c": "${MISSING_VAR}"}
    assert substitute_env_vars(data) == {"a": "runs/x", "b": ["runs/inner", 3], "c": ""}


def test_load_config_expands_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("EXPERIMENT_SEED", "42")
    monkeypatch.setenv("RUNS_DIR", str(tmp_path))
    data = with_keys(output_dir="${RUNS_DIR}/fig1")
    data["design"]["seed"] = "${EXPERIMENT_SEED}"
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(data), encoding="utf-8")

    config = load_config(path)
    assert config.design.seed == 42
    assert config.output_dir == f"{tmp_path}/fig1"


def test_load_config_rejects_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_shipped_configs_load():
    for name in ("coherent_mean1", "coherent_mean2", "fock2", "robustness_coherent3"):
        config = load_config(CONFIG_DIR / f"{name}.json")
        assert config.name == name
        assert len(config.design.efficiencies) == 5
