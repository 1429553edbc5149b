import pytest

from config import ExperimentConfig, StateSpec
from photon.simulator import ExperimentDesign

LOW_EFFICIENCIES = (0.01, 0.02, 0.03, 0.04, 0.05)


@pytest.fixture
def design() -> ExperimentDesign:
    return ExperimentDesign(LOW_EFFICIENCIES, shots_per_channel=1_000_000, seed=20240101)


@pytest.fixture
def make_config(design, tmp_path):
    """Factory of experiment configs writing under tmp_path."""

    def _make(state: StateSpec, **overrides) -> ExperimentConfig:
        values = {
            "name": "test",
            "state": state,
            "design": design,
            "output_dir": str(tmp_path / "run"),
        }
        values.update(overrides)
        return ExperimentConfig(**values)

    return _make
