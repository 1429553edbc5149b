"""Experiment configuration: loading, validation and environment substitution."""

import json
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np
from dotenv import load_dotenv

from errors import ConfigError
from estimation import ESTIMATORS, SolverOptions
from photon.simulator import ExperimentDesign
from photon.states import (
    PhotonDistribution,
    coherent_distribution,
    fock_distribution,
    from_probabilities,
    thermal_distribution,
)

StateKind = Literal["coherent", "fock", "thermal", "explicit"]

DEFAULT_OFFSETS = (-0.05, -0.025, 0.0, 0.025, 0.05)
MAX_OFFSET = 0.5

_ENV_PATTERN = re.compile(r"\$\{([^}]+)\}")
_TOP_LEVEL_KEYS = {
    "name",
    "state",
    "design",
    "estimator",
    "noiseless",
    "solver",
    "sweep",
    "output_dir",
}


@dataclass(frozen=True)
class StateSpec:
    """Tagged choice of the true photon distribution.

    Attributes:
        kind: coherent, thermal, fock or explicit
        mean: Mean photon number (coherent, thermal)
        m: Photon number (fock)
        probs: Probability list (explicit)
    """

    kind: StateKind
    mean: float | None = None
    m: int | None = None
    probs: tuple[float, ...] | None = None

    def build(self, tail_tol: float) -> PhotonDistribution:
        """Construct the described distribution."""
        if self.kind == "coherent":
            return coherent_distribution(self.mean, tail_tol)
        if self.kind == "thermal":
            return thermal_distribution(self.mean, tail_tol)
        if self.kind == "fock":
            return fock_distribution(self.m)
        return from_probabilities(self.probs)

    def to_dict(self) -> dict:
        if self.kind in ("coherent", "thermal"):
            return {"kind": self.kind, "mean": self.mean}
        if self.kind == "fock":
            return {"kind": self.kind, "m": self.m}
        return {"kind": self.kind, "probs": list(self.probs)}

    @staticmethod
    def from_dict(data: dict) -> "StateSpec":
        if not isinstance(data, dict):
            raise ConfigError("'state' must be an object")
        kind = data.get("kind")
        try:
            if kind in ("coherent", "thermal"):
                return StateSpec(kind=kind, mean=float(data["mean"]))
            if kind == "fock":
                return StateSpec(kind=kind, m=int(data["m"]))
            if kind == "explicit":
                return StateSpec(kind=kind, probs=tuple(float(p) for p in data["probs"]))
        except KeyError as e:
            raise ConfigError(f"State of kind '{kind}' is missing key {e}") from e
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value in 'state': {e}") from e
        raise ConfigError(
            f"Unsupported state kind '{kind}'; expected coherent, thermal, fock or explicit"
        )


@dataclass(frozen=True)
class SweepSpec:
    """Relative offsets applied to the true (N1, N2) in the robustness grid."""

    n1_offsets: tuple[float, ...] = DEFAULT_OFFSETS
    n2_offsets: tuple[float, ...] = DEFAULT_OFFSETS

    def __post_init__(self):
        for axis in (self.n1_offsets, self.n2_offsets):
            if not axis:
                raise ConfigError("Sweep offsets must not be empty")
            if any(abs(o) > MAX_OFFSET for o in axis):
                raise ConfigError(f"Sweep offsets must lie within ±{MAX_OFFSET:.0%}, got {axis}")

    def to_dict(self) -> dict:
        return {"n1_offsets": list(self.n1_offsets), "n2_offsets": list(self.n2_offsets)}

    @staticmethod
    def from_dict(data: dict) -> "SweepSpec":
        return SweepSpec(
            n1_offsets=tuple(float(o) for o in data.get("n1_offsets", DEFAULT_OFFSETS)),
            n2_offsets=tuple(float(o) for o in data.get("n2_offsets", DEFAULT_OFFSETS)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    Attributes:
        name: Experiment label used in reports
        state: True photon distribution
        design: Efficiencies, shots and seed
        estimator: two_step_moments or full_povm
        noiseless: Replace sampled frequencies by the model probabilities
        solver: Solver tolerances and budgets
        sweep: Offsets of the robustness grid
        output_dir: Where reports and figure data are written
    """

    name: str
    state: StateSpec
    design: ExperimentDesign
    estimator: str = "two_step_moments"
    noiseless: bool = False
    solver: SolverOptions = field(default_factory=SolverOptions)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output_dir: str = "runs/latest"

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ConfigError(
                f"Unknown estimator '{self.estimator}'; expected one of {sorted(ESTIMATORS)}"
            )

    def with_overrides(
        self,
        seed: int | None = None,
        output_dir: str | None = None,
        estimator: str | None = None,
        noiseless: bool | None = None,
    ) -> "ExperimentConfig":
        """Return a copy with the CLI overrides applied."""
        design = self.design
        if seed is not None:
            design = ExperimentDesign(design.efficiencies, design.shots_per_channel, seed)
        return replace(
            self,
            design=design,
            output_dir=output_dir if output_dir is not None else self.output_dir,
            estimator=estimator if estimator is not None else self.estimator,
            noiseless=noiseless if noiseless is not None else self.noiseless,
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "state": self.state.to_dict(),
            "design": self.design.to_dict(),
            "estimator": self.estimator,
            "noiseless": self.noiseless,
            "solver": self.solver.to_dict(),
            "sweep": self.sweep.to_dict(),
            "output_dir": self.output_dir,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        """Validate and build a config from its JSON object.

        Raises:
            ConfigError: If a key is missing, unknown, or has an invalid value
        """
        if not isinstance(data, dict):
            raise ConfigError("Expected the config to be a JSON object")
        unknown = set(data) - _TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        for key in ("state", "design"):
            if key not in data:
                raise ConfigError(f"Config is missing required key '{key}'")

        solver_data = data.get("solver", {})
        if not isinstance(solver_data, dict):
            raise ConfigError("'solver' must be an object")
        try:
            solver = SolverOptions(**solver_data)
        except TypeError as e:
            raise ConfigError(f"Invalid 'solver' section: {e}") from e

        return ExperimentConfig(
            name=str(data.get("name", "experiment")),
            state=StateSpec.from_dict(data["state"]),
            design=_design_from_dict(data["design"]),
            estimator=data.get("estimator", "two_step_moments"),
            noiseless=bool(data.get("noiseless", False)),
            solver=solver,
            sweep=SweepSpec.from_dict(data.get("sweep", {})),
            output_dir=str(data.get("output_dir", "runs/latest")),
        )


def _design_from_dict(data: dict) -> ExperimentDesign:
    if not isinstance(data, dict):
        raise ConfigError("'design' must be an object")
    efficiencies = data.get("efficiencies")
    if isinstance(efficiencies, dict):
        try:
            efficiencies = np.linspace(
                float(efficiencies["start"]),
                float(efficiencies["stop"]),
                int(efficiencies["count"]),
            ).tolist()
        except KeyError as e:
            raise ConfigError(f"Efficiency range is missing key {e}") from e
    if not isinstance(efficiencies, list):
        raise ConfigError("'design.efficiencies' must be a list or a start/stop/count range")
    seed = data.get("seed", 0)
    try:
        # ${SEED} substitutions arrive as strings
        if isinstance(seed, str):
            seed = int(seed)
        return ExperimentDesign(
            efficiencies=tuple(efficiencies),
            shots_per_channel=data.get("shots_per_channel", 1_000_000),
            seed=seed,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid 'design' section: {e}") from e


def substitute_env_vars(obj):
    """Replace ${VAR} in all string fields recursively; unset variables become ""."""
    if isinstance(obj, dict):
        return {k: substitute_env_vars(v) for k, v in obj.items()}
    elif isinstance(obj, list):
        return [substitute_env_vars(i) for i in obj]
    elif isinstance(obj, str):
        # repeatedly expand until no ${VAR} left (handles nested)
        expanded = obj
        prev = None
        while prev != expanded:
            prev = expanded
            expanded = _ENV_PATTERN.sub(lambda m: os.getenv(m.group(1), ""), expanded)
        return expanded
    else:
        return obj


def load_config(config_path: str | Path) -> ExperimentConfig:
    """Load an experiment config file.

    Args:
        config_path: Path to the JSON config

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: If the file is not valid JSON or fails validation
    """
    load_dotenv()
    with open(config_path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Failed to parse JSON in {config_path}: {e}") from e

    return ExperimentConfig.from_dict(substitute_env_vars(data))
