"""Robustness of the MaxEnt step against errors in (N1, N2)."""

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from config import StateSpec, SweepSpec
from errors import DomainError, NearDegenerateError, UnphysicalMomentsError
from estimation import SolverOptions
from estimation.maxent import maxent_distribution, solve_moments
from metrics import fidelity, physicality
from photon.states import PhotonDistribution, moment


@dataclass
class RobustnessGrid:
    """Fidelity of MaxEnt reconstructions from perturbed moment pairs.

    Attributes:
        base_n1: True mean photon number
        base_n2: True second moment
        n1_offsets: Relative errors applied to N1 (rows)
        n2_offsets: Relative errors applied to N2 (columns)
        n1_values: Perturbed N1 per row
        n2_values: Perturbed N2 per column
        fidelity: Fidelity matrix; masked cells hold 0
        physical: False for masked cells; status gives the reason
        status: ok, unphysical, near_degenerate or not_converged per cell
    """

    base_n1: float
    base_n2: float
    n1_offsets: list[float]
    n2_offsets: list[float]
    n1_values: list[float]
    n2_values: list[float]
    fidelity: list[list[float]]
    physical: list[list[bool]]
    status: list[list[str]]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.n1_offsets), len(self.n2_offsets)

    def min_physical_fidelity(self) -> float:
        """Smallest fidelity over unmasked cells (1.0 if every cell is masked)."""
        values = [
            f
            for row_f, row_p in zip(self.fidelity, self.physical)
            for f, p in zip(row_f, row_p)
            if p
        ]
        return min(values, default=1.0)

    def to_dict(self) -> dict:
        return {
            "base_n1": self.base_n1,
            "base_n2": self.base_n2,
            "n1_offsets": self.n1_offsets,
            "n2_offsets": self.n2_offsets,
            "n1_values": self.n1_values,
            "n2_values": self.n2_values,
            "fidelity": self.fidelity,
            "physical": self.physical,
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_dict(data: dict) -> "RobustnessGrid":
        return RobustnessGrid(**data)


def _score_cell(
    truth: PhotonDistribution, n1: float, n2: float, options: SolverOptions
) -> tuple[float, bool, str]:
    """(fidelity, physical, status) of one perturbed moment pair."""
    if not physicality(n1, n2) or n2 < n1:
        return 0.0, False, "unphysical"
    try:
        state = solve_moments(
            n1,
            n2,
            tol=options.maxent_tol,
            max_iter=options.maxent_max_iter,
            boundary_tol=options.boundary_tol,
        )
    except (UnphysicalMomentsError, DomainError):
        return 0.0, False, "unphysical"
    except NearDegenerateError:
        # N2 = N1**2 needs an integer N1; otherwise the pair is out of reach.
        return 0.0, False, "near_degenerate"

    score = fidelity(truth, maxent_distribution(state)).value
    if state.converged:
        return score, True, "ok"
    return score, score > 0.0, "not_converged"


def robustness_sweep(
    state_spec: StateSpec,
    grid_spec: SweepSpec,
    options: SolverOptions | None = None,
    workers: int = 1,
) -> RobustnessGrid:
    """Solve MaxEnt from perturbed true moments and score each cell against the truth.

    Step one is bypassed: cell (i, j) uses N1 (1 + d1_i) and N2 (1 + d2_j).
    Cells are independent; results are assembled in grid order.

    Args:
        state_spec: True state
        grid_spec: Relative offsets on each axis, within ±50%
        options: Solver settings
        workers: Threads used to evaluate cells

    Returns:
        The robustness grid
    """
    options = options or SolverOptions()
    truth = state_spec.build(options.tail_tol)
    base_n1, base_n2 = moment(truth, 1), moment(truth, 2)
    n1_values = [base_n1 * (1.0 + d) for d in grid_spec.n1_offsets]
    n2_values = [base_n2 * (1.0 + d) for d in grid_spec.n2_offsets]
    cells = list(itertools.product(n1_values, n2_values))

    def score(cell):
        return _score_cell(truth, cell[0], cell[1], options)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(score, cells))
    else:
        results = [score(cell) for cell in cells]

    columns = len(n2_values)
    rows = [results[i : i + columns] for i in range(0, len(results), columns)]
    return RobustnessGrid(
        base_n1=base_n1,
        base_n2=base_n2,
        n1_offsets=list(grid_spec.n1_offsets),
        n2_offsets=list(grid_spec.n2_offsets),
        n1_values=n1_values,
        n2_values=n2_values,
        fidelity=[[c[0] for c in row] for row in rows],
        physical=[[c[1] for c in row] for row in rows],
        status=[[c[2] for c in row] for row in rows],
    )
