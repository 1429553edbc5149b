import pytest

from config import StateSpec, SweepSpec
from estimation import SolverOptions
from estimation.maxent import maxent_distribution, solve_moments
from metrics import fidelity
from photon.states import coherent_distribution, moment
from sweep import RobustnessGrid, robustness_sweep

COHERENT_3 = StateSpec(kind="coherent", mean=3.0)


@pytest.fixture(scope="module")
def default_grid() -> RobustnessGrid:
    return robustness_sweep(COHERENT_3, SweepSpec())


def test_default_grid_keeps_fidelity_large(default_grid):
    assert default_grid.shape == (5, 5)
    assert all(all(row) for row in default_grid.physical)
    assert default_grid.min_physical_fidelity() >= 0.95
    assert all(s == "ok" for row in default_grid.status for s in row)


def test_center_cell_equals_direct_solve(default_grid):
    truth = coherent_distribution(3.0)
    direct = fidelity(truth, maxent_distribution(solve_moments(3.0, 12.0)))
    assert default_grid.base_n1 == moment(truth, 1)
    assert default_grid.base_n2 == moment(truth, 2)
    assert default_grid.fidelity[2][2] == fidelity(
        truth, maxent_distribution(solve_moments(default_grid.base_n1, default_grid.base_n2))
    ).value
    assert default_grid.fidelity[2][2] == pytest.approx(direct.value, abs=1e-9)


def test_perturbed_values_follow_offsets(default_grid):
    assert default_grid.n1_values[0] == pytest.approx(0.95 * default_grid.base_n1)
    assert default_grid.n2_values[4] == pytest.approx(1.05 * default_grid.base_n2)


def test_unphysical_cells_are_masked():
    grid = robustness_sweep(COHERENT_3, SweepSpec(n1_offsets=(0.0, 0.2), n2_offsets=(-0.1, 0.0)))
    # N1 = 3.6 gives N1^2 = 12.96, above both N2 = 10.8 and N2 = 12.
    assert grid.physical == [[True, True], [False, False]]
    assert grid.fidelity[1] == [0.0, 0.0]
    assert grid.status[1] == ["unphysical", "unphysical"]
    assert 0.0 < grid.fidelity[0][1] <= 1.0
    assert grid.min_physical_fidelity() == min(grid.fidelity[0])


def test_boundary_cell_with_non_integer_mean_is_near_degenerate():
    # N1 = 1.25, N2 = 1.5625 sits exactly on N2 = N1^2.
    state = StateSpec(kind="explicit", probs=(0.5, 0.0, 0.5))
    grid = robustness_sweep(state, SweepSpec(n1_offsets=(0.25,), n2_offsets=(-0.21875,)))
    assert grid.status == [["near_degenerate"]]
    assert grid.fidelity == [[0.0]]
    assert grid.physical == [[False]]


def test_number_state_center_is_exact():
    grid = robustness_sweep(
        StateSpec(kind="fock", m=2), SweepSpec(n1_offsets=(0.0,), n2_offsets=(0.0,))
    )
    assert grid.fidelity == [[1.0]]
    assert grid.status == [["ok"]]


def test_threads_do_not_change_the_grid(default_grid):
    threaded = robustness_sweep(COHERENT_3, SweepSpec(), workers=4)
    assert threaded.to_dict() == default_grid.to_dict()


def test_grid_dict_round_trip(default_grid):
    assert RobustnessGrid.from_dict(default_grid.to_dict()) == default_grid


def test_unmasked_cells_carry_positive_fidelity_on_wide_grid():
    offsets = (-0.5, -0.25, 0.0, 0.25, 0.5)
    grid = robustness_sweep(COHERENT_3, SweepSpec(n1_offsets=offsets, n2_offsets=offsets))
    for row_f, row_p, row_s in zip(grid.fidelity, grid.physical, grid.status):
        for f, p, s in zip(row_f, row_p, row_s):
            if p:
                assert 0.0 < f <= 1.0
                assert s in ("ok", "not_converged")
            else:
                assert f == 0.0
                assert s != "ok"


def test_super_thermal_cell_is_solved_in_truncated_basis():
    # N1 = 1.5 and N2 = 18 is far above the thermal N2 = 6.
    grid = robustness_sweep(COHERENT_3, SweepSpec(n1_offsets=(-0.5,), n2_offsets=(0.5,)))
    assert grid.status == [["ok"]]
    assert grid.physical == [[True]]
    assert 0.0 < grid.fidelity[0][0] < 1.0


def test_non_converged_cell_keeps_its_fidelity():
    grid = robustness_sweep(
        StateSpec(kind="coherent", mean=1.0),
        SweepSpec(n1_offsets=(0.0,), n2_offsets=(0.0,)),
        SolverOptions(maxent_max_iter=1),
    )
    assert grid.status == [["not_converged"]]
    assert grid.physical == [[True]]
    assert 0.0 < grid.fidelity[0][0] <= 1.0
