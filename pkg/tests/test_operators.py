import types

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pseudoherm.catalog import get
from pseudoherm.generator import SpecError, derive
from pseudoherm.operators import (
    DiscreteOperator,
    Grid,
    GridMismatchError,
    adjoint,
    build_eta,
    build_hamiltonian,
    compose,
    hermiticity_residual,
    intertwining_residual,
    matrix_from_csv,
    matrix_to_csv,
)


def free_model():
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return types.SimpleNamespace(V=zero, W=zero, G=zero, Q=zero)


def catalog_model(name, **params):
    return derive(get(name, params).spec)


# ---------------------------------------------------------------------------
# Grid


def test_grid_points_and_spacing():
    grid = Grid(0.0, 4.0, 3)
    assert grid.h == 1.0
    assert_allclose(grid.points, [1.0, 2.0, 3.0], rtol=0, atol=0)


def test_grid_validation():
    with pytest.raises(SpecError):
        Grid(1.0, 1.0, 10)
    with pytest.raises(SpecError):
        Grid(0.0, 1.0, 2)


# ---------------------------------------------------------------------------
# Hamiltonian assembly


def test_free_hamiltonian_is_discrete_laplacian():
    op = build_hamiltonian(free_model(), Grid(0.0, 4.0, 3))
    expected = np.array(
        [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]], dtype=complex
    )
    assert_allclose(op.matrix, expected, rtol=0, atol=0)


def test_scarf_diagonal_entry_at_origin():
    with pytest.warns(UserWarning):  # deliberately coarse h = 1
        op = build_hamiltonian(catalog_model("scarf2", A=2.0), Grid(-2.0, 2.0, 3))
    assert op.matrix[1, 1] == pytest.approx(2.0 - 1.75 + 0j, abs=1e-12)


def test_hermitian_when_w_vanishes():
    model = free_model()
    model.V = lambda x: np.asarray(x, dtype=float) ** 2
    op = build_hamiltonian(model, Grid(-3.0, 3.0, 80))
    assert_allclose(op.matrix, op.matrix.conj().T, rtol=0, atol=0)


def test_hamiltonian_is_complex_symmetric():
    op = build_hamiltonian(catalog_model("morse", xi=1.0), Grid(-2.0, 14.0, 400))
    assert np.all(op.matrix == op.matrix.T)


def test_underresolved_grid_warns():
    model = free_model()
    model.V = lambda x: 1e6 * np.ones_like(np.asarray(x, dtype=float))
    with pytest.warns(UserWarning, match="underresolves"):
        build_hamiltonian(model, Grid(-1.0, 1.0, 5))


# ---------------------------------------------------------------------------
# metric operator assembly


def test_trivial_metric_is_discrete_laplacian():
    op = build_eta(free_model(), Grid(0.0, 4.0, 3))
    expected = np.array(
        [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]], dtype=complex
    )
    assert_allclose(op.matrix, expected, rtol=0, atol=0)


def test_morse_metric_diagonal_at_origin():
    op = build_eta(catalog_model("morse", xi=1.0), Grid(-2.0, 2.0, 3))
    assert op.matrix[1, 1] == pytest.approx(2.0 + 0.25 + 0.25 + 0j, abs=1e-12)


@pytest.mark.parametrize(
    "name,params,grid",
    [
        ("scarf2", {"A": 2.0}, Grid(-10.0, 10.0, 80)),
        ("periodic", {}, Grid(-np.pi, np.pi, 80)),
        ("morse", {"xi": 1.0}, Grid(-2.0, 14.0, 80)),
    ],
)
def test_metric_is_exactly_hermitian(name, params, grid):
    op = build_eta(catalog_model(name, **params), grid)
    assert hermiticity_residual(op) == 0.0


# ---------------------------------------------------------------------------
# adjoint


def test_adjoint_is_involutive():
    op = build_hamiltonian(catalog_model("scarf2", A=2.0), Grid(-10.0, 10.0, 200))
    assert np.all(adjoint(adjoint(op)).matrix == op.matrix)


def test_adjoint_of_complex_symmetric_is_conjugate():
    op = build_hamiltonian(catalog_model("scarf2", A=2.0), Grid(-10.0, 10.0, 200))
    assert np.all(adjoint(op).matrix == op.matrix.conj())


def test_adjoint_fixes_the_metric():
    op = build_eta(catalog_model("periodic"), Grid(-np.pi, np.pi, 30))
    assert np.all(adjoint(op).matrix == op.matrix)


# ---------------------------------------------------------------------------
# residuals


def test_identity_metric_on_hermitian_hamiltonian():
    model = free_model()
    model.V = lambda x: np.cos(np.asarray(x, dtype=float))
    op = build_hamiltonian(model, Grid(-3.0, 3.0, 25))
    assert intertwining_residual(op, np.eye(25)) == 0.0


def test_scarf_intertwining_residual():
    grid = Grid(-10.0, 10.0, 800)
    model = catalog_model("scarf2", A=2.0)
    residual = intertwining_residual(
        build_hamiltonian(model, grid), build_eta(model, grid)
    )
    assert residual <= 1e-4


def test_morse_intertwining_residual():
    grid = Grid(-2.0, 14.0, 1200)
    model = catalog_model("morse", xi=1.0)
    residual = intertwining_residual(
        build_hamiltonian(model, grid), build_eta(model, grid)
    )
    assert residual <= 1e-4


@pytest.mark.parametrize(
    "name,params,a,b",
    [
        ("scarf2", {"A": 2.0}, -12.0, 12.0),
        ("periodic", {}, -np.pi, np.pi),
        ("morse", {"xi": 1.0}, -2.0, 14.0),
    ],
)
def test_intertwining_residual_refines_second_order(name, params, a, b):
    model = catalog_model(name, **params)

    def residual(n):
        grid = Grid(a, b, n)
        return intertwining_residual(
            build_hamiltonian(model, grid), build_eta(model, grid)
        )

    assert residual(250) / residual(500) >= 3.5


def test_etaH_hermiticity_residual_scarf():
    model = catalog_model("scarf2", A=2.0)

    def residual(n):
        grid = Grid(-10.0, 10.0, n)
        return hermiticity_residual(
            compose(build_eta(model, grid), build_hamiltonian(model, grid), "etaH")
        )

    coarse, fine = residual(500), residual(2000)
    assert fine <= 1e-4
    assert coarse / fine > 3.0  # vanishes under refinement: Hermitian in the limit


def test_hamiltonian_is_genuinely_non_hermitian():
    # at h ~ 1 the kinetic diagonal no longer swamps the order-one iW part
    with pytest.warns(UserWarning):
        op = build_hamiltonian(catalog_model("scarf2", A=2.0), Grid(-12.0, 12.0, 23))
    assert hermiticity_residual(op) > 0.1


def test_zero_matrix_hermiticity_residual():
    assert hermiticity_residual(np.zeros((4, 4), dtype=complex)) == 0.0


def test_grid_mismatch_is_rejected():
    model = catalog_model("scarf2", A=2.0)
    h_op = build_hamiltonian(model, Grid(-10.0, 10.0, 200))
    eta_op = build_eta(model, Grid(-12.0, 12.0, 200))
    with pytest.raises(GridMismatchError):
        intertwining_residual(h_op, eta_op)


def test_residuals_accept_plain_matrices():
    rng = np.random.default_rng(3)
    h_matrix = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    eta_matrix = np.eye(6)
    value = intertwining_residual(h_matrix, eta_matrix)
    expected = np.linalg.norm(h_matrix - h_matrix.conj().T) / (
        np.linalg.norm(eta_matrix) * np.linalg.norm(h_matrix)
    )
    assert value == pytest.approx(expected, rel=1e-14)


# ---------------------------------------------------------------------------
# CSV interchange


def test_matrix_csv_round_trip(tmp_path):
    grid = Grid(-2.0, 14.0, 12)
    op = build_eta(catalog_model("morse", xi=1.0), grid)
    path = tmp_path / "eta.csv"
    matrix_to_csv(op, path)
    assert np.all(matrix_from_csv(path) == op.matrix)


def test_matrix_csv_round_trip_plain_matrix(tmp_path):
    rng = np.random.default_rng(11)
    matrix = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    path = tmp_path / "M.csv"
    matrix_to_csv(matrix, path)
    assert np.all(matrix_from_csv(path) == matrix)


def test_matrix_csv_rejects_odd_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0,3.0\n")
    with pytest.raises(SpecError, match="re,im"):
        matrix_from_csv(path)
