import numpy as np
import pytest

from vartn.lib import errors, fock


def test_ladder_matrix_elements():
    ops = fock.ladder(4)
    assert ops.a.data[1, 2] == pytest.approx(np.sqrt(2))
    assert np.allclose(ops.adag.data, ops.a.data.conj().T)
    assert np.allclose(np.diag(ops.n.data), [0, 1, 2, 3])


def test_ladder_rejects_tiny_cutoff():
    with pytest.raises(errors.ShapeMismatch):
        fock.ladder(1)


def test_padded_number_operator_is_exact():
    n = fock.padded_product(5, ["ad", "a"])
    assert np.allclose(n.data, np.diag(np.arange(5)))


def test_padded_commutator_is_identity():
    D = 6
    comm = fock.padded_array(D, ["a", "ad"]) - fock.padded_array(D, ["ad", "a"])
    assert np.allclose(comm, np.eye(D))


def test_padded_quadrature_sum_is_number_operator():
    D = 5
    h = fock.padded_polynomial(D, [(0.5, "xx"), (0.5, "pp")])
    assert np.allclose(h.data, np.diag(np.arange(D) + 0.5))


def test_padded_product_rejects_high_degree():
    with pytest.raises(errors.DegreeTooHigh):
        fock.padded_product(4, list("xxxxx"))


def test_truncated_operator_rejects_non_finite():
    data = np.eye(2, dtype=complex)
    data[0, 0] = np.nan
    with pytest.raises(errors.IntegrityError):
        fock.TruncatedOperator(data)


@pytest.mark.parametrize("kind", fock.GATE_KINDS)
def test_zero_parameter_gates_are_identity(kind):
    assert np.allclose(fock.gate_matrix(kind, (0.0, 0.0), 5).data, np.eye(5))


def test_rotation_is_diagonal_phase():
    U = fock.gate_matrix("rotation", (0.3,), 4).data
    assert np.allclose(U, np.diag(np.exp(0.3j * np.arange(4))))


def test_kerr_is_diagonal_phase():
    U = fock.gate_matrix("kerr", (0.2,), 4).data
    assert np.allclose(U, np.diag(np.exp(0.2j * np.arange(4) ** 2)))


def test_displacement_creates_coherent_state():
    alpha = 0.4 + 0.2j
    column = fock.gate_matrix("displacement", (alpha.real, alpha.imag), 12).data[:, 0]
    n = np.arange(12)
    factorial = np.array([np.prod(np.arange(1, k + 1, dtype=float)) for k in n])
    expected = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(factorial)
    assert np.allclose(column, expected, atol=1e-10)


def test_beamsplitter_conserves_photon_number():
    D = 3
    U = fock.beamsplitter_matrix(0.4, 0.1, D)
    n_total = np.add.outer(np.arange(D), np.arange(D)).reshape(-1)
    # one photon in mode 1 stays in the single-photon sector
    column = U[:, 1 * D + 0]
    assert np.allclose(column[n_total != 1], 0.0, atol=1e-12)
    assert np.linalg.norm(column) == pytest.approx(1.0)


def test_basis_params_array_round_trip():
    params = fock.BasisParams(0.1, -0.2, 0.3, 0.4, 0.5, 0.6, 0.07, 0.08)
    assert fock.BasisParams.from_array(params.as_array()) == params
    assert params.alpha == complex(0.1, -0.2)
    assert fock.BasisParams().is_identity()


def test_basis_params_reject_non_finite():
    with pytest.raises(errors.IntegrityError):
        fock.BasisParams(r=float("inf"))


def test_transformed_ladder_of_identity_is_annihilator():
    assert np.allclose(fock.transformed_ladder(fock.BasisParams(), 5).data, fock.ladder(5).a.data)


def test_transformed_ladder_of_displacement_shifts():
    params = fock.BasisParams(alpha_x=0.3, alpha_p=-0.1)
    A = fock.transformed_ladder_array(params, 5)
    assert np.allclose(A, fock.ladder(5).a.data + params.alpha * np.eye(5))


def test_transformed_ladder_matches_gate_conjugation():
    rng = np.random.Generator(np.random.Philox(3))
    D, D_big = 8, 48
    a = fock.ladder_arrays(D_big)["a"]
    for _ in range(5):
        values = rng.uniform(-0.2, 0.2, size=8)
        values[-2:] *= 0.25
        params = fock.BasisParams.from_array(values)
        U = fock.plbo_unitary_matrix(params, D_big, D)
        conjugated = U.conj().T @ a @ U
        assert np.max(np.abs(conjugated - fock.transformed_ladder_array(params, D))) < 1e-6


def test_plbo_unitary_rejects_narrow_output():
    with pytest.raises(errors.ShapeMismatch):
        fock.plbo_unitary_matrix(fock.BasisParams(), 3, 4)


def test_isometry_residual_of_identity():
    assert fock.isometry_residual(np.eye(4)[:, :2]) == 0.0


def test_effective_cutoff_of_fock_basis():
    assert fock.effective_cutoff(fock.BasisParams(), 4) == 4


def test_effective_cutoff_grows_with_squeezing():
    small = fock.effective_cutoff(fock.BasisParams(r=0.1), 3, tol=1e-8)
    large = fock.effective_cutoff(fock.BasisParams(r=0.6), 3, tol=1e-8)
    assert 3 < small <= large


def test_effective_cutoff_not_reached():
    with pytest.raises(errors.CutoffNotReached) as e:
        fock.effective_cutoff(fock.BasisParams(r=1.5), 4, tol=1e-12, d_max=8)
    assert e.value.d_max == 8


def test_search_cutoff_bisects_to_minimum():
    M = np.zeros((10, 3))
    M[0, 0] = M[1, 1] = 1.0
    M[2, 2] = M[4, 2] = np.sqrt(0.5)

    assert fock.search_cutoff(lambda D: M[:D], 3, 1e-10, 64) == 5
