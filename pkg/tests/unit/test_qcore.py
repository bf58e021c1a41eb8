import math

import numpy as np
import pytest

from hyperwitness.simulation.qcore import (
    REGISTER,
    Bipartition,
    DensityMatrix,
    Dof,
    Party,
    QubitLabel,
    StateVector,
    Tolerances,
    apply_local_unitaries,
    basis_state,
    density,
    dof_qubits,
    entropy_of_entanglement,
    hyper_state,
    make_bell,
    maximally_mixed,
    mix,
    partial_trace,
    qubit_state,
    random_density,
    random_state,
    random_unitary,
    tensor,
    tensor_density,
    validate_density,
    von_neumann_entropy,
)
from hyperwitness.utils.error_handling import (
    InvalidDensityMatrix,
    InvalidParameter,
    InvalidProbability,
    InvalidSubsystem,
    NumericalInconsistency,
    RegisterConflict,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def test_register_order():
    assert [label.name for label in REGISTER] == ["pi_A", "pi_B", "k_A", "k_B", "c_A", "c_B"]
    assert QubitLabel.parse("k_B") == QubitLabel(Party.B, Dof.K)
    assert QubitLabel.parse("c_A").position == 4


def test_bad_label():
    with pytest.raises(InvalidParameter):
        QubitLabel.parse("x_A")


def test_make_bell_phi():
    bell = make_bell("phi", 0.0, Dof.PI)
    assert bell.register == dof_qubits(Dof.PI)
    np.testing.assert_allclose(bell.amplitudes, [SQRT_HALF, 0, 0, SQRT_HALF], atol=1e-15)


def test_make_bell_psi_with_phase_pi():
    bell = make_bell("psi", math.pi, "k")
    np.testing.assert_allclose(bell.amplitudes, [0, SQRT_HALF, -SQRT_HALF, 0], atol=1e-12)


def test_hyper_state_has_eight_equal_amplitudes(ideal_state):
    nonzero = ideal_state.nonzero()
    assert len(nonzero) == 8
    for _, amplitude in nonzero:
        assert abs(amplitude) == pytest.approx(2 ** -1.5, abs=1e-12)
    labels = {ideal_state.basis_label(index) for index, _ in nonzero}
    assert "HHlrII" in labels
    assert "VVrlEE" in labels
    assert "HHllII" not in labels


def test_amplitudes_are_read_only(ideal_state):
    with pytest.raises(ValueError):
        ideal_state.amplitudes[0] = 1.0


def test_state_must_be_normalized():
    with pytest.raises(InvalidParameter):
        StateVector(np.array([1.0, 1.0]), (QubitLabel.parse("pi_A"),))


def test_register_must_be_canonical():
    with pytest.raises(RegisterConflict):
        StateVector(np.array([1.0, 0, 0, 0]), (QubitLabel.parse("k_A"), QubitLabel.parse("pi_A")))


def test_tensor_reorders_into_canonical_order():
    product = tensor([qubit_state("k_A", 1), qubit_state("pi_A", 0)])
    assert [label.name for label in product.register] == ["pi_A", "k_A"]
    np.testing.assert_allclose(product.amplitudes, [0, 1, 0, 0])


def test_tensor_rejects_overlap():
    with pytest.raises(RegisterConflict):
        tensor([make_bell("phi", 0.0, "pi"), qubit_state("pi_B", 0)])


def test_tensor_density_matches_density_of_tensor():
    factors = [make_bell("psi", 0.3, "k"), make_bell("phi", 1.1, "pi")]
    expected = density(tensor(factors))
    got = tensor_density([density(f) for f in factors])
    assert got.allclose(expected, atol=1e-14)


def test_basis_state():
    state = basis_state("000100")
    assert state.basis_label(4) == "HHlrII"
    assert state.amplitudes[4] == 1.0


def test_density_is_rank_one(ideal_state):
    rho = density(ideal_state)
    assert rho.trace() == pytest.approx(1.0, abs=1e-14)
    assert rho.purity() == pytest.approx(1.0, abs=1e-12)
    validate_density(rho)


def test_partial_trace_recovers_bell_factor(ideal_density):
    reduced = partial_trace(ideal_density, dof_qubits(Dof.PI))
    assert reduced.allclose(density(make_bell("phi", 0.0, "pi")), atol=1e-14)


@pytest.mark.parametrize("keep", [[], list(REGISTER)])
def test_partial_trace_rejects_trivial_subsystems(ideal_density, keep):
    with pytest.raises(InvalidSubsystem):
        partial_trace(ideal_density, keep)


def test_partial_trace_rejects_foreign_qubits():
    rho = density(make_bell("phi", 0.0, "pi"))
    with pytest.raises(InvalidSubsystem):
        partial_trace(rho, ["k_A"])


def test_partial_trace_matches_direct_contraction(rng):
    register = REGISTER[:4]
    keep = [QubitLabel.parse("pi_A"), QubitLabel.parse("k_A")]
    for _ in range(100):
        psi = random_state(register, rng)
        t = psi.amplitudes.reshape(2, 2, 2, 2)
        oracle = np.einsum("ibjd,kbld->ijkl", t, t.conj()).reshape(4, 4)
        reduced = partial_trace(density(psi), keep)
        np.testing.assert_allclose(reduced.entries, oracle, atol=1e-12)


def test_entropy_of_pure_and_maximally_mixed_states():
    assert von_neumann_entropy(density(make_bell("phi", 0.0, "c"))) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(maximally_mixed(dof_qubits("k"))) == pytest.approx(2.0, abs=1e-12)


def test_entropy_rejects_non_hermitian():
    rho = DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]), (QubitLabel.parse("pi_A"),))
    with pytest.raises(InvalidDensityMatrix):
        von_neumann_entropy(rho)


def test_entropy_rejects_wrong_trace():
    rho = DensityMatrix(np.eye(2), (QubitLabel.parse("pi_A"),))
    with pytest.raises(InvalidDensityMatrix):
        von_neumann_entropy(rho)


def test_validate_density_rejects_negative_eigenvalue():
    rho = DensityMatrix(np.diag([1.5, -0.5]), (QubitLabel.parse("pi_A"),))
    with pytest.raises(InvalidDensityMatrix):
        validate_density(rho)


def test_hyperentangled_state_carries_three_ebits(ideal_state):
    assert entropy_of_entanglement(ideal_state) == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("kind,dof", [("phi", "pi"), ("psi", "k"), ("phi", "c")])
def test_bell_factor_carries_one_ebit(kind, dof):
    assert entropy_of_entanglement(make_bell(kind, 0.7, dof)) == pytest.approx(1.0, abs=1e-9)


def test_product_state_carries_no_entanglement():
    state = basis_state("010010")
    assert entropy_of_entanglement(state) == pytest.approx(0.0, abs=1e-12)


def test_bipartition_must_cover_register(ideal_state):
    split = Bipartition(frozenset({QubitLabel.parse("pi_A")}), frozenset({QubitLabel.parse("pi_B")}))
    with pytest.raises(InvalidSubsystem):
        entropy_of_entanglement(ideal_state, split)


def test_entropy_is_invariant_under_local_unitaries(rng):
    base = random_state(REGISTER, rng)
    reference = entropy_of_entanglement(base)
    for _ in range(50):
        unitaries = {label: random_unitary(rng) for label in REGISTER}
        rotated = apply_local_unitaries(base, unitaries)
        assert abs(entropy_of_entanglement(rotated) - reference) <= 1e-9


def test_apply_local_unitaries_rejects_non_unitary(ideal_state):
    with pytest.raises(InvalidParameter):
        apply_local_unitaries(ideal_state, {"pi_A": np.array([[1, 1], [0, 1]])})


def test_mix():
    a = density(make_bell("phi", 0.0, "pi"))
    b = maximally_mixed(a.register)
    mixed = mix(a, b, 0.25)
    np.testing.assert_allclose(mixed.entries, 0.75 * a.entries + 0.25 * b.entries)
    with pytest.raises(InvalidProbability):
        mix(a, b, 1.5)
    with pytest.raises(RegisterConflict):
        mix(a, maximally_mixed(dof_qubits("k")), 0.5)


def test_random_density_is_valid(rng):
    for rank in (1, 3, None):
        validate_density(random_density(REGISTER[:3], rng, rank))


def test_serialization(ideal_state):
    restored = StateVector.from_dict(ideal_state.to_dict())
    assert restored.allclose(ideal_state)
    rho = density(make_bell("psi", 0.2, "k"))
    assert DensityMatrix.from_dict(rho.to_dict()).allclose(rho)


def test_random_pure_states_have_symmetric_reduced_entropies(rng):
    split = Bipartition.between_parties(REGISTER)
    for _ in range(100):
        psi = random_state(REGISTER, rng)
        rho = density(psi)
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)
        entropy_a = von_neumann_entropy(partial_trace(rho, split.side_a))
        entropy_b = von_neumann_entropy(partial_trace(rho, split.side_b))
        assert abs(entropy_a - entropy_b) <= 1e-9
        assert -1e-12 <= entropy_of_entanglement(psi) <= 3.0 + 1e-12


def test_mix_endpoints_return_inputs():
    a = density(make_bell("phi", 0.0, "pi"))
    b = maximally_mixed(a.register)
    assert mix(a, b, 0.0) is a
    assert mix(a, b, 1.0) is b
    np.testing.assert_array_equal(mix(a, b, 0.0).entries, a.entries)
    np.testing.assert_array_equal(mix(a, b, 1.0).entries, b.entries)


def test_mix_expectation_is_affine(rng):
    a = random_density(REGISTER[:2], rng)
    b = random_density(REGISTER[:2], rng, rank=1)
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    observable = z + z.conj().T

    def expectation(rho):
        return float(np.real(np.trace(observable @ rho.entries)))

    for p in np.linspace(0.0, 1.0, 11):
        expected = (1.0 - p) * expectation(a) + p * expectation(b)
        assert expectation(mix(a, b, float(p))) == pytest.approx(expected, abs=1e-12)


def test_tolerances_from_numerics_config():
    tolerances = Tolerances.from_config(
        {"trace_tolerance": 1e-6, "jacobi_tolerance": 1e-10, "jacobi_max_sweeps": 7}
    )
    assert tolerances.trace == 1e-6
    assert tolerances.jacobi == 1e-10
    assert tolerances.jacobi_max_sweeps == 7
    assert tolerances.hermitian == Tolerances().hermitian
    assert Tolerances.from_config(None) == Tolerances()


def test_entropy_uses_given_tolerances(rng):
    reduced = partial_trace(density(random_state(REGISTER, rng)), REGISTER[:3])
    with pytest.raises(NumericalInconsistency):
        von_neumann_entropy(reduced, Tolerances(jacobi_max_sweeps=0))
    rho = DensityMatrix(np.diag([0.5, 0.5 + 1e-8]), (QubitLabel.parse("pi_A"),))
    with pytest.raises(InvalidDensityMatrix):
        von_neumann_entropy(rho)
    assert von_neumann_entropy(rho, Tolerances(trace=1e-6)) == pytest.approx(1.0, abs=1e-6)
