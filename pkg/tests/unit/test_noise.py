import math

import numpy as np
import pytest

from hyperwitness.simulation import noise
from hyperwitness.simulation.noise import (
    Channel,
    NoiseModel,
    WhiteNoiseScope,
    apply_channel,
    dephase_dof,
    noise_sweep,
    visibility_state,
    white_noise,
    witness_noise_threshold,
)
from hyperwitness.simulation.observables import (
    WitnessKind,
    evaluate_witness,
    pauli_expectation,
    stabilizer,
)
from hyperwitness.simulation.qcore import (
    REGISTER,
    Dof,
    density,
    hyper_state,
    maximally_mixed,
    random_density,
    validate_density,
)
from hyperwitness.utils.error_handling import (
    InvalidParameter,
    InvalidProbability,
    NoThreshold,
    NumericalInconsistency,
    ParseError,
)

W2_WHITE_ROOT = 2.0 - 2.0 * 0.75 ** (1.0 / 3.0)
W3_WHITE_ROOT = (3.0 - 3.0 * (2.0 / 3.0) ** (1.0 / 3.0)) / 2.0
W2_DEPHASE_ROOT = 1.0 - 0.5 ** (1.0 / 3.0)


@pytest.mark.parametrize("scope", list(WhiteNoiseScope))
def test_white_noise_endpoints(ideal_density, scope):
    assert white_noise(ideal_density, 0.0, scope).allclose(ideal_density)
    assert white_noise(ideal_density, 1.0, scope).allclose(maximally_mixed(), atol=1e-14)


@pytest.mark.parametrize("p", [-0.1, 1.01])
def test_white_noise_rejects_bad_probability(ideal_density, p):
    with pytest.raises(InvalidProbability):
        white_noise(ideal_density, p)


@pytest.mark.parametrize("scope", list(WhiteNoiseScope))
def test_stabilizers_shrink_linearly(ideal_density, scope):
    for p in np.linspace(0.0, 1.0, 11):
        rho = white_noise(ideal_density, p, scope)
        for i in range(1, 7):
            assert pauli_expectation(rho, stabilizer(i)) == pytest.approx(1.0 - p, abs=1e-9)


def test_witnesses_follow_closed_forms_under_white_noise(ideal_density):
    for p in np.linspace(0.0, 1.0, 21):
        rho = white_noise(ideal_density, p)
        assert evaluate_witness(rho, "Wpi") == pytest.approx(2.0 * p - 1.0, abs=1e-9)
        assert evaluate_witness(rho, "Wk") == pytest.approx(2.0 * p - 1.0, abs=1e-9)
        assert evaluate_witness(rho, "W2") == pytest.approx(3.0 - 4.0 * ((2.0 - p) / 2.0) ** 3, abs=1e-9)
        assert evaluate_witness(rho, "W3") == pytest.approx(2.0 - 3.0 * ((3.0 - 2.0 * p) / 3.0) ** 3, abs=1e-9)


def test_global_white_noise_is_affine(ideal_density):
    for p in np.linspace(0.0, 1.0, 21):
        rho = white_noise(ideal_density, p, WhiteNoiseScope.GLOBAL)
        assert evaluate_witness(rho, "W2") == pytest.approx(2.5 - 3.5 * (1.0 - p), abs=1e-9)


def test_dephasing_half_kills_x_correlation(ideal_density):
    rho = dephase_dof(ideal_density, Dof.PI, 0.5)
    assert pauli_expectation(rho, stabilizer(1)) == pytest.approx(0.0, abs=1e-12)
    assert pauli_expectation(rho, stabilizer(2)) == pytest.approx(1.0, abs=1e-12)


def test_full_dephasing_is_a_phase_flip(ideal_density):
    rho = dephase_dof(ideal_density, "pi", 1.0)
    assert rho.allclose(density(hyper_state(math.pi, 0.0, 0.0)), atol=1e-12)
    assert evaluate_witness(rho, "Wpi") == pytest.approx(1.0, abs=1e-10)


def test_dephasing_composes(ideal_density):
    q, q2 = 0.2, 0.3
    twice = dephase_dof(dephase_dof(ideal_density, "k", q), "k", q2)
    once = dephase_dof(ideal_density, "k", q + q2 - 2.0 * q * q2)
    np.testing.assert_allclose(twice.entries, once.entries, atol=1e-12)


def test_dephasing_rejects_bad_probability(ideal_density):
    with pytest.raises(InvalidProbability):
        dephase_dof(ideal_density, "c", 2.0)


def test_full_visibility_is_the_ideal_state(ideal_density):
    assert visibility_state({}).allclose(ideal_density, atol=1e-14)
    assert visibility_state({"pi": 1.0, "k": 1.0, "c": 1.0}).allclose(ideal_density, atol=1e-14)


def test_partial_visibility_scales_x_type_stabilizer():
    rho = visibility_state({Dof.K: 0.815})
    assert pauli_expectation(rho, stabilizer(3)) == pytest.approx(0.815, abs=1e-12)
    assert pauli_expectation(rho, stabilizer(4)) == pytest.approx(1.0, abs=1e-12)


def test_zero_visibility_leaves_classical_correlations():
    rho = visibility_state({"pi": 0.0, "k": 0.0, "c": 0.0})
    assert evaluate_witness(rho, "Wpi") == pytest.approx(0.0, abs=1e-12)
    assert evaluate_witness(rho, "W2") == pytest.approx(0.75, abs=1e-12)


def test_visibility_out_of_range():
    with pytest.raises(InvalidProbability):
        visibility_state({"c": -0.2})


def test_channels_produce_valid_states(rng):
    for _ in range(50):
        rho = random_density(REGISTER, rng, rank=2)
        p, q = rng.uniform(0.0, 1.0, size=2)
        dof = list(Dof)[rng.integers(3)]
        validate_density(white_noise(rho, p))
        validate_density(white_noise(rho, p, WhiteNoiseScope.GLOBAL))
        validate_density(dephase_dof(rho, dof, q))
    validate_density(visibility_state({"pi": 0.3, "k": 0.5, "c": 0.9}))


def test_white_noise_thresholds():
    w2 = witness_noise_threshold("W2", "white", 1e-6)
    w3 = witness_noise_threshold("W3", "white", 1e-6)
    assert w2 == pytest.approx(W2_WHITE_ROOT, abs=1e-5)
    assert w3 == pytest.approx(W3_WHITE_ROOT, abs=1e-5)
    assert w3 > w2
    assert witness_noise_threshold("Wpi", Channel.WHITE, 1e-6) == pytest.approx(0.5, abs=1e-5)


def test_global_white_noise_thresholds():
    assert witness_noise_threshold("W2", "global-white") == pytest.approx(2.0 / 7.0, abs=1e-5)
    assert witness_noise_threshold("W3", "global-white") == pytest.approx(9.0 / 26.0, abs=1e-5)


def test_dephasing_threshold():
    assert witness_noise_threshold("W2", "dephase") == pytest.approx(W2_DEPHASE_ROOT, abs=1e-5)


def test_printed_form_threshold():
    w = WitnessKind.parse("Wc", "as_printed")
    assert witness_noise_threshold(w, "white") == pytest.approx(0.75, abs=1e-5)


def test_threshold_requires_positive_tolerance():
    with pytest.raises(InvalidParameter):
        witness_noise_threshold("W2", "white", 0.0)


def test_threshold_without_sign_change(monkeypatch):
    monkeypatch.setattr(noise, "evaluate_witness", lambda rho, w: -1.0)
    with pytest.raises(NoThreshold):
        witness_noise_threshold("W2", "white")


def test_threshold_rejects_non_monotone_witness(monkeypatch):
    monkeypatch.setattr(noise, "apply_channel", lambda rho, channel, p: p)
    monkeypatch.setattr(noise, "evaluate_witness", lambda p, w: (p - 0.3) * (p - 0.6) * (p - 0.9))
    with pytest.raises(NumericalInconsistency):
        witness_noise_threshold("W2", "white")


def test_unknown_channel(ideal_density):
    with pytest.raises(InvalidParameter):
        apply_channel(ideal_density, "amplitude-damping", 0.1)


def test_noise_sweep_is_ordered_by_p():
    frame = noise_sweep([0.5, 0.0, 1.0], "white", workers=3)
    assert list(frame.columns) == ["p", "W_pi", "W_k", "W_c", "W_2", "W_3"]
    assert frame["p"].tolist() == [0.0, 0.5, 1.0]
    assert frame.loc[0, "W_2"] == pytest.approx(-1.0, abs=1e-10)
    assert frame.loc[2, "W_pi"] == pytest.approx(1.0, abs=1e-10)


def test_noise_sweep_reports_exact_zeros():
    frame = noise_sweep([0.5], "white")
    assert frame.loc[0, "W_pi"] == 0.0
    assert frame.loc[0, "W_k"] == 0.0
    assert frame.loc[0, "W_c"] == 0.0
    assert frame.loc[0, "W_2"] == pytest.approx(3.0 - 4.0 * 0.75**3, abs=1e-12)


def test_noise_sweep_is_deterministic_across_workers():
    grid = np.linspace(0.0, 1.0, 6)
    serial = noise_sweep(grid, "dephase", workers=1)
    parallel = noise_sweep(grid, "dephase", workers=4)
    assert serial.equals(parallel)


def test_noise_model_prepare_and_parse():
    model = NoiseModel.from_dict({"white_fraction": 0.1, "visibility": {"k": 0.9}, "dephase": {"c": 0.05}})
    assert model.visibility == {Dof.K: 0.9}
    rho = model.prepare()
    validate_density(rho)
    # visibility 0.9, then white noise 0.1 on the k pair
    assert pauli_expectation(rho, stabilizer(3)) == pytest.approx(0.9 * 0.9, abs=1e-12)
    assert NoiseModel().prepare().allclose(density(hyper_state()), atol=1e-14)


def test_noise_model_rejects_unknown_keys():
    with pytest.raises(ParseError):
        NoiseModel.from_dict({"amplitude_damping": 0.1})


def test_noise_model_rejects_bad_probability():
    with pytest.raises(InvalidProbability):
        NoiseModel.from_dict({"white_fraction": 1.5})


def test_noise_model_from_json(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"white_fraction": 0.2, "white_scope": "global"}')
    model = NoiseModel.from_json(path)
    assert model.white_scope is WhiteNoiseScope.GLOBAL
    assert model.to_dict()["white_fraction"] == 0.2
