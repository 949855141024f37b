import math

import numpy as np
import pytest

from mechq import device, estimation, sequences
from mechq.hilbert import ContractViolationError
from mechq.sequences import (
    CARDINAL_TARGET_PHASES,
    MechLadderModel,
    PulseSequence,
    SequenceEngine,
    apply_readout_contrast,
    iswap,
    iswap_duration,
    prepare_cardinal_state,
    qubit_pulse,
    run_mech_rabi,
    run_ramsey_anharmonicity,
    run_rpn,
    run_sequence,
    run_spectroscopy,
    sample_shots,
    sqrt_iswap,
    wait,
)

TWO_PI = 2.0 * math.pi


def test_iswap_durations(params):
    assert iswap_duration(params, 1) == pytest.approx(math.pi / (2 * params.g))
    assert iswap_duration(params, 2) == pytest.approx(
        math.pi / (2 * params.g * math.sqrt(2))
    )


def test_pi_iswap_places_single_phonon(params, op_delta):
    seq = PulseSequence("load", [qubit_pulse(math.pi), iswap()])
    state = run_sequence(params, seq, op_delta, dim_fock=4, lossless=True)
    assert state.data[1, 1].real == pytest.approx(1.0, abs=1e-9)


def test_sqrt_iswap_half_transfer(params, op_delta):
    seq = PulseSequence("half", [qubit_pulse(math.pi), sqrt_iswap()])
    state = run_sequence(params, seq, op_delta, dim_fock=4, lossless=True)
    idx_e0 = 4  # |e,0>
    assert state.data[1, 1].real == pytest.approx(0.5, abs=1e-9)
    assert state.data[idx_e0, idx_e0].real == pytest.approx(0.5, abs=1e-9)


def test_engine_preserves_trace_each_segment(params, op_delta):
    engine = SequenceEngine(params, op_delta, dim_fock=4)
    for segment in (qubit_pulse(math.pi), sqrt_iswap(), wait(5e-6), iswap(2)):
        engine.apply(segment)
        assert np.trace(engine.rho).real == pytest.approx(1.0, abs=1e-8)


def test_reset_projects_to_ground_block(params, op_delta):
    engine = SequenceEngine(params, op_delta, dim_fock=4)
    engine.apply(qubit_pulse(math.pi / 2))
    engine.apply(sequences.reset())
    rho = engine.rho
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(rho[4:, :], 0.0, atol=1e-12)


def test_lossless_ramsey_closes_at_zero_wait(params, op_delta):
    rec = run_ramsey_anharmonicity(params, op_delta, omega_ad=TWO_PI * 100e3,
                                   t_max=1e-6, n_points=3, lossless=True)
    assert rec.p_excited[0] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("f_ad_khz", [50.0, 100.0, 200.0])
def test_ramsey_alpha_independent_of_artificial_detuning(params, op_delta,
                                                         f_ad_khz):
    # the recovered anharmonicity must not move with the fringe reference
    omega_ad = TWO_PI * f_ad_khz * 1e3
    rec = run_ramsey_anharmonicity(params, op_delta, omega_ad=omega_ad,
                                   t_max=50e-6, n_points=161)
    fit = estimation.fit_ramsey_anharmonicity(
        rec.times, rec.p_excited,
        gamma1=rec.metadata["gamma1_eff"], omega_ad=omega_ad)
    truth = device.anharmonicity(params, op_delta)
    assert fit.alpha == pytest.approx(truth, rel=2e-3)


def test_ramsey_rejects_small_detuning(params):
    with pytest.raises(device.OutsideDispersiveRegimeError):
        run_ramsey_anharmonicity(params, 1.5 * params.g,
                                 omega_ad=TWO_PI * 100e3, t_max=1e-6,
                                 n_points=3)


# ---------------------------------------------------------------------------
# dressed ladder model


def test_ladder_vacuum_is_stationary(params, op_delta):
    model = MechLadderModel(params, op_delta, dim_fock=6)
    times = np.linspace(0.0, 50e-6, 6)
    states = model.evolve(model.vacuum(), times)
    np.testing.assert_allclose(states[-1], states[0], atol=1e-10)


def test_pi_time():
    amp = TWO_PI * 10.6e3
    assert sequences.pi_time(amp) == pytest.approx(math.pi / amp)


def test_bare_marginal_is_normalized(params, op_delta):
    model = MechLadderModel(params, op_delta, dim_fock=6)
    rec = run_mech_rabi(params, op_delta, drive_amplitude=TWO_PI * 10.6e3,
                        n_points=9)
    assert rec.p_excited[0] == 0.0
    # populations + residual bookkeeping stay consistent along the pulse
    for k in range(len(rec.times)):
        assert 0.0 <= rec.extras["residual_qubit"][k] < 0.2
    del model


def test_mech_rabi_pi_pulse_level(params, op_delta):
    rec = run_mech_rabi(params, op_delta, drive_amplitude=TWO_PI * 10.6e3)
    assert rec.p_excited[-1] == pytest.approx(0.611, abs=5e-3)
    assert rec.extras["p2_bare"][-1] == pytest.approx(0.104, abs=5e-3)
    assert rec.extras["residual_qubit"][-1] == pytest.approx(0.093, abs=5e-3)


# ---------------------------------------------------------------------------
# resonant phonon-number readout


def test_rpn_vacuum_trace(params):
    rec = run_rpn(params, t_max=3e-6, n_points=61)
    assert rec.p_excited[0] == pytest.approx(1.0, abs=1e-9)
    k_min = int(np.argmin(rec.p_excited[:40]))
    t_expected = math.pi / (2.0 * params.g)
    assert rec.times[k_min] == pytest.approx(t_expected, abs=0.06e-6)


def test_rpn_single_phonon_oscillates_faster(params):
    ket1 = np.zeros(6)
    ket1[1] = 1.0
    rec0 = run_rpn(params, t_max=3e-6, n_points=121, dim_fock=6)
    rec1 = run_rpn(params, state_prep=ket1, t_max=3e-6, n_points=121,
                   dim_fock=6)
    k0 = int(np.argmin(rec0.p_excited[:80]))
    k1 = int(np.argmin(rec1.p_excited[:80]))
    # |1> Rabi frequency is sqrt(2) g -> first dip arrives earlier
    assert rec1.times[k1] / rec0.times[k0] == pytest.approx(
        1.0 / math.sqrt(2.0), abs=0.05
    )


def test_rpn_is_linear_in_populations(params):
    weights = np.array([0.55, 0.30, 0.15])
    records = []
    for n in range(3):
        ket = np.zeros(6)
        ket[n] = 1.0
        records.append(run_rpn(params, state_prep=ket, t_max=3e-6,
                               n_points=31, dim_fock=6).p_excited)
    mixed = np.diag(np.concatenate([weights, np.zeros(3)]).astype(complex))
    rec = run_rpn(params, state_prep=mixed, t_max=3e-6, n_points=31,
                  dim_fock=6)
    np.testing.assert_allclose(
        rec.p_excited, weights @ np.vstack(records), atol=1e-9
    )


# ---------------------------------------------------------------------------
# coherence-time protocols


def test_phonon_t1_record_decays(params, op_delta):
    rec = sequences.run_phonon_t1(params, op_delta, delta_park=TWO_PI * -4e6,
                                  t_max=200e-6, n_points=21)
    assert rec.p_excited[0] > 0.3  # the gentle pulse loads a visible signal
    assert rec.p_excited[-1] < 0.3 * rec.p_excited[0]
    mask = rec.times >= 40e-6
    fit = estimation.fit_exponential(rec.times[mask], rec.p_excited[mask])
    assert fit.time_constant == pytest.approx(params.T1_p, rel=0.05)


def test_phonon_t2_fringes_at_reference(params, op_delta):
    rec = sequences.run_phonon_t2_ramsey(params, op_delta,
                                         delta_park=TWO_PI * -4e6,
                                         f_ad=10e3, t_max=400e-6, n_points=81)
    fit = estimation.fit_damped_cosine(rec.times, rec.p_excited,
                                       with_offset=True)
    assert 1.0 / fit.kappa == pytest.approx(params.T2_p, rel=0.05)
    assert fit.omega / TWO_PI == pytest.approx(10e3, rel=0.02)


def test_lossless_ladder_population_is_flat(params):
    model = MechLadderModel(params, TWO_PI * -4e6, dim_fock=6, lossless=True)
    rho1 = np.zeros((6, 6), dtype=complex)
    rho1[1, 1] = 1.0
    states = model.evolve(rho1, np.linspace(0.0, 100e-6, 6))
    np.testing.assert_allclose([s[1, 1].real for s in states], 1.0, atol=1e-9)


# ---------------------------------------------------------------------------
# spectroscopy


def test_spectroscopy_zero_probe_is_dark(params, op_delta):
    rec = run_spectroscopy(params, op_delta, probe_amplitude=0.0,
                           detunings=TWO_PI * np.linspace(-3e3, 3e3, 5),
                           probe_duration=50e-6)
    np.testing.assert_allclose(rec.p_excited, 0.0, atol=1e-9)


def test_spectroscopy_line_centers(params, op_delta):
    rec = run_spectroscopy(params, op_delta, probe_amplitude=TWO_PI * 1e3)
    fit = estimation.fit_lorentzian(rec.times, rec.p_excited)
    assert abs(fit.center) < 500.0  # 0 -> 1 line sits at zero probe detuning
    pumped = run_spectroscopy(params, op_delta, probe_amplitude=TWO_PI * 1e3,
                              pump=True)
    fit2 = estimation.fit_lorentzian(pumped.times, pumped.p_excited)
    alpha = device.anharmonicity(params, op_delta) / TWO_PI
    assert fit2.center == pytest.approx(alpha, abs=500.0)
    assert rec.axis == "detuning_hz"


def test_spectroscopy_requires_amplitude(params, op_delta):
    with pytest.raises(TypeError):
        run_spectroscopy(params, op_delta)


# ---------------------------------------------------------------------------
# cardinal-state preparation


def test_cardinal_targets():
    assert CARDINAL_TARGET_PHASES["plus"] == 0.0
    assert CARDINAL_TARGET_PHASES["minus"] == pytest.approx(math.pi)
    assert CARDINAL_TARGET_PHASES["plus_i"] == pytest.approx(math.pi / 2)


def test_cardinal_zero_state_is_vacuum(params, op_delta):
    prep = prepare_cardinal_state(params, op_delta, "zero")
    assert prep.rho_bare[0, 0].real == pytest.approx(1.0, abs=1e-9)


def test_cardinal_equatorial_phases(params, op_delta):
    # the prepared coherence must point along the requested cardinal axis
    for label, theta in (("plus", 0.0), ("plus_i", math.pi / 2),
                         ("minus", math.pi), ("minus_i", -math.pi / 2)):
        prep = prepare_cardinal_state(params, op_delta, label)
        angle = float(np.angle(prep.rho_bare[1, 0]))
        wrapped = (angle - theta + math.pi) % (2 * math.pi) - math.pi
        assert abs(wrapped) < 0.05, label


def test_plus_minus_wigner_point_reflection(params, op_delta):
    plus = prepare_cardinal_state(params, op_delta, "plus")
    minus = prepare_cardinal_state(params, op_delta, "minus")
    betas = np.array([0.4 + 0.2j, -0.3 + 0.7j, 0.9 - 0.1j])
    w_plus = estimation.wigner_values(plus.rho_bare, betas)
    w_minus = estimation.wigner_values(minus.rho_bare, -betas)
    np.testing.assert_allclose(w_plus, w_minus, atol=1e-3)


def test_unknown_cardinal_label(params, op_delta):
    with pytest.raises(ContractViolationError):
        prepare_cardinal_state(params, op_delta, "up")


# ---------------------------------------------------------------------------
# record utilities


def test_sample_shots_deterministic(params):
    rec = run_rpn(params, t_max=2e-6, n_points=11)
    a = sample_shots(rec, 500, seed=9)
    b = sample_shots(rec, 500, seed=9)
    np.testing.assert_array_equal(a.p_excited, b.p_excited)
    c = sample_shots(rec, 500, seed=10)
    assert np.any(a.p_excited != c.p_excited)
    assert np.all((a.p_excited >= 0) & (a.p_excited <= 1))


def test_sample_shots_validates(params):
    rec = run_rpn(params, t_max=2e-6, n_points=5)
    with pytest.raises(ContractViolationError):
        sample_shots(rec, 0)


def test_readout_contrast_affine(params):
    rec = run_rpn(params, t_max=2e-6, n_points=5)
    adjusted = apply_readout_contrast(rec, floor=0.05, scale=0.9)
    np.testing.assert_allclose(adjusted.p_excited,
                               0.05 + 0.9 * rec.p_excited, atol=1e-12)
