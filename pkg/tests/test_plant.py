import math

import numpy as np
import pytest

from fraglim import (
    Orientation,
    ParameterError,
    PendulumParams,
    RawParams,
    effective_params,
    plant_tf,
    poles_zeros,
    rhp_pole_zero,
    state_space_up,
)

from conftest import CASE, CASE_L08, FROZEN_P, FROZEN_P_MASSLESS, FROZEN_Q_L08


def test_effective_params_gym_bar():
    raw = RawParams(human_mass=70.0, stick_mass=20.0, stick_length=1.5,
                    fixation_point=1.0)
    eff = effective_params(raw)
    assert eff.stick_mass == 15.0
    assert eff.cart_mass == 75.0
    assert eff.stick_length == pytest.approx(1.0, rel=1e-15)
    assert eff.fixation_point == 1.0
    assert eff.gravity == 9.81


def test_raw_params_validation():
    with pytest.raises(ParameterError, match="human_mass"):
        RawParams(human_mass=0.0, stick_mass=1.0, stick_length=1.0, fixation_point=0.5)
    with pytest.raises(ParameterError, match="fixation_point"):
        RawParams(human_mass=70.0, stick_mass=1.0, stick_length=1.0, fixation_point=-0.1)


def test_pendulum_params_validation():
    with pytest.raises(ParameterError, match="cart_mass"):
        PendulumParams(cart_mass=-1.0, stick_mass=0.1, stick_length=1.0,
                       fixation_point=1.0)
    with pytest.raises(ParameterError, match="stick_length"):
        PendulumParams(cart_mass=1.0, stick_mass=0.1, stick_length=0.0,
                       fixation_point=1.0)
    # zero stick mass is the mass-ratio -> 0 limit and must construct
    PendulumParams(cart_mass=1.0, stick_mass=0.0, stick_length=1.0, fixation_point=1.0)


def test_plant_tf_case_study_coefficients():
    tf = plant_tf(CASE, Orientation.UPRIGHT)
    assert np.array_equal(tf.num, [-9.81])
    assert np.allclose(tf.den, [3.25, 0.0, -32.8635, 0.0, 0.0], rtol=1e-15, atol=0.0)


def test_plant_tf_l0_equals_l_constant_numerator():
    # the numerator degenerates to a constant when the tracked point is the tip
    for orient, sign in ((Orientation.UPRIGHT, -1.0), (Orientation.DOWNWARD, 1.0)):
        tf = plant_tf(PendulumParams(2.0, 0.3, 0.7, 0.7, 9.81), orient)
        assert tf.num.size == 1
        assert tf.num[0] == sign * 9.81


def test_plant_tf_downward_sign_flip():
    up = plant_tf(CASE_L08, Orientation.UPRIGHT)
    down = plant_tf(CASE_L08, Orientation.DOWNWARD)
    assert up.num[0] == down.num[0]          # (l - l0) s^2 term
    assert up.num[-1] == -down.num[-1]       # gravity term flips
    assert up.den[0] == down.den[0]
    assert up.den[2] == -down.den[2]


def _pole_zero_magnitudes(params):
    M, m = params.cart_mass, params.stick_mass
    l, l0, g = params.stick_length, params.fixation_point, params.gravity
    pmag = math.sqrt((M + m) * g / (M * l))
    zmag = math.sqrt(g / abs(l - l0)) if l0 != l else None
    return pmag, zmag


@pytest.mark.parametrize("l0, orient, zeros_kind", [
    (0.8, Orientation.UPRIGHT, "real"),
    (1.0, Orientation.UPRIGHT, "none"),
    (1.2, Orientation.UPRIGHT, "imag"),
    (0.8, Orientation.DOWNWARD, "imag"),
    (1.0, Orientation.DOWNWARD, "none"),
    (1.2, Orientation.DOWNWARD, "real"),
])
def test_poles_zeros_all_six_cells(l0, orient, zeros_kind):
    params = PendulumParams(3.25, 0.1, 1.0, l0, 9.81)
    pz = poles_zeros(params, orient)
    pmag, zmag = _pole_zero_magnitudes(params)
    expect_pole = pmag if orient is Orientation.UPRIGHT else 1j * pmag
    expected_poles = np.array([0.0, 0.0, expect_pole, -expect_pole])
    got = sorted(pz.poles, key=lambda c: (round(c.real, 9), round(c.imag, 9)))
    want = sorted(expected_poles, key=lambda c: (round(c.real, 9), round(c.imag, 9)))
    for gc, wc in zip(got, want):
        assert abs(gc - wc) <= 1e-12 * max(1.0, abs(wc))
    if zeros_kind == "none":
        assert pz.zeros.size == 0
    else:
        base = zmag if zeros_kind == "real" else 1j * zmag
        wantz = sorted([base, -base], key=lambda c: (c.real, c.imag))
        gotz = sorted(pz.zeros, key=lambda c: (c.real, c.imag))
        for gc, wc in zip(gotz, wantz):
            assert abs(gc - wc) <= 1e-12 * abs(wc)


def test_double_pole_at_origin_kept_with_multiplicity():
    pz = poles_zeros(CASE, Orientation.UPRIGHT)
    assert np.count_nonzero(pz.poles == 0.0) == 2


def test_pole_magnitude_invariant_to_orientation():
    rng = np.random.default_rng(3)
    for _ in range(25):
        params = PendulumParams(rng.uniform(0.5, 80.0), rng.uniform(0.0, 20.0),
                                rng.uniform(0.2, 3.0), rng.uniform(0.0, 3.0),
                                rng.uniform(1.0, 25.0))
        up = np.sort(np.abs(poles_zeros(params, Orientation.UPRIGHT).poles))
        down = np.sort(np.abs(poles_zeros(params, Orientation.DOWNWARD).poles))
        assert np.allclose(up, down, rtol=1e-14, atol=0.0)


def test_zero_regime_trichotomy():
    rng = np.random.default_rng(4)
    for _ in range(40):
        l = rng.uniform(0.2, 3.0)
        l0 = rng.choice([rng.uniform(0.0, 0.95) * l, l, rng.uniform(1.05, 2.0) * l])
        params = PendulumParams(rng.uniform(0.5, 80.0), rng.uniform(0.0, 20.0),
                                l, l0, 9.81)
        for orient in Orientation:
            zeros = poles_zeros(params, orient).zeros
            if l0 == l:
                assert zeros.size == 0
                continue
            imag_expected = (orient is Orientation.UPRIGHT) == (l0 > l)
            if imag_expected:
                assert np.all(zeros.real == 0.0) and np.all(zeros.imag != 0.0)
            else:
                assert np.all(zeros.imag == 0.0) and np.all(zeros.real != 0.0)


def test_rhp_pole_zero_values():
    p, q = rhp_pole_zero(CASE_L08)
    assert p == pytest.approx(FROZEN_P, rel=1e-15)
    assert q == pytest.approx(FROZEN_Q_L08, rel=1e-15)
    p_tip, q_tip = rhp_pole_zero(CASE)
    assert p_tip == pytest.approx(FROZEN_P, rel=1e-15)
    assert q_tip is None
    massless = PendulumParams(3.25, 0.0, 1.0, 1.0, 9.81)
    assert rhp_pole_zero(massless)[0] == pytest.approx(FROZEN_P_MASSLESS, rel=1e-15)
    assert rhp_pole_zero(massless)[0] == pytest.approx(math.sqrt(9.81), rel=1e-15)


def test_p_monotone_in_length_and_mass_ratio():
    lengths = np.linspace(0.2, 3.0, 30)
    ps = [rhp_pole_zero(PendulumParams(3.25, 0.1, l, l, 9.81))[0] for l in lengths]
    assert np.all(np.diff(ps) < 0.0)
    ratios = np.linspace(0.0, 0.5, 30)
    ps = [rhp_pole_zero(PendulumParams(3.25, r * 3.25, 1.0, 1.0, 9.81))[0]
          for r in ratios]
    assert np.all(np.diff(ps) > 0.0)


def test_state_space_matches_transfer_function():
    rng = np.random.default_rng(11)
    for _ in range(100):
        params = PendulumParams(rng.uniform(0.5, 80.0), rng.uniform(0.0, 20.0),
                                rng.uniform(0.2, 3.0), rng.uniform(0.0, 3.0),
                                rng.uniform(1.0, 25.0))
        ss = state_space_up(params)
        tf = plant_tf(params, Orientation.UPRIGHT)
        pole_mags = np.abs(np.roots(tf.den))
        for _ in range(20):
            s = complex(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0))
            if np.min(np.abs(s - np.roots(tf.den))) < 0.3:
                s = s + 0.7 + 0.3j
            direct = np.polyval(tf.num, s) / np.polyval(tf.den, s)
            via_ss = (ss.C_z @ np.linalg.solve(s * np.eye(4) - ss.A, ss.B)).item()
            assert abs(via_ss - direct) <= 1e-9 * (1.0 + abs(direct)), (params, s)


def test_state_space_instantaneous_angle_acceleration():
    # with u = 0 and state (0, 0, theta0, 0) the angular acceleration is
    # (M+m) g theta0 / (M l)
    theta0 = 1e-3
    ss = state_space_up(CASE)
    deriv = ss.A @ np.array([0.0, 0.0, theta0, 0.0])
    expect = (3.25 + 0.1) * 9.81 * theta0 / (3.25 * 1.0)
    assert deriv[3] == pytest.approx(expect, rel=1e-15)
    assert deriv[1] == pytest.approx(-0.1 * 9.81 * theta0 / 3.25, rel=1e-15)
