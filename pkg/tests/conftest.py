"""Shared fixtures, frozen reference values, and test-loop registry.

The FROZEN_* constants were recomputed independently with mpmath at 50
significant digits in a scratch script and rounded to the nearest double;
comparisons against them use relative tolerances a few orders looser than one
ulp so the float pipeline is held to the closed forms, not to rounding luck.
"""

import numpy as np
import pytest

from fraglim import (
    DelayLoop,
    Orientation,
    PendulumParams,
    RationalTF,
    constant_tf,
    constructed_T,
    plant_tf,
)

CASE = PendulumParams(cart_mass=3.25, stick_mass=0.1, stick_length=1.0,
                      fixation_point=1.0, gravity=9.81)
CASE_L08 = PendulumParams(cart_mass=3.25, stick_mass=0.1, stick_length=1.0,
                          fixation_point=0.8, gravity=9.81)
CASE_L095 = PendulumParams(cart_mass=3.25, stick_mass=0.1, stick_length=1.0,
                           fixation_point=0.95, gravity=9.81)
CASE_TAU = 0.3

FROZEN_P = 3.1799129160790165           # sqrt((M+m)g/(Ml)) at the reference masses
FROZEN_Q_L08 = 7.003570517957251        # sqrt(g/(l-l0)) at l0=0.8
FROZEN_F_L1 = 0.9539738748237049        # tau*p at tau=0.3
FROZEN_F_L08 = 1.933533559581972        # tau*p + ln((p+q)/(q-p))
FROZEN_MP_L08 = 6.913897798578045       # e^F, min-phase gain at p when q=7.0035...
FROZEN_MP_L1 = 2.5960053892545063       # e^{tau*p}, no-zero case
FROZEN_PLANT_AT_1 = 0.3312678339270941  # upright l0=1 plant evaluated at s=1
FROZEN_KERNEL_AT_P = 0.05005009485861674  # 1/(2*pi*p)
FROZEN_C1_2PI_4PI = 0.1404816980736446  # band weight for [2pi, 4pi] at p
FROZEN_C2_2PI_4PI = 0.8595183019263554
FROZEN_P_MASSLESS = 3.132091952673165   # sqrt(g/l), m=0 limit
FROZEN_L0_SINGULAR = 0.029850746268656716  # l*m/(M+m)
FROZEN_PEAK_OMEGA = 1.43602177428051    # argmax_w |T(jw)|, C=10, tau=0.3 loop
FROZEN_PEAK_MAG = 2.35499498556138
FROZEN_MASS_VARIATION = 0.09544511501033223  # sqrt(1.2) - 1

# Pole-placement compensators found in dev for the upright reference plant at
# 20 ms loop delay; frozen so stability and interpolation tests are exact.
COMP_L1 = RationalTF(
    [-1489436.6267459353, -8421519.744681178,
     -19952009.406922545, -30130278.26685229],
    [1.0, 74.246877563937659, 2407.4824355265473,
     45447.683935331632, 554512.18745475449],
)
COMP_L095 = RationalTF(
    [-369350.71125949017, -1623454.486834623,
     -2076855.31657409, -2207172.1006893823],
    [1.0, 54.797531717228878, 1311.7031541843594,
     24013.648798994411, 191732.06698764427],
)
LOOP_DELAY = 0.02


def stable_loop_l1() -> DelayLoop:
    return DelayLoop(plant=plant_tf(CASE, Orientation.UPRIGHT),
                     controller=COMP_L1, delay=LOOP_DELAY)


def stable_loop_l095() -> DelayLoop:
    return DelayLoop(plant=plant_tf(CASE_L095, Orientation.UPRIGHT),
                     controller=COMP_L095, delay=LOOP_DELAY)


def case_gain_loop(gain: float = 10.0, tau: float = CASE_TAU) -> DelayLoop:
    return DelayLoop(plant=plant_tf(CASE, Orientation.UPRIGHT),
                     controller=constant_tf(gain), delay=tau)


def constructed_instances(count: int, seed: int = 20240817) -> list:
    """Seeded draw of synthetic T instances spanning both q regimes and q=None."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        p = rng.uniform(0.5, 8.0)
        tau = rng.uniform(0.0, 0.5)
        a = p * rng.uniform(0.2, 5.0)
        n = int(rng.integers(1, 4))
        kind = int(rng.integers(0, 3))
        if kind == 0:
            q = None
        elif kind == 1:
            q = p * rng.uniform(1.2, 5.0)
        else:
            q = p * rng.uniform(0.2, 0.8)
        out.append(constructed_T(p=p, q=q, tau=tau, a=a, n=n))
    return out


@pytest.fixture(scope="session")
def constructed_200():
    return constructed_instances(200)


@pytest.fixture(scope="session")
def stable_loops():
    """(name, loop, params, q) registry of nyquist-stable test loops."""
    return [
        ("l0=1.0", stable_loop_l1(), CASE, None),
        ("l0=0.95", stable_loop_l095(), CASE_L095, float(np.sqrt(9.81 / 0.05))),
    ]
