"""End-to-end acceptance gate for the fragility toolkit.

One verdict line per criterion, printed before the assert so a captured-output
read (or pytest -s) shows the full scoreboard:

    criterion NN: PASS|FAIL  (detail)

Criteria 07 and 08 encode external band/threshold claims whose stated numbers
this model does not reproduce; they are kept verbatim under strict xfail, each
paired with a companion that pins the value the code actually produces.
Timing budgets on the cheap criteria guard against accuracy-by-brute-force
regressions.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from conftest import (
    CASE,
    CASE_L08,
    CASE_TAU,
    COMP_L1,
    FROZEN_F_L08,
    FROZEN_F_L1,
    FROZEN_MASS_VARIATION,
    FROZEN_P,
    FROZEN_PEAK_MAG,
    FROZEN_PEAK_OMEGA,
    FROZEN_Q_L08,
    LOOP_DELAY,
)
from fraglim import DelayLoop, Orientation, constant_tf, plant_tf
from fraglim.lti import (
    FrequencyResponse,
    default_omega_grid,
    golden_max,
    hinf_estimate,
    loop_response,
    st_at,
)
from fraglim.plant import poles_zeros
from fraglim.robustness import (
    PoissonKernel,
    Regime,
    bode_integral,
    constructed_T,
    fragility,
    interpolation_check,
    poisson_weight,
    waterbed_check,
    waterbed_constants,
)
from fraglim.sweep import SweepSpec, Vary, fragility_curve, fragility_heatmap
from fraglim.timesim import SimConfig, psd, simulate, trajectory_csv


def _verdict(num: int, ok: bool, note: str = "", tag: str = ""):
    line = "criterion %02d%s: %s" % (num, tag, "PASS" if ok else "FAIL")
    if note:
        line += "  (%s)" % note
    print(line)
    assert ok, line


def _same_roots(got, expected, rel=1e-12) -> bool:
    got = sorted(np.atleast_1d(np.asarray(got, dtype=complex)),
                 key=lambda z: (z.real, z.imag))
    expected = sorted(np.asarray(expected, dtype=complex),
                      key=lambda z: (z.real, z.imag))
    if len(got) != len(expected):
        return False
    return all(abs(a - b) <= rel * max(1.0, abs(b))
               for a, b in zip(got, expected))


def test_criterion_01_plant_pole_zero_cells():
    t0 = time.perf_counter()
    M, m = CASE.cart_mass, CASE.stick_mass
    l, g = CASE.stick_length, CASE.gravity
    p = math.sqrt((M + m) * g / (M * l))
    cells = []
    for orient in (Orientation.UPRIGHT, Orientation.DOWNWARD):
        up = orient is Orientation.UPRIGHT
        exp_poles = [0.0, 0.0, p, -p] if up else [0.0, 0.0, 1j * p, -1j * p]
        for l0 in (0.8, 1.0, 1.3):
            if l0 == l:
                exp_zeros = []
            else:
                w = math.sqrt(g / abs(l - l0))
                real_pair = (l0 < l) if up else (l0 > l)
                exp_zeros = [w, -w] if real_pair else [1j * w, -1j * w]
            pz = poles_zeros(replace(CASE, fixation_point=l0), orient)
            cells.append(_same_roots(pz.poles, exp_poles)
                         and _same_roots(pz.zeros, exp_zeros))
    elapsed = time.perf_counter() - t0
    _verdict(1, all(cells) and elapsed < 1.0,
             "6 orientation/fixation cells at rel 1e-12, %.3fs" % elapsed)


def test_criterion_02_reference_fragility_values():
    t0 = time.perf_counter()
    res1 = fragility(CASE, CASE_TAU)
    res8 = fragility(CASE_L08, CASE_TAU)
    checks = [
        abs(res1.F - FROZEN_F_L1) <= 1e-9,
        abs(res8.F - FROZEN_F_L08) <= 1e-9,
        abs(res1.p - FROZEN_P) <= 1e-9,
        abs(res8.q - FROZEN_Q_L08) <= 1e-9,
        res1.regime is Regime.NO_RHP_ZERO,
        res8.regime is Regime.RHP_ZERO,
    ]
    elapsed = time.perf_counter() - t0
    _verdict(2, all(checks) and elapsed < 1.0,
             "F = %.12g and %.12g nats at abs 1e-9, %.3fs"
             % (res1.F, res8.F, elapsed))


def test_criterion_03_poisson_integral_matches_construction(constructed_200):
    t0 = time.perf_counter()
    worst = 0.0
    for ct in constructed_200:
        val = bode_integral(lambda w: ct.eval(1j * w),
                            PoissonKernel(sigma0=ct.p))
        worst = max(worst, abs(val - ct.log_mp_at_p))
    elapsed = time.perf_counter() - t0
    _verdict(3, worst <= 1e-6 and elapsed < 10.0,
             "200 instances, worst |integral - ln mp(p)| = %.2e, %.2fs"
             % (worst, elapsed))


def test_criterion_04_kernel_mass_and_band_weights():
    rng = np.random.default_rng(20240818)
    worst_mass = 0.0
    for _ in range(100):
        kern = PoissonKernel(sigma0=10.0 ** rng.uniform(-1.0, 1.5),
                             omega0=rng.uniform(-5.0, 5.0))
        val = bode_integral(
            lambda w: np.full_like(np.asarray(w, dtype=float), np.e), kern)
        worst_mass = max(worst_mass, abs(val - 1.0))
    worst_quad = 0.0
    worst_sum = 0.0
    for _ in range(100):
        p = 10.0 ** rng.uniform(-1.0, 1.0)
        w1 = p * 10.0 ** rng.uniform(-1.5, 1.0)
        w2 = w1 * 10.0 ** rng.uniform(0.05, 1.5)
        c1, c2 = waterbed_constants(p, (w1, w2))
        worst_sum = max(worst_sum, abs((c1 + c2) - 1.0))
        kern = PoissonKernel(sigma0=p)
        # the band weight counts both signs of omega, quad covers one
        ref, _ = integrate.quad(lambda w: poisson_weight(kern, w), w1, w2,
                                epsabs=1e-13, epsrel=1e-13, limit=400)
        worst_quad = max(worst_quad, abs(2.0 * ref - c1))
    ok = worst_mass <= 1e-8 and worst_quad <= 1e-9 and worst_sum <= 1e-12
    _verdict(4, ok,
             "kernel mass dev %.1e, band weight vs quad %.1e, c1+c2 dev %.1e"
             % (worst_mass, worst_quad, worst_sum))


def test_criterion_05_peak_never_below_fragility_floor(constructed_200,
                                                       stable_loops):
    grid = default_omega_grid()
    margins = []
    for ct in constructed_200:
        resp = FrequencyResponse(grid, ct.eval(1j * grid))
        h = hinf_estimate(resp, evaluator=lambda w: ct.eval(1j * w))
        margins.append(math.log(h) - ct.log_mp_at_p)
    for name, loop, params, q in stable_loops:
        F = fragility(params, loop.delay).F
        _, T = loop_response(loop, grid)
        h = hinf_estimate(T, evaluator=lambda w: st_at(loop, 1j * w)[1])
        margins.append(math.log(h) - F)
    worst = min(margins)
    _verdict(5, worst >= -1e-6,
             "ln ||T||_inf - F >= %.2e over 200 instances + 2 loops" % worst)


def test_criterion_06_waterbed_tradeoff(constructed_200):
    rng = np.random.default_rng(987123)
    n_hold = 0
    for ct in constructed_200:
        w1 = ct.p * 10.0 ** rng.uniform(-1.0, 0.5)
        w2 = w1 * 10.0 ** rng.uniform(0.1, 1.0)
        rep = waterbed_check(lambda w: ct.eval(1j * w), ct.p, (w1, w2),
                             ct.log_mp_at_p)
        n_hold += rep.holds
    # squeezing the band peak must pop the global peak up: cascade a deep
    # renormalized notch over the band and watch the inequality redistribute
    base = constructed_T(p=FROZEN_P, q=FROZEN_Q_L08, tau=CASE_TAU, a=10.0, n=1)
    w1, w2 = 2.0 * math.pi, 4.0 * math.pi
    wc = math.sqrt(w1 * w2)

    def notch(s):
        return ((s * s + 0.2 * wc * s + wc * wc)
                / (s * s + 2.0 * wc * s + wc * wc))

    unit = notch(FROZEN_P + 0j)  # keep T(p) = 1 after the cascade

    def squeezed(w):
        s = 1j * np.asarray(w, dtype=float)
        return base.eval(s) * (notch(s) / unit) ** 5

    rep = waterbed_check(squeezed, FROZEN_P, (w1, w2), base.log_mp_at_p)
    floor = math.exp((rep.F - rep.c1 * math.log(rep.M1)) / rep.c2)
    probe_ok = rep.M1 <= 0.5 and rep.holds and rep.M2 >= floor - 1e-6
    _verdict(6, n_hold == 200 and probe_ok,
             "%d/200 random bands hold; notch M1=%.3f forces M2=%.1f >= %.1f"
             % (n_hold, rep.M1, rep.M2, floor))


def _case_gain_peak():
    """Global |T| peak of the reference 10x proportional loop, refined."""
    loop = DelayLoop(plant=plant_tf(CASE, Orientation.UPRIGHT),
                     controller=constant_tf(10.0), delay=CASE_TAU)
    grid = default_omega_grid()
    _, T = loop_response(loop, grid)
    i = int(np.argmax(np.abs(T.values)))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    return golden_max(lambda w: abs(st_at(loop, 1j * w)[1]), lo, hi, tol=1e-12)


@pytest.mark.assumption_dependent
@pytest.mark.xfail(reason="externally stated peak band 2*pi*[1,2] rad/s does "
                          "not contain the computed peak near 1.436 rad/s",
                   strict=True)
def test_criterion_07_peak_frequency_stated_band():
    t0 = time.perf_counter()
    w_peak, _ = _case_gain_peak()
    elapsed = time.perf_counter() - t0
    ok = 2.0 * math.pi <= w_peak <= 4.0 * math.pi and elapsed < 1.0
    _verdict(7, ok, "peak %.6f rad/s vs stated band [%.4f, %.4f], %.3fs"
             % (w_peak, 2.0 * math.pi, 4.0 * math.pi, elapsed),
             tag=" (verbatim)")


def test_criterion_07_companion_peak_frequency_pinned():
    t0 = time.perf_counter()
    w_peak, mag = _case_gain_peak()
    elapsed = time.perf_counter() - t0
    ok = (abs(w_peak - FROZEN_PEAK_OMEGA) <= 1e-6
          and 1.0 <= w_peak <= 2.0
          and abs(mag - FROZEN_PEAK_MAG) <= 1e-9 * FROZEN_PEAK_MAG
          and elapsed < 1.0)
    _verdict(7, ok, "peak %.9f rad/s, |T| = %.6f, %.3fs"
             % (w_peak, mag, elapsed), tag=" (companion)")


@pytest.mark.assumption_dependent
@pytest.mark.xfail(reason="fragility spread over mass ratios 0..0.2 is "
                          "sqrt(1.2)-1, about 9.5%, above the stated 5% cap",
                   strict=True)
def test_criterion_08_mass_sensitivity_stated_cap():
    curve = fragility_curve(
        SweepSpec(Vary.MASS_RATIO, 0.0, 0.2, 21, CASE, CASE_TAU))
    variation = (curve.F.max() - curve.F.min()) / curve.F.min()
    _verdict(8, variation <= 0.05,
             "relative spread %.4f vs stated cap 0.05" % variation,
             tag=" (verbatim)")


def test_criterion_08_companion_mass_sensitivity_pinned():
    curve = fragility_curve(
        SweepSpec(Vary.MASS_RATIO, 0.0, 0.2, 21, CASE, CASE_TAU))
    variation = (curve.F.max() - curve.F.min()) / curve.F.min()
    ok = (abs(variation - FROZEN_MASS_VARIATION) <= 1e-9
          and bool(np.all(np.diff(curve.F) > 0.0)))
    _verdict(8, ok, "relative spread %.6f = sqrt(1.2)-1, increasing in ratio"
             % variation, tag=" (companion)")


def test_criterion_09_geometry_orderings():
    coupled = fragility_curve(
        SweepSpec(Vary.STICK_LENGTH, 0.2, 2.0, 50, CASE, CASE_TAU,
                  couple_l0_to_l=True))
    a_ok = not coupled.skipped and bool(np.all(np.diff(coupled.F) < 0.0))
    b_ok = True
    for x in np.linspace(0.2, 0.9, 15):
        held_low = fragility(replace(CASE, fixation_point=float(x)),
                             CASE_TAU).F
        short = fragility(replace(CASE, stick_length=float(x),
                                  fixation_point=float(x)), CASE_TAU).F
        b_ok = b_ok and held_low > short
    curves = [fragility_curve(
        SweepSpec(Vary.FIXATION_POINT, 0.0, 1.5, 60, CASE, tau))
        for tau in (0.2, 0.3, 0.5)]
    c_ok = (not any(c.skipped for c in curves)
            and bool(np.all(curves[2].F > curves[1].F))
            and bool(np.all(curves[1].F > curves[0].F)))
    _verdict(9, a_ok and b_ok and c_ok,
             "coupled length decreasing, holding a long stick low beats a "
             "short stick, slower reflex orders curves pointwise")


def test_criterion_10_heatmap_structure():
    surf = fragility_heatmap((0.2, 2.0, 41), (0.1, 2.2, 43), CASE, CASE_TAU)
    ok = (not surf.singular_mask.any()
          and not np.isnan(surf.F_grid).any())
    for j, l in enumerate(surf.l_axis):
        col = surf.F_grid[:, j]
        below = np.where(surf.l0_axis < l)[0]
        if below.size:
            # include the first at-or-above-tip cell so the drop into the
            # constant region is checked too
            seg = col[np.append(below, below[-1] + 1)]
            ok = ok and bool(np.all(np.diff(seg) < 0.0))
        const = col[surf.l0_axis >= l]
        direct = fragility(replace(CASE, stick_length=float(l),
                                   fixation_point=float(l)), CASE_TAU).F
        ok = ok and bool(np.all(const == direct))
    top_row = surf.F_grid[-1, :]
    ok = ok and bool(np.all(np.diff(top_row) < 0.0))
    _verdict(10, ok, "41x43 grid: strictly decreasing below the tip, exactly "
                     "tau*p above it, and tau*p falls with length")


def test_criterion_11_interpolation_constraints(stable_loops):
    oks = []
    for name, loop, params, q in stable_loops:
        res = fragility(params, loop.delay)
        rep = interpolation_check(loop, res.p, q)
        ok = rep.t_dev <= 1e-9 and abs(rep.t_at_p - 1.0) <= 1e-9
        if q is None:
            ok = ok and rep.s_check_skipped
        else:
            ok = (ok and not rep.s_check_skipped
                  and rep.s_dev <= 1e-9 and abs(rep.t_at_q) <= 1e-9)
        oks.append(ok)
    _verdict(11, all(oks),
             "T(p)=1 on both stable loops, S(q)=1 and T(q)=0 where the "
             "plant has a RHP zero")


def test_criterion_12_time_domain():
    t0 = time.perf_counter()
    # (a) free fall of the linearized plant grows like e^{p t}
    free = simulate(SimConfig(CASE, constant_tf(0.0), 0.0, 1e-3, 3.5,
                              initial_state=(0.0, 0.0, 1e-3, 0.0)))
    late = free.t >= 1.5
    slope = float(np.polyfit(free.t[late],
                             np.log(np.abs(free.theta[late])), 1)[0])
    a_ok = abs(slope - FROZEN_P) <= 0.02 * FROZEN_P
    # (c) integrator order against the cosh closed form
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        tr = simulate(SimConfig(CASE, constant_tf(0.0), 0.1, dt, 1.0,
                                initial_state=(0.0, 0.0, 1e-4, 0.0)))
        exact = 1e-4 * math.cosh(FROZEN_P * float(tr.t[-1]))
        errs.append(abs(float(tr.theta[-1]) - exact))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    c_ok = all(o >= 3.5 for o in orders)
    # (b) long stochastic closed-loop run is bit-reproducible
    cfg = SimConfig(CASE, COMP_L1, LOOP_DELAY, 2e-3, 300.0,
                    sensor_noise_std=1e-4, seed=0)
    one = simulate(cfg)
    two = simulate(cfg)
    b_ok = not one.diverged and trajectory_csv(one) == trajectory_csv(two)
    # (d) the measured spectral peak sits where |T| says it should
    spec = psd(one, column="z", segment_len=4096)
    loop = DelayLoop(plant=plant_tf(CASE, Orientation.UPRIGHT),
                     controller=COMP_L1, delay=LOOP_DELAY)
    grid = np.linspace(0.5, 50.0, 20000)
    _, T = loop_response(loop, grid)
    f_pred = grid[int(np.argmax(np.abs(T.values)))] / (2.0 * math.pi)
    f_meas = float(spec.freqs[int(np.argmax(spec.power))])
    bin_width = float(spec.freqs[1] - spec.freqs[0])
    d_ok = abs(f_meas - f_pred) <= bin_width
    elapsed = time.perf_counter() - t0
    ok = a_ok and b_ok and c_ok and d_ok and elapsed < 30.0
    _verdict(12, ok,
             "slope dev %.1e, reproducible, orders %.2f/%.2f, spectral peak "
             "off by %.3f bins, %.1fs"
             % (abs(slope - FROZEN_P) / FROZEN_P, orders[0], orders[1],
                abs(f_meas - f_pred) / bin_width, elapsed))
