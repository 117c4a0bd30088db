"""One-call report bundle.

Runs the standard analyses for a single plant and writes delimited data plus
rendered figures into a directory. Everything here is a convenience layer over
the library; no numbers are computed in this module that the library cannot
produce on its own.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .errors import FragilitySingularityError, InconclusiveStabilityError
from .lti import DelayLoop, RationalTF, default_omega_grid, frequency_response_csv, loop_response
from .plant import Orientation, PendulumParams, plant_tf, poles_zeros, rhp_pole_zero
from .robustness import fragility, nyquist_stable
from .sweep import SweepSpec, Vary, curve_csv, fragility_curve, fragility_heatmap, heatmap_csv
from .timesim import SimConfig, psd, simulate, spectrum_csv, trajectory_csv

# Stabilizes the upright unit-length reference plant (l = l0 = 1 m,
# M = 3.25 kg, m = 0.1 kg) with a 20 ms loop delay. Found by pole placement
# and kept as fixed numbers so demo runs reproduce down to the byte.
DEMO_COMPENSATOR = RationalTF(
    [-1489436.6267459353, -8421519.744681178,
     -19952009.406922545, -30130278.26685229],
    [1.0, 74.246877563937659, 2407.4824355265473,
     45447.683935331632, 554512.18745475449],
)
DEMO_DELAY = 0.02


def sig12(value):
    """Clamp a float to 12 significant digits for stable JSON output."""
    if value is None or isinstance(value, bool):
        return value
    value = float(value)
    if not math.isfinite(value):
        return None
    return float("%.12g" % (value,))


def _complex_pairs(arr) -> list:
    return [[sig12(c.real), sig12(c.imag)] for c in np.asarray(arr, dtype=complex)]


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path: str):
    fig.savefig(path, dpi=130)
    import matplotlib.pyplot as plt
    plt.close(fig)


def _freq_figure(plt, resp_s, resp_t, path: str):
    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax.loglog(resp_t.omegas, np.abs(resp_t.values), label="|T|")
    ax.loglog(resp_s.omegas, np.abs(resp_s.values), label="|S|")
    ax.axhline(1.0, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel("omega [rad/s]")
    ax.set_ylabel("magnitude")
    ax.set_title("closed-loop frequency response (demo compensator)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def _curves_figure(plt, curves: dict, path: str):
    fig, axes = plt.subplots(1, len(curves), figsize=(4.0 * len(curves), 3.4))
    if len(curves) == 1:
        axes = [axes]
    for ax, (label, curve) in zip(axes, curves.items()):
        ax.plot(curve.abscissa, curve.F)
        ax.set_xlabel(label)
        ax.set_ylabel("fragility [nats]")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def _heatmap_figure(plt, surface, path: str):
    fig, ax = plt.subplots(figsize=(6.4, 5.0))
    mesh = ax.pcolormesh(surface.l_axis, surface.l0_axis, surface.F_grid,
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="fragility [nats]")
    ax.set_xlabel("effective length l [m]")
    ax.set_ylabel("fixation point l0 [m]")
    ax.set_title("fragility over (l, l0)")
    fig.tight_layout()
    _save(fig, path)


def _sim_figure(plt, traj, spec, path: str):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.4))
    ax1.plot(traj.t, traj.z, lw=0.7, label="z (tracked point)")
    ax1.plot(traj.t, traj.theta, lw=0.7, label="theta")
    ax1.set_xlabel("t [s]")
    ax1.legend(loc="upper right")
    ax1.grid(True, alpha=0.3)
    keep = spec.freqs > 0.0
    ax2.loglog(spec.freqs[keep], spec.power[keep], lw=0.8)
    ax2.set_xlabel("frequency [Hz]")
    ax2.set_ylabel("PSD of z")
    ax2.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def write_report(params: PendulumParams, tau: float, outdir: str,
                 quick: bool = False, threads: int = 1) -> list[str]:
    """Write the full bundle into outdir; returns the file names written.

    quick skips the expensive parts (stability test, time simulation, PSD).
    The demo compensator targets the reference plant; for other parameters the
    demo loop may be unstable, which the summary and the trajectory's diverged
    flag then record.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []

    def emit(name: str, text: str):
        _write(os.path.join(outdir, name), text)
        written.append(name)

    plant = params
    l = plant.stick_length
    pz = poles_zeros(plant, Orientation.UPRIGHT)
    p, q = rhp_pole_zero(plant)
    try:
        frag = fragility(plant, tau)
        F, singular = frag.F, False
    except FragilitySingularityError:
        F, singular = None, True

    demo = DelayLoop(plant=plant_tf(plant, Orientation.UPRIGHT),
                     controller=DEMO_COMPENSATOR, delay=DEMO_DELAY)
    omegas = default_omega_grid()
    resp_s, resp_t = loop_response(demo, omegas)
    emit("freq_response.csv", frequency_response_csv(resp_t))

    curves = {}
    curves["effective length l [m]"] = fragility_curve(SweepSpec(
        vary=Vary.STICK_LENGTH, lo=0.2 * l, hi=2.0 * l, count=80,
        params=plant, tau=tau), threads=threads)
    curves["fixation point l0 [m]"] = fragility_curve(SweepSpec(
        vary=Vary.FIXATION_POINT, lo=0.0, hi=1.5 * l, count=80,
        params=plant, tau=tau), threads=threads)
    curves["delay tau [s]"] = fragility_curve(SweepSpec(
        vary=Vary.DELAY, lo=0.0, hi=max(2.0 * tau, 0.5), count=80,
        params=plant, tau=tau), threads=threads)
    emit("fragility_vs_length.csv", curve_csv(curves["effective length l [m]"]))
    emit("fragility_vs_fixation.csv", curve_csv(curves["fixation point l0 [m]"]))
    emit("fragility_vs_delay.csv", curve_csv(curves["delay tau [s]"]))

    surface = fragility_heatmap((0.2 * l, 2.0 * l, 41), (0.05 * l, 2.2 * l, 44),
                                plant, tau, threads=threads)
    emit("heatmap.csv", heatmap_csv(surface))

    demo_stable = None
    if not quick:
        try:
            demo_stable = nyquist_stable(demo)
        except InconclusiveStabilityError:
            demo_stable = None

    traj = spec = None
    if not quick:
        sim_cfg = SimConfig(params=plant, controller=DEMO_COMPENSATOR, delay=DEMO_DELAY,
                            dt=2e-3, duration=60.0, sensor_noise_std=1e-4, seed=0)
        traj = simulate(sim_cfg)
        emit("trajectory.csv", trajectory_csv(traj))
        if not traj.diverged:
            spec = psd(traj, column="z")
            emit("spectrum.csv", spectrum_csv(spec))

    summary = {
        "params": {
            "cart_mass_kg": sig12(plant.cart_mass),
            "stick_mass_kg": sig12(plant.stick_mass),
            "stick_length_m": sig12(plant.stick_length),
            "fixation_point_m": sig12(plant.fixation_point),
            "gravity_m_s2": sig12(plant.gravity),
        },
        "delay_s": sig12(tau),
        "poles": _complex_pairs(pz.poles),
        "zeros": _complex_pairs(pz.zeros),
        "rhp_pole_rad_s": sig12(p),
        "rhp_zero_rad_s": sig12(q) if q is not None else None,
        "fragility_nats": sig12(F) if F is not None else None,
        "singular": singular,
        "demo_loop": {
            "delay_s": sig12(DEMO_DELAY),
            "stable": demo_stable,
            "sim_diverged": None if traj is None else bool(traj.diverged),
        },
    }
    emit("summary.json", json.dumps(summary, indent=2) + "\n")

    plt = _plt()
    _freq_figure(plt, resp_s, resp_t, os.path.join(outdir, "freq_response.png"))
    written.append("freq_response.png")
    _curves_figure(plt, curves, os.path.join(outdir, "fragility_curves.png"))
    written.append("fragility_curves.png")
    _heatmap_figure(plt, surface, os.path.join(outdir, "heatmap.png"))
    written.append("heatmap.png")
    if traj is not None and spec is not None:
        _sim_figure(plt, traj, spec, os.path.join(outdir, "simulation.png"))
        written.append("simulation.png")
    return written
