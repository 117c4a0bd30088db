"""Seeded stochastic simulation of the upright closed loop, plus spectra.

Fixed-step RK4 over the joint state [plant(4); controller(nc)], with the
measurement delayed through a ring buffer (linear interpolation between
samples) and independent Gaussian sensor / actuation noise held constant over
each integration step. The noise discretizes the continuous disturbance
inputs, which are otherwise unspecified as processes.

Gaussian draws use a counter-based Philox generator keyed by the seed and a
Box-Muller transform, so any implementation of the same recipe agrees in
distribution; bit-level determinism is promised only within this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from .errors import ParameterError, RealizationError
from .lti import RationalTF
from .plant import PendulumParams, state_space_up

DIVERGENCE_LIMIT = 1e6  # metres of watched-point excursion


@dataclass(frozen=True)
class SimConfig:
    params: PendulumParams
    controller: RationalTF
    delay: float
    dt: float
    duration: float
    sensor_noise_std: float = 0.0
    actuation_noise_std: float = 0.0
    seed: int = 0
    initial_state: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ParameterError("dt must be > 0, got %r" % (self.dt,))
        if not self.delay >= 0.0:
            raise ParameterError("delay must be >= 0, got %r" % (self.delay,))
        if self.delay > 0.0 and self.dt > self.delay / 10.0 * (1.0 + 1e-12):
            raise ParameterError(
                "dt=%r violates dt <= delay/10 (delay=%r); the interpolated "
                "buffer needs that margin" % (self.dt, self.delay))
        if not self.duration >= 100.0 * self.dt:
            raise ParameterError("duration must be >= 100*dt, got %r" % (self.duration,))
        for name in ("sensor_noise_std", "actuation_noise_std"):
            if not getattr(self, name) >= 0.0:
                raise ParameterError("%s must be >= 0" % (name,))
        if len(self.initial_state) != 4:
            raise ParameterError("initial_state must be (x, xdot, theta, thetadot)")


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    y: np.ndarray
    u: np.ndarray
    diverged: bool = False


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    power: np.ndarray


def tf_to_ss(tf: RationalTF):
    """Controllable-canonical realization (A, B, C, D) of a proper TF."""
    if not tf.is_proper():
        raise RealizationError(
            "controller numerator degree %d exceeds denominator degree %d"
            % (tf.num.size - 1, tf.den.size - 1))
    den, num = tf.den, tf.num
    n = den.size - 1
    a = den[1:] / den[0]
    b = np.zeros(n + 1)
    b[n + 1 - num.size:] = num / den[0]
    D = b[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0), np.zeros(0), D
    A = np.zeros((n, n))
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    A[0, :] = -a
    B = np.zeros(n)
    B[0] = 1.0
    C = b[1:] - a * b[0]
    return A, B, C, D


def _noise_draws(seed: int, nsteps: int, sensor_std: float, actuation_std: float):
    gen = np.random.Generator(np.random.Philox(key=seed))
    U = gen.random((nsteps + 1, 2))
    # Box-Muller; log1p(-U) keeps U=0 finite
    R = np.sqrt(-2.0 * np.log1p(-U[:, 0]))
    sensor = sensor_std * R * np.cos(2.0 * math.pi * U[:, 1])
    actuation = actuation_std * R * np.sin(2.0 * math.pi * U[:, 1])
    return sensor, actuation


def simulate(cfg: SimConfig) -> Trajectory:
    """Integrate the delayed noisy loop; sets diverged instead of raising.

    The feedback is u(t) = -C[y](t - delay) + r(t) with y = z + n. Before
    t = 0 the buffered measurement is held at the noiseless initial z.
    """
    ss = state_space_up(cfg.params)
    Ap, Bp, Cz = ss.A, ss.B.ravel(), ss.C_z.ravel()
    Ac, Bc, Cc, Dc = tf_to_ss(cfg.controller)
    nc = Ac.shape[0]
    dt, tau = cfg.dt, cfg.delay
    nsteps = int(round(cfg.duration / dt))
    noise_n, noise_r = _noise_draws(cfg.seed, nsteps, cfg.sensor_noise_std,
                                    cfg.actuation_noise_std)

    X = np.zeros(4 + nc)
    X[:4] = cfg.initial_state
    z0 = float(Cz @ X[:4])
    ybuf = np.empty(nsteps + 1)
    t_arr = np.arange(nsteps + 1) * dt
    xs = np.empty(nsteps + 1)
    ths = np.empty(nsteps + 1)
    zs = np.empty(nsteps + 1)
    ys = np.empty(nsteps + 1)
    us = np.empty(nsteps + 1)
    diverged = False
    cut = nsteps + 1

    def delayed_y(t, k):
        td = t - tau
        if td <= 0.0:
            return z0
        j = int(td / dt)
        if j >= k:
            j = k - 1
        frac = (td - j * dt) / dt
        if j + 1 <= k:
            return ybuf[j] * (1.0 - frac) + ybuf[j + 1] * frac
        return ybuf[j]

    for k in range(nsteps + 1):
        z = float(Cz @ X[:4])
        yk = z + noise_n[k]
        ybuf[k] = yk
        yd0 = yk if tau == 0.0 else delayed_y(k * dt, k)
        fb = (Cc @ X[4:] + Dc * yd0) if nc else Dc * yd0
        u0 = -fb + noise_r[k]
        xs[k], ths[k], zs[k], ys[k], us[k] = X[0], X[2], z, yk, u0
        if not np.isfinite(z) or abs(z) > DIVERGENCE_LIMIT:
            diverged = True
            cut = k + 1
            break
        if k == nsteps:
            break

        def deriv(t, Xs):
            yd = (float(Cz @ Xs[:4]) + noise_n[k]) if tau == 0.0 else delayed_y(t, k)
            ctrl = (Cc @ Xs[4:] + Dc * yd) if nc else Dc * yd
            u = -ctrl + noise_r[k]
            dxp = Ap @ Xs[:4] + Bp * u
            if nc:
                return np.concatenate([dxp, Ac @ Xs[4:] + Bc * yd])
            return dxp

        t0 = k * dt
        k1 = deriv(t0, X)
        k2 = deriv(t0 + dt / 2.0, X + dt / 2.0 * k1)
        k3 = deriv(t0 + dt / 2.0, X + dt / 2.0 * k2)
        k4 = deriv(t0 + dt, X + dt * k3)
        X = X + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return Trajectory(t=t_arr[:cut], x=xs[:cut], theta=ths[:cut], z=zs[:cut],
                      y=ys[:cut], u=us[:cut], diverged=diverged)


_COLUMNS = ("x", "theta", "z", "y", "u")


def psd(traj: Trajectory, column: str = "z", segment_len: int = 4096,
        overlap: float = 0.5) -> Spectrum:
    """Segment-averaged one-sided periodogram (Hann window) of one column."""
    if column not in _COLUMNS:
        raise ParameterError("column must be one of %r, got %r" % (_COLUMNS, column))
    data = getattr(traj, column)
    if traj.t.size < 2:
        raise ParameterError("trajectory too short for spectral estimation")
    if segment_len > data.size:
        raise ParameterError(
            "segment_len=%r exceeds the %d available samples" % (segment_len, data.size))
    if not 0.0 <= overlap <= 0.9:
        raise ParameterError("overlap must be in [0, 0.9], got %r" % (overlap,))
    dt = float(traj.t[1] - traj.t[0])
    freqs, power = welch(data, fs=1.0 / dt, window="hann", nperseg=segment_len,
                         noverlap=int(round(overlap * segment_len)), detrend=False)
    return Spectrum(freqs=freqs, power=power)


def trajectory_csv(traj: Trajectory) -> str:
    lines = ["t_s,x_m,theta_rad,z_m,y_m,u_N"]
    for i in range(traj.t.size):
        lines.append("%.12g,%.12g,%.12g,%.12g,%.12g,%.12g"
                     % (traj.t[i], traj.x[i], traj.theta[i], traj.z[i],
                        traj.y[i], traj.u[i]))
    return "\n".join(lines) + "\n"


def parse_trajectory_csv(text: str) -> Trajectory:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].strip() != "t_s,x_m,theta_rad,z_m,y_m,u_N":
        raise ParameterError("trajectory CSV must start with 't_s,x_m,theta_rad,z_m,y_m,u_N'")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.ndim != 2 or data.shape[1] != 6 or data.shape[0] < 2:
        raise ParameterError("trajectory CSV needs at least two 6-column rows")
    return Trajectory(t=data[:, 0], x=data[:, 1], theta=data[:, 2], z=data[:, 3],
                      y=data[:, 4], u=data[:, 5])


def spectrum_csv(spec: Spectrum) -> str:
    lines = ["freq_hz,power"]
    for f, pw in zip(spec.freqs, spec.power):
        lines.append("%.12g,%.12g" % (f, pw))
    return "\n".join(lines) + "\n"
