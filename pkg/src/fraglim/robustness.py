"""Achievable-robustness computations for the delayed cart-pendulum loop.

The fragility number F lower-bounds both ln of the H-infinity norm of T and
the Poisson-weighted Bode integral of ln|T| for any internally stable loop:

    F = tau*p                                 (no RHP zero, l0 >= l)
    F = tau*p + ln((p+q)/|p-q|)               (RHP zero q, l0 < l)

This module evaluates F in closed form, integrates ln|T| against the Poisson
kernel of a RHP point, computes the waterbed band constants c1/c2 and checks
the band inequality, verifies the interpolation identities T(p)=1 / S(q)=1 on
stable loops, decides loop stability by a sampled Nyquist winding number, and
builds a synthetic T whose Bode integral is known exactly (the oracle used by
the quadrature and bound tests).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    FragilitySingularityError,
    InconclusiveStabilityError,
    IntegrandSingularityError,
    InterpolationNotApplicableError,
    ParameterError,
    PoleEvaluationError,
)
from .lti import DelayLoop, FrequencyResponse, default_omega_grid, golden_max, hinf_estimate, st_at
from .plant import PendulumParams, rhp_pole_zero


class Regime(enum.Enum):
    NO_RHP_ZERO = "no_rhp_zero"
    RHP_ZERO = "rhp_zero"


@dataclass(frozen=True)
class FragilityResult:
    """F with its constituents; q is None in the no-RHP-zero regime."""

    F: float
    p: float
    q: float | None
    regime: Regime


@dataclass(frozen=True)
class PoissonKernel:
    """Kernel of the RHP point sigma0 + j*omega0; total mass over R is 1."""

    sigma0: float
    omega0: float = 0.0

    def __post_init__(self):
        if not self.sigma0 > 0.0:
            raise ParameterError("sigma0 must be > 0, got %r" % (self.sigma0,))


@dataclass(frozen=True)
class QuadratureConfig:
    """Gauss-Legendre setup for the Bode integral.

    order is the node count per panel. The tangent substitution leaves
    log-type integrand singularities at the interval endpoints, so panels are
    graded dyadically toward both ends; grading_depth halvings reach widths
    of (pi/2)*2**-grading_depth.
    """

    order: int = 32
    grading_depth: int = 40

    def __post_init__(self):
        if self.order < 2:
            raise ParameterError("order must be >= 2, got %r" % (self.order,))
        if self.grading_depth < 0:
            raise ParameterError("grading_depth must be >= 0, got %r" % (self.grading_depth,))


@dataclass(frozen=True)
class WaterbedReport:
    """Band constants and the inequality c1*ln M1 + c2*ln M2 >= F."""

    omega1: float
    omega2: float
    c1: float
    c2: float
    M1: float
    M2: float
    F: float
    lhs: float
    holds: bool
    inconclusive_tight: bool


@dataclass(frozen=True)
class InterpolationReport:
    """Deviations from T(p)=1 and S(q)=1 on a stable loop."""

    p: float
    q: float | None
    t_at_p: complex
    t_dev: float
    s_at_q: complex | None
    s_dev: float | None
    t_at_q: complex | None
    s_check_skipped: bool


@dataclass(frozen=True)
class NyquistResult:
    stable: bool
    winding: int
    rhp_poles: int
    samples: int


@dataclass(frozen=True)
class ConstructedT:
    """Synthetic T(s) = K/(s/a+1)^n times the all-pass factor of (q, tau).

    K is chosen so T(p) = 1, which pins the minimum-phase gain at p to
    exactly exp(F); log_mp_at_p therefore equals the Bode integral of ln|T|
    and the ln of the true H-infinity norm lower bound.
    """

    p: float
    q: float | None
    tau: float
    a: float
    n: int
    K: float

    def _ap(self, s):
        ap = np.exp(-self.tau * s)
        if self.q is not None:
            flip = 1.0 if self.p > self.q else -1.0
            ap = flip * (s - self.q) / (s + self.q) * ap
        return ap

    def eval(self, s):
        s = np.asarray(s, dtype=complex)
        return self.K / (s / self.a + 1.0) ** self.n * self._ap(s)

    @property
    def log_mp_at_p(self) -> float:
        return math.log(self.K) - self.n * math.log(self.p / self.a + 1.0)


def fragility(params: PendulumParams, tau: float) -> FragilityResult:
    """Closed-form F; raises at the q = p singularity instead of saturating."""
    if not tau >= 0.0:
        raise ParameterError("tau must be >= 0, got %r" % (tau,))
    p, q = rhp_pole_zero(params)
    if q is None:
        return FragilityResult(F=tau * p, p=p, q=None, regime=Regime.NO_RHP_ZERO)
    if abs(q - p) <= 1e-12 * max(p, q):
        raise FragilitySingularityError(
            "q = p = %.12g (fixation_point=%r): F is unbounded here"
            % (p, params.fixation_point))
    F = tau * p + math.log((p + q) / abs(p - q))
    return FragilityResult(F=F, p=p, q=q, regime=Regime.RHP_ZERO)


def poisson_weight(kernel: PoissonKernel, omega: float) -> float:
    """(1/pi) * sigma0 / (sigma0^2 + (omega - omega0)^2)."""
    d = omega - kernel.omega0
    return kernel.sigma0 / (math.pi * (kernel.sigma0 ** 2 + d * d))


def _eval_T_array(T_eval, omegas: np.ndarray) -> np.ndarray:
    """Call T_eval on an array if it supports that, else point by point."""
    try:
        vals = np.asarray(T_eval(omegas), dtype=complex)
        if vals.shape == omegas.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([complex(T_eval(float(w))) for w in omegas])


def _graded_panels(quad: QuadratureConfig) -> np.ndarray:
    half = math.pi / 2.0
    right = half * (1.0 - 2.0 ** -np.arange(quad.grading_depth + 1, dtype=float))
    right = np.append(right, half)
    return np.concatenate([-right[::-1], right[1:]])


def bode_integral(T_eval, kernel: PoissonKernel, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """(1/pi) * integral of ln|T(j*omega)| against the Poisson kernel.

    Substituting omega = omega0 + sigma0*tan(phi) makes the kernel measure
    uniform in phi on (-pi/2, pi/2); composite Gauss-Legendre panels graded
    toward the endpoints absorb the log singularities the rolloff of T leaves
    there. T_eval takes omega (rad/s) and may be vectorized.
    """
    breaks = _graded_panels(quad)
    xg, wg = np.polynomial.legendre.leggauss(quad.order)
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    halfw = 0.5 * (breaks[1:] - breaks[:-1])
    phi = mids[:, None] + halfw[:, None] * xg[None, :]
    omegas = kernel.omega0 + kernel.sigma0 * np.tan(phi.ravel())
    vals = _eval_T_array(T_eval, omegas)
    if not np.all(np.isfinite(vals)):
        k = int(np.nonzero(~np.isfinite(vals))[0][0])
        raise PoleEvaluationError("T evaluated non-finite at omega=%r" % (omegas[k],))
    mags = np.abs(vals)
    if np.any(mags < 1e-300):
        k = int(np.nonzero(mags < 1e-300)[0][0])
        raise IntegrandSingularityError(
            "|T| = %r at omega=%r: log integrand is singular" % (mags[k], omegas[k]))
    integrand = np.log(mags).reshape(phi.shape)
    return float(np.sum(halfw * (integrand @ wg)) / math.pi)


def waterbed_constants(p: float, band: tuple[float, float]) -> tuple[float, float]:
    """Kernel mass c1 of [-w2,-w1] u [w1,w2] for the real RHP point p; c2 = 1 - c1."""
    omega1, omega2 = band
    if not p > 0.0:
        raise ParameterError("p must be > 0, got %r" % (p,))
    if not (0.0 < omega1 < omega2):
        raise ParameterError("band must satisfy 0 < omega1 < omega2, got %r" % (band,))
    c1 = (2.0 / math.pi) * (math.atan(omega2 / p) - math.atan(omega1 / p))
    return c1, 1.0 - c1


def waterbed_check(T_eval, p: float, band: tuple[float, float], F: float,
                   grid: np.ndarray | None = None, band_points: int = 2000,
                   tol: float = 1e-9) -> WaterbedReport:
    """Evaluate c1*ln M1 + c2*ln M2 >= F from sampled maxima of |T|.

    M1 and M2 are grid maxima refined by golden-section search, hence lower
    estimates; a verdict that lands in [F - 1e-3, F) is flagged
    inconclusive_tight rather than trusted as a violation.
    """
    omega1, omega2 = band
    c1, c2 = waterbed_constants(p, band)
    if grid is None:
        grid = default_omega_grid(min(1e-2, omega1), max(1e3, omega2), 4000)
    band_grid = np.geomspace(omega1, omega2, band_points)
    scalar_eval = lambda om: complex(_eval_T_array(T_eval, np.atleast_1d(om))[0])
    M1 = hinf_estimate(FrequencyResponse(band_grid, _eval_T_array(T_eval, band_grid)),
                       evaluator=scalar_eval)
    M2 = hinf_estimate(FrequencyResponse(grid, _eval_T_array(T_eval, grid)),
                       evaluator=scalar_eval)
    lhs = c1 * math.log(M1) + c2 * math.log(M2)
    return WaterbedReport(
        omega1=omega1, omega2=omega2, c1=c1, c2=c2, M1=M1, M2=M2, F=F, lhs=lhs,
        holds=bool(lhs >= F - tol),
        inconclusive_tight=bool(F - 1e-3 <= lhs < F),
    )


def interpolation_check(loop: DelayLoop, p: float, q: float | None = None) -> InterpolationReport:
    """Verify T(p) = 1 and, when q exists, S(q) = 1 on a stable loop.

    Both identities are evaluated through the product form of S and T, so the
    plant pole at p enters as 1/P = 0 rather than P = inf.
    """
    if not nyquist_stable(loop):
        raise InterpolationNotApplicableError(
            "loop is not closed-loop stable; T(p)=1 and S(q)=1 do not apply")
    _, t_p = st_at(loop, complex(p))
    t_dev = abs(t_p - 1.0)
    if q is None:
        return InterpolationReport(p=p, q=None, t_at_p=t_p, t_dev=t_dev,
                                   s_at_q=None, s_dev=None, t_at_q=None,
                                   s_check_skipped=True)
    s_q, t_q = st_at(loop, complex(q))
    return InterpolationReport(p=p, q=q, t_at_p=t_p, t_dev=t_dev,
                               s_at_q=s_q, s_dev=abs(s_q - 1.0), t_at_q=t_q,
                               s_check_skipped=False)


def _loop_L(loop: DelayLoop, s):
    s = np.asarray(s, dtype=complex)
    num = np.polyval(loop.plant.num, s) * np.polyval(loop.controller.num, s)
    den = np.polyval(loop.plant.den, s) * np.polyval(loop.controller.den, s)
    return num / den * np.exp(-loop.delay * s)


def _open_loop_poles(loop: DelayLoop):
    roots = []
    for tf in (loop.plant, loop.controller):
        if tf.den.size > 1:
            roots.extend(np.roots(tf.den))
    return np.asarray(roots, dtype=complex)


def nyquist_analysis(loop: DelayLoop, rho: float = 1e-4, phase_step: float = 0.1,
                     sample_cap: int = 10 ** 7) -> NyquistResult:
    """Winding number of 1 + L along the indented imaginary axis.

    Imaginary-axis poles of L get semicircular indentations of radius rho
    bulging into the RHP, so they do not count as RHP poles. The D-contour is
    closed by a clockwise arc at a radius where |L| < 0.05. Sampling is
    refined by midpoint insertion until every phase step is below phase_step;
    blowing past sample_cap raises instead of guessing.
    """
    roots = _open_loop_poles(loop)
    scale = max(1.0, float(np.max(np.abs(roots))) if roots.size else 1.0)
    if roots.size:
        reltol = 1e-9 * np.maximum(1.0, np.abs(roots))
        axis_mask = np.abs(roots.real) <= reltol
        rhp = int(np.sum(roots.real > reltol))
        centers = sorted(set(np.round(roots[axis_mask].imag, 12)))
    else:
        rhp = 0
        centers = []
    merged = []
    for c in centers:
        if merged and abs(c - merged[-1]) < 3.0 * rho:
            continue
        merged.append(c)
    centers = merged

    Omega = 100.0 * scale
    for _ in range(12):
        if max(abs(_loop_L(loop, 1j * Omega)), abs(_loop_L(loop, 2j * Omega))) < 0.05:
            break
        Omega *= 10.0
    else:
        raise InconclusiveStabilityError("|L| does not decay below 0.05 out to %r rad/s" % (Omega,))

    segs = []
    lo = -Omega
    for c in centers:
        segs.append(("axis", lo, c - rho))
        segs.append(("arc", c, None))
        lo = c + rho
    segs.append(("axis", lo, Omega))
    pts = []
    for kind, aa, bb in segs:
        if kind == "axis":
            if bb <= aa:
                continue
            t = np.linspace(aa, bb, 801)
            mag = np.geomspace(max(rho, 1e-6 * scale), max(abs(aa), abs(bb)), 1200)
            extra = np.concatenate([-mag, mag])
            t = np.unique(np.concatenate([t, extra[(extra > aa) & (extra < bb)]]))
            if loop.delay > 0.0:
                # seed the delay phase wraps so refinement starts near them
                wmax = min(max(abs(aa), abs(bb)), 50.0 * scale)
                dw = 0.5 / loop.delay
                if 0 < int(2 * wmax / dw) < 200000:
                    t2 = np.arange(-wmax, wmax, dw)
                    t = np.unique(np.concatenate([t, t2[(t2 > aa) & (t2 < bb)]]))
            pts.append(1j * t)
        else:
            th = np.linspace(-math.pi / 2.0, math.pi / 2.0, 721)
            pts.append(1j * aa + rho * np.exp(1j * th))
    th = np.linspace(math.pi / 2.0, -math.pi / 2.0, 721)
    pts.append(Omega * np.exp(1j * th))
    path = np.concatenate(pts)

    G = 1.0 + _loop_L(loop, path)
    for _ in range(80):
        if np.min(np.abs(G)) < 1e-12:
            raise InconclusiveStabilityError("contour passes through a zero of 1 + L")
        dphi = np.angle(G[1:] / G[:-1])
        bad = np.abs(dphi) >= phase_step
        widths = np.abs(path[1:] - path[:-1])
        bad &= widths > 1e-13 * np.maximum(1.0, np.abs(path[:-1]))
        if not bad.any():
            break
        if path.size > sample_cap:
            raise InconclusiveStabilityError(
                "phase refinement exceeded %d samples" % (sample_cap,))
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (path[idx] + path[idx + 1])
        path = np.insert(path, idx + 1, mids)
        G = np.insert(G, idx + 1, 1.0 + _loop_L(loop, mids))
    else:
        raise InconclusiveStabilityError("phase refinement stalled")
    winding_f = float(np.sum(np.angle(G[1:] / G[:-1]))) / (2.0 * math.pi)
    winding = int(round(winding_f))
    if abs(winding_f - winding) > 0.05:
        raise InconclusiveStabilityError("non-integer winding number %.3f" % (winding_f,))
    # ccw encirclements of 0 by 1+L must cancel the open-loop RHP poles
    return NyquistResult(stable=(winding == rhp), winding=winding, rhp_poles=rhp,
                         samples=int(path.size))


def nyquist_stable(loop: DelayLoop, rho: float = 1e-4, phase_step: float = 0.1,
                   sample_cap: int = 10 ** 7) -> bool:
    return nyquist_analysis(loop, rho=rho, phase_step=phase_step, sample_cap=sample_cap).stable


def constructed_T(p: float, q: float | None, tau: float, a: float, n: int) -> ConstructedT:
    """Build the synthetic T with T(p) = 1 and known Bode integral.

    The all-pass part is sign-normalized positive at s=p, so K > 0 and
    log_mp_at_p equals tau*p (+ ln((p+q)/|p-q|) when q is present) exactly.
    """
    if not p > 0.0:
        raise ParameterError("p must be > 0, got %r" % (p,))
    if not a > 0.0:
        raise ParameterError("a must be > 0, got %r" % (a,))
    if n < 1:
        raise ParameterError("n must be >= 1, got %r" % (n,))
    if not tau >= 0.0:
        raise ParameterError("tau must be >= 0, got %r" % (tau,))
    if q is not None:
        if not q > 0.0:
            raise ParameterError("q must be > 0 when present, got %r" % (q,))
        if abs(q - p) <= 1e-12 * max(p, q):
            raise FragilitySingularityError("q = p = %r: construction has no finite gain" % (p,))
        flip = 1.0 if p > q else -1.0
        ap_at_p = flip * (p - q) / (p + q) * math.exp(-tau * p)
    else:
        ap_at_p = math.exp(-tau * p)
    K = (p / a + 1.0) ** n / ap_at_p
    ct = ConstructedT(p=p, q=q, tau=tau, a=a, n=n, K=K)
    assert abs(ct.eval(p) - 1.0) < 1e-10
    return ct
