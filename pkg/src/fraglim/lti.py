"""Rational-plus-delay transfer-function arithmetic.

Point evaluation of rational functions, frequency responses of the sensitivity
S = 1/(1+L) and complementary sensitivity T = L/(1+L) of a delayed loop
L = P*C*exp(-tau*s), all-pass / minimum-phase factor values at right-half-plane
points, and a refined H-infinity estimate.

Coefficient convention: descending powers of s, matching numpy.polyval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClosedLoopPoleError, FragilitySingularityError, ParameterError, PoleEvaluationError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class RationalTF:
    """Real-coefficient rational function, coefficients in descending powers."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        den = np.trim_zeros(den, "f")
        if den.size == 0:
            raise ParameterError("den must not be identically zero")
        num = np.trim_zeros(num, "f")
        if num.size == 0:
            num = np.zeros(1)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def degree(self):
        return self.den.size - 1

    def is_proper(self):
        return self.num.size <= self.den.size


def constant_tf(gain: float) -> RationalTF:
    return RationalTF(np.array([float(gain)]), np.array([1.0]))


@dataclass(frozen=True)
class DelayLoop:
    """Plant P, controller C, and loop delay; S and T derive from this."""

    plant: RationalTF
    controller: RationalTF
    delay: float

    def __post_init__(self):
        if not self.delay >= 0.0:
            raise ParameterError("delay must be >= 0, got %r" % (self.delay,))


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if omegas.shape != values.shape or omegas.ndim != 1:
            raise ParameterError("omegas and values must be 1-d arrays of equal length")
        if omegas.size >= 2 and not np.all(np.diff(omegas) > 0.0):
            raise ParameterError("omegas must be strictly increasing")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class FactorValues:
    """All-pass and minimum-phase factor values of T at one point.

    t_value == ap_value * mp_value by construction.
    """

    t_value: complex
    ap_value: complex
    mp_value: complex


def default_omega_grid(lo: float = 1e-2, hi: float = 1e3, points: int = 2000) -> np.ndarray:
    """Log grid dense enough to resolve the low-frequency peak and delay wraps."""
    if not (0.0 < lo < hi) or points < 2:
        raise ParameterError("grid requires 0 < lo < hi and points >= 2")
    return np.geomspace(lo, hi, points)


def eval_rational(tf: RationalTF, s: complex) -> complex:
    """num(s)/den(s) by Horner evaluation; rejects points sitting on a pole."""
    s = complex(s)
    if tf.den.size > 1:
        roots = np.roots(tf.den)
        d = np.abs(roots - s)
        k = int(np.argmin(d))
        if d[k] < 1e-12:
            raise PoleEvaluationError(
                "s=%r is within 1e-12 of the pole %r" % (s, complex(roots[k])),
                root=complex(roots[k]),
            )
    return complex(np.polyval(tf.num, s) / np.polyval(tf.den, s))


def _loop_products(loop: DelayLoop, s):
    """Numerator and denominator products of L, delay folded into the numerator.

    L = a/b with a = Pnum*Cnum*exp(-tau*s) and b = Pden*Cden. Working with the
    products keeps plant poles from ever materializing as inf.
    """
    s = np.asarray(s, dtype=complex)
    a = np.polyval(loop.plant.num, s) * np.polyval(loop.controller.num, s)
    a = a * np.exp(-loop.delay * s)
    b = np.polyval(loop.plant.den, s) * np.polyval(loop.controller.den, s)
    return a, b


def st_at(loop: DelayLoop, s):
    """S and T of the loop at complex points s (scalar or array).

    Where |L| <= 1 this is the direct form S = 1/(1+L), T = L*S; where |L| > 1
    it switches to the reciprocal form T = 1/(1+1/L), S = (1/L)*T so that
    accuracy survives near plant poles (L large, T -> 1 smoothly).
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    a, b = _loop_products(loop, s_arr)
    w = b + a
    bad = np.abs(w) <= 1e-12 * np.maximum(np.abs(a), np.abs(b))
    if np.any(bad):
        k = int(np.nonzero(bad)[0][0])
        raise ClosedLoopPoleError("1 + L = 0 within 1e-12 at s=%r" % (complex(s_arr[k]),))
    S = np.empty_like(w)
    T = np.empty_like(w)
    big = np.abs(a) > np.abs(b)
    small = ~big
    Ls = a[small] / b[small]
    S[small] = 1.0 / (1.0 + Ls)
    T[small] = Ls * S[small]
    Linv = b[big] / a[big]
    T[big] = 1.0 / (1.0 + Linv)
    S[big] = Linv * T[big]
    if np.isscalar(s) or np.ndim(s) == 0:
        return complex(S[0]), complex(T[0])
    return S, T


def loop_response(loop: DelayLoop, omegas) -> tuple[FrequencyResponse, FrequencyResponse]:
    """Frequency responses of S and T over a strictly increasing omega grid."""
    omegas = np.asarray(omegas, dtype=float)
    _reject_axis_poles(loop, omegas)
    S, T = st_at(loop, 1j * omegas)
    return FrequencyResponse(omegas, S), FrequencyResponse(omegas, T)


def _reject_axis_poles(loop: DelayLoop, omegas):
    # pre: no omega may coincide with an imaginary-axis pole of P or C
    for tf in (loop.plant, loop.controller):
        if tf.den.size <= 1:
            continue
        roots = np.roots(tf.den)
        axis = roots[np.abs(roots.real) <= 1e-9 * np.maximum(1.0, np.abs(roots))]
        for r in axis:
            if np.any(np.abs(omegas - r.imag) < 1e-12):
                raise PoleEvaluationError(
                    "omega=%r coincides with an imaginary-axis pole of the loop" % (r.imag,),
                    root=complex(r),
                )


def allpass_minphase_at(loop: DelayLoop, p: float, q, s: complex) -> FactorValues:
    """Values of the all-pass and minimum-phase factors of T at one point.

    The all-pass factor collects the RHP zero q (if present) and the delay:
    ((s-q)/(s+q))*exp(-tau*s), sign-normalized to be positive at s=p so the
    minimum-phase value at p comes out as the positive gain exp(F). The
    minimum-phase value is recovered from mp = T(s)/ap.
    """
    s = complex(s)
    if s.real < 0.0:
        raise ParameterError("s must have Re(s) >= 0, got %r" % (s,))
    if not p > 0.0:
        raise ParameterError("p must be > 0, got %r" % (p,))
    if q is not None:
        if not q > 0.0:
            raise ParameterError("q must be > 0 when present, got %r" % (q,))
        if abs(q - p) <= 1e-12 * max(p, q) and abs(s - p) <= 1e-12 * p:
            raise FragilitySingularityError(
                "q = p = %r: factorization value at s=p is unbounded" % (p,))
        if abs(s - q) <= 1e-12 * max(1.0, q):
            raise ParameterError("s=%r sits on the all-pass zero q; mp value is 0/0 there" % (s,))
    ap = np.exp(-loop.delay * s)
    if q is not None:
        flip = 1.0 if p > q else -1.0
        ap = flip * (s - q) / (s + q) * ap
    _, T = st_at(loop, s)
    return FactorValues(t_value=complex(T), ap_value=complex(ap), mp_value=complex(T / ap))


def golden_max(f, lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Golden-section maximizer of a scalar function on [lo, hi].

    Returns (argmax, max). tol is absolute in the abscissa.
    """
    a, b = float(lo), float(hi)
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def hinf_estimate(resp: FrequencyResponse, evaluator=None, tol: float = 1e-9) -> float:
    """Lower estimate of sup_omega |value|, guaranteed >= the grid maximum.

    When an evaluator (omega -> complex) is supplied the bracketing grid
    interval around the sampled argmax is refined by golden-section search;
    without one the grid maximum is returned as-is. Reported as an estimate,
    never claimed exact.
    """
    if resp.omegas.size == 0:
        raise ParameterError("frequency response is empty")
    mags = np.abs(resp.values)
    k = int(np.argmax(mags))
    best = float(mags[k])
    if evaluator is None or resp.omegas.size < 2:
        return best
    lo = resp.omegas[max(k - 1, 0)]
    hi = resp.omegas[min(k + 1, resp.omegas.size - 1)]
    if hi <= lo:
        return best
    _, refined = golden_max(lambda om: abs(evaluator(om)), lo, hi, tol=tol)
    return max(best, float(refined))


def frequency_response_csv(resp: FrequencyResponse) -> str:
    """CSV serialization: omega_rad_s,re,im,mag,mag_db,phase_rad."""
    lines = ["omega_rad_s,re,im,mag,mag_db,phase_rad"]
    with np.errstate(divide="ignore"):
        for om, v in zip(resp.omegas, resp.values):
            mag = abs(v)
            mag_db = 20.0 * np.log10(mag) if mag > 0.0 else -math.inf
            lines.append("%.12g,%.12g,%.12g,%.12g,%.12g,%.12g"
                         % (om, v.real, v.imag, mag, mag_db, np.angle(v)))
    return "\n".join(lines) + "\n"
