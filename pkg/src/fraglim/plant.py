"""Linearized cart-pendulum plant.

Physical inputs are a person (cart) of mass M balancing a stick of point mass
m and length l, watching the stick at height l0 (the fixation point). The
as-measured rigid-body quantities convert to these effective point-mass
values via effective_params. The upright orientation takes the top sign of
every +/- pair below; downward takes the bottom sign.

Open-loop transfer function from force to watched displacement:

    P(s) = ((l - l0)*s^2 -/+ g) / (s^2 * (M*l*s^2 -/+ (M+m)*g))
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .lti import RationalTF


class Orientation(enum.Enum):
    UPRIGHT = "up"
    DOWNWARD = "down"


@dataclass(frozen=True)
class RawParams:
    """As-measured quantities before the point-mass conversion."""

    human_mass: float
    stick_mass: float
    stick_length: float
    fixation_point: float
    gravity: float = 9.81

    def __post_init__(self):
        for name in ("human_mass", "stick_mass", "stick_length", "gravity"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ParameterError("%s must be > 0, got %r" % (name, v))
        if not self.fixation_point >= 0.0:
            raise ParameterError("fixation_point must be >= 0, got %r" % (self.fixation_point,))


@dataclass(frozen=True)
class PendulumParams:
    """Effective parameters of the linearized cart-pendulum."""

    cart_mass: float
    stick_mass: float
    stick_length: float
    fixation_point: float
    gravity: float = 9.81

    def __post_init__(self):
        if not self.cart_mass > 0.0:
            raise ParameterError("cart_mass must be > 0, got %r" % (self.cart_mass,))
        # stick_mass 0 is allowed: it is the mass-ratio -> 0 limit used by sweeps
        if not self.stick_mass >= 0.0:
            raise ParameterError("stick_mass must be >= 0, got %r" % (self.stick_mass,))
        if not self.stick_length > 0.0:
            raise ParameterError("stick_length must be > 0, got %r" % (self.stick_length,))
        if not self.fixation_point >= 0.0:
            raise ParameterError("fixation_point must be >= 0, got %r" % (self.fixation_point,))
        if not self.gravity > 0.0:
            raise ParameterError("gravity must be > 0, got %r" % (self.gravity,))


@dataclass(frozen=True, eq=False)
class PoleZeroSet:
    """Plant poles and zeros; the double pole at the origin is kept explicit."""

    poles: np.ndarray
    zeros: np.ndarray


@dataclass(frozen=True, eq=False)
class StateSpaceUp:
    """Upright state-space form, state (x, xdot, theta, thetadot).

    A is 4x4, B is 4x1 (force input), C_z is 1x4 and reads the watched point
    z = x + l0*theta.
    """

    A: np.ndarray
    B: np.ndarray
    C_z: np.ndarray


def effective_params(raw: RawParams) -> PendulumParams:
    """Point-mass conversion: m = 0.75*m', M = 0.25*m' + M', l = (2/3)*l'."""
    return PendulumParams(
        cart_mass=0.25 * raw.stick_mass + raw.human_mass,
        stick_mass=0.75 * raw.stick_mass,
        stick_length=(2.0 / 3.0) * raw.stick_length,
        fixation_point=raw.fixation_point,
        gravity=raw.gravity,
    )


def plant_tf(params: PendulumParams, orient: Orientation = Orientation.UPRIGHT) -> RationalTF:
    """Open-loop plant; upright takes the top sign."""
    M, m = params.cart_mass, params.stick_mass
    l, l0, g = params.stick_length, params.fixation_point, params.gravity
    sgn = -1.0 if orient is Orientation.UPRIGHT else 1.0
    num = np.array([l - l0, 0.0, sgn * g])
    den = np.array([M * l, 0.0, sgn * (M + m) * g, 0.0, 0.0])
    return RationalTF(num, den)


def poles_zeros(params: PendulumParams, orient: Orientation = Orientation.UPRIGHT) -> PoleZeroSet:
    """Closed-form pole/zero sets for every orientation and l0 regime."""
    M, m = params.cart_mass, params.stick_mass
    l, l0, g = params.stick_length, params.fixation_point, params.gravity
    pmag = math.sqrt((M + m) * g / (M * l))
    up = orient is Orientation.UPRIGHT
    pr = pmag if up else 1j * pmag
    poles = np.array([0.0, 0.0, pr, -pr], dtype=complex)
    if l0 == l:
        zeros = np.zeros(0, dtype=complex)
    elif l0 < l:
        zmag = math.sqrt(g / (l - l0))
        zr = zmag if up else 1j * zmag
        zeros = np.array([zr, -zr], dtype=complex)
    else:
        zmag = math.sqrt(g / (l0 - l))
        zr = 1j * zmag if up else zmag
        zeros = np.array([zr, -zr], dtype=complex)
    return PoleZeroSet(poles=poles, zeros=zeros)


def rhp_pole_zero(params: PendulumParams) -> tuple[float, float | None]:
    """Upright RHP pole p and, when l0 < l, the RHP zero q."""
    M, m = params.cart_mass, params.stick_mass
    l, l0, g = params.stick_length, params.fixation_point, params.gravity
    p = math.sqrt((M + m) * g / (M * l))
    q = math.sqrt(g / (l - l0)) if l0 < l else None
    return p, q


def state_space_up(params: PendulumParams) -> StateSpaceUp:
    """Dense upright realization; C_z(sI-A)^-1 B reproduces plant_tf."""
    M, m = params.cart_mass, params.stick_mass
    l, l0, g = params.stick_length, params.fixation_point, params.gravity
    A = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, -m * g / M, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, (M + m) * g / (M * l), 0.0],
    ])
    B = np.array([[0.0], [1.0 / M], [0.0], [-1.0 / (M * l)]])
    C_z = np.array([[1.0, 0.0, l0, 0.0]])
    return StateSpaceUp(A=A, B=B, C_z=C_z)
