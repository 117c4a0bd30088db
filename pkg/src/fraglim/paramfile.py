"""Flat key-value parameter files.

Plant files carry the as-measured keys; CLI flags override whatever a file
sets. Simulation configs reuse the same format with extra keys. Lines are
'key = value', '#' starts a comment, blank lines are ignored, unknown keys
are rejected by name.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError
from .lti import RationalTF
from .plant import PendulumParams, RawParams, effective_params
from .timesim import SimConfig

PLANT_KEYS = ("human_mass", "stick_mass", "stick_length_actual",
              "fixation_point", "gravity", "delay")
SIM_KEYS = ("dt", "duration", "sensor_noise_std", "actuation_noise_std", "seed",
            "x0", "xdot0", "theta0", "thetadot0", "controller_num", "controller_den")
_INT_KEYS = ("seed",)
_LIST_KEYS = ("controller_num", "controller_den")


def parse_config(text: str, allow_sim_keys: bool = False) -> dict:
    """Parse key-value text into a dict; values typed per key."""
    allowed = PLANT_KEYS + SIM_KEYS if allow_sim_keys else PLANT_KEYS
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError("line %d is not 'key = value': %r" % (lineno, raw))
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ParameterError("unknown key %r on line %d" % (key, lineno))
        if key in out:
            raise ParameterError("duplicate key %r on line %d" % (key, lineno))
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _LIST_KEYS:
                out[key] = [float(v.strip()) for v in value.split(",")]
            else:
                out[key] = float(value)
        except ValueError:
            raise ParameterError("value for %r on line %d does not parse: %r"
                                 % (key, lineno, value)) from None
    return out


def read_config(path, allow_sim_keys: bool = False) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), allow_sim_keys=allow_sim_keys)


def raw_from_config(cfg: dict) -> RawParams:
    missing = [k for k in ("human_mass", "stick_mass", "stick_length_actual", "fixation_point")
               if k not in cfg]
    if missing:
        raise ParameterError("config is missing required key(s): %s" % (", ".join(missing),))
    return RawParams(
        human_mass=cfg["human_mass"],
        stick_mass=cfg["stick_mass"],
        stick_length=cfg["stick_length_actual"],
        fixation_point=cfg["fixation_point"],
        gravity=cfg.get("gravity", 9.81),
    )


def _raw_equivalent(params: PendulumParams) -> RawParams:
    # inverse of the point-mass conversion; exact up to float rounding
    stick_mass = params.stick_mass / 0.75
    human_mass = params.cart_mass - 0.25 * stick_mass
    if not (stick_mass > 0.0 and human_mass > 0.0):
        raise ParameterError(
            "effective masses M=%r m=%r have no positive as-measured equivalent"
            % (params.cart_mass, params.stick_mass))
    return RawParams(human_mass=human_mass, stick_mass=stick_mass,
                     stick_length=1.5 * params.stick_length,
                     fixation_point=params.fixation_point, gravity=params.gravity)


def sim_config_text(cfg: SimConfig) -> str:
    """Serialize a SimConfig to the shared key-value format."""
    raw = _raw_equivalent(cfg.params)
    x0, xdot0, theta0, thetadot0 = cfg.initial_state
    # repr of a Python float round-trips bit-exactly; numpy scalars do not
    lines = [
        "human_mass = %r" % (float(raw.human_mass),),
        "stick_mass = %r" % (float(raw.stick_mass),),
        "stick_length_actual = %r" % (float(raw.stick_length),),
        "fixation_point = %r" % (float(raw.fixation_point),),
        "gravity = %r" % (float(raw.gravity),),
        "delay = %r" % (float(cfg.delay),),
        "dt = %r" % (float(cfg.dt),),
        "duration = %r" % (float(cfg.duration),),
        "sensor_noise_std = %r" % (float(cfg.sensor_noise_std),),
        "actuation_noise_std = %r" % (float(cfg.actuation_noise_std),),
        "seed = %d" % (cfg.seed,),
        "x0 = %r" % (float(x0),),
        "xdot0 = %r" % (float(xdot0),),
        "theta0 = %r" % (float(theta0),),
        "thetadot0 = %r" % (float(thetadot0),),
        "controller_num = %s" % (", ".join(repr(float(c)) for c in cfg.controller.num),),
        "controller_den = %s" % (", ".join(repr(float(c)) for c in cfg.controller.den),),
    ]
    return "\n".join(lines) + "\n"


def sim_config_from_dict(cfg: dict) -> SimConfig:
    """Build a SimConfig from a parsed extended config dict."""
    for key in ("dt", "duration", "controller_num", "controller_den"):
        if key not in cfg:
            raise ParameterError("sim config is missing required key %r" % (key,))
    params = effective_params(raw_from_config(cfg))
    return SimConfig(
        params=params,
        controller=RationalTF(cfg["controller_num"], cfg["controller_den"]),
        delay=cfg.get("delay", 0.0),
        dt=cfg["dt"],
        duration=cfg["duration"],
        sensor_noise_std=cfg.get("sensor_noise_std", 0.0),
        actuation_noise_std=cfg.get("actuation_noise_std", 0.0),
        seed=cfg.get("seed", 0),
        initial_state=(cfg.get("x0", 0.0), cfg.get("xdot0", 0.0),
                       cfg.get("theta0", 0.0), cfg.get("thetadot0", 0.0)),
    )
