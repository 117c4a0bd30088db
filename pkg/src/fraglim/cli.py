"""Command-line surface.

One subcommand per analysis; parameters come from a named preset, a key-value
config file, or flags, with later sources overriding earlier ones
(preset < config < flags). Data goes to stdout or atomically to --out;
diagnostics go to stderr. Exit codes: 0 success, 2 usage error, 3 domain or
singularity error, 4 inconclusive stability.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import os
import sys
import tempfile

import numpy as np

from .errors import FraglimError, InconclusiveStabilityError
from .lti import (DelayLoop, RationalTF, constant_tf, default_omega_grid,
                  frequency_response_csv, loop_response, st_at)
from .paramfile import raw_from_config, read_config
from .plant import (Orientation, PendulumParams, effective_params, plant_tf,
                    poles_zeros, rhp_pole_zero)
from .report import DEMO_COMPENSATOR, DEMO_DELAY, sig12, write_report
from .robustness import (PoissonKernel, QuadratureConfig, bode_integral, fragility,
                         nyquist_analysis, waterbed_check)
from .sweep import (SweepSpec, curve_csv, fragility_curve, fragility_heatmap,
                    heatmap_csv, heatmap_matrix_csv)
from .timesim import SimConfig, parse_trajectory_csv, psd, simulate, spectrum_csv, trajectory_csv

PRESETS = {
    # upright balancing reference case: effective masses, unit stick, tracked
    # point at the tip, 300 ms feedback delay
    "case-study": {"M": 3.25, "m": 0.1, "l": 1.0, "l0": 1.0, "g": 9.81, "tau": 0.3},
    # masses only, geometry and delay left to flags
    "case-study-masses": {"M": 3.25, "m": 0.1},
    "gym-bar": {"M": 75.0, "m": 15.0},
}

_DB_PER_NAT = 20.0 / math.log(10.0)


class Command(enum.Enum):
    POLES_ZEROS = "poleszeros"
    FRAGILITY = "fragility"
    SWEEP = "sweep"
    HEATMAP = "heatmap"
    FREQ_RESP = "freqresp"
    BODE_INTEGRAL = "bodeintegral"
    WATERBED = "waterbed"
    STABILITY = "stability"
    SIMULATE = "simulate"
    PSD = "psd"
    REPORT = "report"


class _UsageError(Exception):
    pass


def _formatter(prog):
    # fixed width so --help output does not depend on the terminal
    return argparse.HelpFormatter(prog, width=96, max_help_position=26)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    dest = os.path.abspath(out)
    fd, tmp = tempfile.mkstemp(prefix=".fraglim-", dir=os.path.dirname(dest))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    print("wrote %s" % (out,), file=sys.stderr)


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(part.strip()) for part in text.split(",")]
    except ValueError:
        raise _UsageError("%s expects comma-separated numbers, got %r" % (flag, text)) from None


def _add_plant_flags(sp):
    grp = sp.add_argument_group("plant parameters")
    grp.add_argument("--preset", choices=sorted(PRESETS),
                     help="named parameter set; flags override its values")
    grp.add_argument("--config", metavar="PATH",
                     help="key-value parameter file; flags override its values")
    grp.add_argument("--M", type=float, metavar="KG", help="effective cart mass M")
    grp.add_argument("--m", type=float, metavar="KG", help="effective stick point mass m")
    grp.add_argument("--l", type=float, metavar="M", help="effective stick length l")
    grp.add_argument("--l0", type=float, metavar="M", help="fixation point height l0")
    grp.add_argument("--g", type=float, metavar="M_S2", help="gravity (default 9.81)")
    grp.add_argument("--tau", type=float, metavar="S", help="feedback delay tau")


def _add_controller_flags(sp):
    grp = sp.add_argument_group("controller")
    grp.add_argument("--gain", type=float, metavar="K", help="proportional controller C(s) = K")
    grp.add_argument("--cnum", metavar="COEFFS",
                     help="controller numerator, descending powers, comma separated")
    grp.add_argument("--cden", metavar="COEFFS",
                     help="controller denominator, descending powers, comma separated")


def _add_out_flag(sp):
    sp.add_argument("--out", metavar="PATH",
                    help="write output atomically to PATH instead of stdout")


def _resolve_params(args, cfg: dict | None = None) -> tuple[PendulumParams, float | None]:
    """Merge preset, config file, and flags into plant parameters plus delay."""
    vals: dict = {}
    if getattr(args, "preset", None):
        vals.update(PRESETS[args.preset])
    if cfg is None and getattr(args, "config", None):
        cfg = read_config(args.config)
    if cfg:
        raw_keys = [k for k in ("human_mass", "stick_mass", "stick_length_actual",
                                "fixation_point") if k in cfg]
        if raw_keys and len(raw_keys) < 4:
            raise _UsageError(
                "config sets %s but a complete plant needs human_mass, stick_mass, "
                "stick_length_actual, and fixation_point" % (", ".join(raw_keys),))
        if raw_keys:
            eff = effective_params(raw_from_config(cfg))
            vals.update(M=eff.cart_mass, m=eff.stick_mass, l=eff.stick_length,
                        l0=eff.fixation_point, g=eff.gravity)
        elif "gravity" in cfg:
            vals["g"] = cfg["gravity"]
        if "delay" in cfg:
            vals["tau"] = cfg["delay"]
    for key in ("M", "m", "l", "l0", "g", "tau"):
        flag = getattr(args, key, None)
        if flag is not None:
            vals[key] = flag
    vals.setdefault("g", 9.81)
    missing = [k for k in ("M", "m", "l", "l0") if k not in vals]
    if missing:
        raise _UsageError("missing plant parameter(s) %s; set them via --preset, "
                          "--config, or the flags" % (", ".join("--" + k for k in missing),))
    params = PendulumParams(cart_mass=vals["M"], stick_mass=vals["m"],
                            stick_length=vals["l"], fixation_point=vals["l0"],
                            gravity=vals["g"])
    return params, vals.get("tau")


def _require_tau(tau: float | None) -> float:
    if tau is None:
        raise _UsageError("missing --tau (feedback delay); set it directly or via "
                          "--preset/--config")
    return tau


def _controller_from(args, default: RationalTF | None = None) -> RationalTF:
    if args.gain is not None:
        if args.cnum or args.cden:
            raise _UsageError("--gain conflicts with --cnum/--cden")
        return constant_tf(args.gain)
    if args.cnum or args.cden:
        if not (args.cnum and args.cden):
            raise _UsageError("--cnum and --cden must be given together")
        return RationalTF(_floats(args.cnum, "--cnum"), _floats(args.cden, "--cden"))
    if default is not None:
        return default
    raise _UsageError("a controller is required: --gain K or --cnum/--cden")


def _complex_pairs(values) -> list:
    return [[sig12(c.real), sig12(c.imag)] for c in np.asarray(values, dtype=complex)]


def _loop_from(args) -> tuple[DelayLoop, PendulumParams, float]:
    params, tau = _resolve_params(args)
    tau = _require_tau(tau)
    controller = _controller_from(args)
    loop = DelayLoop(plant=plant_tf(params, Orientation.UPRIGHT),
                     controller=controller, delay=tau)
    return loop, params, tau


def _cmd_poleszeros(args) -> int:
    params, _ = _resolve_params(args)
    orient = Orientation(args.orientation)
    pz = poles_zeros(params, orient)
    if orient is Orientation.UPRIGHT:
        p, q = rhp_pole_zero(params)
    else:
        p, q = None, None
    if args.format == "json":
        text = _json_text({
            "orientation": orient.value,
            "poles": _complex_pairs(pz.poles),
            "zeros": _complex_pairs(pz.zeros),
            "rhp_pole_rad_s": sig12(p) if p is not None else None,
            "rhp_zero_rad_s": sig12(q) if q is not None else None,
        })
    else:
        lines = ["kind,re,im"]
        for c in np.asarray(pz.poles, dtype=complex):
            lines.append("pole,%.12g,%.12g" % (c.real, c.imag))
        for c in np.asarray(pz.zeros, dtype=complex):
            lines.append("zero,%.12g,%.12g" % (c.real, c.imag))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_fragility(args) -> int:
    params, tau = _resolve_params(args)
    tau = _require_tau(tau)
    res = fragility(params, tau)
    text = _json_text({
        "F_nats": sig12(res.F),
        "F_db": sig12(res.F * _DB_PER_NAT),
        "p_rad_s": sig12(res.p),
        "q_rad_s": sig12(res.q) if res.q is not None else None,
        "regime": res.regime.value,
        "tau_s": sig12(tau),
    })
    _emit(text, args.out)
    return 0


def _cmd_sweep(args) -> int:
    params, tau = _resolve_params(args)
    if tau is None:
        tau = 0.0 if args.vary == "delay" else _require_tau(tau)
    spec = SweepSpec(vary=args.vary, lo=args.lo, hi=args.hi, count=args.count,
                     params=params, tau=tau, couple_l0_to_l=args.couple_l0,
                     actual_length=args.actual_length)
    curve = fragility_curve(spec, threads=args.threads)
    if args.format == "json":
        text = _json_text({
            "vary": args.vary,
            "abscissa": [sig12(x) for x in curve.abscissa],
            "F_nats": [sig12(f) for f in curve.F],
            "skipped": [[sig12(x), reason] for x, reason in curve.skipped],
        })
    else:
        text = curve_csv(curve)
    _emit(text, args.out)
    return 0


def _range_triple(triple, flag: str) -> tuple[float, float, int]:
    lo, hi, n = triple
    if n != int(n) or int(n) < 2:
        raise _UsageError("%s count must be an integer >= 2, got %r" % (flag, n))
    return float(lo), float(hi), int(n)


def _cmd_heatmap(args) -> int:
    params, tau = _resolve_params(args)
    tau = _require_tau(tau)
    l_range = _range_triple(args.l_range, "--l-range")
    l0_range = _range_triple(args.l0_range, "--l0-range")
    surface = fragility_heatmap(l_range, l0_range, params, tau, threads=args.threads)
    if args.format == "json":
        if args.matrix:
            raise _UsageError("--matrix applies to csv output only")
        text = _json_text({
            "l_m": [sig12(x) for x in surface.l_axis],
            "l0_m": [sig12(x) for x in surface.l0_axis],
            "F_nats": [[sig12(v) for v in row] for row in surface.F_grid],
            "singular": [[bool(b) for b in row] for row in surface.singular_mask],
        })
    else:
        text = heatmap_matrix_csv(surface) if args.matrix else heatmap_csv(surface)
    _emit(text, args.out)
    return 0


def _cmd_freqresp(args) -> int:
    loop, _, _ = _loop_from(args)
    if not (0.0 < args.wlo < args.whi) or args.points < 2:
        raise _UsageError("--wlo/--whi/--points must satisfy 0 < wlo < whi and points >= 2")
    grid = default_omega_grid(args.wlo, args.whi, args.points)
    resp_s, resp_t = loop_response(loop, grid)
    resp = resp_t if args.which == "T" else resp_s
    if args.format == "json":
        mags = np.abs(resp.values)
        with np.errstate(divide="ignore"):
            mag_db = 20.0 * np.log10(mags)
        text = _json_text({
            "which": args.which,
            "omega_rad_s": [sig12(w) for w in resp.omegas],
            "re": [sig12(v) for v in resp.values.real],
            "im": [sig12(v) for v in resp.values.imag],
            "mag": [sig12(v) for v in mags],
            "mag_db": [sig12(v) for v in mag_db],
            "phase_rad": [sig12(v) for v in np.angle(resp.values)],
        })
    else:
        text = frequency_response_csv(resp)
    _emit(text, args.out)
    return 0


def _cmd_bodeintegral(args) -> int:
    loop, params, _ = _loop_from(args)
    p, _ = rhp_pole_zero(params)
    sigma0 = p if args.sigma0 is None else args.sigma0
    kernel = PoissonKernel(sigma0=sigma0, omega0=args.omega0)
    quad = QuadratureConfig(order=args.order, grading_depth=args.depth)
    T_eval = lambda om: st_at(loop, 1j * np.asarray(om))[1]
    integral = bode_integral(T_eval, kernel, quad)
    s0 = complex(sigma0, args.omega0)
    _, T0 = st_at(loop, s0)
    log_T0 = math.log(abs(T0)) if abs(T0) > 0.0 else None
    text = _json_text({
        "sigma0_rad_s": sig12(sigma0),
        "omega0_rad_s": sig12(args.omega0),
        "order": args.order,
        "depth": args.depth,
        "integral_nats": sig12(integral),
        "log_T_at_point_nats": sig12(log_T0) if log_T0 is not None else None,
        "allpass_deficit_nats": sig12(integral - log_T0) if log_T0 is not None else None,
    })
    _emit(text, args.out)
    return 0


def _cmd_waterbed(args) -> int:
    loop, params, tau = _loop_from(args)
    res = fragility(params, tau)
    omega1, omega2 = args.band
    if not (0.0 < omega1 < omega2):
        raise _UsageError("--band needs 0 < W1 < W2, got %r %r" % (omega1, omega2))
    T_eval = lambda om: st_at(loop, 1j * np.asarray(om))[1]
    rep = waterbed_check(T_eval, res.p, (omega1, omega2), res.F)
    text = _json_text({
        "omega1_rad_s": sig12(rep.omega1),
        "omega2_rad_s": sig12(rep.omega2),
        "c1": sig12(rep.c1),
        "c2": sig12(rep.c2),
        "M1": sig12(rep.M1),
        "M2": sig12(rep.M2),
        "F_nats": sig12(rep.F),
        "lhs_nats": sig12(rep.lhs),
        "holds": rep.holds,
        "inconclusive_tight": rep.inconclusive_tight,
    })
    _emit(text, args.out)
    return 0


def _cmd_stability(args) -> int:
    loop, _, _ = _loop_from(args)
    res = nyquist_analysis(loop, rho=args.rho, phase_step=args.phase_step,
                           sample_cap=args.max_samples)
    text = _json_text({
        "stable": res.stable,
        "winding": res.winding,
        "rhp_open_loop_poles": res.rhp_poles,
        "samples": res.samples,
    })
    _emit(text, args.out)
    return 0


def _first(*values):
    for v in values:
        if v is not None:
            return v
    return None


def _cmd_simulate(args) -> int:
    cfg = read_config(args.config, allow_sim_keys=True) if args.config else {}
    params, tau = _resolve_params(args, cfg=cfg or None)
    if args.demo_controller:
        if args.gain is not None or args.cnum or args.cden:
            raise _UsageError("--demo-controller conflicts with --gain/--cnum/--cden")
        controller = DEMO_COMPENSATOR
    elif "controller_num" in cfg or "controller_den" in cfg:
        if not ("controller_num" in cfg and "controller_den" in cfg):
            raise _UsageError("config needs both controller_num and controller_den")
        controller = _controller_from(args, default=RationalTF(cfg["controller_num"],
                                                               cfg["controller_den"]))
    else:
        controller = _controller_from(args)
    delay = tau if tau is not None else (DEMO_DELAY if args.demo_controller else 0.0)
    sim = SimConfig(
        params=params,
        controller=controller,
        delay=delay,
        dt=_first(args.dt, cfg.get("dt"), 0.002),
        duration=_first(args.duration, cfg.get("duration"), 60.0),
        sensor_noise_std=_first(args.sensor_noise, cfg.get("sensor_noise_std"), 0.0),
        actuation_noise_std=_first(args.actuation_noise, cfg.get("actuation_noise_std"), 0.0),
        seed=_first(args.seed, cfg.get("seed"), 0),
        initial_state=(
            _first(args.x0, cfg.get("x0"), 0.0),
            _first(args.xdot0, cfg.get("xdot0"), 0.0),
            _first(args.theta0, cfg.get("theta0"), 0.0),
            _first(args.thetadot0, cfg.get("thetadot0"), 0.0),
        ),
    )
    traj = simulate(sim)
    if traj.diverged:
        print("warning: state norm exceeded divergence limit at t=%.6g s; "
              "trajectory truncated" % (traj.t[-1],), file=sys.stderr)
    _emit(trajectory_csv(traj), args.out)
    return 0


def _cmd_psd(args) -> int:
    with open(args.traj, "r", encoding="utf-8") as fh:
        traj = parse_trajectory_csv(fh.read())
    spec = psd(traj, column=args.column, segment_len=args.segment_len,
               overlap=args.overlap)
    _emit(spectrum_csv(spec), args.out)
    return 0


def _cmd_report(args) -> int:
    params, tau = _resolve_params(args)
    tau = _require_tau(tau)
    written = write_report(params, tau, args.outdir, quick=args.quick,
                           threads=args.threads)
    _emit("".join(name + "\n" for name in written), None)
    return 0


_HANDLERS = {
    Command.POLES_ZEROS: _cmd_poleszeros,
    Command.FRAGILITY: _cmd_fragility,
    Command.SWEEP: _cmd_sweep,
    Command.HEATMAP: _cmd_heatmap,
    Command.FREQ_RESP: _cmd_freqresp,
    Command.BODE_INTEGRAL: _cmd_bodeintegral,
    Command.WATERBED: _cmd_waterbed,
    Command.STABILITY: _cmd_stability,
    Command.SIMULATE: _cmd_simulate,
    Command.PSD: _cmd_psd,
    Command.REPORT: _cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraglim", formatter_class=_formatter,
        description="Fundamental limits of delayed-feedback stick balancing: "
                    "plant structure, fragility, sensitivity integrals, sweeps, "
                    "and a stochastic time-domain simulator.")
    from . import __version__
    parser.add_argument("--version", action="version", version="fraglim " + __version__)
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    sp = sub.add_parser("poleszeros", formatter_class=_formatter,
                        help="plant poles and zeros for one parameter set")
    _add_plant_flags(sp)
    sp.add_argument("--orientation", choices=["up", "down"], default="up",
                    help="pendulum orientation (default up)")
    sp.add_argument("--format", choices=["json", "csv"], default="json",
                    help="output format (default json)")
    _add_out_flag(sp)

    sp = sub.add_parser("fragility", formatter_class=_formatter,
                        help="fragility (log of the unavoidable |T| peak) in nats and dB")
    _add_plant_flags(sp)
    _add_out_flag(sp)

    sp = sub.add_parser("sweep", formatter_class=_formatter,
                        help="fragility along one varied parameter")
    _add_plant_flags(sp)
    sp.add_argument("--vary", required=True,
                    choices=["stick_length", "fixation_point", "mass_ratio", "delay"],
                    help="which parameter the abscissa varies")
    sp.add_argument("--lo", type=float, required=True, help="abscissa start")
    sp.add_argument("--hi", type=float, required=True, help="abscissa end")
    sp.add_argument("--count", type=int, default=50, help="number of points (default 50)")
    sp.add_argument("--couple-l0", action="store_true",
                    help="move the fixation point with the stick length (l0 = l)")
    sp.add_argument("--actual-length", action="store_true",
                    help="treat stick_length abscissae as as-measured lengths l' "
                         "(converted to effective l = 2/3 l')")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads; output order stays deterministic")
    sp.add_argument("--format", choices=["csv", "json"], default="csv",
                    help="output format (default csv)")
    _add_out_flag(sp)

    sp = sub.add_parser("heatmap", formatter_class=_formatter,
                        help="fragility over a (stick length, fixation point) grid")
    _add_plant_flags(sp)
    sp.add_argument("--l-range", nargs=3, type=float, required=True,
                    metavar=("LO", "HI", "N"), help="stick length axis")
    sp.add_argument("--l0-range", nargs=3, type=float, required=True,
                    metavar=("LO", "HI", "N"), help="fixation point axis")
    sp.add_argument("--matrix", action="store_true",
                    help="wide csv (one row per l0, one column per l) instead of long form")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads; output order stays deterministic")
    sp.add_argument("--format", choices=["csv", "json"], default="csv",
                    help="output format (default csv)")
    _add_out_flag(sp)

    sp = sub.add_parser("freqresp", formatter_class=_formatter,
                        help="closed-loop S or T frequency response for a given controller")
    _add_plant_flags(sp)
    _add_controller_flags(sp)
    sp.add_argument("--which", choices=["T", "S"], default="T",
                    help="which closed-loop function (default T)")
    sp.add_argument("--wlo", type=float, default=1e-2, help="grid start, rad/s (default 0.01)")
    sp.add_argument("--whi", type=float, default=1e3, help="grid end, rad/s (default 1000)")
    sp.add_argument("--points", type=int, default=2000, help="grid points (default 2000)")
    sp.add_argument("--format", choices=["csv", "json"], default="csv",
                    help="output format (default csv)")
    _add_out_flag(sp)

    sp = sub.add_parser("bodeintegral", formatter_class=_formatter,
                        help="Poisson-weighted integral of ln|T| for a given controller")
    _add_plant_flags(sp)
    _add_controller_flags(sp)
    sp.add_argument("--sigma0", type=float, default=None,
                    help="kernel abscissa, rad/s (default: the plant's RHP pole)")
    sp.add_argument("--omega0", type=float, default=0.0,
                    help="kernel center frequency, rad/s (default 0)")
    sp.add_argument("--order", type=int, default=32,
                    help="Gauss-Legendre nodes per panel (default 32)")
    sp.add_argument("--depth", type=int, default=40,
                    help="dyadic grading levels toward the endpoints (default 40)")
    _add_out_flag(sp)

    sp = sub.add_parser("waterbed", formatter_class=_formatter,
                        help="band/peak trade-off check against the fragility floor")
    _add_plant_flags(sp)
    _add_controller_flags(sp)
    sp.add_argument("--band", nargs=2, type=float, required=True, metavar=("W1", "W2"),
                    help="band edges in rad/s")
    _add_out_flag(sp)

    sp = sub.add_parser("stability", formatter_class=_formatter,
                        help="closed-loop stability of the delayed loop (Nyquist winding)")
    _add_plant_flags(sp)
    _add_controller_flags(sp)
    sp.add_argument("--rho", type=float, default=1e-4,
                    help="indentation radius around imaginary-axis poles (default 1e-4)")
    sp.add_argument("--phase-step", type=float, default=0.1,
                    help="max phase change per contour step, rad (default 0.1)")
    sp.add_argument("--max-samples", type=int, default=10**7,
                    help="contour sample cap before giving up (default 1e7)")
    _add_out_flag(sp)

    sp = sub.add_parser("simulate", formatter_class=_formatter,
                        help="stochastic delayed closed-loop simulation; trajectory csv")
    _add_plant_flags(sp)
    _add_controller_flags(sp)
    sp.add_argument("--demo-controller", action="store_true",
                    help="use the built-in stabilizing compensator for the reference plant "
                         "(sets delay 0.02 s unless --tau is given)")
    sp.add_argument("--dt", type=float, default=None, help="step size, s (default 0.002)")
    sp.add_argument("--duration", type=float, default=None,
                    help="simulated time, s (default 60)")
    sp.add_argument("--sensor-noise", type=float, default=None,
                    help="sensor noise std (default 0)")
    sp.add_argument("--actuation-noise", type=float, default=None,
                    help="actuation noise std (default 0)")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed; identical seeds reproduce byte-identical output (default 0)")
    sp.add_argument("--x0", type=float, default=None, help="initial cart position (default 0)")
    sp.add_argument("--xdot0", type=float, default=None, help="initial cart velocity (default 0)")
    sp.add_argument("--theta0", type=float, default=None, help="initial angle (default 0)")
    sp.add_argument("--thetadot0", type=float, default=None,
                    help="initial angular velocity (default 0)")
    _add_out_flag(sp)

    sp = sub.add_parser("psd", formatter_class=_formatter,
                        help="Welch power spectral density of a trajectory column")
    sp.add_argument("--traj", required=True, metavar="PATH", help="trajectory csv to analyze")
    sp.add_argument("--column", choices=["x", "theta", "z", "y", "u"], default="z",
                    help="which column (default z)")
    sp.add_argument("--segment-len", type=int, default=4096,
                    help="Welch segment length in samples (default 4096)")
    sp.add_argument("--overlap", type=float, default=0.5,
                    help="segment overlap fraction (default 0.5)")
    _add_out_flag(sp)

    sp = sub.add_parser("report", formatter_class=_formatter,
                        help="write the full analysis bundle (csv + json + figures) to a directory")
    _add_plant_flags(sp)
    sp.set_defaults(preset="case-study")
    sp.add_argument("--outdir", required=True, metavar="DIR", help="output directory")
    sp.add_argument("--quick", action="store_true",
                    help="skip the stability test, simulation, and spectrum")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads for the sweeps")

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        threads = getattr(args, "threads", 1)
        if threads < 1:
            raise _UsageError("--threads must be >= 1, got %d" % (threads,))
        return _HANDLERS[Command(args.command)](args)
    except _UsageError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2
    except InconclusiveStabilityError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 4
    except FraglimError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 3
    except OSError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 3


def main():
    sys.exit(run())
