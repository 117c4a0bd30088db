"""Parameter sweeps over the fragility closed form and the loop response.

Curves vary one of stick length, fixation point, mass ratio, or delay;
the heatmap grids (stick_length, fixation_point). Every emitted value is a
direct robustness.fragility call, bit for bit; the sweep layer adds no
arithmetic of its own. Singular points (q = p) are skipped and reported,
never silently dropped.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptySweepError, FragilitySingularityError, ParameterError
from .lti import DelayLoop, FrequencyResponse, constant_tf, default_omega_grid, loop_response
from .plant import Orientation, PendulumParams, plant_tf
from .robustness import fragility

# effective stick length is 2/3 of the actual rigid-body length
ACTUAL_TO_EFFECTIVE = 2.0 / 3.0


class Vary(enum.Enum):
    STICK_LENGTH = "stick_length"
    FIXATION_POINT = "fixation_point"
    MASS_RATIO = "mass_ratio"
    DELAY = "delay"


@dataclass(frozen=True)
class SweepSpec:
    vary: Vary
    lo: float
    hi: float
    count: int
    params: PendulumParams
    tau: float
    couple_l0_to_l: bool = False
    # when set, stick-length abscissae are actual lengths l' and are
    # converted to effective l = (2/3) l' before evaluation
    actual_length: bool = False

    def __post_init__(self):
        if isinstance(self.vary, str):
            object.__setattr__(self, "vary", Vary(self.vary))
        if not self.lo < self.hi:
            raise ParameterError("sweep range needs lo < hi, got lo=%r hi=%r" % (self.lo, self.hi))
        if self.count < 2:
            raise ParameterError("count must be >= 2, got %r" % (self.count,))
        if not self.tau >= 0.0:
            raise ParameterError("tau must be >= 0, got %r" % (self.tau,))
        if self.vary is Vary.STICK_LENGTH and not self.lo > 0.0:
            raise ParameterError("stick_length sweep needs lo > 0, got %r" % (self.lo,))
        if self.vary is Vary.FIXATION_POINT and not self.lo >= 0.0:
            raise ParameterError("fixation_point sweep needs lo >= 0, got %r" % (self.lo,))
        if self.vary in (Vary.MASS_RATIO, Vary.DELAY) and not self.lo >= 0.0:
            raise ParameterError("%s sweep needs lo >= 0, got %r" % (self.vary.value, self.lo))


@dataclass(frozen=True, eq=False)
class FragilityCurve:
    abscissa: np.ndarray
    F: np.ndarray
    skipped: list = field(default_factory=list)  # (abscissa, reason) pairs


@dataclass(frozen=True, eq=False)
class FragilitySurface:
    l_axis: np.ndarray
    l0_axis: np.ndarray
    F_grid: np.ndarray         # row per l0, column per l; nan where masked
    singular_mask: np.ndarray


def _point_inputs(spec: SweepSpec, x: float) -> tuple[PendulumParams, float]:
    params, tau = spec.params, spec.tau
    if spec.vary is Vary.STICK_LENGTH:
        l = ACTUAL_TO_EFFECTIVE * x if spec.actual_length else x
        l0 = l if spec.couple_l0_to_l else params.fixation_point
        params = replace(params, stick_length=l, fixation_point=l0)
    elif spec.vary is Vary.FIXATION_POINT:
        params = replace(params, fixation_point=x)
    elif spec.vary is Vary.MASS_RATIO:
        params = replace(params, stick_mass=x * params.cart_mass)
    else:
        tau = x
    return params, tau


def fragility_curve(spec: SweepSpec, threads: int = 1) -> FragilityCurve:
    """Per-point fragility along the requested abscissa; singular points skipped."""
    xs = np.linspace(spec.lo, spec.hi, spec.count)

    def one(x):
        params, tau = _point_inputs(spec, float(x))
        try:
            return fragility(params, tau).F
        except FragilitySingularityError as exc:
            return str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, xs))
    else:
        results = [one(x) for x in xs]
    kept_x, kept_F, skipped = [], [], []
    for x, r in zip(xs, results):
        if isinstance(r, str):
            skipped.append((float(x), r))
        else:
            kept_x.append(float(x))
            kept_F.append(r)
    if not kept_x:
        raise EmptySweepError("all %d sweep points were singular" % (spec.count,))
    return FragilityCurve(abscissa=np.array(kept_x), F=np.array(kept_F), skipped=skipped)


def fragility_heatmap(l_range: tuple[float, float, int], l0_range: tuple[float, float, int],
                      params: PendulumParams, tau: float, threads: int = 1,
                      singular_band: float = 1e-6) -> FragilitySurface:
    """Dense F over (stick_length, fixation_point); singular band masked.

    Cells with |l0 - l*m/(M+m)| <= singular_band * l*m/(M+m) carry no value.
    Cells with l0 >= l sit in the no-RHP-zero regime where F = tau*p does not
    depend on l0 at all.
    """
    l_axis = np.linspace(l_range[0], l_range[1], l_range[2])
    l0_axis = np.linspace(l0_range[0], l0_range[1], l0_range[2])
    if not (l_axis[0] > 0.0 and l0_axis[0] >= 0.0):
        raise ParameterError("heatmap needs l > 0 and l0 >= 0 over the whole grid")
    M, m = params.cart_mass, params.stick_mass
    F_grid = np.full((l0_axis.size, l_axis.size), np.nan)
    mask = np.zeros_like(F_grid, dtype=bool)

    def fill_row(i):
        l0 = float(l0_axis[i])
        for j, l in enumerate(l_axis):
            lsing = float(l) * m / (M + m)
            if abs(l0 - lsing) <= singular_band * lsing:
                mask[i, j] = True
                continue
            cell = replace(params, stick_length=float(l), fixation_point=l0)
            try:
                F_grid[i, j] = fragility(cell, tau).F
            except FragilitySingularityError:
                mask[i, j] = True

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(l0_axis.size)))
    else:
        for i in range(l0_axis.size):
            fill_row(i)
    return FragilitySurface(l_axis=l_axis, l0_axis=l0_axis, F_grid=F_grid, singular_mask=mask)


def freq_response_sweep(params: PendulumParams, tau: float, controller_gain: float,
                        grid: np.ndarray | None = None, which: str = "T") -> FrequencyResponse:
    """S or T of the upright loop with a pure-gain controller over a grid."""
    if grid is None:
        grid = default_omega_grid()
    loop = DelayLoop(plant=plant_tf(params, Orientation.UPRIGHT),
                     controller=constant_tf(controller_gain), delay=tau)
    S, T = loop_response(loop, grid)
    if which == "T":
        return T
    if which == "S":
        return S
    raise ParameterError("which must be 'S' or 'T', got %r" % (which,))


def curve_csv(curve: FragilityCurve) -> str:
    lines = ["abscissa,F_nats"]
    for x, f in zip(curve.abscissa, curve.F):
        lines.append("%.12g,%.12g" % (x, f))
    return "\n".join(lines) + "\n"


def heatmap_csv(surface: FragilitySurface) -> str:
    """Long form, one row per cell, row-major over (l0, l)."""
    lines = ["l_m,l0_m,F_nats,singular"]
    for i, l0 in enumerate(surface.l0_axis):
        for j, l in enumerate(surface.l_axis):
            lines.append("%.12g,%.12g,%.12g,%d"
                         % (l, l0, surface.F_grid[i, j], int(surface.singular_mask[i, j])))
    return "\n".join(lines) + "\n"


def heatmap_matrix_csv(surface: FragilitySurface) -> str:
    """Compact variant: one row per l0, one column per l, nan where masked."""
    header = "l0_m," + ",".join("%.12g" % l for l in surface.l_axis)
    lines = [header]
    for i, l0 in enumerate(surface.l0_axis):
        row = ",".join("%.12g" % v for v in surface.F_grid[i])
        lines.append("%.12g,%s" % (l0, row))
    return "\n".join(lines) + "\n"
