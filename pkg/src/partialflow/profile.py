"""Normalized velocity distribution over a partially filled circular section.

The model evaluates v/v_max at any wetted point from two calibrated
entropy parameters plus an interpolated maximum-velocity (dip) position.
The horizontal coordinate enters through |x|: the physical profile is
left-right symmetric, and a signed x would put a negative base under
non-integer powers.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalDomainError, OutOfRangeError
from .geometry import PipeGeometry, WaterLevel

# Calibrated entropy constants for the velocity-distribution model.
DEFAULT_M = 0.89
DEFAULT_Q = 1.15

# Cubic in H/D giving the dip position h/H. Highest degree first is NOT
# used here: coefficients are (c3, c2, c1, c0). The linear coefficient is
# +0.18, which pins the two synthetic anchor points exactly: h/H = 1.00
# for a vanishing level and h/H = 0.50 (mid-depth maximum) for a full
# pipe. A -0.18 sign variant circulates; it breaks both anchors and
# drives the correction factor negative at high levels.
DEFAULT_DIP_COEFFS = (1.78, -2.46, 0.18, 1.00)

# Floor keeps ln(h') finite; the cubic itself stays well above this.
DIP_RATIO_FLOOR = 1e-3

DIP_WEIGHT_MODES = ("height_weighted", "unit")


@dataclass(frozen=True)
class EntropyParams:
    """Entropy parameters M (dimensionless) and q (non-extensive)."""

    m: float = DEFAULT_M
    q: float = DEFAULT_Q

    def __post_init__(self):
        if not 0 < self.m < 1:
            raise OutOfRangeError(f"M must lie in (0, 1), got {self.m!r}")
        if not self.q > 1:
            raise OutOfRangeError(f"q must exceed 1, got {self.q!r}")

    @property
    def tail_weight(self) -> float:
        """(1-M)^(q/(q-1)); the additive constant inside the velocity bracket."""
        return (1.0 - self.m) ** (self.q / (self.q - 1.0))


@dataclass(frozen=True)
class DipPositionPoly:
    """Cubic interpolant h/H = c3*t^3 + c2*t^2 + c1*t + c0 with t = H/D.

    Output is clamped into (0, 1]: the ratio is a height fraction, and a
    hard floor keeps downstream logarithms finite.
    """

    coeffs: tuple[float, float, float, float] = DEFAULT_DIP_COEFFS

    def __call__(self, relative_level: float) -> float:
        if relative_level < 0 or relative_level > 1:
            raise OutOfRangeError(f"relative level {relative_level!r} outside [0, 1]")
        c3, c2, c1, c0 = self.coeffs
        t = relative_level
        raw = ((c3 * t + c2) * t + c1) * t + c0
        return min(max(raw, DIP_RATIO_FLOOR), 1.0)


DEFAULT_DIP_POLY = DipPositionPoly()


def dip_ratio(relative_level: float, poly: DipPositionPoly = DEFAULT_DIP_POLY) -> float:
    """Dip position h/H (height fraction of the velocity maximum) at H/D."""
    return poly(relative_level)


@dataclass(frozen=True)
class ProfilePoint:
    """A point of the cross-section: x from centerline, y above the bottom (m)."""

    x: float
    y: float


@dataclass(frozen=True)
class ProfileModel:
    """Immutable bundle of everything needed to evaluate v/v_max.

    ``dip_weight_mode`` selects the reading of the y'/y factor inside the
    velocity bracket: "height_weighted" applies it, "unit" replaces it by 1
    for sensitivity studies. ``clamp_nonnegative`` optionally floors the
    near-wall values (the raw expression dips to about -0.124 at the wall).
    """

    pipe: PipeGeometry
    level: WaterLevel
    params: EntropyParams = field(default_factory=EntropyParams)
    dip: DipPositionPoly = DEFAULT_DIP_POLY
    dip_weight_mode: str = "height_weighted"
    clamp_nonnegative: bool = False

    def __post_init__(self):
        self.level.check_against(self.pipe)
        if self.dip_weight_mode not in DIP_WEIGHT_MODES:
            raise OutOfRangeError(
                f"dip_weight_mode must be one of {DIP_WEIGHT_MODES}, got {self.dip_weight_mode!r}"
            )

    @property
    def dip_ratio(self) -> float:
        return self.dip(self.level.level_m / self.pipe.diameter_m)

    @property
    def dip_height_m(self) -> float:
        """Height h of the maximum-velocity point on the centerline."""
        return self.dip_ratio * self.level.level_m

    @property
    def wall_value(self) -> float:
        """v/v_max in the F = 0 limit (pipe wall)."""
        c = self.params.tail_weight
        return 1.0 - 1.0 / self.params.m + c ** (1.0 / self.params.q) / self.params.m


def _require_wetted(point: ProfilePoint, model: ProfileModel) -> None:
    r = model.pipe.radius_m
    h2 = point.x**2 + (point.y - r) ** 2
    if h2 > r * r * (1.0 + 1e-12) or point.y < 0:
        raise OutOfRangeError(f"point {point} lies outside the pipe bore")
    if point.y > model.level.level_m * (1.0 + 1e-12) + 1e-15:
        raise OutOfRangeError(f"point {point} lies above the water line")


def local_frame(point: ProfilePoint, model: ProfileModel) -> tuple[float, float, float]:
    """Local wall-relative coordinates (y', H', h') at the point's vertical.

    y' is the height above the local wall, H' the local water depth, and
    h' the local dip height, taken as the centerline dip ratio applied to
    the local depth.
    """
    _require_wetted(point, model)
    r = model.pipe.radius_m
    wall = r - math.sqrt(max(r * r - point.x**2, 0.0))
    h_local = model.level.level_m - wall
    if h_local <= 0:
        raise OutOfRangeError(
            f"vertical through x={point.x:g} has no wetted span (H' = {h_local:g})"
        )
    y_local = point.y - wall
    return y_local, h_local, model.dip_ratio * h_local


def velocity_cdf(point: ProfilePoint, model: ProfileModel) -> float:
    """Velocity CDF value F at the point, clamped into [0, 1]."""
    y_local, h_local, dip_local = local_frame(point, model)
    value = _evaluate_cdf(
        np.abs(np.asarray([point.x])),
        np.asarray([y_local]),
        np.asarray([h_local]),
        np.asarray([dip_local]),
        model,
    )
    return float(value[0])


def normalized_velocity(point: ProfilePoint, model: ProfileModel) -> float:
    """v/v_max at the point; pipe-bottom and wall points take the F = 0 limit."""
    value = evaluate_velocity(model, np.asarray([point.x]), np.asarray([point.y]),
                              validate=True)
    return float(value[0])


def _evaluate_cdf(x_abs, y_local, h_local, dip_local, model: ProfileModel):
    """Vectorized CDF for points with y' >= 0 and h' > 0; F(y'=0) = 0."""
    # boundary points can round to y' = -epsilon; anything further negative
    # would put a negative base under a non-integer power
    tol = 1e-12 * model.pipe.diameter_m
    if np.any(y_local < -tol):
        raise NumericalDomainError("negative y' reached a non-integer power")
    y_local = np.maximum(y_local, 0.0)
    two_r = model.pipe.diameter_m
    ratio = model.dip_ratio

    result = np.zeros_like(y_local)
    pos = y_local > 0
    if not np.any(pos):
        return result
    yl = y_local[pos]
    dl = dip_local[pos]

    s = math.log(2.0) / (np.log(two_r) - np.log(dl))
    t_s = np.exp(s * np.log(yl / two_r))
    first = 4.0 * (t_s - t_s * t_s)

    u = yl / dl - 1.0
    below = u <= 0.0
    shape = np.empty_like(yl)
    shape[below] = 1.0 - u[below] ** 2
    # Above the dip the exponent pair is L = 2h/H, K = 2(H-h)/H.
    # The base 1 - u^(2L) can cross zero below the free surface when the
    # dip ratio drops under 1/2: the model's virtual zero-velocity height
    # 2h' then sits inside the water column. Clamp the base at zero so F
    # stays a real CDF value.
    above = ~below
    base = 1.0 - u[above] ** (4.0 * ratio)
    shape[above] = np.maximum(base, 0.0) ** (2.0 * (1.0 - ratio))

    lateral = 1.0 - (x_abs[pos] / (0.5 * two_r)) ** (
        model.pipe.diameter_m / model.level.level_m
    )

    result[pos] = np.clip(first * shape * lateral, 0.0, 1.0)
    return result


def _dip_weight(y_local, y, mode: str):
    """The y'/y factor inside the velocity bracket.

    The canonical form weights the CDF by y'/y; the "unit" reading drops
    the factor entirely. Both agree at the maximum-velocity point (y'=y).
    """
    if mode == "unit":
        return np.ones_like(y_local)
    return y_local / y


def evaluate_velocity(model: ProfileModel, x, y, validate: bool = False):
    """Vectorized v/v_max over broadcastable coordinate arrays.

    Points must lie in the closed wetted region; boundary points (local
    wall, pipe bottom) evaluate to the model's wall value. With
    ``validate`` each point is range-checked first (scalar API path);
    integration callers skip the check since their nodes are interior by
    construction.
    """
    x_abs = np.abs(np.asarray(x, dtype=float))
    y_arr = np.asarray(y, dtype=float)
    x_abs, y_arr = np.broadcast_arrays(x_abs, y_arr)

    if validate:
        for xi, yi in zip(np.ravel(x_abs), np.ravel(y_arr)):
            _require_wetted(ProfilePoint(float(xi), float(yi)), model)

    r = model.pipe.radius_m
    wall = r - np.sqrt(np.maximum(r * r - x_abs * x_abs, 0.0))
    y_local = y_arr - wall
    depth_local = model.level.level_m - wall

    out = np.full(x_abs.shape, model.wall_value, dtype=float)
    core = (y_local > 0.0) & (y_arr > 0.0) & (depth_local > 0.0)
    if np.any(core):
        yl = y_local[core]
        dl = model.dip_ratio * depth_local[core]
        f_cdf = _evaluate_cdf(x_abs[core], yl, depth_local[core], dl, model)
        c = model.params.tail_weight
        weight = _dip_weight(yl, y_arr[core], model.dip_weight_mode)
        bracket = weight * (1.0 - c) * f_cdf + c
        out[core] = (
            1.0 - 1.0 / model.params.m
            + bracket ** (1.0 / model.params.q) / model.params.m
        )
    if model.clamp_nonnegative:
        out = np.maximum(out, 0.0)
    return out


@dataclass(frozen=True)
class ProfileGrid:
    """Rectangular sample grid; v is NaN outside the wetted region."""

    x_m: np.ndarray
    y_m: np.ndarray
    v: np.ndarray

    def write_csv(self, stream) -> None:
        stream.write("x_mm,y_mm,v_norm\n")
        for j, yv in enumerate(self.y_m):
            for i, xv in enumerate(self.x_m):
                stream.write(f"{1000.0 * xv!r},{1000.0 * yv!r},{self.v[j, i]!r}\n")


def profile_grid(model: ProfileModel, nx: int, ny: int) -> ProfileGrid:
    """Sample v/v_max on an nx-by-ny grid spanning the bore width and depth."""
    if nx < 2 or ny < 2:
        raise OutOfRangeError(f"grid needs at least 2 points per axis, got {nx}x{ny}")
    r = model.pipe.radius_m
    height = model.level.level_m
    xs = np.linspace(-r, r, nx)
    xs = 0.5 * (xs - xs[::-1])  # force exact mirror symmetry
    ys = np.linspace(0.0, height, ny)
    xg, yg = np.meshgrid(xs, ys)
    wetted = xg**2 + (yg - r) ** 2 <= r * r * (1.0 + 1e-12)
    v = np.full(xg.shape, np.nan)
    if np.any(wetted):
        v[wetted] = evaluate_velocity(model, xg[wetted], yg[wetted])
    return ProfileGrid(x_m=xs, y_m=ys, v=v)
