"""Flow Profile Correction Factor: profile integrals, tabulation, and the
fitted polynomial used at run time.

The correction factor is the area-mean normalized velocity divided by the
chord-mean normalized velocity at the sensor height. Both integrals run on
substitution-graded coordinates (sine maps clustering nodes at the curved
wall) so the near-wall algebraic behavior does not stall refinement.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateProfileError,
    DryPathError,
    OutOfRangeError,
    PartialFlowError,
)
from .geometry import PipeGeometry, WaterLevel, chord_half_width, segment_area
from .profile import (
    DEFAULT_DIP_POLY,
    DipPositionPoly,
    EntropyParams,
    ProfileModel,
    evaluate_velocity,
)
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec, adaptive_integrate


@dataclass(frozen=True)
class FpcfSample:
    """One tabulated correction factor at a level/chord-height pair (mm)."""

    level_mm: float
    chord_height_mm: float
    fpcf: float

    def __post_init__(self):
        if not self.fpcf > 0:
            raise OutOfRangeError(
                f"FPCF sample at H={self.level_mm:g} mm is not positive: {self.fpcf!r}"
            )


@dataclass(frozen=True)
class FpcfPolynomial:
    """Power-basis coefficients c0..cN over level in mm, with validity range."""

    coeffs: tuple[float, ...]
    h_min_mm: float
    h_max_mm: float

    def __post_init__(self):
        if self.h_min_mm >= self.h_max_mm:
            raise OutOfRangeError(
                f"invalid validity range [{self.h_min_mm!r}, {self.h_max_mm!r}]"
            )


@dataclass(frozen=True)
class FitResult:
    polynomial: FpcfPolynomial
    rms_residual: float
    max_residual: float


def eval_fpcf(poly: FpcfPolynomial, level_mm: float) -> float:
    """Horner evaluation; levels outside the validity range are a guarded error."""
    from .errors import FpcfRangeError

    if level_mm < poly.h_min_mm or level_mm > poly.h_max_mm:
        raise FpcfRangeError(level_mm, poly.h_min_mm, poly.h_max_mm)
    acc = 0.0
    for c in reversed(poly.coeffs):
        acc = acc * level_mm + c
    return acc


def _half_chord_integral(model: ProfileModel, y_m: float, quad: QuadratureSpec) -> float:
    """integral of v over x in [0, w(y)] via the graded map x = w sin(pi u / 2)."""
    w = chord_half_width(y_m, model.pipe)
    if w <= 0.0:
        return 0.0

    def integrand(u):
        angle = 0.5 * math.pi * u
        x = w * np.sin(angle)
        jac = w * 0.5 * math.pi * np.cos(angle)
        return evaluate_velocity(model, x, y_m) * jac

    value, _ = adaptive_integrate(integrand, 0.0, 1.0, quad)
    return value


def mean_chord_velocity(
    model: ProfileModel, chord_height_m: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Mean of v/v_max along the horizontal chord at the sensor height.

    A chord exactly at the water line (Y = H) is still evaluable; only
    Y > H is a dry path.
    """
    if chord_height_m <= 0:
        raise OutOfRangeError(f"chord height must be positive, got {chord_height_m!r}")
    if chord_height_m > model.level.level_m:
        raise DryPathError(
            f"chord at {chord_height_m:g} m is above the water line "
            f"({model.level.level_m:g} m)"
        )
    w = chord_half_width(chord_height_m, model.pipe)
    # The integrand is even in x by the |x| convention: half-span times two.
    return _half_chord_integral(model, chord_height_m, quad) / w


def mean_area_velocity(model: ProfileModel, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Mean of v/v_max over the wetted segment.

    Iterated quadrature, y outer and x inner, with the inner span mapped
    exactly onto [-w(y), w(y)].
    """
    height = model.level.level_m
    if height <= 0:
        raise OutOfRangeError("area mean undefined for an empty pipe")

    def outer(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        angle = 0.5 * math.pi * t
        y = height * np.sin(angle) ** 2
        jac = height * 0.5 * math.pi * np.sin(math.pi * t)
        for i in range(t.size):
            out[i] = 2.0 * _half_chord_integral(model, float(y[i]), quad) * jac[i]
        return out

    value, _ = adaptive_integrate(outer, 0.0, 1.0, quad)
    area = segment_area(model.level, model.pipe)
    return value / area


def fpcf(
    model: ProfileModel, chord_height_m: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Correction factor: area-mean over chord-mean normalized velocity."""
    v_line = mean_chord_velocity(model, chord_height_m, quad)
    if v_line <= 0:
        raise DegenerateProfileError(
            f"chord mean velocity {v_line:g} is not positive at "
            f"Y={chord_height_m:g} m, H={model.level.level_m:g} m"
        )
    return mean_area_velocity(model, quad) / v_line


def tabulate_fpcf(
    pipe: PipeGeometry,
    params: EntropyParams,
    chord_height_mm: float,
    h_min_mm: float = 50.0,
    h_max_mm: float = 250.0,
    step_mm: float = 10.0,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    dip: DipPositionPoly = DEFAULT_DIP_POLY,
    dip_weight_mode: str = "height_weighted",
) -> list[FpcfSample]:
    """Correction factor at regularly spaced levels from h_min upward.

    The first level may equal the chord height (chord at the surface);
    levels below it are rejected since the chord would be dry.
    """
    if h_min_mm < chord_height_mm:
        raise OutOfRangeError(
            f"tabulation start {h_min_mm:g} mm is below the chord height "
            f"{chord_height_mm:g} mm"
        )
    if step_mm <= 0:
        raise OutOfRangeError(f"step must be positive, got {step_mm!r}")
    if h_max_mm < h_min_mm:
        raise OutOfRangeError("h_max_mm must be >= h_min_mm")

    count = int(math.floor((h_max_mm - h_min_mm) / step_mm + 1e-9)) + 1
    samples = []
    for k in range(count):
        level_mm = h_min_mm + k * step_mm
        model = ProfileModel(
            pipe=pipe,
            level=WaterLevel(level_mm / 1000.0),
            params=params,
            dip=dip,
            dip_weight_mode=dip_weight_mode,
        )
        try:
            value = fpcf(model, chord_height_mm / 1000.0, quad)
            samples.append(FpcfSample(level_mm, chord_height_mm, value))
        except PartialFlowError as exc:
            raise PartialFlowError(
                f"FPCF tabulation failed at H = {level_mm:g} mm: {exc}"
            ) from exc
    return samples


def fit_polynomial(samples, degree: int = 6) -> FitResult:
    """Least-squares polynomial of FPCF against level (mm).

    Accepts FpcfSample objects or plain (level_mm, fpcf) pairs. Fitted on
    the scaled abscissa H/H_max and rescaled back, since raw mm^6 terms
    span ~14 orders of magnitude. Residual diagnostics are computed from
    the returned (rescaled) polynomial so the fit/eval round trip is exact
    by construction.
    """
    if degree < 0:
        raise OutOfRangeError(f"degree must be non-negative, got {degree!r}")
    pairs = [
        (s.level_mm, s.fpcf) if isinstance(s, FpcfSample) else (float(s[0]), float(s[1]))
        for s in samples
    ]
    if len(pairs) <= degree:
        raise OutOfRangeError(
            f"need more than {degree} samples for a degree-{degree} fit, "
            f"got {len(pairs)}"
        )
    levels = np.array([p[0] for p in pairs], dtype=float)
    values = np.array([p[1] for p in pairs], dtype=float)
    scale = float(np.max(np.abs(levels)))
    if scale <= 0:
        raise OutOfRangeError("sample levels must not all be zero")

    vander = np.vander(levels / scale, degree + 1, increasing=True)
    coeffs_scaled, _, rank, _ = np.linalg.lstsq(vander, values, rcond=None)
    if rank < degree + 1:
        raise PartialFlowError(
            f"rank-deficient fit (rank {rank} < {degree + 1}): "
            "insufficient or collinear samples"
        )
    coeffs = tuple(float(c / scale**k) for k, c in enumerate(coeffs_scaled))
    poly = FpcfPolynomial(coeffs, float(levels.min()), float(levels.max()))

    residuals = np.array([eval_fpcf(poly, h) for h in levels]) - values
    return FitResult(
        polynomial=poly,
        rms_residual=float(np.sqrt(np.mean(residuals**2))),
        max_residual=float(np.max(np.abs(residuals))),
    )
