"""
Hypothesis checking and best-parameter extraction.

Every hypothesis class reduces to one of three constraint shapes evaluated
row-wise on the family:

* cone constraints   Re/Im <x, w> - r ||x|| >= 0       (DM, T21, T31, T32)
* ball constraints   R - ||x - c|| >= 0                 (C22, C23, C32, C33, P42)
* angle constraints  on arg(z) for complex numbers      (P41, Petrovich)

A vector's margin is the smallest slack over its constraints. Zero vectors
make every hypothesis vacuous; they are skipped and counted.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from src.domain import linalg
from src.domain.exceptions import (
    InvalidInputException,
    InvalidParameterException,
    UndefinedArgumentException,
)
from src.domain.models import (
    AxisBandParams,
    AxisDiskParams,
    AxisParams,
    BandParams,
    ConeParams,
    DiskParams,
    HypothesisReport,
    Method,
    MethodParams,
    OrthonormalFamily,
    PARAMS_KIND,
    PetrovichParams,
    RealAxisParams,
    RealParams,
    Reference,
    SectorParams,
    VectorFamily,
)

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-9
EQUIV_TOL = 1e-9
SQRT2 = math.sqrt(2.0)
HALF_PI = math.pi / 2
# Arcs narrower than this are widened so PetrovichParams keeps theta > 0.
MIN_ARC_HALF_WIDTH = 1e-9

REFERENCE_METHODS = {m for m in Method if m.frame_kind == "reference"}
ORTHONORMAL_METHODS = {m for m in Method if m.frame_kind == "orthonormal"}
CONE_KINDS = {"real", "cone", "real_axis", "axis"}

Frame = Union[Reference, OrthonormalFamily, None]


class ConeConstraint(NamedTuple):
    direction: np.ndarray
    imaginary: bool
    r: float
    axis: int


class Ball(NamedTuple):
    center: np.ndarray
    radius: float
    axis: int


# ---------------------------------------------------------------------------
# Constraint construction
# ---------------------------------------------------------------------------

def _frame_array(method: Method, frame: Frame) -> Optional[np.ndarray]:
    if method in REFERENCE_METHODS:
        if not isinstance(frame, Reference):
            raise InvalidInputException(f"method {method.value} needs a unit reference", field="reference")
        return frame.e
    if method in ORTHONORMAL_METHODS:
        if not isinstance(frame, OrthonormalFamily):
            raise InvalidInputException(f"method {method.value} needs an orthonormal family", field="orthonormal")
        return frame.members
    return None


def _require_params(method: Method, params: MethodParams) -> None:
    expected = PARAMS_KIND[method]
    if params.kind != expected:
        raise InvalidParameterException(
            f"method {method.value} takes '{expected}' parameters, got '{params.kind}'"
        )


def cone_constraints(method: Method, frame: np.ndarray, params: MethodParams) -> List[ConeConstraint]:
    if isinstance(params, RealParams):
        return [ConeConstraint(frame, False, params.r, 0)]
    if isinstance(params, ConeParams):
        return [ConeConstraint(frame, False, params.r1, 0), ConeConstraint(frame, True, params.r2, 0)]
    if isinstance(params, RealAxisParams):
        _require_axes(frame, len(params.r))
        return [ConeConstraint(frame[k], False, r, k) for k, r in enumerate(params.r)]
    if isinstance(params, AxisParams):
        _require_axes(frame, len(params.axes))
        constraints = []
        for k, axis in enumerate(params.axes):
            constraints.append(ConeConstraint(frame[k], False, axis.r1, k))
            constraints.append(ConeConstraint(frame[k], True, axis.r2, k))
        return constraints
    raise InvalidParameterException(f"no cone form for '{params.kind}' parameters")


def balls(method: Method, frame: np.ndarray, params: MethodParams) -> List[Ball]:
    """Closed balls whose intersection is the hypothesis region, in axis order."""
    if isinstance(params, DiskParams):
        return [Ball(frame, params.rho1, 0), Ball(1j * frame, params.rho2, 0)]
    if isinstance(params, BandParams):
        (c1, c2), (r1, r2) = params.centers, params.radii
        return [Ball(c1 * frame, r1, 0), Ball(c2 * 1j * frame, r2, 0)]
    if isinstance(params, AxisDiskParams):
        _require_axes(frame, len(params.axes))
        out = []
        for k, axis in enumerate(params.axes):
            out += [Ball(frame[k], axis.rho1, k), Ball(1j * frame[k], axis.rho2, k)]
        return out
    if isinstance(params, AxisBandParams):
        _require_axes(frame, len(params.axes))
        out = []
        for k, axis in enumerate(params.axes):
            (c1, c2), (r1, r2) = axis.centers, axis.radii
            out += [Ball(c1 * frame[k], r1, k), Ball(c2 * 1j * frame[k], r2, k)]
        return out
    raise InvalidParameterException(f"no ball form for '{params.kind}' parameters")


def _require_axes(members: np.ndarray, count: int) -> None:
    if members.ndim != 2 or members.shape[0] != count:
        raise InvalidParameterException(
            f"{count} per-axis parameters given for {members.shape[0]} orthonormal vectors"
        )


def first_disjoint_pair(ball_list: List[Ball]) -> Optional[int]:
    """Axis of the first (e_k-ball, i e_k-ball) pair that cannot intersect, if any."""
    for first, second in zip(ball_list[0::2], ball_list[1::2]):
        distance = linalg.norm(first.center - second.center)
        if distance > first.radius + second.radius + CHECK_TOL:
            return first.axis
    return None


# ---------------------------------------------------------------------------
# Margins
# ---------------------------------------------------------------------------

def arguments(vectors: np.ndarray) -> np.ndarray:
    """Principal arguments in (-pi, pi] of the entries of an (n, 1) family."""
    args = np.angle(vectors[:, 0])
    # -0.0 imaginary parts give -pi; the principal value is pi
    return np.where(args == -math.pi, math.pi, args)


def wrapped_distance(args: np.ndarray, direction: float) -> np.ndarray:
    """Angular distance in [0, pi] between each argument and direction."""
    return np.abs(np.mod(args - direction + math.pi, 2 * math.pi) - math.pi)


def constraint_margins(method: Method, vectors: np.ndarray, frame: Optional[np.ndarray],
                       params: MethodParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-constraint slack for every row.

    Returns:
        (slack, axis): slack has shape (constraints, n); axis[c] is the
        orthonormal axis constraint c belongs to (0 for single-reference methods).
    """
    if method in {Method.P41, Method.PETROVICH}:
        args = arguments(vectors)
        if isinstance(params, SectorParams):
            slack = np.vstack([args - params.phi1, params.phi2 - args])
        else:
            slack = (params.theta - wrapped_distance(args, params.a))[np.newaxis, :]
        return slack, np.zeros(slack.shape[0], dtype=int)

    norms = linalg.row_norms(vectors)
    if PARAMS_KIND[method] in CONE_KINDS:
        constraints = cone_constraints(method, frame, params)
        rows = []
        for c in constraints:
            projected = linalg.coefficients(vectors, c.direction)
            part = projected.imag if c.imaginary else projected.real
            rows.append(part - c.r * norms)
        return np.vstack(rows), np.array([c.axis for c in constraints])

    ball_list = balls(method, frame, params)
    rows = [b.radius - linalg.row_norms(vectors - b.center) for b in ball_list]
    return np.vstack(rows), np.array([b.axis for b in ball_list])


def vector_margins(method: Method, vectors: np.ndarray, frame: Optional[np.ndarray],
                   params: MethodParams) -> Tuple[np.ndarray, np.ndarray]:
    """Smallest slack per row (NaN for zero rows) and the axis attaining it."""
    slack, axis = constraint_margins(method, vectors, frame, params)
    worst = np.argmin(slack, axis=0)
    margins = slack[worst, np.arange(slack.shape[1])]
    zero = linalg.row_norms(vectors) == 0.0
    return np.where(zero, np.nan, margins), axis[worst]


def _report(method: Method, margins: np.ndarray, params: Optional[MethodParams], *,
            axis_of: Optional[np.ndarray] = None, balls_intersect: Optional[bool] = None,
            message: Optional[str] = None, failing_axis: Optional[int] = None,
            tolerance: Union[float, np.ndarray] = CHECK_TOL) -> HypothesisReport:
    active = ~np.isnan(margins)
    tolerance = np.broadcast_to(tolerance, margins.shape)
    violated = active & (margins < -tolerance)
    feasible = not violated.any() and balls_intersect is not False
    failing_index = int(np.argmax(violated)) if violated.any() else None
    if failing_index is not None and axis_of is not None and failing_axis is None:
        failing_axis = int(axis_of[failing_index])
    if not feasible and message is None:
        message = f"margin {margins[failing_index]:.3e} below -{tolerance[failing_index]:.3e}"
    if not active.any() and message is None:
        message = "family has no non-zero vector"
    return HypothesisReport(
        method=method,
        feasible=feasible,
        params=params if feasible else None,
        margins=tuple(None if np.isnan(m) else float(m) for m in margins),
        skipped_zero_vectors=int((~active).sum()),
        degenerate=not active.any(),
        balls_intersect=balls_intersect,
        failing_index=failing_index,
        failing_axis=failing_axis,
        message=message,
    )


def _check(method: Method, family: VectorFamily, frame: Frame, params: MethodParams) -> HypothesisReport:
    _require_params(method, params)
    frame_array = _frame_array(method, frame)
    if frame_array is not None:
        linalg.require_same_dim(family.vectors, frame_array, field="reference" if method in REFERENCE_METHODS else "orthonormal")
    if method.scalar_only:
        _require_scalar(family)
    if method in {Method.P41, Method.PETROVICH}:
        _require_nonzero(family)

    balls_intersect = None
    disjoint_axis = None
    if PARAMS_KIND[method] in {"disk", "band", "axis_disk", "axis_band"}:
        disjoint_axis = first_disjoint_pair(balls(method, frame_array, params))
        balls_intersect = disjoint_axis is None

    margins, axis_of = vector_margins(method, family.vectors, frame_array, params)
    message = None
    if balls_intersect is False:
        message = f"balls around the axis-{disjoint_axis} centers cannot intersect"
    return _report(method, margins, params, axis_of=axis_of, balls_intersect=balls_intersect,
                   message=message, failing_axis=disjoint_axis, tolerance=margin_tolerance(method, family.vectors))


def margin_tolerance(method: Method, vectors: np.ndarray) -> Union[float, np.ndarray]:
    """
    Cone slacks scale with ||x_k||, so their tolerance is CHECK_TOL * ||x_k||.
    Ball and angle slacks keep the absolute CHECK_TOL.
    """
    if PARAMS_KIND[method] in CONE_KINDS:
        return CHECK_TOL * linalg.row_norms(vectors)
    return CHECK_TOL


def _require_scalar(family: VectorFamily) -> None:
    if family.dim != 1:
        raise InvalidInputException(f"complex-number methods need dim 1, got {family.dim}", field="dim")


def _require_nonzero(family: VectorFamily) -> None:
    zero = np.flatnonzero(family.vectors[:, 0] == 0)
    if zero.size:
        raise UndefinedArgumentException(int(zero[0]))


# ---------------------------------------------------------------------------
# Single reference: cone, disks, bands
# ---------------------------------------------------------------------------

def check_cone(family: VectorFamily, reference: Reference, params: ConeParams) -> HypothesisReport:
    """r1||x_k|| <= Re<x_k,e> and r2||x_k|| <= Im<x_k,e> for every non-zero x_k."""
    return _check(Method.T21, family, reference, params)


def check_real_cone(family: VectorFamily, reference: Reference, params: RealParams) -> HypothesisReport:
    """Diaz-Metcalf condition r||x_k|| <= Re<x_k,e>."""
    return _check(Method.DM, family, reference, params)


def _ratio_minima(vectors: np.ndarray, direction: np.ndarray) -> Tuple[float, float]:
    norms = linalg.row_norms(vectors)
    active = norms > 0
    c = linalg.coefficients(vectors[active], direction) / norms[active]
    return float(c.real.min()), float(c.imag.min())


def extract_cone_params(family: VectorFamily, reference: Reference) -> HypothesisReport:
    """
    Largest admissible (r1, r2): the minima over non-zero x_k of
    Re<x_k,e>/||x_k|| and Im<x_k,e>/||x_k||.
    """
    sign_check = check_cone(family, reference, ConeParams(r1=0.0, r2=0.0))
    if not sign_check.feasible or sign_check.degenerate:
        return sign_check
    r1, r2 = _ratio_minima(family.vectors, reference.e)
    return check_cone(family, reference, ConeParams(r1=max(r1, 0.0), r2=max(r2, 0.0)))


def extract_real_cone_params(family: VectorFamily, reference: Reference) -> HypothesisReport:
    """Largest Diaz-Metcalf r; only real parts are constrained."""
    sign_check = check_real_cone(family, reference, RealParams(r=0.0))
    if not sign_check.feasible or sign_check.degenerate:
        return sign_check
    r, _ = _ratio_minima(family.vectors, reference.e)
    return check_real_cone(family, reference, RealParams(r=max(r, 0.0)))


def check_disks(family: VectorFamily, reference: Reference, params: DiskParams,
                method: Method = Method.C22) -> HypothesisReport:
    """||x_k - e|| <= rho1 and ||x_k - ie|| <= rho2; method is C22 or P42."""
    if method not in {Method.C22, Method.P42}:
        raise InvalidParameterException(f"disk conditions belong to c22 or p42, not {method.value}")
    return _check(method, family, reference, params)


def _radii(vectors: np.ndarray, centers: List[np.ndarray]) -> List[float]:
    active = linalg.row_norms(vectors) > 0
    return [float(linalg.row_norms(vectors[active] - c).max()) for c in centers]


def extract_disk_radii(family: VectorFamily, reference: Reference,
                       method: Method = Method.C22) -> HypothesisReport:
    """Tightest radii rho1 = max ||x_k - e||, rho2 = max ||x_k - ie||; feasible iff both < 1."""
    e = reference.e
    linalg.require_same_dim(family.vectors, e, field="reference")
    if method is Method.P42:
        _require_scalar(family)
    norms = linalg.row_norms(family.vectors)
    if not (norms > 0).any():
        return _report(method, np.full(family.n, np.nan), None,
                       message="family has no non-zero vector; radii undefined") \
            .model_copy(update={"feasible": False})
    rho1, rho2 = _radii(family.vectors, [e, 1j * e])
    if 0 < rho1 < 1 and 0 < rho2 < 1:
        return check_disks(family, reference, DiskParams(rho1=rho1, rho2=rho2), method=method)
    # Report slack against the open unit radius, which no admissible rho exceeds.
    unit = np.minimum(1.0 - linalg.row_norms(family.vectors - e),
                      1.0 - linalg.row_norms(family.vectors - 1j * e))
    unit = np.where(norms == 0, np.nan, unit)
    violated = np.nan_to_num(unit, nan=1.0) <= 0
    return HypothesisReport(
        method=method,
        feasible=False,
        margins=tuple(None if np.isnan(m) else float(m) for m in unit),
        skipped_zero_vectors=int((norms == 0).sum()),
        failing_index=int(np.argmax(violated)) if violated.any() else None,
        message=f"tightest radii ({rho1:.6g}, {rho2:.6g}) are not both inside (0, 1)",
    )


def check_bands(family: VectorFamily, reference: Reference, params: BandParams) -> HypothesisReport:
    """
    Ball form of the band conditions: x_k within (M-m)/2 of (M+m)/2 e and of
    (M+m)/2 ie. Also reports whether the two balls meet at all.
    """
    return _check(Method.C23, family, reference, params)


def ball_halfspace_equiv(x: np.ndarray, z: np.ndarray, big_z: np.ndarray) -> Tuple[bool, bool]:
    """
    Truth of (i) Re<Z - x, x - z> >= 0 and (ii) ||x - (Z+z)/2|| <= ||Z - z||/2,
    each with an EQUIV_TOL dead zone around zero.
    """
    x = linalg.as_vector(x, field="x")
    z = linalg.as_vector(z, field="z")
    big_z = linalg.as_vector(big_z, field="Z")
    linalg.require_same_dim(x, z)
    linalg.require_same_dim(x, big_z)
    halfspace = linalg.inner(big_z - x, x - z).real
    ball = linalg.norm(big_z - z) / 2 - linalg.norm(x - (big_z + z) / 2)
    return halfspace >= -EQUIV_TOL, ball >= -EQUIV_TOL


# ---------------------------------------------------------------------------
# Orthonormal families
# ---------------------------------------------------------------------------

def check_axes(family: VectorFamily, basis: OrthonormalFamily, params: AxisParams) -> HypothesisReport:
    return _check(Method.T32, family, basis, params)


def check_real_axes(family: VectorFamily, basis: OrthonormalFamily, params: RealAxisParams) -> HypothesisReport:
    return _check(Method.T31, family, basis, params)


def check_axis_disks(family: VectorFamily, basis: OrthonormalFamily, params: AxisDiskParams) -> HypothesisReport:
    return _check(Method.C32, family, basis, params)


def check_axis_bands(family: VectorFamily, basis: OrthonormalFamily, params: AxisBandParams) -> HypothesisReport:
    return _check(Method.C33, family, basis, params)


def extract_axis_params(family: VectorFamily, basis: OrthonormalFamily) -> HypothesisReport:
    """Per-axis extract_cone_params; feasible iff every axis is."""
    zeros = AxisParams(axes=tuple(ConeParams(r1=0.0, r2=0.0) for _ in range(basis.m)))
    sign_check = check_axes(family, basis, zeros)
    if not sign_check.feasible or sign_check.degenerate:
        return sign_check
    axes = []
    for e_k in basis.members:
        r, rho = _ratio_minima(family.vectors, e_k)
        axes.append(ConeParams(r1=max(r, 0.0), r2=max(rho, 0.0)))
    return check_axes(family, basis, AxisParams(axes=tuple(axes)))


def extract_real_axis_params(family: VectorFamily, basis: OrthonormalFamily) -> HypothesisReport:
    sign_check = check_real_axes(family, basis, RealAxisParams(r=(0.0,) * basis.m))
    if not sign_check.feasible or sign_check.degenerate:
        return sign_check
    r = tuple(max(_ratio_minima(family.vectors, e_k)[0], 0.0) for e_k in basis.members)
    return check_real_axes(family, basis, RealAxisParams(r=r))


def extract_axis_disk_radii(family: VectorFamily, basis: OrthonormalFamily) -> HypothesisReport:
    """Tightest per-axis radii (max ||x_j - e_k||, max ||x_j - ie_k||); feasible iff all < 1."""
    linalg.require_same_dim(family.vectors, basis.members, field="orthonormal")
    if not (linalg.row_norms(family.vectors) > 0).any():
        return _report(Method.C32, np.full(family.n, np.nan), None,
                       message="family has no non-zero vector; radii undefined") \
            .model_copy(update={"feasible": False})
    axes = []
    for k, e_k in enumerate(basis.members):
        rho, eta = _radii(family.vectors, [e_k, 1j * e_k])
        if not (0 < rho < 1 and 0 < eta < 1):
            return HypothesisReport(
                method=Method.C32,
                feasible=False,
                failing_axis=k,
                message=f"tightest radii ({rho:.6g}, {eta:.6g}) on axis {k} are not both inside (0, 1)",
            )
        axes.append(DiskParams(rho1=rho, rho2=eta))
    return check_axis_disks(family, basis, AxisDiskParams(axes=tuple(axes)))


# ---------------------------------------------------------------------------
# Complex numbers
# ---------------------------------------------------------------------------

def extract_sector(family: VectorFamily) -> HypothesisReport:
    """Smallest [phi1, phi2] containing every arg(z_k); feasible iff inside [0, pi/2)."""
    _require_scalar(family)
    _require_nonzero(family)
    args = arguments(family.vectors)
    # phi2 < pi/2 is enforced as phi2 <= pi/2 - CHECK_TOL; the extra CHECK_TOL
    # offsets the tolerance _report grants on every margin.
    margins = np.minimum(args, (HALF_PI - 2 * CHECK_TOL) - args)
    report = _report(Method.P41, margins, None)
    if not report.feasible:
        return report
    params = SectorParams(phi1=max(float(args.min()), 0.0),
                          phi2=min(float(args.max()), HALF_PI - CHECK_TOL))
    return check_sector(family, params)


def check_sector(family: VectorFamily, params: SectorParams) -> HypothesisReport:
    return _check(Method.P41, family, None, params)


def check_petrovich(family: VectorFamily, params: PetrovichParams) -> HypothesisReport:
    """Wrapped angular distance |arg(z_k) - a| <= theta for every k."""
    return _check(Method.PETROVICH, family, None, params)


def extract_petrovich_params(family: VectorFamily) -> HypothesisReport:
    """Smallest arc holding every argument: a is its midpoint, theta its half-width."""
    _require_scalar(family)
    _require_nonzero(family)
    args = np.sort(arguments(family.vectors))
    gaps = np.append(np.diff(args), args[0] + 2 * math.pi - args[-1])
    widest = int(np.argmax(gaps))
    start = args[(widest + 1) % args.size]
    half_width = (2 * math.pi - gaps[widest]) / 2
    if half_width >= HALF_PI:
        distances = wrapped_distance(arguments(family.vectors), float(start + half_width))
        return HypothesisReport(
            method=Method.PETROVICH,
            feasible=False,
            margins=tuple(float(m) for m in HALF_PI - distances),
            failing_index=int(np.argmax(distances)),
            message=f"arguments span {2 * half_width:.6g} rad, not less than pi",
        )
    a = float(np.angle(np.exp(1j * (start + half_width))))
    return check_petrovich(family, PetrovichParams(a=a, theta=max(float(half_width), MIN_ARC_HALF_WIDTH)))


def disks_intersect(rho1: float, rho2: float) -> bool:
    """Whether the closed disks of radii rho1 around 1 and rho2 around i meet (strict criterion)."""
    params = DiskParams(rho1=rho1, rho2=rho2)
    return params.rho1 + params.rho2 > SQRT2


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def check(method: Method, family: VectorFamily, frame: Frame, params: MethodParams) -> HypothesisReport:
    """Check the hypothesis of any method with explicit parameters."""
    return _check(method, family, frame, params)


def extract(method: Method, family: VectorFamily, frame: Frame) -> HypothesisReport:
    """Best parameters for methods that support automatic extraction."""
    if method is Method.DM:
        return extract_real_cone_params(family, require_frame(method, frame))
    if method is Method.T21:
        return extract_cone_params(family, require_frame(method, frame))
    if method in {Method.C22, Method.P42}:
        return extract_disk_radii(family, require_frame(method, frame), method=method)
    if method is Method.T31:
        return extract_real_axis_params(family, require_frame(method, frame))
    if method is Method.T32:
        return extract_axis_params(family, require_frame(method, frame))
    if method is Method.C32:
        return extract_axis_disk_radii(family, require_frame(method, frame))
    if method is Method.P41:
        return extract_sector(family)
    if method is Method.PETROVICH:
        return extract_petrovich_params(family)
    raise InvalidParameterException(f"method {method.value} has no automatic parameter extraction; supply params")


def require_frame(method: Method, frame: Frame) -> Frame:
    """Validates that frame is the kind of frame method needs and returns it."""
    _frame_array(method, frame)
    return frame
