"""
Certified lower bounds c * sum ||x_k|| <= ||sum x_k||.

Each bound function re-checks its hypothesis in the same call and refuses
(InfeasibleHypothesisException) when it fails, so a Certificate is never
issued without evidence. The equality flag tests the method's equality case
sum x_k = (sum ||x_k||) * w, where w is a method-specific vector of norm c.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.domain import hypotheses, linalg
from src.domain.exceptions import (
    BoundsException,
    InfeasibleHypothesisException,
    InvalidParameterException,
    SoundnessException,
)
from src.domain.models import (
    AxisBandParams,
    AxisDiskParams,
    AxisParams,
    BandParams,
    Certificate,
    Comparison,
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
    SkippedMethod,
    VectorFamily,
)

logger = logging.getLogger(__name__)

EQ_TOL = 1e-8
# Largest relative excess of bound over actual a certificate may carry.
SOUNDNESS_TOL = 1e-12
# No factor exceeds 1 when the family has a non-zero vector (Bessel).
FACTOR_SLACK = 1e-6


def _certify(report: HypothesisReport, family: VectorFamily, factor: float,
             equality_vector: np.ndarray) -> Certificate:
    if not report.feasible:
        logger.info(f"{report.method.name} refused: {report.message}")
        raise InfeasibleHypothesisException(report)
    if not report.degenerate and factor > 1 + FACTOR_SLACK:
        raise SoundnessException(
            f"{report.method.name} factor {factor!r} exceeds 1 for a feasible non-degenerate family"
        )

    norms = linalg.row_norms(family.vectors)
    sum_of_norms = 0.0
    for value in norms:
        sum_of_norms += float(value)
    total = linalg.family_sum(family)
    actual = linalg.norm(total)
    bound = factor * sum_of_norms

    if bound > actual * (1 + SOUNDNESS_TOL):
        logger.warning(f"{report.method.name} refused: bound {bound!r} exceeds ||sum x_k|| = {actual!r}")
        raise SoundnessException(f"{report.method.name} bound {bound!r} exceeds ||sum x_k|| = {actual!r}")
    tightness = 1.0 if actual == 0.0 else min(bound / actual, 1.0)

    gap = linalg.norm(total - sum_of_norms * equality_vector)
    return Certificate(
        method=report.method,
        params=report.params,
        factor=factor,
        sum_of_norms=sum_of_norms,
        bound=bound,
        actual=actual,
        tightness=tightness,
        equality=gap <= EQ_TOL * sum_of_norms,
        skipped_zero_vectors=report.skipped_zero_vectors,
    )


# ---------------------------------------------------------------------------
# Factors
# ---------------------------------------------------------------------------

def disk_coefficient(params: DiskParams) -> complex:
    return complex(math.sqrt(1 - params.rho1 ** 2), math.sqrt(1 - params.rho2 ** 2))


def disk_factor_squared(params: DiskParams) -> float:
    return 2 - params.rho1 ** 2 - params.rho2 ** 2


def band_coefficient(params: BandParams) -> complex:
    """sqrt(mM)/(M+m) + i sqrt(nN)/(N+n); the equality coefficient is twice this."""
    return complex(math.sqrt(params.m1 * params.M1) / (params.M1 + params.m1),
                   math.sqrt(params.m2 * params.M2) / (params.M2 + params.m2))


def band_factor_term(params: BandParams) -> float:
    return (params.m1 * params.M1 / (params.M1 + params.m1) ** 2
            + params.m2 * params.M2 / (params.M2 + params.m2) ** 2)


# ---------------------------------------------------------------------------
# Single unit reference
# ---------------------------------------------------------------------------

def diaz_metcalf(family: VectorFamily, reference: Reference, r: float) -> Certificate:
    """r sum ||x_k|| <= ||sum x_k|| under 0 <= r||x_k|| <= Re<x_k,e>."""
    params = RealParams(r=r)
    report = hypotheses.check_real_cone(family, reference, params)
    return _certify(report, family, params.r, params.r * reference.e)


def theorem_2_1(family: VectorFamily, reference: Reference, params: ConeParams) -> Certificate:
    """sqrt(r1^2 + r2^2) sum ||x_k|| <= ||sum x_k|| under the cone condition."""
    report = hypotheses.check_cone(family, reference, params)
    factor = math.sqrt(params.r1 * params.r1 + params.r2 * params.r2)
    return _certify(report, family, factor, complex(params.r1, params.r2) * reference.e)


def corollary_2_2(family: VectorFamily, reference: Reference, params: DiskParams) -> Certificate:
    """sqrt(2 - rho1^2 - rho2^2) sum ||x_k|| <= ||sum x_k|| for x_k in both balls."""
    report = hypotheses.check_disks(family, reference, params)
    return _certify(report, family, math.sqrt(disk_factor_squared(params)),
                    disk_coefficient(params) * reference.e)


def corollary_2_3(family: VectorFamily, reference: Reference, params: BandParams) -> Certificate:
    """2 [m1M1/(M1+m1)^2 + m2M2/(M2+m2)^2]^(1/2) sum ||x_k|| <= ||sum x_k|| under the bands."""
    report = hypotheses.check_bands(family, reference, params)
    return _certify(report, family, 2 * math.sqrt(band_factor_term(params)),
                    2 * band_coefficient(params) * reference.e)


# ---------------------------------------------------------------------------
# Orthonormal families
# ---------------------------------------------------------------------------

def theorem_3_1(family: VectorFamily, basis: OrthonormalFamily, r: Sequence[float]) -> Certificate:
    """(sum r_k^2)^(1/2) sum ||x_j|| <= ||sum x_j|| under the real-part axis conditions."""
    params = RealAxisParams(r=tuple(r))
    report = hypotheses.check_real_axes(family, basis, params)
    factor = math.sqrt(sum(value * value for value in params.r))
    return _certify(report, family, factor, np.asarray(params.r) @ basis.members)


def theorem_3_2(family: VectorFamily, basis: OrthonormalFamily, params: AxisParams) -> Certificate:
    report = hypotheses.check_axes(family, basis, params)
    factor = math.sqrt(sum(a.r1 * a.r1 + a.r2 * a.r2 for a in params.axes))
    coefficients = np.array([complex(a.r1, a.r2) for a in params.axes])
    return _certify(report, family, factor, coefficients @ basis.members)


def corollary_3_2(family: VectorFamily, basis: OrthonormalFamily, params: AxisDiskParams) -> Certificate:
    report = hypotheses.check_axis_disks(family, basis, params)
    factor = math.sqrt(sum(disk_factor_squared(a) for a in params.axes))
    coefficients = np.array([disk_coefficient(a) for a in params.axes])
    return _certify(report, family, factor, coefficients @ basis.members)


def corollary_3_3(family: VectorFamily, basis: OrthonormalFamily, params: AxisBandParams) -> Certificate:
    report = hypotheses.check_axis_bands(family, basis, params)
    factor = 2 * math.sqrt(sum(band_factor_term(a) for a in params.axes))
    coefficients = np.array([2 * band_coefficient(a) for a in params.axes])
    return _certify(report, family, factor, coefficients @ basis.members)


# ---------------------------------------------------------------------------
# Complex numbers
# ---------------------------------------------------------------------------

def proposition_4_1(family: VectorFamily, params: SectorParams) -> Certificate:
    """sqrt(sin^2 phi1 + cos^2 phi2) sum |z_k| <= |sum z_k| for arguments in [phi1, phi2]."""
    report = hypotheses.check_sector(family, params)
    coefficient = complex(math.cos(params.phi2), math.sin(params.phi1))
    factor = math.sqrt(math.sin(params.phi1) ** 2 + math.cos(params.phi2) ** 2)
    return _certify(report, family, factor, np.array([coefficient]))


def proposition_4_2(family: VectorFamily, unit: Reference, params: DiskParams) -> Certificate:
    """The two-disk bound in C^1 against a unit-modulus reference u."""
    report = hypotheses.check_disks(family, unit, params, method=Method.P42)
    return _certify(report, family, math.sqrt(disk_factor_squared(params)),
                    disk_coefficient(params) * unit.e)


def petrovich(family: VectorFamily, params: PetrovichParams) -> Certificate:
    """cos(theta) sum |z_k| <= |sum z_k| for arguments within theta of a."""
    report = hypotheses.check_petrovich(family, params)
    factor = math.cos(params.theta)
    return _certify(report, family, factor, np.array([factor * np.exp(1j * params.a)]))


# ---------------------------------------------------------------------------
# Dispatch and comparison
# ---------------------------------------------------------------------------

def certify(method: Method, family: VectorFamily, frame: hypotheses.Frame,
            params: MethodParams) -> Certificate:
    """Bound for any method given its frame (reference, orthonormal family or None)."""
    if params.kind != PARAMS_KIND[method]:
        raise InvalidParameterException(
            f"method {method.value} takes '{PARAMS_KIND[method]}' parameters, got '{params.kind}'"
        )
    frame = hypotheses.require_frame(method, frame)
    if method is Method.DM:
        return diaz_metcalf(family, frame, params.r)
    if method is Method.T21:
        return theorem_2_1(family, frame, params)
    if method is Method.C22:
        return corollary_2_2(family, frame, params)
    if method is Method.C23:
        return corollary_2_3(family, frame, params)
    if method is Method.T31:
        return theorem_3_1(family, frame, params.r)
    if method is Method.T32:
        return theorem_3_2(family, frame, params)
    if method is Method.C32:
        return corollary_3_2(family, frame, params)
    if method is Method.C33:
        return corollary_3_3(family, frame, params)
    if method is Method.P41:
        return proposition_4_1(family, params)
    if method is Method.P42:
        return proposition_4_2(family, frame, params)
    return petrovich(family, params)


def _frame_for(method: Method, reference: Optional[Reference],
               basis: Optional[OrthonormalFamily]) -> hypotheses.Frame:
    if method.frame_kind == "reference":
        return reference
    if method.frame_kind == "orthonormal":
        return basis
    return None


def _params_for(method: Method, params: Sequence[MethodParams]) -> Optional[MethodParams]:
    for candidate in params:
        if candidate.kind == PARAMS_KIND[method]:
            return candidate
    return None


def compare_all(family: VectorFamily, reference: Optional[Reference] = None,
                basis: Optional[OrthonormalFamily] = None,
                params: Sequence[MethodParams] = ()) -> Comparison:
    """
    Run every method whose hypothesis holds, using supplied parameters where
    given and extracted ones otherwise.

    Returns:
        Comparison with certificates sorted by bound descending (ties in
        Method order) and the skipped methods with their reasons.
    """
    certificates = []
    skipped = []
    for method in Method:
        frame = _frame_for(method, reference, basis)
        try:
            if method.scalar_only and family.dim != 1:
                raise InvalidParameterException(f"defined for complex numbers, family has dim {family.dim}")
            if method is Method.P42 and frame is not None and frame.dim != 1:
                raise InvalidParameterException("needs a reference in C^1")
            chosen = _params_for(method, params)
            if chosen is None:
                report = hypotheses.extract(method, family, frame)
                if not report.feasible:
                    raise InfeasibleHypothesisException(report)
                chosen = report.params
            certificates.append(certify(method, family, frame, chosen))
        except BoundsException as e:
            logger.info(f"compare: skipping {method.name}: {e}")
            skipped.append(SkippedMethod(method=method, reason=str(e)))

    certificates.sort(key=lambda c: (-c.bound, c.method.rank))
    return Comparison(certificates=certificates, skipped=skipped)
