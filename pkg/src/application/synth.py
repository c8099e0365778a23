"""
Construction of families that satisfy a hypothesis class: exact equality
families, seeded rejection samples, and feasibility-preserving perturbations.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from src.domain import hypotheses, linalg
from src.domain.exceptions import GenerationException, InvalidParameterException
from src.domain.models import (
    AxisParams,
    ConeParams,
    Method,
    MethodParams,
    OrthonormalFamily,
    PARAMS_KIND,
    Reference,
    SynthSpec,
    VectorFamily,
)

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "philox"
NORMALIZATION_TOL = 1e-12
MAX_ATTEMPTS_PER_VECTOR = 100_000
BATCH_SIZE = 64
SPREAD_DECAY = 0.8  # per rejected batch
MIN_MAGNITUDE, MAX_MAGNITUDE = 0.1, 10.0
CENTER_SEARCH_STEPS = 100
MAX_HALVINGS = 64

PERTURBABLE_METHODS = {Method.DM, Method.T21, Method.T31, Method.T32}
SCALE_INVARIANT_KINDS = {"real", "cone", "real_axis", "axis", "sector", "petrovich"}


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; identical seeds give identical streams on every platform."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _complex_normal(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _positive_weights(weights: Sequence[float]) -> np.ndarray:
    t = np.asarray(weights, dtype=float)
    if t.ndim != 1 or t.size == 0 or not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise InvalidParameterException("weights must be a non-empty list of positive numbers")
    return t


# ---------------------------------------------------------------------------
# Equality families
# ---------------------------------------------------------------------------

def synth_equality_t21(reference: Reference, params: ConeParams, weights: Sequence[float]) -> VectorFamily:
    """
    x_k = t_k (r1 + i r2) e. With r1^2 + r2^2 = 1 this is the equality case of
    the cone bound; r2 = 0 gives the Diaz-Metcalf equality case.
    """
    if abs(params.r1 ** 2 + params.r2 ** 2 - 1) > NORMALIZATION_TOL:
        raise InvalidParameterException(
            f"equality needs r1^2 + r2^2 = 1, got {params.r1 ** 2 + params.r2 ** 2!r}"
        )
    t = _positive_weights(weights)
    direction = complex(params.r1, params.r2) * reference.e
    return VectorFamily(vectors=t[:, np.newaxis] * direction[np.newaxis, :])


def synth_equality_t32(basis: OrthonormalFamily, params: AxisParams, weights: Sequence[float]) -> VectorFamily:
    """x_j = t_j sum_k (r_k + i rho_k) e_k, normalized so sum_k (r_k^2 + rho_k^2) = 1."""
    if len(params.axes) != basis.m:
        raise InvalidParameterException(f"{len(params.axes)} axes given for {basis.m} orthonormal vectors")
    total = sum(a.r1 ** 2 + a.r2 ** 2 for a in params.axes)
    if abs(total - 1) > NORMALIZATION_TOL:
        raise InvalidParameterException(f"equality needs sum (r_k^2 + rho_k^2) = 1, got {total!r}")
    t = _positive_weights(weights)
    direction = np.array([complex(a.r1, a.r2) for a in params.axes]) @ basis.members
    return VectorFamily(vectors=t[:, np.newaxis] * direction[np.newaxis, :])


# ---------------------------------------------------------------------------
# Rejection sampling
# ---------------------------------------------------------------------------

def default_frame(spec: SynthSpec) -> hypotheses.Frame:
    """The requested frame, or the standard basis frame of C^dim."""
    if spec.method in hypotheses.REFERENCE_METHODS:
        return spec.reference or Reference.basis(spec.dim)
    if spec.method in hypotheses.ORTHONORMAL_METHODS:
        axes = getattr(spec.params, "axes", None) or spec.params.r
        return spec.orthonormal or OrthonormalFamily.standard(spec.dim, len(axes))
    return None


def _frame_array(frame: hypotheses.Frame) -> Optional[np.ndarray]:
    if isinstance(frame, Reference):
        return frame.e
    if isinstance(frame, OrthonormalFamily):
        return frame.members
    return None


def _cone_center(method: Method, frame: np.ndarray, params: MethodParams) -> np.ndarray:
    """
    A unit point strictly inside the cone when sum r^2 < 1: every r_c is
    raised by eta, small enough that the point keeps norm <= 1.
    """
    constraints = hypotheses.cone_constraints(method, frame, params)
    squares = sum(c.r * c.r for c in constraints)
    if squares > 1 + hypotheses.CHECK_TOL:
        raise GenerationException(
            f"sum of squared cone parameters is {squares:.6g} > 1; no non-zero vector satisfies it"
        )
    eta = max(1 - squares, 0.0) / (4 * (sum(c.r for c in constraints) + len(constraints)))
    center = sum((c.r + eta) * (1j if c.imaginary else 1.0) * c.direction for c in constraints)
    return center / linalg.norm(center)


def _ball_center(ball_list: Sequence[hypotheses.Ball]) -> np.ndarray:
    """
    A point of the balls' intersection, with the largest squared slack.

    The balls come in pairs around c1 e_k and c2 i e_k. For x = sum_k z_k e_k
    with S = ||x||^2, ||x - c1 e_k|| <= R1 reads Re z_k >= (S + c1^2 - R1^2) / 2c1,
    and the second ball bounds Im z_k the same way. Putting every z_k at the
    positive parts of its bounds gives ||x||^2 = T(S) and a squared slack of
    S - T(S) in every ball. S - T(S) is concave, so a ternary search finds its
    maximum.
    """
    first, second = ball_list[0::2], ball_list[1::2]
    c1 = np.array([linalg.norm(b.center) for b in first])
    c2 = np.array([linalg.norm(b.center) for b in second])
    r1 = np.array([b.radius for b in first])
    r2 = np.array([b.radius for b in second])
    axes = np.array([b.center / c for b, c in zip(first, c1)])

    def coordinates(s: float) -> np.ndarray:
        re = np.maximum((s + c1 * c1 - r1 * r1) / (2 * c1), 0.0)
        im = np.maximum((s + c2 * c2 - r2 * r2) / (2 * c2), 0.0)
        return re + 1j * im

    def slack(s: float) -> float:
        z = coordinates(s)
        return s - float(np.sum(z.real * z.real + z.imag * z.imag))

    # no point of a ball is farther than c + R from the origin
    low, high = 0.0, float(min(np.min(c1 + r1), np.min(c2 + r2)) ** 2)
    for _ in range(CENTER_SEARCH_STEPS):
        third = (high - low) / 3
        if slack(low + third) < slack(high - third):
            low += third
        else:
            high -= third
    s = (low + high) / 2
    if slack(s) < 0:
        raise GenerationException("no point found in the intersection of the hypothesis balls")
    return coordinates(s) @ axes


def _sampling_geometry(method: Method, frame: Optional[np.ndarray],
                       params: MethodParams) -> Tuple[np.ndarray, float]:
    """Center of the proposal distribution and its initial spread."""
    kind = PARAMS_KIND[method]
    if kind in hypotheses.CONE_KINDS:
        return _cone_center(method, frame, params), 1.0
    if kind == "sector":
        return np.array([np.exp(1j * (params.phi1 + params.phi2) / 2)]), 1.0
    if kind == "petrovich":
        return np.array([np.exp(1j * params.a)]), 1.0
    ball_list = hypotheses.balls(method, frame, params)
    disjoint = hypotheses.first_disjoint_pair(ball_list)
    if disjoint is not None:
        raise GenerationException(
            f"jointly infeasible geometry: the two balls of axis {disjoint} cannot intersect "
            "(distance between centers exceeds the sum of radii); loosen the parameters"
        )
    return _ball_center(ball_list), min(b.radius for b in ball_list)


def _draw_vector(method: Method, center: np.ndarray, spread: float, frame: Optional[np.ndarray],
                 params: MethodParams, rng: np.random.Generator) -> Tuple[np.ndarray, int]:
    sigma = spread
    attempts = 0
    while attempts < MAX_ATTEMPTS_PER_VECTOR:
        candidates = center + sigma * _complex_normal(rng, (BATCH_SIZE, center.size))
        margins, _ = hypotheses.vector_margins(method, candidates, frame, params)
        accepted = np.flatnonzero(np.nan_to_num(margins, nan=-np.inf) >= 0.0)
        if accepted.size:
            return candidates[accepted[0]], attempts + int(accepted[0]) + 1
        attempts += BATCH_SIZE
        sigma *= SPREAD_DECAY
    raise GenerationException(
        f"no feasible vector after {MAX_ATTEMPTS_PER_VECTOR} attempts for {method.value}; loosen the parameters"
    )


def sample_feasible(spec: SynthSpec) -> VectorFamily:
    """
    Seeded rejection sample of spec.count vectors satisfying the spec's
    hypothesis. Proposals are Gaussian around an interior point of the
    feasible region with a spread that shrinks after each rejected batch.
    """
    rng = make_rng(spec.seed)
    frame = default_frame(spec)
    frame_array = _frame_array(frame)
    center, spread = _sampling_geometry(spec.method, frame_array, spec.params)

    rows = []
    attempts = 0
    for _ in range(spec.count):
        row, used = _draw_vector(spec.method, center, spread, frame_array, spec.params, rng)
        attempts += used
        if PARAMS_KIND[spec.method] in SCALE_INVARIANT_KINDS:
            row = row * math.exp(rng.uniform(math.log(MIN_MAGNITUDE), math.log(MAX_MAGNITUDE)))
        rows.append(row)
    logger.info(f"Sampled {spec.count} vectors for {spec.method.value} with {attempts} proposals.")

    family = VectorFamily(vectors=rows)
    report = hypotheses.check(spec.method, family, frame, spec.params)
    if not report.feasible:
        raise GenerationException(f"sampled family failed its own hypothesis: {report.message}")
    return family


# ---------------------------------------------------------------------------
# Perturbation
# ---------------------------------------------------------------------------

def perturb_equality(family: VectorFamily, epsilon: float, seed: int, method: Method,
                     frame: hypotheses.Frame) -> VectorFamily:
    """
    Adds a random perturbation of relative size <= epsilon to every vector.
    The perturbation is halved until the method's hypothesis holds again with
    re-extracted parameters; epsilon = 0 returns the family unchanged.
    """
    if method not in PERTURBABLE_METHODS:
        raise InvalidParameterException(f"perturbation is defined for {sorted(m.value for m in PERTURBABLE_METHODS)}")
    if not math.isfinite(epsilon) or epsilon < 0:
        raise InvalidParameterException(f"epsilon must be a finite number >= 0, got {epsilon!r}")
    if epsilon == 0:
        return family

    rng = make_rng(seed)
    noise = _complex_normal(rng, family.vectors.shape)
    noise_norms = linalg.row_norms(noise)
    lengths = linalg.row_norms(family.vectors) * rng.uniform(0.0, 1.0, family.n)
    offsets = noise * (lengths / np.where(noise_norms > 0, noise_norms, 1.0))[:, np.newaxis]

    scale = epsilon
    for _ in range(MAX_HALVINGS):
        candidate = VectorFamily(vectors=family.vectors + scale * offsets)
        if hypotheses.extract(method, candidate, frame).feasible:
            return candidate
        scale /= 2
    logger.warning(f"Perturbation shrunk to zero after {MAX_HALVINGS} halvings; returning the input family.")
    return family
