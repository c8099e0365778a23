"""
Search for the unit reference e that maximizes the certified cone bound of
a family. The objective is the certificate's bound itself; references whose
extracted parameters are infeasible score 0.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from src.domain import bounds, hypotheses, linalg
from src.domain.exceptions import InfeasibleHypothesisException, SoundnessException
from src.domain.models import Certificate, Reference, SearchConfig, SearchResult, VectorFamily

logger = logging.getLogger(__name__)

PHASE_SAMPLES = 64


def evaluate_reference(family: VectorFamily, reference: Reference) -> Certificate:
    """Extract the best cone parameters for reference and certify them."""
    report = hypotheses.extract_cone_params(family, reference)
    if not report.feasible or report.params is None:
        raise InfeasibleHypothesisException(report)
    return bounds.theorem_2_1(family, reference, report.params)


def _score(family: VectorFamily, e: np.ndarray) -> Tuple[float, Optional[Certificate]]:
    try:
        certificate = evaluate_reference(family, Reference(e=e))
    except (InfeasibleHypothesisException, SoundnessException):
        return 0.0, None
    return certificate.bound, certificate


def _unit(v: np.ndarray) -> np.ndarray:
    return v / linalg.norm(v)


def _sum_direction(family: VectorFamily) -> np.ndarray:
    """s/||s||, or the direction of the longest vector when the sum vanishes."""
    total = linalg.family_sum(family)
    if linalg.norm(total) > 0:
        return _unit(total)
    norms = linalg.row_norms(family.vectors)
    return _unit(family.vectors[int(np.argmax(norms))])


def _phase_seed(family: VectorFamily, direction: np.ndarray) -> Tuple[np.ndarray, float]:
    best, best_score = direction, -1.0
    for j in range(PHASE_SAMPLES):
        candidate = np.exp(-1j * 2 * math.pi * j / PHASE_SAMPLES) * direction
        score, _ = _score(family, candidate)
        if score > best_score:
            best, best_score = candidate, score
    return best, best_score


class _Restart:
    """One derivative-free local search from a starting reference."""

    def __init__(self, family: VectorFamily, start: np.ndarray, config: SearchConfig,
                 rng: np.random.Generator):
        self.family = family
        self.e = start
        self.score, self.certificate = _score(family, start)
        self.config = config
        self.rng = rng

    def _tangent(self) -> np.ndarray:
        d = self.e.size
        g = (self.rng.standard_normal(d) + 1j * self.rng.standard_normal(d)) / math.sqrt(2)
        g = g - linalg.inner(g, self.e).real * self.e
        length = linalg.norm(g)
        return g / length if length > 0 else g

    def run(self) -> "_Restart":
        step = self.config.initial_step
        for _ in range(self.config.iterations):
            direction = self._tangent()
            candidate = self.e + step * direction
            if linalg.norm(candidate) == 0:
                step *= self.config.decay
                continue
            candidate = _unit(candidate)
            score, certificate = _score(self.family, candidate)
            if score > self.score:
                self.e, self.score, self.certificate = candidate, score, certificate
            else:
                step *= self.config.decay
        return self


def search_reference(family: VectorFamily, config: SearchConfig = SearchConfig()) -> SearchResult:
    """
    Random-restart local search. Restart 0 starts from the better of the two
    deterministic seeds (s/||s|| and its best phase rotation); the others from
    random unit vectors drawn from independent child streams of config.seed.
    """
    if not (linalg.row_norms(family.vectors) > 0).any():
        logger.info("search: family has no non-zero vector")
        return SearchResult(message="family has no non-zero vector; every reference is vacuous")

    plain = _sum_direction(family)
    plain_score, _ = _score(family, plain)
    rotated, rotated_score = _phase_seed(family, plain)
    start = rotated if rotated_score > plain_score else plain

    streams = np.random.SeedSequence(config.seed).spawn(config.restarts)
    restarts: List[_Restart] = []
    for index, stream in enumerate(streams):
        rng = np.random.Generator(np.random.Philox(stream))
        if index == 0:
            origin = start
        else:
            draw = rng.standard_normal(family.dim) + 1j * rng.standard_normal(family.dim)
            origin = _unit(draw) if linalg.norm(draw) > 0 else start
        restarts.append(_Restart(family, origin, config, rng).run())
        logger.debug(f"search restart {index}: bound {restarts[-1].score!r}")

    best_index = max(range(len(restarts)), key=lambda i: (restarts[i].score, -i))
    best = restarts[best_index]
    seed_bounds = (plain_score, rotated_score)
    if best.certificate is None:
        logger.info("search found no feasible reference")
        return SearchResult(seed_bounds=seed_bounds, message="no feasible reference found")

    logger.info(f"search: best bound {best.score!r} from restart {best_index} (seeds {seed_bounds})")
    return SearchResult(
        reference=Reference(e=best.e),
        certificate=best.certificate,
        seed_bounds=seed_bounds,
        best_restart=best_index,
    )

