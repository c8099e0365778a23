import asyncio
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

from pydantic import TypeAdapter, ValidationError

from src.application import refsearch, synth
from src.domain import bounds, hypotheses
from src.domain.exceptions import (
    BoundsException,
    InfeasibleHypothesisException,
    InvalidInputException,
    InvalidParameterException,
)
from src.domain.models import (
    AxisParams,
    Certificate,
    Comparison,
    ConeParams,
    Dataset,
    EqualitySpec,
    HypothesisReport,
    Method,
    MethodParams,
    OrthonormalFamily,
    PARAMS_KIND,
    Reference,
    SearchConfig,
    SearchResult,
    SynthSpec,
)
from src.infrastructure import acl
from src.infrastructure.dataset_store import DatasetStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INVALID = 3

# Files processed concurrently in batch mode
MAX_CONCURRENT_FILES = 4
EQUALITY_WEIGHT_RANGE = (0.5, 2.0)

# synth names that build exact equality families, mapped to the method they certify
EQUALITY_TARGETS: Dict[str, Method] = {
    "dm-equality": Method.DM,
    "t21-equality": Method.T21,
    "t31-equality": Method.T31,
    "t32-equality": Method.T32,
}
SYNTH_NAMES = [m.value for m in Method] + list(EQUALITY_TARGETS)

_PARAMS_ADAPTER = TypeAdapter(MethodParams)


class Outcome(NamedTuple):
    """Exit code and JSON payload of one command."""
    code: int
    payload: Any


def exit_code_for(error: Exception) -> int:
    if isinstance(error, InfeasibleHypothesisException):
        return EXIT_INFEASIBLE
    return EXIT_INVALID


def error_document(error: Exception) -> Dict[str, Any]:
    document: Dict[str, Any] = {"error": type(error).__name__, "message": str(error)}
    if isinstance(error, InvalidInputException) and error.field is not None:
        document["field"] = error.field
    if isinstance(error, InfeasibleHypothesisException):
        document["report"] = acl.report_document(error.report)
    return document


def parse_params(method: Method, raw: Any) -> MethodParams:
    """MethodParams from a decoded JSON object; a missing kind defaults to the method's."""
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as e:
            raise InvalidInputException(f"malformed JSON: {e.msg}", field="params") from e
    if not isinstance(raw, dict):
        raise InvalidInputException("parameters must be a JSON object", field="params")
    return _PARAMS_ADAPTER.validate_python({"kind": PARAMS_KIND[method], **raw})


class CertificationService:
    """
    Command layer behind the CLI: resolves frames and parameters for a
    dataset, runs the domain operations and processes directories of
    datasets concurrently.
    """

    def __init__(self, store: Optional[DatasetStore] = None):
        self.store = store or DatasetStore()

    # -----------------------------------------------------------------------
    # Single dataset
    # -----------------------------------------------------------------------

    def check(self, dataset: Dataset, method: Method) -> HypothesisReport:
        """Checks supplied parameters, or extracts the best ones when none are given."""
        frame = dataset.frame_for(method)
        params = dataset.params_for(method)
        if params is None:
            return hypotheses.extract(method, dataset.family, frame)
        return hypotheses.check(method, dataset.family, frame, params)

    def bound(self, dataset: Dataset, method: Method, auto_params: bool = False) -> Certificate:
        frame = dataset.frame_for(method)
        params = None if auto_params else dataset.params_for(method)
        if params is None:
            if not auto_params:
                raise InvalidInputException(
                    f"no '{PARAMS_KIND[method]}' parameters in the dataset; supply them or use --auto-params",
                    field="params",
                )
            report = hypotheses.extract(method, dataset.family, frame)
            if not report.feasible:
                raise InfeasibleHypothesisException(report)
            params = report.params
        return bounds.certify(method, dataset.family, frame, params)

    def compare(self, dataset: Dataset) -> Comparison:
        return bounds.compare_all(dataset.family, reference=dataset.reference,
                                  basis=dataset.orthonormal, params=dataset.params)

    def search(self, dataset: Dataset, config: SearchConfig) -> SearchResult:
        return refsearch.search_reference(dataset.family, config)

    # -----------------------------------------------------------------------
    # Synthesis
    # -----------------------------------------------------------------------

    def synthesize(self, name: str, raw_params: Any, dim: int, count: int, seed: int,
                   weights: Optional[Sequence[float]] = None) -> Dataset:
        """
        Builds a dataset for a synth name: a method name samples a feasible
        family, an equality name builds that method's exact equality family.
        """
        if name in EQUALITY_TARGETS:
            return self._synthesize_equality(name, raw_params, dim, count, seed, weights)
        try:
            method = Method(name)
        except ValueError as e:
            raise InvalidInputException(f"unknown synth name '{name}'; expected one of {SYNTH_NAMES}",
                                        field="method") from e
        spec = SynthSpec(method=method, dim=dim, count=count, seed=seed,
                         params=parse_params(method, raw_params))
        family = synth.sample_feasible(spec)
        frame = synth.default_frame(spec)
        return Dataset(
            family=family,
            reference=frame if isinstance(frame, Reference) else None,
            orthonormal=frame if isinstance(frame, OrthonormalFamily) else None,
            params=(spec.params,),
            metadata=self._metadata(name, seed),
        )

    def _synthesize_equality(self, name: str, raw_params: Any, dim: int, count: int, seed: int,
                             weights: Optional[Sequence[float]]) -> Dataset:
        method = EQUALITY_TARGETS[name]
        spec = EqualitySpec(dim=dim, count=count, seed=seed)
        params = parse_params(method, raw_params)
        if weights is None:
            weights = synth.make_rng(spec.seed).uniform(*EQUALITY_WEIGHT_RANGE, spec.count)
        elif len(weights) != spec.count:
            raise InvalidParameterException(f"{len(weights)} weights given for {spec.count} vectors")

        reference, orthonormal = None, None
        if method in {Method.DM, Method.T21}:
            reference = Reference.basis(spec.dim)
            cone = params if method is Method.T21 else ConeParams(r1=params.r, r2=0.0)
            family = synth.synth_equality_t21(reference, cone, weights)
        else:
            axes = params.axes if method is Method.T32 else tuple(ConeParams(r1=r, r2=0.0) for r in params.r)
            if len(axes) > spec.dim:
                raise InvalidParameterException(f"{len(axes)} axes do not fit in C^{spec.dim}")
            orthonormal = OrthonormalFamily.standard(spec.dim, len(axes))
            family = synth.synth_equality_t32(orthonormal, AxisParams(axes=axes), weights)
        return Dataset(family=family, reference=reference, orthonormal=orthonormal,
                       params=(params,), metadata=self._metadata(name, seed))

    @staticmethod
    def _metadata(name: str, seed: int) -> Dict[str, Any]:
        return {"synth": name, "seed": seed, "rng": synth.RNG_ALGORITHM}

    def certify_dataset(self, name: str, dataset: Dataset) -> Certificate:
        """Certificate of a synthesized dataset under the method it was built for."""
        method = EQUALITY_TARGETS.get(name) or Method(name)
        return bounds.certify(method, dataset.family, dataset.frame_for(method), dataset.params[0])

    # -----------------------------------------------------------------------
    # Batch mode
    # -----------------------------------------------------------------------

    def run_file(self, path: Path, command: str, run: Callable[[Dataset], Outcome],
                 output_dir: Path) -> int:
        target = self.store.result_path(output_dir, path, command)
        try:
            outcome = run(self.store.load(path))
        except (BoundsException, ValidationError) as e:
            logger.info(f"{path.name}: {e}")
            outcome = Outcome(exit_code_for(e), error_document(e))
        self.store.write(target, outcome.payload)
        return outcome.code

    async def run_batch(self, inputs: List[Path], command: str, run: Callable[[Dataset], Outcome],
                        output_dir: Path) -> int:
        """
        Processes every input concurrently, writing one result file per input.

        Returns:
            The worst exit code over all files.
        """
        semaphore = asyncio.Semaphore(MAX_CONCURRENT_FILES)

        async def worker(path: Path) -> int:
            async with semaphore:
                return await asyncio.to_thread(self.run_file, path, command, run, output_dir)

        logger.info(f"Running {command} on {len(inputs)} files.")
        results = await asyncio.gather(*(worker(p) for p in inputs), return_exceptions=True)

        worst = EXIT_OK
        for path, result in zip(inputs, results):
            if isinstance(result, Exception):
                logger.error(f"Unexpected error processing {path}: {result}")
                self._write_failure(path, command, output_dir, result)
                result = EXIT_INVALID
            worst = max(worst, result)
        logger.info(f"Batch {command} completed with exit code {worst}.")
        return worst

    def _write_failure(self, path: Path, command: str, output_dir: Path, error: Exception) -> None:
        try:
            self.store.write(self.store.result_path(output_dir, path, command), error_document(error))
        except OSError as e:
            logger.error(f"Could not write the error result for {path}: {e}")
