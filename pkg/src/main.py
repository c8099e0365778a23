import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional

from pydantic import ValidationError

from src.application.certification_service import (
    EXIT_INFEASIBLE,
    EXIT_INVALID,
    EXIT_OK,
    SYNTH_NAMES,
    CertificationService,
    Outcome,
    error_document,
    exit_code_for,
)
from src.domain.exceptions import BoundsException
from src.domain.models import Comparison, Dataset, Method, SearchConfig
from src.infrastructure import acl

logger = logging.getLogger(__name__)

METHOD_NAMES = [m.value for m in Method]


def configure_logging(verbose: bool) -> None:
    # Standard output carries JSON only
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the invalid-input code."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO on standard error")

    dataset_io = argparse.ArgumentParser(add_help=False)
    source = dataset_io.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="dataset JSON file")
    source.add_argument("--input-dir", type=Path, help="directory of dataset JSON files, processed concurrently")
    dataset_io.add_argument("--output", type=Path, help="also write the JSON result to this file")
    dataset_io.add_argument("--output-dir", type=Path, help="result directory for --input-dir")

    method = argparse.ArgumentParser(add_help=False)
    method.add_argument("--method", required=True, choices=METHOD_NAMES)

    parser = _Parser(prog="revtri", description="Certified lower bounds for sums of vectors in C^d.")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("check", parents=[common, dataset_io, method],
                        help="check a method's hypothesis on a dataset")

    bound = commands.add_parser("bound", parents=[common, dataset_io, method],
                                help="certify a method's lower bound")
    bound.add_argument("--auto-params", action="store_true",
                       help="extract the best parameters instead of reading them from the dataset")

    commands.add_parser("compare", parents=[common, dataset_io], help="run every applicable method")

    synth = commands.add_parser("synth", parents=[common], help="generate a dataset")
    synth.add_argument("--method", required=True, choices=SYNTH_NAMES)
    synth.add_argument("--params", default="{}", help="method parameters as a JSON object")
    synth.add_argument("-d", "--dim", type=int, required=True)
    synth.add_argument("-n", "--count", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--weights", type=float, nargs="+", help="positive weights of an equality family")
    synth.add_argument("--output", type=Path, required=True, help="dataset file to write")

    search = commands.add_parser("search", parents=[common, dataset_io], help="search for the best reference")
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--restarts", type=int, default=SearchConfig.model_fields["restarts"].default)
    search.add_argument("--iters", type=int, default=SearchConfig.model_fields["iterations"].default)
    return parser


def format_table(comparison: Comparison) -> str:
    header = f"{'method':<10} {'factor':>12} {'bound':>14} {'actual':>14} {'tightness':>10}  equality"
    rows = [header, "-" * len(header)]
    for c in comparison.certificates:
        rows.append(f"{c.method.value:<10} {c.factor:>12.6f} {c.bound:>14.6f} {c.actual:>14.6f} "
                    f"{c.tightness:>10.6f}  {'yes' if c.equality else 'no'}")
    for s in comparison.skipped:
        rows.append(f"{s.method.value:<10} skipped: {s.reason}")
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# Commands over datasets
# ---------------------------------------------------------------------------

def _check(service: CertificationService, args: argparse.Namespace) -> Callable[[Dataset], Outcome]:
    method = Method(args.method)

    def run(dataset: Dataset) -> Outcome:
        report = service.check(dataset, method)
        return Outcome(EXIT_OK if report.feasible else EXIT_INFEASIBLE, acl.report_document(report))
    return run


def _bound(service: CertificationService, args: argparse.Namespace) -> Callable[[Dataset], Outcome]:
    method = Method(args.method)

    def run(dataset: Dataset) -> Outcome:
        return Outcome(EXIT_OK, acl.certificate_document(service.bound(dataset, method, args.auto_params)))
    return run


def _compare(service: CertificationService, args: argparse.Namespace) -> Callable[[Dataset], Outcome]:
    show_table = args.input is not None

    def run(dataset: Dataset) -> Outcome:
        comparison = service.compare(dataset)
        if show_table:
            print(format_table(comparison), file=sys.stderr)
        return Outcome(EXIT_OK, acl.comparison_document(comparison))
    return run


def _search(service: CertificationService, args: argparse.Namespace) -> Callable[[Dataset], Outcome]:
    def run(dataset: Dataset) -> Outcome:
        config = SearchConfig(restarts=args.restarts, iterations=args.iters, seed=args.seed)
        result = service.search(dataset, config)
        if not result.found:
            print(f"search: {result.message}", file=sys.stderr)
        return Outcome(EXIT_OK if result.found else EXIT_INFEASIBLE, acl.search_document(result))
    return run


DATASET_COMMANDS = {"check": _check, "bound": _bound, "compare": _compare, "search": _search}


def _run_single(service: CertificationService, args: argparse.Namespace,
                run: Callable[[Dataset], Outcome]) -> int:
    try:
        outcome = run(service.store.load(args.input))
    except (BoundsException, ValidationError) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        outcome = Outcome(exit_code_for(e), error_document(e))
    logger.info(f"{args.command} {args.input}: exit code {outcome.code}")
    print(acl.dumps(outcome.payload))
    if args.output is not None:
        service.store.write(args.output, outcome.payload)
    return outcome.code


def _synth(service: CertificationService, args: argparse.Namespace) -> int:
    try:
        dataset = service.synthesize(args.method, args.params, args.dim, args.count, args.seed, args.weights)
        certificate = service.certify_dataset(args.method, dataset)
    except (BoundsException, ValidationError) as e:
        print(f"synth: {e}", file=sys.stderr)
        print(acl.dumps(error_document(e)))
        return EXIT_INVALID
    service.store.save(args.output, dataset)
    print(acl.dumps(acl.certificate_document(certificate)))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    service = CertificationService()

    if args.command == "synth":
        return _synth(service, args)

    run = DATASET_COMMANDS[args.command](service, args)
    if args.input_dir is None:
        return _run_single(service, args, run)
    if args.output_dir is None:
        parser.error("--input-dir needs --output-dir")
    try:
        inputs = service.store.list_inputs(args.input_dir)
    except BoundsException as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_INVALID
    return asyncio.run(service.run_batch(inputs, args.command, run, args.output_dir))


if __name__ == "__main__":
    sys.exit(main())
