import json
import logging
from pathlib import Path
from typing import Any, List

from src.domain.exceptions import InvalidInputException
from src.domain.models import Dataset
from src.infrastructure.acl import DatasetTranslator, dumps

logger = logging.getLogger(__name__)

DATASET_SUFFIX = ".json"


class DatasetStore:
    """
    Filesystem repository for dataset and result files. Writes are
    deterministic: the same payload always produces the same bytes.
    """

    def load(self, path: Path) -> Dataset:
        """
        Reads and validates a dataset file.

        Raises:
            InvalidInputException: unreadable file or malformed JSON.
            pydantic.ValidationError: schema violations.
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidInputException(f"cannot read {path}: {e.strerror}", field="input") from e
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidInputException(f"malformed JSON in {path}: {e.msg} at line {e.lineno}", field="input") from e
        return DatasetTranslator.to_domain(raw)

    def save(self, path: Path, dataset: Dataset) -> None:
        self.write(path, DatasetTranslator.from_domain(dataset))

    def write(self, path: Path, payload: Any) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(payload) + "\n", encoding="utf-8")
        logger.info(f"Wrote {path}.")

    @staticmethod
    def list_inputs(directory: Path) -> List[Path]:
        """Dataset files of a directory in name order."""
        directory = Path(directory)
        if not directory.is_dir():
            raise InvalidInputException(f"{directory} is not a directory", field="input-dir")
        return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix == DATASET_SUFFIX)

    @staticmethod
    def result_path(output_dir: Path, source: Path, command: str) -> Path:
        return Path(output_dir) / f"{Path(source).stem}.{command}{DATASET_SUFFIX}"
