import json
from typing import Annotated, Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.domain.exceptions import InvalidInputException
from src.domain.models import (
    Certificate,
    Comparison,
    Dataset,
    HypothesisReport,
    MethodParams,
    OrthonormalFamily,
    Reference,
    SearchResult,
    VectorFamily,
)

FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]
Pair = Tuple[FiniteFloat, FiniteFloat]


class DatasetDocument(BaseModel):
    """Wire schema of a dataset file. Complex numbers travel as [re, im] pairs."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(..., ge=1)
    vectors: List[List[Pair]] = Field(..., min_length=1, description="n vectors of dim [re, im] pairs")
    reference: Optional[List[Pair]] = None
    orthonormal: Optional[List[List[Pair]]] = None
    params: Union[MethodParams, List[MethodParams], None] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)


def _complex_rows(rows: Sequence[Sequence[Pair]]) -> List[List[complex]]:
    return [[complex(re, im) for re, im in row] for row in rows]


def _pairs(vector: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in vector]


class DatasetTranslator:
    """
    Anti-corruption layer between dataset JSON documents and the domain
    Dataset (VectorFamily, Reference, OrthonormalFamily, parameters).
    """

    @staticmethod
    def to_domain(raw: Any) -> Dataset:
        """
        Validates a decoded JSON document and builds the domain Dataset.

        Raises:
            pydantic.ValidationError: schema violations (missing field, bad pair, bad params).
            InvalidInputException: shapes inconsistent with dim, non-unit reference,
                non-orthonormal family.
        """
        if not isinstance(raw, dict):
            raise InvalidInputException("dataset must be a JSON object", field="input")
        document = DatasetDocument.model_validate(raw)

        family = VectorFamily(vectors=_complex_rows(document.vectors))
        if family.dim != document.dim:
            raise InvalidInputException(
                f"dim is {document.dim} but vectors have {family.dim} entries", field="dim"
            )

        reference = None
        if document.reference is not None:
            reference = Reference(e=_complex_rows([document.reference])[0])
            if reference.dim != document.dim:
                raise InvalidInputException(f"reference has {reference.dim} entries, dim is {document.dim}",
                                            field="reference")

        orthonormal = None
        if document.orthonormal is not None:
            orthonormal = OrthonormalFamily(members=_complex_rows(document.orthonormal))
            if orthonormal.dim != document.dim:
                raise InvalidInputException(f"orthonormal vectors have {orthonormal.dim} entries, dim is {document.dim}",
                                            field="orthonormal")

        params = document.params
        if params is None:
            params = ()
        elif not isinstance(params, list):
            params = (params,)

        return Dataset(
            family=family,
            reference=reference,
            orthonormal=orthonormal,
            params=tuple(params),
            metadata=document.metadata,
        )

    @staticmethod
    def from_domain(dataset: Dataset) -> Dict[str, Any]:
        """Wire form of a Dataset, fields in schema order; absent optionals are omitted."""
        document: Dict[str, Any] = {
            "dim": dataset.dim,
            "vectors": [_pairs(row) for row in dataset.family.vectors],
        }
        if dataset.reference is not None:
            document["reference"] = _pairs(dataset.reference.e)
        if dataset.orthonormal is not None:
            document["orthonormal"] = [_pairs(row) for row in dataset.orthonormal.members]
        if len(dataset.params) == 1:
            document["params"] = dataset.params[0].model_dump()
        elif dataset.params:
            document["params"] = [p.model_dump() for p in dataset.params]
        if dataset.metadata:
            document["metadata"] = dict(dataset.metadata)
        return document


# ---------------------------------------------------------------------------
# Result documents
# ---------------------------------------------------------------------------

def report_document(report: HypothesisReport) -> Dict[str, Any]:
    return report.model_dump(mode="json")


def certificate_document(certificate: Certificate) -> Dict[str, Any]:
    return certificate.model_dump(mode="json")


def comparison_document(comparison: Comparison) -> List[Dict[str, Any]]:
    return [certificate_document(c) for c in comparison.certificates]


def search_document(result: SearchResult) -> Dict[str, Any]:
    return {
        "found": result.found,
        "reference": _pairs(result.reference.e) if result.reference is not None else None,
        "certificate": certificate_document(result.certificate) if result.certificate is not None else None,
        "seed_bounds": list(result.seed_bounds),
        "best_restart": result.best_restart,
        "message": result.message,
    }


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def format_float(value: float) -> str:
    """17 significant digits, so every double survives a round trip."""
    if not np.isfinite(value):
        raise InvalidInputException(f"cannot encode non-finite number {value!r}", field="output")
    text = format(value, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _is_scalar(value: Any) -> bool:
    return value is None or isinstance(value, (bool, int, float, str, np.floating, np.integer))


def _render(value: Any, level: int, indent: int) -> str:
    if value is None or isinstance(value, (bool, str)):
        return json.dumps(value)
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))

    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_render(v, level + 1, indent)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(_is_scalar(v) for v in value):
            return "[" + ", ".join(_render(v, level + 1, indent) for v in value) + "]"
        items = [pad + _render(v, level + 1, indent) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"cannot encode {type(value).__name__} as JSON")


def dumps(value: Any, indent: int = 2) -> str:
    """Deterministic JSON text with floats at 17 significant digits."""
    return _render(value, 0, indent)
