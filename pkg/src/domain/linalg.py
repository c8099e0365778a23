"""
Dense complex vector arithmetic over C^d with the standard inner product
<x, y> = sum_i x_i * conj(y_i).

Vectors are 1-D complex128 numpy arrays, families are 2-D arrays whose rows
are the vectors. Every array handed out by this module is read-only.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Any, Tuple

import numpy as np

from src.domain.exceptions import InvalidInputException, NonOrthonormalFamilyException

if TYPE_CHECKING:
    from src.domain.models import OrthonormalFamily, VectorFamily

UNIT_TOL = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def as_vector(data: Any, field: str = "vector") -> np.ndarray:
    """Converts array-like input into a finite, read-only complex vector of length d >= 1."""
    try:
        vector = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidInputException(f"cannot interpret as a complex vector: {e}", field=field) from e
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidInputException(f"expected a non-empty 1-D vector, got shape {vector.shape}", field=field)
    if not np.all(np.isfinite(vector)):
        raise InvalidInputException("vector has non-finite entries", field=field)
    return _frozen(vector)


def as_matrix(data: Any, field: str = "vectors") -> np.ndarray:
    """Converts a list of equal-length vectors into a finite, read-only (n, d) array."""
    if isinstance(data, np.ndarray):
        rows = list(data) if data.ndim == 2 else None
    else:
        try:
            rows = list(data)
        except TypeError as e:
            raise InvalidInputException("expected a list of vectors", field=field) from e
    if rows is None or len(rows) == 0:
        raise InvalidInputException("expected a non-empty list of vectors", field=field)
    try:
        lengths = {len(row) for row in rows}
    except TypeError as e:
        raise InvalidInputException("each vector must be a list of entries", field=field) from e
    if len(lengths) != 1:
        raise InvalidInputException(f"vectors have mixed lengths {sorted(lengths)}", field=field)
    try:
        matrix = np.array(rows, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidInputException(f"cannot interpret as complex vectors: {e}", field=field) from e
    if matrix.ndim != 2 or matrix.shape[1] == 0:
        raise InvalidInputException(f"expected an (n, d) array with d >= 1, got shape {matrix.shape}", field=field)
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputException("vectors have non-finite entries", field=field)
    return _frozen(matrix)


def require_same_dim(x: np.ndarray, y: np.ndarray, field: str = "vector") -> None:
    if x.shape[-1] != y.shape[-1]:
        raise InvalidInputException(
            f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}", field=field
        )


def inner(x: np.ndarray, y: np.ndarray) -> complex:
    """<x, y>, linear in x and conjugate-linear in y."""
    require_same_dim(x, y)
    # vdot conjugates its first argument
    return complex(np.vdot(y, x))


def norm(x: np.ndarray) -> float:
    return float(np.sqrt(max(inner(x, x).real, 0.0)))


def row_norms(vectors: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", vectors.real, vectors.real) + np.einsum("ij,ij->i", vectors.imag, vectors.imag))


def coefficients(vectors: np.ndarray, e: np.ndarray) -> np.ndarray:
    """<x_k, e> for every row x_k."""
    require_same_dim(vectors, e)
    return vectors @ np.conj(e)


def sum_rows(vectors: np.ndarray) -> np.ndarray:
    # Left-to-right over k so certificates are reproducible bit for bit.
    total = np.zeros(vectors.shape[1], dtype=np.complex128)
    for row in vectors:
        total = total + row
    return _frozen(total)


def family_sum(family: VectorFamily) -> np.ndarray:
    """Sum of the family's vectors, accumulated left to right."""
    return sum_rows(family.vectors)


def orthonormality_defect(members: np.ndarray) -> Tuple[float, Tuple[int, int]]:
    """Largest |<e_i, e_j> - delta_ij| over the family and the pair attaining it."""
    gram = members @ np.conj(members).T
    deviation = np.abs(gram - np.eye(members.shape[0]))
    i, j = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
    return float(deviation[i, j]), (int(i), int(j))


def require_orthonormal(members: np.ndarray, tol: float = UNIT_TOL, field: str = "orthonormal") -> None:
    worst, pair = orthonormality_defect(members)
    if worst > tol:
        raise NonOrthonormalFamilyException(pair, worst, field=field)


def projection_residual(x: np.ndarray, basis: OrthonormalFamily) -> float:
    """||x - sum_k <x,e_k> e_k||^2, the squared distance from x to span(e_1..e_m)."""
    members = basis.members
    require_same_dim(x, members, field="orthonormal")
    projection = coefficients(members, x).conj() @ members
    residual = x - projection
    return float(np.vdot(residual, residual).real)


def bessel_residual(x: np.ndarray, basis: OrthonormalFamily) -> float:
    """||x||^2 - sum_k |<x,e_k>|^2; agrees with projection_residual for orthonormal families."""
    members = basis.members
    require_same_dim(x, members, field="orthonormal")
    c = coefficients(members, x)
    return float(np.vdot(x, x).real - np.sum(np.abs(c) ** 2))
