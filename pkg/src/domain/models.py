import math
import sys
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:
    class StrEnum(str, Enum):
        """Backport of enum.StrEnum (Python 3.11+)."""

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.domain import linalg
from src.domain.exceptions import InvalidInputException


class Method(StrEnum):
    """Bound methods, in the order used to break ties between equal bounds."""
    DM = "dm"
    T21 = "t21"
    C22 = "c22"
    C23 = "c23"
    T31 = "t31"
    T32 = "t32"
    C32 = "c32"
    C33 = "c33"
    P41 = "p41"
    P42 = "p42"
    PETROVICH = "petrovich"

    @property
    def rank(self) -> int:
        return list(Method).index(self)

    @property
    def scalar_only(self) -> bool:
        """Methods stated for complex numbers, i.e. families in C^1."""
        return self in {Method.P41, Method.P42, Method.PETROVICH}

    @property
    def frame_kind(self) -> Optional[str]:
        """Which frame the method is stated against: a reference, an orthonormal family, or none."""
        if self in {Method.DM, Method.T21, Method.C22, Method.C23, Method.P42}:
            return "reference"
        if self in {Method.T31, Method.T32, Method.C32, Method.C33}:
            return "orthonormal"
        return None


# ---------------------------------------------------------------------------
# Vectors
# ---------------------------------------------------------------------------

class VectorFamily(BaseModel):
    """
    Immutable ordered family x_1..x_n of vectors in C^d, stored as the rows of
    an (n, d) read-only complex array.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vectors: np.ndarray = Field(..., description="(n, d) complex128 array, one vector per row")

    @field_validator("vectors", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return linalg.as_matrix(value, field="vectors")

    @classmethod
    def of(cls, *vectors: Any) -> "VectorFamily":
        return cls(vectors=[list(np.atleast_1d(np.asarray(v, dtype=np.complex128))) for v in vectors])

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def scaled(self, factor: complex) -> "VectorFamily":
        return VectorFamily(vectors=self.vectors * factor)


class Reference(BaseModel):
    """Unit reference vector e. Admitted within UNIT_TOL of norm 1 and stored normalized."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    e: np.ndarray

    @field_validator("e", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return linalg.as_vector(value, field="reference")

    @field_validator("e")
    @classmethod
    def _unit(cls, value: np.ndarray) -> np.ndarray:
        length = linalg.norm(value)
        if abs(length - 1.0) > linalg.UNIT_TOL:
            raise InvalidInputException(f"reference must have norm 1, got {length!r}", field="reference")
        return linalg.as_vector(value / length, field="reference")

    @classmethod
    def basis(cls, dim: int, index: int = 0) -> "Reference":
        e = np.zeros(dim, dtype=np.complex128)
        e[index] = 1.0
        return cls(e=e)

    @property
    def dim(self) -> int:
        return int(self.e.shape[0])


class OrthonormalFamily(BaseModel):
    """Orthonormal vectors e_1..e_m in C^d, m <= d, stored as rows."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    members: np.ndarray

    @field_validator("members", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return linalg.as_matrix(value, field="orthonormal")

    @field_validator("members")
    @classmethod
    def _orthonormal(cls, value: np.ndarray) -> np.ndarray:
        m, d = value.shape
        if m > d:
            raise InvalidInputException(f"{m} orthonormal vectors cannot live in C^{d}", field="orthonormal")
        linalg.require_orthonormal(value)
        return value

    @classmethod
    def standard(cls, dim: int, count: Optional[int] = None) -> "OrthonormalFamily":
        return cls(members=np.eye(dim, dtype=np.complex128)[: count or dim])

    @property
    def m(self) -> int:
        return int(self.members.shape[0])

    @property
    def dim(self) -> int:
        return int(self.members.shape[1])


# ---------------------------------------------------------------------------
# Method parameters
# ---------------------------------------------------------------------------

NonNegative = Annotated[float, Field(ge=0, allow_inf_nan=False)]
Positive = Annotated[float, Field(gt=0, allow_inf_nan=False)]
OpenUnit = Annotated[float, Field(gt=0, lt=1)]

_PARAMS_CONFIG = ConfigDict(frozen=True, extra="forbid")


class RealParams(BaseModel):
    """r of the Diaz-Metcalf condition 0 <= r||x_k|| <= Re<x_k,e>."""
    model_config = _PARAMS_CONFIG
    kind: Literal["real"] = "real"
    r: NonNegative


class ConeParams(BaseModel):
    """r1, r2 of the cone condition on real and imaginary parts of <x_k,e>."""
    model_config = _PARAMS_CONFIG
    kind: Literal["cone"] = "cone"
    r1: NonNegative
    r2: NonNegative


class DiskParams(BaseModel):
    """Radii of the closed balls around e and ie."""
    model_config = _PARAMS_CONFIG
    kind: Literal["disk"] = "disk"
    rho1: OpenUnit
    rho2: OpenUnit


class BandParams(BaseModel):
    """Scales of the two bands; equivalently balls around (M+m)/2 e and (M+m)/2 ie."""
    model_config = _PARAMS_CONFIG
    kind: Literal["band"] = "band"
    m1: Positive
    M1: Positive
    m2: Positive
    M2: Positive

    @model_validator(mode="after")
    def _ordered(self) -> "BandParams":
        if self.M1 < self.m1 or self.M2 < self.m2:
            raise ValueError("band parameters need M1 >= m1 > 0 and M2 >= m2 > 0")
        return self

    @property
    def centers(self) -> Tuple[float, float]:
        return (self.M1 + self.m1) / 2, (self.M2 + self.m2) / 2

    @property
    def radii(self) -> Tuple[float, float]:
        return (self.M1 - self.m1) / 2, (self.M2 - self.m2) / 2


class RealAxisParams(BaseModel):
    """Per-axis r_k for the real-part condition against an orthonormal family."""
    model_config = _PARAMS_CONFIG
    kind: Literal["real_axis"] = "real_axis"
    r: Tuple[NonNegative, ...] = Field(..., min_length=1)


class AxisParams(BaseModel):
    """Per-axis (r_k, rho_k), each stored as a ConeParams (r1 = r_k, r2 = rho_k)."""
    model_config = _PARAMS_CONFIG
    kind: Literal["axis"] = "axis"
    axes: Tuple[ConeParams, ...] = Field(..., min_length=1)


class AxisDiskParams(BaseModel):
    """Per-axis radii (rho_k, eta_k) around e_k and i e_k."""
    model_config = _PARAMS_CONFIG
    kind: Literal["axis_disk"] = "axis_disk"
    axes: Tuple[DiskParams, ...] = Field(..., min_length=1)


class AxisBandParams(BaseModel):
    """Per-axis bands (m_k, M_k, n_k, N_k), stored as BandParams (m1, M1, m2, M2)."""
    model_config = _PARAMS_CONFIG
    kind: Literal["axis_band"] = "axis_band"
    axes: Tuple[BandParams, ...] = Field(..., min_length=1)


class SectorParams(BaseModel):
    """Argument bounds phi1 <= arg(z_k) <= phi2, radians."""
    model_config = _PARAMS_CONFIG
    kind: Literal["sector"] = "sector"
    phi1: float = Field(..., ge=0)
    phi2: float = Field(..., lt=math.pi / 2)

    @model_validator(mode="after")
    def _ordered(self) -> "SectorParams":
        if self.phi1 > self.phi2:
            raise ValueError("sector parameters need phi1 <= phi2")
        return self


class PetrovichParams(BaseModel):
    """Direction a and angular radius theta of the arc a - theta <= arg(z_k) <= a + theta."""
    model_config = _PARAMS_CONFIG
    kind: Literal["petrovich"] = "petrovich"
    a: float = Field(..., allow_inf_nan=False)
    theta: float = Field(..., gt=0, lt=math.pi / 2)


MethodParams = Annotated[
    Union[
        RealParams, ConeParams, DiskParams, BandParams, RealAxisParams,
        AxisParams, AxisDiskParams, AxisBandParams, SectorParams, PetrovichParams,
    ],
    Field(discriminator="kind"),
]

PARAMS_KIND: Dict[Method, str] = {
    Method.DM: "real",
    Method.T21: "cone",
    Method.C22: "disk",
    Method.C23: "band",
    Method.T31: "real_axis",
    Method.T32: "axis",
    Method.C32: "axis_disk",
    Method.C33: "axis_band",
    Method.P41: "sector",
    Method.P42: "disk",
    Method.PETROVICH: "petrovich",
}


# ---------------------------------------------------------------------------
# Reports and certificates
# ---------------------------------------------------------------------------

class HypothesisReport(BaseModel):
    """Outcome of checking one hypothesis class against a family."""
    model_config = ConfigDict(frozen=True)

    method: Method
    feasible: bool
    params: Optional[MethodParams] = Field(None, description="Absent when infeasible")
    margins: Tuple[Optional[float], ...] = Field(
        default_factory=tuple,
        description="Per-vector slack; None for skipped zero vectors",
    )
    skipped_zero_vectors: int = Field(0, ge=0)
    degenerate: bool = Field(False, description="Family has no non-zero vector")
    balls_intersect: Optional[bool] = Field(None, description="Joint ball precheck for disk and band methods")
    failing_index: Optional[int] = None
    failing_axis: Optional[int] = None
    message: Optional[str] = None


class Certificate(BaseModel):
    """
    Self-contained evidence for one lower bound: the verified hypothesis
    parameters, the bound factor * sum_of_norms and the actual ||sum x_k||.
    """
    model_config = ConfigDict(frozen=True)

    method: Method
    params: MethodParams
    factor: float = Field(..., ge=0)
    sum_of_norms: float = Field(..., ge=0)
    bound: float = Field(..., ge=0)
    actual: float = Field(..., ge=0)
    tightness: float = Field(..., ge=0, le=1)
    equality: bool
    feasible: bool = True
    skipped_zero_vectors: int = Field(0, ge=0)


class SkippedMethod(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Method
    reason: str


class Comparison(BaseModel):
    """Certificates sorted by bound (descending, ties in Method order) plus skipped methods."""
    model_config = ConfigDict(frozen=True)

    certificates: List[Certificate] = Field(default_factory=list)
    skipped: List[SkippedMethod] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# Synthesis and search
# ---------------------------------------------------------------------------

U64 = Annotated[int, Field(ge=0, lt=2**64)]


class SynthSpec(BaseModel):
    """Request for a random family satisfying one hypothesis class."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    method: Method
    dim: int = Field(..., ge=1)
    count: int = Field(..., ge=1)
    params: MethodParams
    seed: U64 = 0
    reference: Optional[Reference] = Field(None, description="Defaults to the first standard basis vector")
    orthonormal: Optional[OrthonormalFamily] = Field(None, description="Defaults to the first m standard basis vectors")

    @model_validator(mode="after")
    def _consistent(self) -> "SynthSpec":
        expected = PARAMS_KIND[self.method]
        if self.params.kind != expected:
            raise ValueError(f"method {self.method.value} takes '{expected}' parameters, got '{self.params.kind}'")
        if self.method.scalar_only and self.dim != 1:
            raise ValueError(f"method {self.method.value} is defined for complex numbers (dim 1)")
        axes = getattr(self.params, "axes", None) or getattr(self.params, "r", None)
        if isinstance(axes, tuple) and len(axes) > self.dim:
            raise ValueError(f"{len(axes)} axes do not fit in C^{self.dim}")
        for frame in (self.reference, self.orthonormal):
            if frame is not None and frame.dim != self.dim:
                raise ValueError(f"frame dimension {frame.dim} differs from dim {self.dim}")
        return self


class EqualitySpec(BaseModel):
    """Request for an exact equality family: count positive multiples of one direction in C^dim."""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1)
    count: int = Field(..., ge=1)
    seed: U64 = 0


class SearchConfig(BaseModel):
    """Random-restart local search over unit references."""
    model_config = ConfigDict(frozen=True)

    restarts: int = Field(8, gt=0)
    iterations: int = Field(200, gt=0)
    initial_step: float = Field(0.1, gt=0)
    decay: float = Field(0.7, gt=0, lt=1)
    seed: U64 = 0


class SearchResult(BaseModel):
    """Best reference found and its certificate, or a message when nothing feasible exists."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    reference: Optional[Reference] = None
    certificate: Optional[Certificate] = None
    seed_bounds: Tuple[float, float] = (0.0, 0.0)
    best_restart: Optional[int] = None
    message: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.certificate is not None


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

class Dataset(BaseModel):
    """A family with the optional frames and parameters that travel with it."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: VectorFamily
    reference: Optional[Reference] = None
    orthonormal: Optional[OrthonormalFamily] = None
    params: Tuple[MethodParams, ...] = ()
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.family.dim

    def params_for(self, method: Method) -> Optional[MethodParams]:
        """First supplied parameter object whose kind the method accepts."""
        for candidate in self.params:
            if candidate.kind == PARAMS_KIND[method]:
                return candidate
        return None

    def frame_for(self, method: Method) -> Any:
        if method.frame_kind == "reference":
            return self.reference
        if method.frame_kind == "orthonormal":
            return self.orthonormal
        return None
