from typing import Optional, Tuple


class BoundsException(Exception):
    """Base exception for all reverse-triangle-bound errors."""
    pass

class InvalidInputException(BoundsException):
    """Raised when vectors, references or datasets are malformed."""
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        prefix = f"[{field}] " if field else ""
        super().__init__(f"{prefix}{message}")

class NonOrthonormalFamilyException(InvalidInputException):
    """Raised when a family of vectors is not orthonormal within tolerance."""
    def __init__(self, pair: Tuple[int, int], deviation: float, field: Optional[str] = None):
        self.pair = pair
        self.deviation = deviation
        super().__init__(
            f"Vectors {pair[0]} and {pair[1]} violate orthonormality: "
            f"|<e_i,e_j> - delta_ij| = {deviation:.3e}.",
            field=field,
        )

class UndefinedArgumentException(InvalidInputException):
    """Raised when the argument of a zero complex number is required."""
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"z_{index} = 0 has no argument.", field="vectors")

class InvalidParameterException(BoundsException):
    """Raised when parameters violate a rule that model validation cannot see."""
    pass

class InfeasibleHypothesisException(BoundsException):
    """Raised when a bound is requested for a family that fails its hypothesis."""
    def __init__(self, report, message: Optional[str] = None):
        self.report = report
        self.index = report.failing_index
        self.axis = report.failing_axis
        detail = message or report.message or "hypothesis not satisfied"
        location = ""
        if self.index is not None:
            location = f" at vector {self.index}"
            if self.axis is not None:
                location += f", axis {self.axis}"
        super().__init__(f"{report.method.name} refused{location}: {detail}")

class GenerationException(BoundsException):
    """Raised when a feasible family cannot be generated for the given parameters."""
    pass

class SoundnessException(BoundsException):
    """Raised when an internal invariant of a bound computation is broken."""
    pass
