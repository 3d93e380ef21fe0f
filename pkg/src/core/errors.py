# src/core/errors.py


class DistWitError(Exception):
    """Base error; str() carries the module tag so the CLI can surface it as-is."""

    def __init__(self, module: str, message: str):
        super().__init__(message)
        self.module = module
        self.message = message

    def __str__(self) -> str:
        return f"[{self.module}] {self.message}"


class InputError(DistWitError):
    pass


class ConfigError(DistWitError):
    def __init__(self, message: str):
        super().__init__("cli", message)


class DegenerateSimplexError(DistWitError):
    def __init__(self, module: str, simplex, message: str = "degenerate simplex"):
        super().__init__(module, f"{message}: {tuple(simplex)}")
        self.simplex = tuple(simplex)


class NonEuclideanError(DistWitError):
    def __init__(self, simplex, min_pivot: float):
        super().__init__(
            "simplexgeo",
            f"Gram matrix of {tuple(simplex)} is not positive semidefinite "
            f"(residual {min_pivot:.3e}); input distances are not Euclidean",
        )
        self.simplex = tuple(simplex)
        self.min_pivot = min_pivot


class NoFreeWeightError(DistWitError):
    def __init__(self, landmark: int, cap: float, intervals: list):
        super().__init__(
            "weights",
            f"no admissible weight for landmark {landmark}: "
            f"{len(intervals)} forbidden intervals cover [0, {cap:.6g}]",
        )
        self.landmark = landmark
        self.cap = cap
        self.intervals = intervals


class ForbiddenMeasureError(DistWitError):
    def __init__(self, landmark: int, measure: float, bound: float):
        super().__init__(
            "weights",
            f"forbidden measure {measure:.6g} at landmark {landmark} exceeds #candidates * eta = {bound:.6g}",
        )
        self.landmark = landmark
        self.measure = measure
        self.bound = bound


class InfeasibleParametersError(DistWitError):
    def __init__(self, report):
        super().__init__(
            "weights",
            f"theoretical parameters violate the weight-existence inequality "
            f"(lhs={report.lhs:.3e}, rhs={report.rhs:.3e})",
        )
        self.report = report


class OracleDegeneracyError(DistWitError):
    def __init__(self, simplex, gap: float):
        super().__init__(
            "protect_oracle",
            f"degenerate configuration: {tuple(simplex)} has a tie (gap {gap:.3e})",
        )
        self.simplex = tuple(simplex)


class EmptyVoronoiFaceError(DistWitError):
    def __init__(self, simplex, gap: float):
        super().__init__(
            "protect_oracle",
            f"weighted Voronoi face of {tuple(simplex)} is empty (best gap {gap:.3e})",
        )
        self.simplex = tuple(simplex)
