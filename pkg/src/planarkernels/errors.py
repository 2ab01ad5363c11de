"""Exception hierarchy.

Every error carries a short ``cause`` token (used verbatim by the CLI) and the
process exit status the CLI maps it to: 2 for bad input, 3 for numerical
degeneracy.
"""


class KernelError(Exception):
    cause = "error"
    exit_code = 3

    def __init__(self, message="", **info):
        super().__init__(message)
        self.info = info


class InputError(KernelError):
    cause = "bad-input"
    exit_code = 2


class DomainSpecError(InputError):
    cause = "domain-spec"


class GeometryError(InputError):
    cause = "geometry"


class ProximityError(InputError):
    cause = "point-near-boundary"


class PointNotInteriorError(InputError):
    cause = "point-not-interior"


class ClearanceError(InputError):
    cause = "clearance"


class SeparationError(InputError):
    cause = "separation"


class GridMismatchError(InputError):
    cause = "grid-mismatch"


class WeightError(InputError):
    cause = "weight-not-positive"


class NumericalError(KernelError):
    cause = "numerical"
    exit_code = 3


class SingularMatrixError(NumericalError):
    cause = "singular-matrix"

    def __init__(self, message="", pivot=None, rcond=None):
        super().__init__(message, pivot=pivot, rcond=rcond)
        self.pivot = pivot
        self.rcond = rcond


class ConvergenceError(NumericalError):
    cause = "no-convergence"

    def __init__(self, message="", best=None):
        super().__init__(message, best=best)
        self.best = best


class BasisQualityError(NumericalError):
    cause = "basis-quality"


class DecompositionError(NumericalError):
    cause = "decomposition"


class ZeroCountError(NumericalError):
    cause = "zero-count"


class ConsistencyError(NumericalError):
    cause = "inconsistent-routes"


class MobiusSearchError(NumericalError):
    cause = "mobius-search"


class SolverResidualError(NumericalError):
    cause = "solver-residual"
