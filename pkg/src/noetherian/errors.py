"""Exception types. Refusals carry a machine-readable witness."""


class NoetherianError(Exception):
    kind = "error"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

    def to_dict(self):
        return {"error": self.kind, "message": str(self), "witness": _jsonable(self.witness)}


class PreconditionError(NoetherianError):
    """An operation refused because its inputs violate a precondition."""

    kind = "precondition"


class PrecisionError(NoetherianError):
    kind = "precision"


class ContinuationError(NoetherianError):
    """Step underflow, domain exit or nonconvergence during continuation."""

    kind = "continuation"


class BudgetExceeded(NoetherianError):
    kind = "budget"


def _jsonable(x):
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    try:
        import numpy as np

        if isinstance(x, np.ndarray):
            return _jsonable(x.tolist())
        if isinstance(x, np.generic):
            return _jsonable(x.item())
    except ImportError:
        pass
    return str(x)
