"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (a ``ValueError``);
states that valid input can never reach derive from :class:`CorruptionError`.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid user-supplied input."""

    def to_dict(self) -> dict:
        payload = {"error": type(self).__name__, "message": str(self)}
        payload.update({k: _jsonable(v) for k, v in vars(self).items()})
        return payload


class CorruptionError(RuntimeError):
    """An internal invariant failed; signals arithmetic corruption."""

    def to_dict(self) -> dict:
        payload = {"error": type(self).__name__, "message": str(self)}
        payload.update({k: _jsonable(v) for k, v in vars(self).items()})
        return payload


def _jsonable(value):
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


class ProbOutOfRange(ValidationError):
    def __init__(self, k: int, value) -> None:
        self.k = k
        self.value = value
        super().__init__(f"probability of unit {k} is {value}, outside (0, 1)")


class NonIntegerTotal(ValidationError):
    def __init__(self, total, nearest: int, deviation) -> None:
        self.total = total
        self.nearest = nearest
        self.deviation = deviation
        super().__init__(
            f"probabilities sum to {total}, not an integer "
            f"(nearest {nearest}, deviation {deviation})"
        )


class EmptyPopulation(ValidationError):
    def __init__(self) -> None:
        super().__init__("population is empty")


class DimensionMismatch(ValidationError):
    def __init__(self, expected: int, got: int, what: str = "values") -> None:
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected length {expected}, got {got}")


class PopulationTooLarge(ValidationError):
    def __init__(self, N: int, cap: int) -> None:
        self.N = N
        self.cap = cap
        super().__init__(f"population of size {N} exceeds enumeration cap {cap}")


class ZeroJointProbability(ValidationError):
    def __init__(self, k: int, l: int) -> None:
        self.k = k
        self.l = l
        super().__init__(
            f"joint inclusion probability of units {k} and {l} is zero; "
            "the variance cannot be estimated unbiasedly under this design"
        )


class ZeroTrueVariance(ValidationError):
    def __init__(self) -> None:
        super().__init__("true variance is zero; relative measures are undefined")


class DegenerateX(ValidationError):
    def __init__(self) -> None:
        super().__init__("all size values are equal; cannot rescale to [1, 10]")


class InfeasibleSize(ValidationError):
    def __init__(self, n: int, N: int) -> None:
        self.n = n
        self.N = N
        super().__init__(f"sample size {n} exceeds population size {N}")


class InvariantViolation(CorruptionError):
    def __init__(self, k: int, count: int, bounds: tuple[int, int]) -> None:
        self.k = k
        self.count = count
        self.bounds = bounds
        super().__init__(
            f"running count {count} after unit {k} outside bounds {bounds}"
        )


class NonTermination(CorruptionError):
    def __init__(self, steps: int, limit: int) -> None:
        self.steps = steps
        self.limit = limit
        super().__init__(f"pivotal sampling ran {steps} duels, limit is {limit}")


class DegenerateDenominator(CorruptionError):
    def __init__(self, i: int, what: str) -> None:
        self.i = i
        self.what = what
        super().__init__(f"{what} vanishes at cross-border index {i}")
