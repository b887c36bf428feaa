"""
Exceptions
----------
Error hierarchy shared by the library and the CLI.
The CLI maps InputError to exit code 2 and InfeasibleModelError to exit code 3.
"""


class GHypEError(Exception):
    """Base class for every error raised by ghype."""


class InputError(GHypEError, ValueError):
    """Malformed input: bad files, indices, multiplicities or shapes."""


class InfeasibleModelError(GHypEError):
    """The model cannot produce the requested draws."""


class SaturatedDyadError(InfeasibleModelError):
    """A dyad is drawn to its full ball count, so its fitted propensity is infinite."""

    def __init__(self, i: int, j: int, multiplicity: int, balls: int):
        self.i = i
        self.j = j
        self.multiplicity = multiplicity
        self.balls = balls
        super().__init__(
            f"Saturated dyad ({i}, {j}): multiplicity {multiplicity} "
            f"equals its ball count {balls}"
        )


class QuadratureError(GHypEError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SupportTooLargeError(GHypEError):
    """Exhaustive enumeration would exceed the configured support cap."""
