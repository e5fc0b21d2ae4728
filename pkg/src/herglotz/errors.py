"""Exception hierarchy.

Every error carries a module-qualified ``code`` so the command line front end
can report it without guessing where it came from.
"""

from __future__ import annotations


class HerglotzError(Exception):
    """Base class for all library errors."""

    module = "herglotz"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class InputError(HerglotzError, ValueError):
    """Malformed or out-of-range input."""


class VerificationError(HerglotzError):
    """A mathematical check failed."""


# measures
class InvalidMeasure(InputError):
    module = "measures"


class DivergentIntegral(HerglotzError):
    module = "measures"


class QuadratureFailure(HerglotzError):
    module = "measures"


class ZeroMeasure(InputError):
    module = "measures"


class UnsupportedMeasure(InputError):
    module = "measures"


class Inconclusive(HerglotzError):
    module = "measures"


class NotPSD(InputError):
    module = "measures"


# herglotz_core
class EvalOnRealAxis(InputError):
    module = "herglotz_core"


class SingularDenominator(HerglotzError):
    module = "herglotz_core"

    def __init__(self, z, cond, msg: str | None = None):
        self.z = z
        self.cond = cond
        super().__init__(msg or f"singular denominator at z={z!r} (condition number {cond:.3e})")


class NonHerglotzSample(VerificationError):
    module = "herglotz_core"


class OutsideValidityRectangle(InputError):
    module = "herglotz_core"


class NotJUnitary(InputError):
    module = "herglotz_core"


# perturbation_fd
class NearSingularResolvent(InputError):
    module = "perturbation_fd"


class EigensolverFailure(HerglotzError):
    module = "perturbation_fd"


# schrodinger_halfline
class StepSizeUnderflow(HerglotzError):
    module = "schrodinger_halfline"


class NoConvergence(HerglotzError):
    module = "schrodinger_halfline"


class InvalidCombination(InputError):
    module = "schrodinger_halfline"


# livsic_models
class InvalidModel(InputError):
    module = "livsic_models"


# cli
class GridTooLarge(InputError):
    module = "cli"
