"""Exception taxonomy shared by all holoscale modules.

Every error carries the name of the operation that raised it so that the
command-line runner can report where a pipeline failed.
"""

from __future__ import annotations


class HoloscaleError(Exception):
    """Base class. ``op`` names the originating operation."""

    op: str = ""
    #: configuration errors map to exit code 2, numerical failures to 3
    exit_code: int = 3

    def __init__(self, message: str = "", *, op: str | None = None):
        super().__init__(message)
        if op is not None:
            self.op = op


# -- defining_dsl -------------------------------------------------------------

class DslError(HoloscaleError):
    exit_code = 2


class CdlSyntaxError(DslError):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] | set[str] = frozenset()):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        exp = ""
        if self.expected:
            exp = " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(f"{line}:{col}: {message}{exp}", op="parse")


class UnboundIdentifier(DslError):
    def __init__(self, name: str, line: int | None = None, col: int | None = None, *, op: str = "parse"):
        self.name = name
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}unbound identifier {name!r}", op=op)


class NonHolomorphicMapComponent(DslError):
    def __init__(self, component: str, source: str = ""):
        self.component = component
        super().__init__(
            f"map component {component!r} is not holomorphic in (z, w): {source}", op="parse"
        )


class ConfigError(DslError):
    """Structurally valid input that violates a config invariant."""

    def __init__(self, message: str):
        super().__init__(message, op="parse")


class EvaluationError(HoloscaleError):
    def __init__(self, message: str = "", *, op: str = "eval"):
        super().__init__(message, op=op)


class DivisionByZero(EvaluationError):
    pass


class BranchCutViolation(EvaluationError):
    pass


# -- holo_diff / scaling ------------------------------------------------------

class DegenerateJacobian(HoloscaleError):
    pass


class InsufficientGrid(HoloscaleError):
    pass


class Inconclusive(HoloscaleError):
    pass


class DegenerateEigenvectors(HoloscaleError):
    pass


# -- boundary_type --------------------------------------------------------------

class DegenerateGradient(HoloscaleError):
    pass


class SolveFailure(HoloscaleError):
    pass


class NoiseFloor(HoloscaleError):
    pass


class NonConvergentRatio(HoloscaleError):
    pass


# -- projective_limit ---------------------------------------------------------

class NonFinite(HoloscaleError):
    pass


class EmptyCloud(HoloscaleError):
    pass


class NoInteriorFound(HoloscaleError):
    pass


# -- labcli -------------------------------------------------------------------

class CorpusMissing(HoloscaleError):
    exit_code = 2
