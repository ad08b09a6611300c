"""Exception types raised across the pipeline."""
from __future__ import annotations


class FieldBVError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FieldBVError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col
        self.msg = msg


class SortMismatch(FieldBVError, TypeError):
    def __init__(self, msg: str, path: tuple = ()):
        where = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"{msg} (at {where})")
        self.msg = msg
        self.path = tuple(path)


class NonPrimeField(FieldBVError, ValueError):
    def __init__(self, p: int):
        super().__init__(f"field modulus {p} is not prime")
        self.p = p


class Unsupported(FieldBVError):
    pass


class PipelineTimeout(FieldBVError):
    def __init__(self, stage: str):
        super().__init__(f"timeout during {stage}")
        self.stage = stage


class BudgetExceeded(FieldBVError):
    pass


class NoRuleApplies(FieldBVError):
    pass


class LiftFailure(FieldBVError):
    pass


class ConstraintViolation(FieldBVError, ValueError):
    pass
