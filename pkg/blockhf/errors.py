#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

from typing import Any, Mapping, Optional, Sequence


class BlockHFError(Exception):
    """
    The base class of all exceptions raised intentionally by blockhf.
    """


class ShapeMismatchError(BlockHFError):
    """
    Raised when two operands of a kernel or primitive have incompatible shapes.
    """

    def __init__(
        self, operation: str, left: Sequence[int], right: Sequence[int]
    ) -> None:
        self.operation = operation
        self.left = tuple(left)
        self.right = tuple(right)
        super().__init__(f"{operation}: incompatible shapes {self.left} and {self.right}")


class GraphError(BlockHFError):
    """
    Raised for malformed graphs and for evaluations that cannot proceed, e.g., an
    input leaf that was never bound.
    """


class NumericalError(BlockHFError):
    """
    Raised whenever a NaN or an infinity shows up where only finite values make
    sense. Carries whatever diagnostics were available at the point of failure.
    """

    def __init__(self, message: str, diagnostics: Optional[Mapping[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        if self.diagnostics:
            details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class ConfigError(BlockHFError):
    """
    Raised when an experiment config cannot be parsed or fails validation.
    """

    def __init__(
        self, message: str, line: Optional[int] = None, key: Optional[str] = None
    ) -> None:
        self.message = message
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        prefix = f"{': '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class IDXFormatError(BlockHFError):
    """
    Raised when an IDX file has a bad magic number, bad dimensions, or is truncated.
    """


class DataMissingError(BlockHFError):
    """
    Raised when dataset files cannot be found.
    """


class VerificationFailure(BlockHFError):
    """
    Raised when a verification suite reports at least one failing property.
    """
