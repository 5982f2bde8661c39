"""Exception hierarchy.

Every error can carry the identifier of the offending entity (``subject``)
and, when it originates from a netlist, a ``(line, column)`` span.
Errors derived from :class:`ModelError` describe an ill-formed model;
errors derived from :class:`NumericalError` describe a failure of a solve.
"""

from __future__ import annotations


class TontiError(Exception):
    """Base class of all package errors."""

    def __init__(self, message, *, subject=None, span=None):
        super().__init__(message)
        self.message = message
        self.subject = subject
        self.span = span

    def __str__(self):
        text = self.message
        if self.span is not None:
            line, col = self.span
            text = f"line {line}, col {col}: {text}"
        return text


class ModelError(TontiError):
    """The model, complex or netlist is ill-formed."""


class NumericalError(TontiError):
    """A numerical solve could not be carried out."""


# complex construction
class DuplicateId(ModelError):
    pass


class DanglingEndpoint(ModelError):
    pass


class SelfLoop(ModelError):
    pass


class OpenMeshWalk(ModelError):
    pass


class MissingMeshes(ModelError):
    pass


class UnknownEntity(ModelError):
    """A directive refers to a node, branch or mesh that does not exist."""


# cochains and time series
class DimensionMismatch(ModelError):
    pass


class TooFewSamples(ModelError):
    pass


# elements and models
class ConflictingElement(ModelError):
    pass


class TransducerOnPassiveBranch(ModelError):
    pass


class EmptyBranch(ModelError):
    pass


class InvalidValue(ModelError):
    pass


class NoReferenceNode(ModelError):
    pass


# compilation
class ReactiveElementPresent(ModelError):
    pass


class TransducerPresent(ModelError):
    pass


class UnsupportedPath(ModelError):
    pass


class UnsupportedSource(ModelError):
    pass


# netlist
class NetlistSyntaxError(ModelError):
    def __init__(self, message, *, line, col, expected=None, subject=None):
        if expected:
            message = f"{message} (expected {expected})"
        super().__init__(message, subject=subject, span=(line, col))
        self.line = line
        self.col = col
        self.expected = expected


class UnknownDirective(NetlistSyntaxError):
    pass


# numerics
class SingularSystem(NumericalError):
    pass


class StepSingular(NumericalError):
    pass


class InconsistentIC(NumericalError):
    pass
