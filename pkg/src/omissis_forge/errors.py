"""Exception hierarchy shared across the pipeline.

Every error carries an ``exit_code`` so the CLI can map failures onto its
contract: 1 usage, 2 missing/invalid input, 3 internal invariant violation.
"""

from __future__ import annotations


class OmissisForgeError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 2


class InputError(OmissisForgeError):
    """Missing or invalid input data."""


class EmptyInput(InputError):
    pass


class EmptySequence(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class EmptyVocab(InputError):
    pass


class EmptyEvaluation(InputError):
    pass


class BothEmpty(InputError):
    pass


class IncompatibleSignatures(InputError):
    pass


class UnknownId(InputError):
    pass


class ZeroFrequency(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class UnnormalizedDistribution(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class OverlongChunk(InputError):
    pass


class InfeasibleSpec(InputError):
    pass


class SchemaMismatch(InputError):
    pass


class InvariantViolation(OmissisForgeError):
    """A bug: an internal guarantee was broken."""

    exit_code = 3
