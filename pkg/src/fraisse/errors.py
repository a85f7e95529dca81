"""Exception types shared across the workbench."""

from __future__ import annotations


class FraisseError(Exception):
    """Base class for every error raised by this package."""


class SignatureMismatch(FraisseError):
    """Two structures that were supposed to share a signature do not."""


class InvalidSubset(FraisseError):
    """A carrier subset mentions elements outside the carrier."""


class AmalgamationBaseMismatch(FraisseError):
    """The two embeddings of a free amalgam do not share a source."""


class NotAnEmbedding(FraisseError):
    """A map fails injectivity or does not preserve and reflect relations."""


class CompositionMismatch(FraisseError):
    """Inner target and outer source disagree in a composition."""


class DomainNotCovered(FraisseError):
    """A partial automorphism is applied to points outside its domain."""


class DomainOverlap(FraisseError):
    """Union of partial automorphisms with non-disjoint domains."""


class NotAPartialAutomorphism(FraisseError):
    """A partial map fails injectivity or relation preservation/reflection."""


class OutOfDomain(FraisseError):
    """A colouring was evaluated on an embedding outside its table."""


class ClosureViolated(FraisseError):
    """A construction left the class it was supposed to stay inside."""


class BudgetExceeded(FraisseError):
    """Closure did not finish within the carrier budget.

    Carries the partial structure and a diagnostic of what remained open.
    """

    def __init__(self, message, partial=None, diagnostics=None):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = diagnostics or {}


class WitnessInvalid(FraisseError):
    """A witness failed verification where a verified one was required."""


class InsufficientCopies(FraisseError):
    """Pigeonhole shortfall: no colour pair was realized in enough copies."""

    def __init__(self, message, counts=None, needed=0):
        super().__init__(message)
        self.counts = counts or {}
        self.needed = needed


class EppaContractViolated(FraisseError):
    """An allegedly EPPA-witnessing extension failed to extend a partial map."""


class ParseError(FraisseError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += str(path)
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path


class IoError(FraisseError):
    """Report files could not be written."""
