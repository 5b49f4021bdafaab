"""Exception taxonomy.

Every failure mode of the calculus has a named exception so that callers
(and the CLI exit-code contract) can distinguish malformed input from
violated mathematical preconditions from honest obstructions.
"""


class BandCalcError(Exception):
    """Base class for all bandcalc errors."""


# --- diagram parsing / validation ---------------------------------------

class MalformedCode(BandCalcError):
    """PD-code text does not follow the line format."""


class DanglingArc(BandCalcError):
    """An arc label occurs in a number of crossing slots other than two."""


class NonPlanar(BandCalcError):
    """The rotation system fails the Euler-formula planarity check."""


class IncoherentOrientation(BandCalcError):
    """No consistent strand orientation exists for the crossing data."""


class NotAKnotComponent(BandCalcError):
    """Operation requires a single-component (knot) operand."""


# --- band surgery --------------------------------------------------------

class InvalidAttachSite(BandCalcError):
    """A band end references a missing arc or a colliding position."""


class OverlappingBands(BandCalcError):
    """Two bands share an attach site or a mark position."""


class IncoherentBandOrientation(BandCalcError):
    """Band attachment is incompatible with the link orientations."""


class NotTrivialPattern(BandCalcError):
    """Band-sum pattern link has crossings."""


class NotAFusion(BandCalcError):
    """Band-sum surgery did not classify as a fusion."""


class IllegalSlide(BandCalcError):
    """Requested band slide would produce an invalid band system."""


# --- surface movies ------------------------------------------------------

class EmptySequence(BandCalcError):
    """realize() needs at least one diagram level."""


class NotTrivialAtLevel(BandCalcError):
    """Cap components do not form a cappable trivial sublink."""


class EpsilonTooLarge(BandCalcError):
    """Cap-raising offset reaches or passes the first event."""


# --- invariants ----------------------------------------------------------

class DegenerateMatrix(BandCalcError):
    """Alexander matrix minor is singular; signals a diagram bug."""


# --- ribbon constructions ------------------------------------------------

class NotAKnot(BandCalcError):
    """Construction requires a knot diagram."""


class TrivialityCheckFailed(BandCalcError):
    """Asserted-trivial band sum fails the Alexander necessary condition."""


class ResultMismatch(BandCalcError):
    """Supplied presentation does not reproduce the expected diagram."""


class AttachmentPatternInvalid(BandCalcError):
    """Band-sum bands do not attach one-to-one onto the trivial link."""


class NotStarShaped(BandCalcError):
    """Sequence does not have the fusion/genus-addition/fission star shape."""


class ReroutingObstructed(BandCalcError):
    """A band cannot be rerouted within the supported move set."""
