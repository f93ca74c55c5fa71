"""Exception hierarchy shared by all parsicompact modules."""


class ParsicompactError(Exception):
    """Base class for every error raised by this package."""


# --- character matrix ---------------------------------------------------

class EmptyInputError(ParsicompactError):
    """Input contained no sequence records."""


class LengthMismatchError(ParsicompactError):
    """Aligned sequences do not all have the same length."""


class DuplicateSpeciesError(ParsicompactError):
    """Two records share the same species name."""


class AmbiguousSymbolError(ParsicompactError):
    """A gap or ambiguity symbol was found and not explicitly allowed."""


class AlphabetTooLargeError(ParsicompactError):
    """A character column has more states than fit in one flag word."""


class BadColumnRangeError(ParsicompactError):
    """Requested column count is outside 1..m."""


class BadSubsetSizeError(ParsicompactError):
    """Requested species subset size is outside 1..n."""


# --- tree topology ------------------------------------------------------

class TreeStructureError(ParsicompactError):
    """Tree violates a structural invariant (connectivity, degrees, labels)."""


class DuplicateLabelError(TreeStructureError):
    """Species already labels a node in this tree."""


class AlreadyLabelledError(TreeStructureError):
    """Target node carries a label and cannot take another."""


class SplitUnderflowError(TreeStructureError):
    """Split requested on a node of degree < 4."""


class LabelCollisionError(TreeStructureError):
    """Both endpoints of a contraction edge are labelled."""


class NotInternalError(TreeStructureError):
    """Operation requires an internal node but got a leaf."""


class NewickParseError(ParsicompactError):
    """Malformed Newick text; carries the offending position."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


# --- scoring ------------------------------------------------------------

class EmptyTreeError(ParsicompactError):
    """Scoring requested on a tree with no nodes."""


class NotBinaryError(ParsicompactError):
    """Fitch scoring requires a full binary rooted tree."""


class UnlabelledLeafError(ParsicompactError):
    """A leaf without a species label cannot be scored."""


class MissingSpeciesError(ParsicompactError):
    """Tree references a species name absent from the matrix."""


class ArityMismatchError(ParsicompactError):
    """State-set tuples come from matrices with different character counts."""


class OracleTooLargeError(ParsicompactError):
    """Brute-force enumeration would exceed the configured cap."""


# --- contraction --------------------------------------------------------

class IllegalContractionError(ParsicompactError):
    """Edge is not contractible (min-cost > 0 or label collision)."""
