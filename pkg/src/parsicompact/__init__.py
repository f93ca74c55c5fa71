"""Most compact maximum-parsimony trees over mixed-labelled topologies.

The package scores trees whose internal nodes may carry species labels
(Hartigan state sets, bit-packed across all characters), enumerates
cubic and mixed topologies exhaustively with a cost bound, and shrinks
cubic optima into most compact form by contracting zero-min-cost edges
over every order.
"""

from .charmatrix import (
    CharacterMatrix,
    Species,
    StateAlphabet,
    evolved_matrix,
    parse_fasta,
    random_matrix,
    restrict_columns,
    subsample_species,
    write_fasta,
)
from .contract import (
    CompactResultSet,
    ContractionState,
    compact_search,
    contract_and_update,
    most_compact_pipeline,
    zero_min_cost_edges,
)
from .enumeration import (
    SearchRecord,
    TreeCountTable,
    closed_form_estimate,
    count_cubic,
    count_mixed,
    count_total_mixed,
    enumerate_cubic,
    enumerate_mixed,
    order_species,
)
from .errors import (
    AlphabetTooLargeError,
    AmbiguousSymbolError,
    ArityMismatchError,
    BadColumnRangeError,
    BadSubsetSizeError,
    DuplicateLabelError,
    DuplicateSpeciesError,
    EmptyInputError,
    EmptyTreeError,
    IllegalContractionError,
    LabelCollisionError,
    LengthMismatchError,
    MissingSpeciesError,
    NewickParseError,
    NotBinaryError,
    NotInternalError,
    OracleTooLargeError,
    ParsicompactError,
    SplitUnderflowError,
    TreeStructureError,
    UnlabelledLeafError,
)
from .parsimony import (
    FitAssignment,
    NodeSets,
    OracleResult,
    ScoreResult,
    Scorer,
    StateSet,
    brute_force_best_fit,
    fitch_score,
    hartigan_bottom_up,
    hartigan_top_down,
    min_cost_edge,
    mp_cost,
    score_mixed_constrained,
    score_unrooted,
)
from .tree import CanonicalKey, MixedTree, RootedView, parse_newick

__version__ = "0.1.0"

__all__ = [
    "AlphabetTooLargeError",
    "AmbiguousSymbolError",
    "ArityMismatchError",
    "BadColumnRangeError",
    "BadSubsetSizeError",
    "CanonicalKey",
    "CharacterMatrix",
    "CompactResultSet",
    "ContractionState",
    "DuplicateLabelError",
    "DuplicateSpeciesError",
    "EmptyInputError",
    "EmptyTreeError",
    "FitAssignment",
    "IllegalContractionError",
    "LabelCollisionError",
    "LengthMismatchError",
    "MissingSpeciesError",
    "MixedTree",
    "NewickParseError",
    "NodeSets",
    "NotBinaryError",
    "NotInternalError",
    "OracleResult",
    "OracleTooLargeError",
    "ParsicompactError",
    "RootedView",
    "ScoreResult",
    "Scorer",
    "SearchRecord",
    "Species",
    "SplitUnderflowError",
    "StateAlphabet",
    "StateSet",
    "TreeCountTable",
    "TreeStructureError",
    "UnlabelledLeafError",
    "brute_force_best_fit",
    "closed_form_estimate",
    "compact_search",
    "contract_and_update",
    "count_cubic",
    "count_mixed",
    "count_total_mixed",
    "enumerate_cubic",
    "enumerate_mixed",
    "evolved_matrix",
    "fitch_score",
    "hartigan_bottom_up",
    "hartigan_top_down",
    "min_cost_edge",
    "most_compact_pipeline",
    "mp_cost",
    "order_species",
    "parse_fasta",
    "parse_newick",
    "random_matrix",
    "restrict_columns",
    "score_mixed_constrained",
    "score_unrooted",
    "subsample_species",
    "write_fasta",
    "zero_min_cost_edges",
]
