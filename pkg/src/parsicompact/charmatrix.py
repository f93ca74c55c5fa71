"""Species/character data model: aligned sequences over per-column state alphabets.

A matrix holds n species, each an m-tuple of character states.  Every
column gets its own alphabet inferred from the symbols observed in it.
Alongside the symbolic view the matrix precomputes a packed bit-flag
representation (one group of bits per character) that the scoring engine
uses for word-parallel set algebra across all characters at once.
"""

from __future__ import annotations

import io
import random
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import (
    AlphabetTooLargeError,
    AmbiguousSymbolError,
    BadColumnRangeError,
    BadSubsetSizeError,
    DuplicateSpeciesError,
    EmptyInputError,
    LengthMismatchError,
)

# Per-character alphabets must fit in one machine word of flags.
WORD_WIDTH = 64

# Symbols treated as gaps/unknowns and rejected unless explicitly allowed.
DEFAULT_REJECT = frozenset("-.?*nNxX")


@dataclass(frozen=True)
class StateAlphabet:
    """Ordered set of state symbols for one character column."""

    character_index: int
    symbols: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet must be non-empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be unique")
        if len(self.symbols) > WORD_WIDTH:
            raise AlphabetTooLargeError(
                f"character {self.character_index}: {len(self.symbols)} states "
                f"exceed the {WORD_WIDTH}-bit flag word"
            )
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Species:
    """One species: a name and its m-tuple of state indices."""

    id: int
    name: str
    value: tuple[int, ...]


class CharacterMatrix:
    """Immutable n-species x m-characters state matrix.

    Construct via :func:`parse_fasta`, :meth:`from_rows`, or the synthetic
    generators.  Packed attributes (used by the parsimony engine):

    * ``group_width`` -- bits reserved per character (max alphabet size)
    * ``group_low`` -- int with bit 0 of every character group set
    * ``alpha_masks[c]`` / ``alpha_all`` -- per-character / combined
      alphabet membership masks
    * ``value_mask`` -- species name -> packed singleton-per-character mask
    """

    def __init__(self, species: list[Species], alphabets: list[StateAlphabet]):
        if not species:
            raise EmptyInputError("matrix needs at least one species")
        if not alphabets:
            raise EmptyInputError("matrix needs at least one character")
        names = [sp.name for sp in species]
        if len(set(names)) != len(names):
            dup = next(nm for nm in names if names.count(nm) > 1)
            raise DuplicateSpeciesError(f"duplicate species name {dup!r}")
        m = len(alphabets)
        for sp in species:
            if len(sp.value) != m:
                raise LengthMismatchError(
                    f"species {sp.name!r} has {len(sp.value)} characters, expected {m}"
                )
            for c, state in enumerate(sp.value):
                if not 0 <= state < alphabets[c].size:
                    raise ValueError(
                        f"species {sp.name!r} state {state} outside alphabet {c}"
                    )
        self.species = tuple(species)
        self.alphabets = tuple(alphabets)
        self.n = len(species)
        self.m = m
        self._build_packed()

    def _build_packed(self):
        # Power-of-two group width keeps the scoring engine's OR-fold
        # cascade (shifts 1, 2, 4, ...) from leaking bits across groups.
        widest = max(a.size for a in self.alphabets)
        g = 1 << (widest - 1).bit_length() if widest > 1 else 1
        self.group_width = g
        low = 0
        for c in range(self.m):
            low |= 1 << (c * g)
        self.group_low = low
        self.alpha_masks = tuple(
            ((1 << a.size) - 1) << (c * g) for c, a in enumerate(self.alphabets)
        )
        self.alpha_all = 0
        for mask in self.alpha_masks:
            self.alpha_all |= mask
        self.value_mask = {}
        for sp in self.species:
            packed = 0
            for c, state in enumerate(sp.value):
                packed |= 1 << (c * g + state)
            self.value_mask[sp.name] = packed
        self.values = {sp.name: sp.value for sp in self.species}

    # -- views -----------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sp.name for sp in self.species)

    def symbol_row(self, i: int) -> str:
        """Reconstruct species i's character states as a symbol string."""
        sp = self.species[i]
        return "".join(self.alphabets[c].symbols[s] for c, s in enumerate(sp.value))

    def rows(self) -> list[tuple[str, str]]:
        return [(sp.name, self.symbol_row(i)) for i, sp in enumerate(self.species)]

    def __eq__(self, other):
        if not isinstance(other, CharacterMatrix):
            return NotImplemented
        return self.rows() == other.rows()

    def __hash__(self):
        return hash(tuple(self.rows()))

    def __repr__(self):
        return f"CharacterMatrix(n={self.n}, m={self.m})"

    # -- construction ----------------------------------------------------

    @classmethod
    def from_rows(cls, rows, allow_ambiguity: bool = False) -> "CharacterMatrix":
        """Build a matrix from (name, symbol string) pairs or a name->string mapping.

        Alphabets are inferred per column from the observed symbols, in
        sorted order.  Gap/unknown symbols raise unless ``allow_ambiguity``
        turns each of them into an ordinary extra state.
        """
        if isinstance(rows, Mapping):
            rows = rows.items()
        rows = list(rows)
        if not rows:
            raise EmptyInputError("no sequence records")
        m = len(rows[0][1])
        if m == 0:
            raise EmptyInputError(f"record {rows[0][0]!r} has an empty sequence")
        for name, seq in rows:
            if len(seq) != m:
                raise LengthMismatchError(
                    f"record {name!r} has length {len(seq)}, expected {m}"
                )
        if not allow_ambiguity:
            for name, seq in rows:
                bad = set(seq) & DEFAULT_REJECT
                if bad:
                    raise AmbiguousSymbolError(
                        f"record {name!r} contains gap/ambiguity symbol(s) "
                        f"{sorted(bad)}; pass allow_ambiguity to keep them as states"
                    )
        alphabets = []
        for c in range(m):
            symbols = tuple(sorted({seq[c] for _, seq in rows}))
            alphabets.append(StateAlphabet(c, symbols))
        species = [
            Species(i, name, tuple(alphabets[c].index[seq[c]] for c in range(m)))
            for i, (name, seq) in enumerate(rows)
        ]
        return cls(species, alphabets)


def parse_fasta(source, allow_ambiguity: bool = False) -> CharacterMatrix:
    """Parse aligned FASTA ('>' headers, equal-length records) into a matrix."""
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    name = None
    chunks: list[str] = []
    for line in source:
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if name is not None:
                rows.append((name, "".join(chunks)))
            # keep only the identifier token; the rest is free description
            name = line[1:].strip().split()[0] if line[1:].strip() else ""
            chunks = []
        else:
            if name is None:
                raise EmptyInputError("sequence data before the first '>' header")
            chunks.append(line)
    if name is not None:
        rows.append((name, "".join(chunks)))
    if not rows:
        raise EmptyInputError("no FASTA records found")
    return CharacterMatrix.from_rows(rows, allow_ambiguity=allow_ambiguity)


def write_fasta(matrix: CharacterMatrix) -> str:
    """Serialize back to FASTA; re-parsing yields an equal matrix."""
    out = []
    for name, seq in matrix.rows():
        out.append(f">{name}\n{seq}\n")
    return "".join(out)


def restrict_columns(matrix: CharacterMatrix, k: int) -> CharacterMatrix:
    """Keep the first k characters; alphabets are re-inferred."""
    if not 1 <= k <= matrix.m:
        raise BadColumnRangeError(f"column count {k} outside 1..{matrix.m}")
    return CharacterMatrix.from_rows(
        [(name, seq[:k]) for name, seq in matrix.rows()], allow_ambiguity=True
    )


def subsample_species(matrix: CharacterMatrix, count: int, seed: int) -> CharacterMatrix:
    """Pick ``count`` distinct species at random; deterministic for a seed."""
    if not 1 <= count <= matrix.n:
        raise BadSubsetSizeError(f"subset size {count} outside 1..{matrix.n}")
    rng = random.Random(seed)
    picked = rng.sample(range(matrix.n), count)
    rows = matrix.rows()
    return CharacterMatrix.from_rows([rows[i] for i in picked], allow_ambiguity=True)


# -- synthetic data for benchmarks and tests ------------------------------

def random_matrix(n: int, m: int, states: int = 4, seed: int = 0) -> CharacterMatrix:
    """Uniform i.i.d. random matrix over the first ``states`` DNA-ish symbols."""
    symbols = "ACGTBDEFHIJKLMOPQRSUVWYZ"[:states]
    rng = random.Random(seed)
    rows = [
        (f"S{i+1}", "".join(rng.choice(symbols) for _ in range(m)))
        for i in range(n)
    ]
    return CharacterMatrix.from_rows(rows)


def evolved_matrix(
    n: int,
    m: int,
    states: int = 4,
    seed: int = 0,
    mutation_rate: float = 0.15,
) -> CharacterMatrix:
    """Random matrix evolved along a random binary coalescent-style tree.

    Produces alignment-like data (shared ancestry, moderate divergence),
    which is the regime the search benchmarks target.  Each tree edge
    mutates each character independently with ``mutation_rate``.
    """
    symbols = "ACGTBDEFHIJKLMOPQRSUVWYZ"[:states]
    rng = random.Random(seed)

    def mutate(seq):
        out = list(seq)
        for c in range(m):
            if rng.random() < mutation_rate:
                out[c] = rng.choice(symbols)
        return "".join(out)

    # Grow a random genealogy: split a random extant lineage until n tips.
    root = "".join(rng.choice(symbols) for _ in range(m))
    tips = [root]
    while len(tips) < n:
        parent = tips.pop(rng.randrange(len(tips)))
        tips.append(mutate(parent))
        tips.append(mutate(parent))
    rng.shuffle(tips)
    rows = [(f"S{i+1}", seq) for i, seq in enumerate(tips[:n])]
    return CharacterMatrix.from_rows(rows)
