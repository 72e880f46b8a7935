"""Words, subshifts of finite type, and survivor sets of forbidden families.

A forbidden family is a finite set of finite words over {0, ..., M-1}.
The survivor set is the space of one-sided sequences in which no factor
(contiguous subword) belongs to the family.  It is presented as a
subshift of finite type on higher blocks: states are the legal blocks of
length max|U| - 1 and an edge joins two blocks exactly when they overlap
and their union block is legal.  Entropy is the log of the spectral
radius of the resulting adjacency structure; an exact dynamic-programming
word count serves as an independent oracle for it.

All entropies are in nats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .spectral import spectral_radius

__all__ = [
    "Word",
    "ForbiddenFamily",
    "Sft",
    "SurvivorSet",
    "EMPTY_ENTROPY",
    "avoids",
    "normalize_family",
    "dolgopyat_sum",
    "build_survivor",
    "full_shift",
    "sft_entropy",
    "word_count",
    "power_recode",
    "refine_sft",
    "edge_list",
    "family_to_text",
    "family_from_text",
    "legal_words",
]

# Entropy sentinel for the empty survivor.  An empty system is reported as
# -inf, never as 0: entropy 0 is attained by nonempty zero-growth systems.
EMPTY_ENTROPY = float("-inf")

# Resource guard for higher-block constructions.
MAX_STATES = 1 << 22

WORD_COUNT_CAP = 30


def _as_symbols(word) -> tuple[int, ...]:
    if isinstance(word, Word):
        return word.symbols
    return tuple(int(a) for a in word)


@dataclass(frozen=True, order=True)
class Word:
    """A finite word: a nonempty tuple of symbols in {0, ..., M-1}."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        symbols = tuple(int(a) for a in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) < 1:
            raise ValueError("a word must have length at least 1")
        if any(a < 0 for a in symbols):
            raise ValueError("word symbols must be nonnegative integers")

    @classmethod
    def from_string(cls, text: str) -> "Word":
        """Parse '0110' (digits) or '10,2,0' (comma separated symbols)."""
        text = text.strip()
        if "," in text:
            return cls(tuple(int(part) for part in text.split(",")))
        return cls(tuple(int(ch) for ch in text))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, index: int) -> int:
        return self.symbols[index]

    def __add__(self, other) -> "Word":
        return Word(self.symbols + _as_symbols(other))

    def __str__(self) -> str:
        if all(a <= 9 for a in self.symbols):
            return "".join(str(a) for a in self.symbols)
        return ",".join(str(a) for a in self.symbols)

    def is_factor_of(self, other) -> bool:
        """True iff this word occurs contiguously inside ``other``."""
        hay = _as_symbols(other)
        needle = self.symbols
        n = len(needle)
        return any(hay[i:i + n] == needle for i in range(len(hay) - n + 1))


@dataclass(frozen=True)
class ForbiddenFamily:
    """A nonempty finite set of forbidden words over a fixed alphabet."""

    alphabet_size: int
    words: frozenset[Word]

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet size must be at least 2")
        words = frozenset(
            w if isinstance(w, Word) else Word(_as_symbols(w)) for w in self.words
        )
        object.__setattr__(self, "words", words)
        if not words:
            raise ValueError("no forbidden words")
        for w in words:
            if any(a >= self.alphabet_size for a in w):
                raise ValueError(
                    f"word {w} uses symbols outside alphabet of size {self.alphabet_size}"
                )

    @classmethod
    def make(cls, alphabet_size: int, words: Iterable) -> "ForbiddenFamily":
        """Build a family from strings, tuples, or Word objects."""
        converted = frozenset(
            w if isinstance(w, Word)
            else Word.from_string(w) if isinstance(w, str)
            else Word(_as_symbols(w))
            for w in words
        )
        return cls(alphabet_size, converted)

    @property
    def min_length(self) -> int:
        return min(len(w) for w in self.words)

    @property
    def max_length(self) -> int:
        return max(len(w) for w in self.words)

    def sorted_words(self) -> list[Word]:
        return sorted(self.words)


def avoids(word, family: ForbiddenFamily) -> bool:
    """True iff no contiguous factor of ``word`` lies in the family."""
    symbols = _as_symbols(word)
    for forbidden in family.words:
        if forbidden.is_factor_of(symbols):
            return False
    return True


def normalize_family(family: ForbiddenFamily) -> ForbiddenFamily:
    """Drop words that contain another family word as a factor.

    The survivor set is unchanged: any occurrence of the longer word
    forces an occurrence of the shorter one.
    """
    kept = frozenset(
        w for w in family.words
        if not any(u != w and u.is_factor_of(w) for u in family.words)
    )
    return ForbiddenFamily(family.alphabet_size, kept)


def dolgopyat_sum(family: ForbiddenFamily, s: float) -> float:
    """Sum of exp(-s |U|) over the family words.

    A value below 1 (for s below the full-shift entropy) is the standard
    smallness hypothesis guaranteeing that the survivor set keeps large
    entropy once the minimal forbidden length is large.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    return float(sum(math.exp(-s * len(w)) for w in family.words))


@dataclass(frozen=True)
class Sft:
    """A subshift of finite type presented on block states.

    ``states`` are Words, all of the same length ``block_depth``; an edge
    (i, j) means states[i] can be followed by states[j] after shifting by
    one symbol, so each edge represents a legal (block_depth + 1)-block.
    """

    states: tuple[Word, ...]
    edges: tuple[tuple[int, int], ...]
    block_depth: int

    def __post_init__(self):
        states = tuple(self.states)
        edges = tuple(sorted(set((int(i), int(j)) for i, j in self.edges)))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "edges", edges)
        if states:
            if len(set(states)) != len(states):
                raise ValueError("duplicate states")
            if any(len(s) != self.block_depth for s in states):
                raise ValueError("all state labels must have length block_depth")
        n = len(states)
        if any(not (0 <= i < n and 0 <= j < n) for i, j in edges):
            raise ValueError("edge endpoint out of range")

    @property
    def is_empty(self) -> bool:
        return len(self.states) == 0

    @property
    def alphabet_size(self) -> int:
        if not self.states:
            return 0
        return 1 + max(max(s.symbols) for s in self.states)

    def adjacency(self) -> sp.csr_matrix:
        n = len(self.states)
        if not self.edges:
            return sp.csr_matrix((n, n))
        rows, cols = zip(*self.edges)
        data = np.ones(len(self.edges))
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.states]
        for i, j in self.edges:
            out[i].append(j)
        return out

    def state_index(self) -> dict[Word, int]:
        return {s: i for i, s in enumerate(self.states)}


@dataclass(frozen=True)
class SurvivorSet:
    """The pruned higher-block presentation of a forbidden family."""

    family: ForbiddenFamily
    sft: Sft
    empty: bool = field(default=False)


def full_shift(alphabet_size: int) -> Sft:
    """The full shift on ``alphabet_size`` symbols as a 1-block SFT."""
    if alphabet_size < 1:
        raise ValueError("alphabet size must be at least 1")
    states = tuple(Word((a,)) for a in range(alphabet_size))
    edges = tuple((i, j) for i in range(alphabet_size) for j in range(alphabet_size))
    return Sft(states, edges, 1)


def _trim(states: list[tuple[int, ...]], edges: set[tuple[int, int]],
          block_depth: int) -> Sft:
    """Iteratively delete states without incoming or outgoing edges."""
    alive = set(range(len(states)))
    current = set(edges)
    while True:
        has_out = {i for i, _ in current}
        has_in = {j for _, j in current}
        keep = {i for i in alive if i in has_out and i in has_in}
        if keep == alive:
            break
        alive = keep
        current = {(i, j) for i, j in current if i in alive and j in alive}
    ordered = sorted(alive, key=lambda i: states[i])
    relabel = {old: new for new, old in enumerate(ordered)}
    new_states = tuple(Word(states[i]) for i in ordered)
    new_edges = tuple(sorted((relabel[i], relabel[j]) for i, j in current))
    return Sft(new_states, new_edges, block_depth)


def _suffix_legal(word: tuple[int, ...], by_length: dict[int, set[tuple[int, ...]]]) -> bool:
    """Check that no forbidden word is a suffix of ``word``.

    Used for incremental extension: if the prefix is already legal, only
    factors ending at the last symbol need checking.
    """
    n = len(word)
    for length, bucket in by_length.items():
        if length <= n and word[n - length:] in bucket:
            return False
    return True


def build_survivor(family: ForbiddenFamily) -> SurvivorSet:
    """Higher-block SFT of all one-sided sequences avoiding the family.

    States are the legal blocks of length max|U| - 1 (length 1 when the
    family consists of single symbols); an edge joins overlapping blocks
    whose union contains no forbidden factor.  The result is trimmed to
    its essential part, so a sequence avoids the family iff it lifts to
    an infinite path.
    """
    family = normalize_family(family)
    m = family.alphabet_size
    depth = max(family.max_length - 1, 1)
    by_length: dict[int, set[tuple[int, ...]]] = {}
    for w in family.words:
        by_length.setdefault(len(w), set()).add(w.symbols)

    level: list[tuple[int, ...]] = [()]
    for _ in range(depth):
        extended = []
        for w in level:
            for a in range(m):
                candidate = w + (a,)
                if _suffix_legal(candidate, by_length):
                    extended.append(candidate)
        level = extended
        if len(level) > MAX_STATES:
            raise ValueError(
                f"higher-block construction exceeds {MAX_STATES} states"
            )
    states = sorted(level)
    index = {w: i for i, w in enumerate(states)}
    edges = set()
    for w in states:
        for a in range(m):
            block = w + (a,)
            if _suffix_legal(block, by_length):
                target = block[1:]
                j = index.get(target)
                if j is not None:
                    edges.add((index[w], j))
    sft = _trim(states, edges, depth)
    return SurvivorSet(family=family, sft=sft, empty=sft.is_empty)


def sft_entropy(sft: Sft, rtol: float = 1e-12) -> float:
    """log of the spectral radius of the adjacency structure (nats).

    Returns the empty sentinel -inf for the empty SFT.  Computed by
    deterministic power iteration (all-ones start, relative tolerance
    1e-12, capped iterations); non-convergence raises ConvergenceError
    carrying the last two Rayleigh estimates.
    """
    if sft.is_empty:
        return EMPTY_ENTROPY
    rho = spectral_radius(sft.adjacency(), rtol=rtol)
    if rho == 0.0:
        return EMPTY_ENTROPY
    return math.log(rho)


def word_count(sft: Sft, n: int, cap: int = WORD_COUNT_CAP) -> int:
    """Exact number of legal words of length ``n`` (dynamic programming).

    For n below the block depth this counts distinct prefixes of states;
    beyond it, paths through the transition graph.  Exact integer
    arithmetic throughout, so it serves as an entropy oracle:
    (1/n) log word_count(n) approaches sft_entropy as n grows.
    """
    if n < 1:
        raise ValueError("word length must be at least 1")
    if n > cap:
        raise ValueError("oracle cap exceeded")
    if sft.is_empty:
        return 0
    depth = sft.block_depth
    if n <= depth:
        return len({s.symbols[:n] for s in sft.states})
    successors = sft.successors()
    counts = [1] * len(sft.states)
    for _ in range(n - depth):
        counts = [sum(counts[j] for j in successors[i]) for i in range(len(counts))]
    return sum(counts)


def power_recode(sft: Sft, n: int) -> Sft:
    """Higher-block recoding of the n-th power shift.

    States are legal n-step state paths (labelled by their concatenated
    blocks); consecutive paths are joined when the last state of one can
    transition to the first state of the next.  Entropy multiplies by n.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    if n == 1 or sft.is_empty:
        return sft
    successors = sft.successors()
    paths: list[tuple[int, ...]] = [(i,) for i in range(len(sft.states))]
    for _ in range(n - 1):
        paths = [p + (j,) for p in paths for j in successors[p[-1]]]
        if len(paths) > MAX_STATES:
            raise ValueError(f"power recoding exceeds {MAX_STATES} states")
    labels = []
    for p in paths:
        symbols: tuple[int, ...] = ()
        for i in p:
            symbols = symbols + sft.states[i].symbols
        labels.append(symbols)
    order = sorted(range(len(paths)), key=lambda t: labels[t])
    paths = [paths[t] for t in order]
    labels = [labels[t] for t in order]
    edge_ok = set(sft.edges)
    edges = set()
    for a, p in enumerate(paths):
        for b, q in enumerate(paths):
            if (p[-1], q[0]) in edge_ok:
                edges.add((a, b))
    return _trim(labels, edges, n * sft.block_depth)


def refine_sft(sft: Sft, block_depth: int) -> Sft:
    """Re-present the same subshift on longer blocks.

    States of the refined SFT are the legal words of length
    ``block_depth``; edges are pure overlaps (legality of the union
    block follows from legality of both states).
    """
    if sft.is_empty:
        return sft
    if block_depth < sft.block_depth:
        raise ValueError("can only refine to a larger block depth")
    if block_depth == sft.block_depth:
        return sft
    successors = sft.successors()
    paths = [(i,) for i in range(len(sft.states))]
    for _ in range(block_depth - sft.block_depth):
        paths = [p + (j,) for p in paths for j in successors[p[-1]]]
        if len(paths) > MAX_STATES:
            raise ValueError(f"refinement exceeds {MAX_STATES} states")
    labels = []
    for p in paths:
        symbols = sft.states[p[0]].symbols
        for i in p[1:]:
            symbols = symbols + (sft.states[i].symbols[-1],)
        labels.append(symbols)
    order = sorted(range(len(paths)), key=lambda t: labels[t])
    labels = [labels[t] for t in order]
    index = {w: i for i, w in enumerate(labels)}
    edges = set()
    for w in labels:
        for a in range(sft.alphabet_size):
            v = w[1:] + (a,)
            j = index.get(v)
            if j is not None:
                edges.add((index[w], j))
    return _trim(labels, edges, block_depth)


def edge_list(sft: Sft) -> list[tuple[str, str]]:
    """Edges as pairs of block strings, for debugging and export."""
    return [(str(sft.states[i]), str(sft.states[j])) for i, j in sft.edges]


def family_to_text(family: ForbiddenFamily) -> str:
    """Serialize as a structured text record with digit-string words."""
    return json.dumps(
        {
            "alphabet_size": family.alphabet_size,
            "words": [str(w) for w in family.sorted_words()],
        }
    )


def family_from_text(text: str) -> ForbiddenFamily:
    record = json.loads(text)
    return ForbiddenFamily.make(int(record["alphabet_size"]), record["words"])


def legal_words(sft: Sft, n: int) -> list[tuple[int, ...]]:
    """All legal words of length ``n``, lexicographically sorted.

    Enumeration counterpart of word_count; intended for desk-scale n.
    """
    if sft.is_empty or n < 1:
        return []
    depth = sft.block_depth
    if n <= depth:
        return sorted({s.symbols[:n] for s in sft.states})
    successors = sft.successors()
    words = []
    stack: list[tuple[int, tuple[int, ...]]] = [
        (i, s.symbols) for i, s in enumerate(sft.states)
    ]
    while stack:
        state, word = stack.pop()
        if len(word) == n:
            words.append(word)
            continue
        for j in successors[state]:
            stack.append((j, word + (sft.states[j].symbols[-1],)))
    return sorted(set(words))
