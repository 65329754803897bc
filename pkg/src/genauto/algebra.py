"""Automata with multiplicities in matrix-triplet form.

An automaton over a semiring K is stored as ``(entry, {letter: matrix}, exit)``;
the weight of a word ``w = a1...al`` is ``entry @ mu(a1) @ ... @ mu(al) @ exit``
evaluated with the semiring operations.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompatibleShapes,
    StochasticityViolation,
    TableTooLarge,
    UnknownLetter,
)

STOCHASTIC_TOL = 1e-9
MAX_TABLE_WORDS = 10**6


@dataclass(frozen=True)
class Semiring:
    """A commutative-addition semiring with numpy-backed matrix products."""

    name: str
    dtype: Any
    zero: Any
    one: Any
    add: Callable[[Any, Any], Any]
    mul: Callable[[Any, Any], Any]
    matmul: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def coerce(self, values) -> np.ndarray:
        arr = np.asarray(values)
        if self.dtype is np.bool_:
            if arr.dtype != np.bool_:
                if not np.all((arr == 0) | (arr == 1)):
                    raise ValueError("boolean semiring values must be 0 or 1")
                arr = arr != 0
            return arr.astype(np.bool_)
        return arr.astype(np.float64)

    def __repr__(self):
        return f"Semiring({self.name})"


def _bool_matmul(a, b):
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


BOOLEAN = Semiring(
    name="boolean",
    dtype=np.bool_,
    zero=False,
    one=True,
    add=lambda a, b: bool(a) or bool(b),
    mul=lambda a, b: bool(a) and bool(b),
    matmul=_bool_matmul,
)

REAL = Semiring(
    name="real",
    dtype=np.float64,
    zero=0.0,
    one=1.0,
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    matmul=np.matmul,
)

SEMIRINGS = {"boolean": BOOLEAN, "real": REAL}


class Mode(str, enum.Enum):
    GENERAL = "general"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class Norm:
    """Hölder norm of order ``alpha``; ``alpha = inf`` is the max norm."""

    alpha: float = 2.0

    def __post_init__(self):
        if not (self.alpha >= 1):
            raise ValueError(f"Hölder exponent must be >= 1, got {self.alpha}")

    @classmethod
    def holder(cls, alpha: float) -> "Norm":
        return cls(float(alpha))

    @classmethod
    def max(cls) -> "Norm":
        return cls(math.inf)

    @classmethod
    def parse(cls, text: str | float) -> "Norm":
        if isinstance(text, str) and text.strip().lower() in ("max", "inf", "infinity"):
            return cls.max()
        return cls.holder(float(text))

    @property
    def is_max(self) -> bool:
        return math.isinf(self.alpha)

    def __call__(self, values) -> float:
        v = np.asarray(values, dtype=np.float64).ravel()
        if v.size == 0:
            return 0.0
        return float(self.rows(v[None, :])[0])

    def rows(self, values) -> np.ndarray:
        """Norm of each row of a 2-D array (each row flattened in row-major order)."""
        v = np.abs(np.asarray(values, dtype=np.float64))
        v = v.reshape(v.shape[0], -1)
        if v.shape[1] == 0:
            return np.zeros(v.shape[0])
        if self.is_max:
            return v.max(axis=1)
        if self.alpha == 1.0:
            return v.sum(axis=1)
        if self.alpha == 2.0:
            return np.sqrt(np.einsum("ij,ij->i", v, v))
        return np.sum(v**self.alpha, axis=1) ** (1.0 / self.alpha)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class WeightedAutomaton:
    """Immutable matrix triplet ``(entry, mu, exit)`` over a semiring.

    Use :func:`make_automaton` to build one from plain Python data.
    """

    __slots__ = ("alphabet", "entry", "matrices", "exit", "mode", "semiring", "_index")

    def __init__(self, alphabet, entry, matrices, exit, mode=Mode.GENERAL, semiring=REAL):
        object.__setattr__(self, "alphabet", tuple(alphabet))
        object.__setattr__(self, "entry", _readonly(entry))
        object.__setattr__(self, "matrices", tuple(_readonly(m) for m in matrices))
        object.__setattr__(self, "exit", _readonly(exit))
        object.__setattr__(self, "mode", Mode(mode))
        object.__setattr__(self, "semiring", semiring)
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.alphabet)})

    def __setattr__(self, name, value):
        raise AttributeError("WeightedAutomaton is immutable")

    @property
    def n(self) -> int:
        return self.entry.shape[0]

    @property
    def k(self) -> int:
        return len(self.alphabet)

    @property
    def transition(self) -> dict:
        return dict(zip(self.alphabet, self.matrices))

    def mu(self, letter) -> np.ndarray:
        try:
            return self.matrices[self._index[letter]]
        except KeyError:
            raise UnknownLetter(f"letter {letter!r} not in alphabet {self.alphabet}") from None

    def letter_index(self, letter) -> int:
        try:
            return self._index[letter]
        except KeyError:
            raise UnknownLetter(f"letter {letter!r} not in alphabet {self.alphabet}") from None

    def replace(self, *, entry=None, matrices=None, exit=None) -> "WeightedAutomaton":
        """Return a validated copy with some components swapped out."""
        return make_automaton(
            self.alphabet,
            self.entry if entry is None else entry,
            dict(zip(self.alphabet, self.matrices if matrices is None else matrices)),
            self.exit if exit is None else exit,
            mode=self.mode,
            semiring=self.semiring,
        )

    def same_shape(self, other: "WeightedAutomaton") -> bool:
        return self.alphabet == other.alphabet and self.n == other.n

    def __eq__(self, other):
        if not isinstance(other, WeightedAutomaton):
            return NotImplemented
        return (
            self.same_shape(other)
            and self.mode == other.mode
            and self.semiring is other.semiring
            and np.array_equal(self.entry, other.entry)
            and np.array_equal(self.exit, other.exit)
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"WeightedAutomaton(alphabet={self.alphabet}, n={self.n}, "
            f"mode={self.mode.value}, semiring={self.semiring.name})"
        )


def _check_stochastic(entry, matrices, exit, alphabet, tol=STOCHASTIC_TOL):
    if np.any(entry < 0) or abs(entry.sum() - 1.0) > tol:
        raise StochasticityViolation(f"entry vector {entry.tolist()} is not a probability vector")
    if np.any(exit < 0) or np.any(exit > 1):
        raise StochasticityViolation(f"exit vector {exit.tolist()} has entries outside [0, 1]")
    for letter, m in zip(alphabet, matrices):
        if np.any(m < 0):
            raise StochasticityViolation(f"matrix {letter!r} has a negative entry")
        sums = m.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            r = int(bad[0])
            raise StochasticityViolation(
                f"row {r + 1} of matrix {letter!r} sums to {sums[r]!r}, not 1"
            )


def make_automaton(
    alphabet: Sequence,
    entry,
    transition: Mapping[Any, Any] | Sequence,
    exit,
    mode: Mode | str = Mode.GENERAL,
    semiring: Semiring = REAL,
) -> WeightedAutomaton:
    """Validate the pieces of a matrix triplet and assemble an automaton.

    ``transition`` maps each letter to an n x n matrix (a sequence aligned with
    ``alphabet`` is accepted too).
    """
    alphabet = tuple(alphabet)
    mode = Mode(mode)
    if not alphabet:
        raise DimensionMismatch("alphabet must be nonempty")
    if len(set(alphabet)) != len(alphabet):
        raise DimensionMismatch(f"alphabet has repeated letters: {alphabet}")
    entry = semiring.coerce(entry)
    exit = semiring.coerce(exit)
    if entry.ndim != 1 or entry.shape[0] < 1:
        raise DimensionMismatch("entry must be a nonempty vector")
    n = entry.shape[0]
    if exit.shape != (n,):
        raise DimensionMismatch(f"exit has shape {exit.shape}, expected ({n},)")

    if isinstance(transition, Mapping):
        extra = set(transition) - set(alphabet)
        if extra:
            raise DimensionMismatch(f"matrices given for letters outside the alphabet: {sorted(map(str, extra))}")
        missing = [a for a in alphabet if a not in transition]
        if missing:
            raise DimensionMismatch(f"no matrix for letters {missing}")
        raw = [transition[a] for a in alphabet]
    else:
        raw = list(transition)
        if len(raw) != len(alphabet):
            raise DimensionMismatch(f"{len(raw)} matrices for {len(alphabet)} letters")
    matrices = []
    for letter, m in zip(alphabet, raw):
        m = semiring.coerce(m)
        if m.shape != (n, n):
            raise DimensionMismatch(f"matrix {letter!r} has shape {m.shape}, expected ({n}, {n})")
        matrices.append(m)

    if mode is Mode.STOCHASTIC:
        if semiring is not REAL:
            raise StochasticityViolation("stochastic mode requires the real semiring")
        if not (np.all(np.isfinite(entry)) and np.all(np.isfinite(exit))):
            raise StochasticityViolation("non-finite coefficient")
        _check_stochastic(entry, matrices, exit, alphabet)
    return WeightedAutomaton(alphabet, entry, matrices, exit, mode, semiring)


def _word_indices(A: WeightedAutomaton, word: Iterable) -> list[int]:
    return [A.letter_index(a) for a in word]


def word_weight(A: WeightedAutomaton, word: Iterable):
    """Behavior coefficient of ``word``: entry . mu(w1) ... mu(wl) . exit."""
    idx = _word_indices(A, word)
    sr = A.semiring
    row = A.entry
    for i in idx:
        row = sr.matmul(row, A.matrices[i])
    value = sr.matmul(row, A.exit)
    return bool(value) if sr is BOOLEAN else float(value)


def word_weight_bruteforce(A: WeightedAutomaton, word: Iterable):
    """Same as :func:`word_weight`, summing over every state path explicitly."""
    idx = _word_indices(A, word)
    sr = A.semiring
    n = A.n
    total = sr.zero
    for path in itertools.product(range(n), repeat=len(idx) + 1):
        term = A.entry[path[0]].item()
        for step, letter in enumerate(idx):
            term = sr.mul(term, A.matrices[letter][path[step], path[step + 1]].item())
        term = sr.mul(term, A.exit[path[-1]].item())
        total = sr.add(total, term)
    return bool(total) if sr is BOOLEAN else float(total)


def vectorize(A: WeightedAutomaton) -> np.ndarray:
    """Coefficient vector: entry, then each mu(a) row-major in alphabet order, then exit."""
    parts = [A.entry.astype(np.float64)]
    parts.extend(m.astype(np.float64).ravel() for m in A.matrices)
    parts.append(A.exit.astype(np.float64))
    return np.concatenate(parts)


def devectorize(
    vector,
    alphabet: Sequence,
    n: int,
    mode: Mode | str = Mode.GENERAL,
    semiring: Semiring = REAL,
) -> WeightedAutomaton:
    """Inverse of :func:`vectorize` for a known alphabet and state count."""
    v = np.asarray(vector, dtype=np.float64)
    k = len(alphabet)
    if v.shape != (k * n * n + 2 * n,):
        raise DimensionMismatch(f"vector of length {v.size} does not fit k={k}, n={n}")
    entry = v[:n]
    mats = [v[n + i * n * n : n + (i + 1) * n * n].reshape(n, n) for i in range(k)]
    exit = v[n + k * n * n :]
    return make_automaton(alphabet, entry, mats, exit, mode=mode, semiring=semiring)


def automaton_distance(A1: WeightedAutomaton, A2: WeightedAutomaton, norm: Norm = Norm()) -> float:
    if not A1.same_shape(A2):
        raise IncompatibleShapes(
            f"cannot compare automata over {A1.alphabet} (n={A1.n}) and {A2.alphabet} (n={A2.n})"
        )
    return norm(vectorize(A1) - vectorize(A2))


def iter_words(alphabet: Sequence, max_len: int):
    """Words of length 0..max_len, shortest first, lexicographic by alphabet order."""
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


def behavior_table(A: WeightedAutomaton, max_len: int) -> dict[tuple, Any]:
    """Weights of every word of length <= ``max_len``, keyed by letter tuples."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    k = A.k
    count = sum(k**length for length in range(max_len + 1))
    if count > MAX_TABLE_WORDS:
        raise TableTooLarge(f"{count} words exceed the limit of {MAX_TABLE_WORDS}")
    sr = A.semiring
    table: dict[tuple, Any] = {}
    frontier = {(): A.entry}
    for length in range(max_len + 1):
        nxt = {}
        for word, row in frontier.items():
            value = sr.matmul(row, A.exit)
            table[word] = bool(value) if sr is BOOLEAN else float(value)
            if length < max_len:
                for letter, m in zip(A.alphabet, A.matrices):
                    nxt[word + (letter,)] = sr.matmul(row, m)
        frontier = nxt
    return table


def behavior_gap(A: WeightedAutomaton, B: WeightedAutomaton, max_len: int) -> float:
    """Largest absolute difference of word weights over words up to ``max_len``."""
    if not A.same_shape(B):
        raise IncompatibleShapes("automata must share alphabet and state count")
    ta = behavior_table(A, max_len)
    tb = behavior_table(B, max_len)
    return max(abs(float(ta[w]) - float(tb[w])) for w in ta)
