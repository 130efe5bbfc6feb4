"""Words in the locally free semigroup/group and their heaps.

Generators ``g_1..g_N`` commute exactly when their labels differ by two or
more.  A word over these generators is the same thing as a numbered heap of
cells: letter ``g_i`` at position ``t`` drops a cell on column ``i`` at time
``t``.  Two words give the same (unnumbered) heap iff they differ by
commutations, and the normal order form (smallest labels pushed left) picks
one canonical word per heap.

Signed letters ``g_i^{-1}`` model the second colour of the two-colour heap:
a white cell landing directly on a black one in the same column annihilates
it.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputDomainError, ValidationError


@dataclass(frozen=True, order=True)
class Letter:
    index: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InputDomainError("letter sign must be +1 or -1")
        if self.index < 1:
            raise InputDomainError("generator labels start at 1")

    def inverse(self) -> "Letter":
        return Letter(self.index, -self.sign)

    def commutes_with(self, other: "Letter") -> bool:
        return abs(self.index - other.index) >= 2

    def __int__(self):
        return self.sign * self.index

    def __str__(self):
        return f"g{self.index}" if self.sign > 0 else f"g{self.index}^-1"


class Word(tuple):
    """Immutable sequence of :class:`Letter`.

    Build from signed integers: ``Word.of([3, 6, 1, -2])``.  ``n_generators``
    is optional metadata; when given, labels are range-checked against it.
    """

    def __new__(cls, letters: Iterable[Letter] = (), n_generators: int | None = None):
        self = super().__new__(cls, tuple(letters))
        if n_generators is not None:
            for letter in self:
                if letter.index > n_generators:
                    raise InputDomainError(
                        f"{letter} outside F_{n_generators}"
                    )
        self.n_generators = n_generators
        return self

    @classmethod
    def of(cls, signed: Iterable[int], n_generators: int | None = None) -> "Word":
        letters = []
        for s in signed:
            s = int(s)
            if s == 0:
                raise InputDomainError("0 is not a generator label")
            letters.append(Letter(abs(s), 1 if s > 0 else -1))
        return cls(letters, n_generators)

    @classmethod
    def parse(cls, text: str, n_generators: int | None = None) -> "Word":
        """Whitespace-separated signed integers, e.g. ``"3 6 1 -2"``."""
        return cls.of(text.split(), n_generators)

    def signed(self) -> list[int]:
        return [int(letter) for letter in self]

    def indices(self) -> list[int]:
        return [letter.index for letter in self]

    def is_positive(self) -> bool:
        return all(letter.sign > 0 for letter in self)

    def serialize(self) -> str:
        return " ".join(str(s) for s in self.signed())

    def _with_letters(self, letters) -> "Word":
        return Word(letters, self.n_generators)

    def __str__(self):
        return " ".join(str(letter) for letter in self) or "e"

    def __repr__(self):
        return f"Word.of({self.signed()!r})"


@dataclass(frozen=True, order=True)
class Cell:
    column: int
    level: int
    timestamp: int


class Heap:
    """A pile of cells.

    Timestamps number the cells in drop order.  Equality compares the pile
    itself (columns and levels), so a heap equals the heap rebuilt from any
    of its words, whatever order the cells were dropped in.
    """

    def __init__(self, cells: Iterable[Cell], n_columns: int | None = None):
        self.cells = tuple(sorted(cells, key=lambda c: c.timestamp))
        self.n_columns = n_columns

    def geometry(self) -> frozenset:
        return frozenset((c.column, c.level) for c in self.cells)

    def __eq__(self, other):
        if not isinstance(other, Heap):
            return NotImplemented
        return self.geometry() == other.geometry()

    def __hash__(self):
        return hash(self.geometry())

    def __len__(self):
        return len(self.cells)

    def profile(self, n_columns: int | None = None) -> list[int]:
        n = n_columns or self.n_columns or max((c.column for c in self.cells), default=0)
        top = [0] * n
        for c in self.cells:
            top[c.column - 1] = max(top[c.column - 1], c.level)
        return top

    def word_by_time(self) -> Word:
        """The numbered-heap word: cells read in drop order."""
        return Word.of([c.column for c in self.cells], self.n_columns)

    def to_json(self) -> str:
        return json.dumps([[c.column, c.level, c.timestamp] for c in self.cells])

    @classmethod
    def from_json(cls, text: str, n_columns: int | None = None) -> "Heap":
        return cls((Cell(*map(int, row)) for row in json.loads(text)), n_columns)

    def __repr__(self):
        return f"Heap({list(self.cells)!r})"


def _require_positive(word: Sequence[Letter]):
    for letter in word:
        if letter.sign < 0:
            raise InputDomainError("semigroup operation got an inverse letter")


def normal_form(word: Word) -> Word:
    """Push smaller labels left through commuting neighbours, to a fixpoint."""
    _require_positive(word)
    letters = list(word)
    changed = True
    while changed:
        changed = False
        for k in range(len(letters) - 1):
            a, b = letters[k], letters[k + 1]
            if a.index > b.index and a.commutes_with(b):
                letters[k], letters[k + 1] = b, a
                changed = True
    return Word(letters, getattr(word, "n_generators", None))


def normal_form_fast(word: Word) -> Word:
    """Same output as :func:`normal_form` in O(T log T), via the heap order."""
    _require_positive(word)
    return heap_to_word(word_to_heap(word))


def word_to_heap(word: Word) -> Heap:
    _require_positive(word)
    n = getattr(word, "n_generators", None)
    top: dict[int, int] = {}
    cells = []
    for t, letter in enumerate(word, start=1):
        i = letter.index
        level = max(top.get(i - 1, 0), top.get(i, 0), top.get(i + 1, 0)) + 1
        top[i] = level
        cells.append(Cell(i, level, t))
    return Heap(cells, n)


def _support_order(heap: Heap) -> dict:
    """For each cell, the cells directly blocking it from below."""
    by_col: dict[int, list[int]] = {}
    for c in heap.cells:
        by_col.setdefault(c.column, []).append(c.level)
    for levels in by_col.values():
        levels.sort()
    return by_col


def validate_heap(heap: Heap) -> None:
    """Raise :class:`ValidationError` unless ``heap`` obeys the landing rule."""
    seen = set()
    for c in heap.cells:
        if c.column < 1 or c.level < 1:
            raise ValidationError(f"{c} has non-positive coordinates")
        if (c.column, c.level) in seen:
            raise ValidationError(f"two cells at column {c.column}, level {c.level}")
        seen.add((c.column, c.level))
    if len({c.timestamp for c in heap.cells}) != len(heap.cells):
        raise ValidationError("duplicate timestamps")
    by_col = _support_order(heap)
    for c in heap.cells:
        below = [
            lv
            for col in (c.column - 1, c.column, c.column + 1)
            for lv in by_col.get(col, ())
            if lv < c.level
        ]
        if col_clash := [lv for col in (c.column - 1, c.column + 1) for lv in by_col.get(col, ()) if lv == c.level]:
            raise ValidationError(f"{c} touches a side neighbour at level {col_clash[0]}")
        if c.level != 1 + max(below, default=0):
            raise ValidationError(f"{c} is not supported by the cells below it")
    # timestamps must be a valid drop order: a cell cannot precede its support
    for c in heap.cells:
        for d in heap.cells:
            if abs(d.column - c.column) <= 1 and d.level < c.level and d.timestamp > c.timestamp:
                raise ValidationError(f"{d} was dropped after {c}, which rests above it")


def heap_to_word(heap: Heap) -> Word:
    """Read a heap back as its normal-order word.

    Cells are peeled from the bottom, always taking the free cell with the
    smallest column; a cell is free once everything it rests on (within one
    column) is gone.
    """
    validate_heap(heap)
    cells = sorted(heap.cells, key=lambda c: (c.level, c.column))
    blockers = {}
    dependants: dict = {}
    for c in cells:
        key = (c.column, c.level)
        deps = [
            (d.column, d.level)
            for d in cells
            if abs(d.column - c.column) <= 1 and d.level < c.level
        ]
        blockers[key] = len(deps)
        for dk in deps:
            dependants.setdefault(dk, []).append(key)
    ready = [(col, lv) for (col, lv), n in blockers.items() if n == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        col, lv = heapq.heappop(ready)
        out.append(col)
        for nxt in dependants.get((col, lv), ()):
            blockers[nxt] -= 1
            if blockers[nxt] == 0:
                heapq.heappush(ready, nxt)
    return Word.of(out, heap.n_columns)


def reduce_colored(word: Word) -> Word:
    """Cancel ``g_i`` against ``g_i^{-1}`` wherever commutations bring them together.

    Each incoming letter slides left over letters it commutes with; the
    first letter that blocks it either is its inverse (both vanish) or stays
    put.  Removing a cancelled letter never unblocks anything further left,
    so one pass reaches the irreducible form.
    """
    out: list[Letter] = []
    for letter in word:
        k = len(out) - 1
        while k >= 0 and out[k].commutes_with(letter):
            k -= 1
        if k >= 0 and out[k] == letter.inverse():
            del out[k]
        else:
            out.append(letter)
    return Word(out, getattr(word, "n_generators", None))


def commutation_class(word: Word, limit: int = 100_000) -> set:
    """All words reachable by commuting adjacent letters (brute force)."""
    start = tuple(int(x) for x in word)
    seen = {start}
    frontier = [start]
    while frontier:
        w = frontier.pop()
        for k in range(len(w) - 1):
            a, b = w[k], w[k + 1]
            if abs(abs(a) - abs(b)) >= 2:
                v = w[:k] + (b, a) + w[k + 2 :]
                if v not in seen:
                    seen.add(v)
                    if len(seen) > limit:
                        raise InputDomainError("commutation class too large to enumerate")
                    frontier.append(v)
    return seen
