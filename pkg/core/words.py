#!/usr/bin/env python3
"""
Free Semigroup Words
Word values, graded enumeration, prefix/suffix splits and multidegree classes.

Generators are 0-indexed: letter i stands for g_{i+1}. The empty word is the
identity g_0. Graded-lex order (length first, then letters) is the basis
order of every matrix built on top of this module.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache, total_ordering
from math import factorial
from typing import Iterable, Iterator, List, Sequence, Tuple

from .errors import ValidationError

logger = logging.getLogger(__name__)


@total_ordering
@dataclass(frozen=True)
class Word:
    """An element of the free semigroup on n generators"""
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x < 0 for x in letters):
            raise ValidationError(f"negative letter in {list(letters)}", field="word")
        object.__setattr__(self, 'letters', letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item])
        return self.letters[item]

    def __add__(self, other: 'Word') -> 'Word':
        return Word(self.letters + other.letters)

    def __lt__(self, other: 'Word') -> bool:
        return self.sort_key < other.sort_key

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (len(self.letters), self.letters)

    @property
    def is_empty(self) -> bool:
        return not self.letters

    def reverse(self) -> 'Word':
        return Word(self.letters[::-1])

    def check_alphabet(self, n: int) -> 'Word':
        """Raise if any letter is outside {0, ..., n-1}"""
        if any(x >= n for x in self.letters):
            raise ValidationError(
                f"letter out of range for n={n} in {list(self.letters)}", field="word")
        return self

    def to_json(self) -> List[int]:
        return list(self.letters)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> 'Word':
        if not isinstance(data, (list, tuple)) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in data):
            raise ValidationError(f"word must be a list of integers, got {data!r}", field="word")
        return cls(tuple(data))

    def __str__(self) -> str:
        if not self.letters:
            return 'g0'
        return ''.join(f"g{x + 1}" for x in self.letters)


EMPTY = Word(())


def word(*letters: int) -> Word:
    """Shorthand constructor: word(0, 1) is g1g2"""
    return Word(tuple(letters))


def word_count(n: int, m: int) -> int:
    """Number of words of length <= m over n letters"""
    return sum(n ** k for k in range(m + 1))


def words_of_length(n: int, k: int) -> List[Word]:
    return [Word(p) for p in itertools.product(range(n), repeat=k)]


def enumerate_words(n: int, m: int) -> List[Word]:
    """All words of length <= m in graded-lex order, empty word first"""
    if n < 1:
        raise ValidationError(f"generator count must be >= 1, got {n}", field="n")
    if m < 0:
        raise ValidationError(f"max length must be >= 0, got {m}", field="m")
    result: List[Word] = []
    for k in range(m + 1):
        result.extend(words_of_length(n, k))
    return result


def prefix_splits(gamma: Word) -> List[Tuple[Word, Word]]:
    """Pairs (beta, alpha) with beta + alpha == gamma and |beta| >= 1, by |beta| ascending"""
    if gamma.is_empty:
        raise ValidationError("prefix splits need a non-empty word", field="word")
    return [(gamma[:k], gamma[k:]) for k in range(1, len(gamma) + 1)]


def suffix_splits(gamma: Word) -> List[Tuple[Word, Word]]:
    """Pairs (alpha, beta) with alpha + beta == gamma and |beta| >= 1, by |beta| ascending"""
    if gamma.is_empty:
        raise ValidationError("suffix splits need a non-empty word", field="word")
    size = len(gamma)
    return [(gamma[:size - k], gamma[size - k:]) for k in range(1, size + 1)]


def multidegree(w: Word, n: int) -> Tuple[int, ...]:
    counts = [0] * n
    for x in w:
        counts[x] += 1
    return tuple(counts)


@dataclass(frozen=True)
class DegreeClass:
    """Words sharing one letter-count histogram"""
    multidegree: Tuple[int, ...]
    members: Tuple[Word, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def total_degree(self) -> int:
        return sum(self.multidegree)

    def multinomial(self) -> int:
        result = factorial(self.total_degree)
        for k in self.multidegree:
            result //= factorial(k)
        return result


@lru_cache(maxsize=None)
def _class_members(k: Tuple[int, ...]) -> Tuple[Tuple[int, ...], ...]:
    if sum(k) == 0:
        return ((),)
    members = []
    for i, count in enumerate(k):
        if count == 0:
            continue
        rest = k[:i] + (count - 1,) + k[i + 1:]
        members.extend((i,) + tail for tail in _class_members(rest))
    return tuple(members)


def degree_class(k: Iterable[int]) -> DegreeClass:
    """All words with letter counts k, in lex order"""
    k = tuple(int(x) for x in k)
    if not k:
        raise ValidationError("multidegree needs at least one component", field="k")
    if any(x < 0 for x in k):
        raise ValidationError(f"multidegree components must be >= 0, got {k}", field="k")
    return DegreeClass(k, tuple(Word(p) for p in _class_members(k)))


def multidegrees(n: int, m: int) -> List[Tuple[int, ...]]:
    """Multidegrees with total <= m, graded then reverse-lex so (m,0,..) precedes (0,..,m)"""
    result = []
    for total in range(m + 1):
        level = [k for k in itertools.product(range(total + 1), repeat=n) if sum(k) == total]
        level.sort(reverse=True)
        result.extend(level)
    return result
