"""Normal forms and conjugacy in free products of cyclic groups."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

logger = logging.getLogger(__name__)

INFINITE = 0

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_FACTOR_RE = re.compile(r"Z(\d*)")
_TOKEN_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?")


class FreeProductError(ValueError):
    pass


class Letter(NamedTuple):
    factor_index: int
    exponent: int


@dataclass(frozen=True)
class CyclicFactor:
    name: str
    order: int = INFINITE

    def __post_init__(self) -> None:
        if not _NAME_RE.fullmatch(self.name):
            raise FreeProductError(f"Invalid factor name: {self.name!r}")
        if self.order != INFINITE and self.order < 2:
            raise FreeProductError(f"Factor {self.name} must have order 0 (infinite) or at least 2, got {self.order}")

    @property
    def is_finite(self) -> bool:
        return self.order != INFINITE

    def canonical_exponent(self, exponent: int) -> int:
        if self.order == INFINITE:
            return exponent
        return exponent % self.order

    def exponent_choices(self, bound: int) -> tuple[int, ...]:
        if self.is_finite:
            return tuple(range(1, self.order))
        return tuple(e for e in range(-bound, bound + 1) if e != 0)

    def format(self) -> str:
        return f"Z{self.order}" if self.is_finite else "Z"


@dataclass(frozen=True)
class FreeProduct:
    factors: tuple[CyclicFactor, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise FreeProductError("A free product needs at least one factor")
        names = [factor.name for factor in self.factors]
        if len(set(names)) != len(names):
            raise FreeProductError(f"Factor names must be distinct: {names}")

    @classmethod
    def of_orders(cls, *orders: int) -> "FreeProduct":
        return cls(tuple(CyclicFactor(f"c{position}", order) for position, order in enumerate(orders, start=1)))

    @classmethod
    def named(cls, pairs: Iterable[tuple[str, int]]) -> "FreeProduct":
        return cls(tuple(CyclicFactor(name, order) for name, order in pairs))

    @classmethod
    def parse(cls, text: str) -> "FreeProduct":
        """Parse `Z3*Z5*Z`; factors may be named as `x=Z3`."""
        factors: list[CyclicFactor] = []
        for position, part in enumerate(text.replace(" ", "").split("*"), start=1):
            name, sep, body = part.rpartition("=")
            match = _FACTOR_RE.fullmatch(body)
            if match is None:
                raise FreeProductError(f"Invalid factor {part!r} in group {text!r}")
            digits = match.group(1)
            factors.append(CyclicFactor(name if sep else f"c{position}", int(digits) if digits else INFINITE))
        return cls(tuple(factors))

    def format(self) -> str:
        positional = all(factor.name == f"c{position}" for position, factor in enumerate(self.factors, start=1))
        if positional:
            return "*".join(factor.format() for factor in self.factors)
        return "*".join(f"{factor.name}={factor.format()}" for factor in self.factors)

    def __str__(self) -> str:
        return self.format()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(factor.name for factor in self.factors)

    def index_of(self, name: str) -> int:
        for index, factor in enumerate(self.factors):
            if factor.name == name:
                return index
        raise FreeProductError(f"Unknown factor {name!r} in {self.format()}")

    @property
    def identity(self) -> "NFWord":
        return NFWord(self, ())

    def letter(self, name: str, exponent: int = 1) -> "NFWord":
        return reduce(self, [(self.index_of(name), exponent)])

    def word(self, raw: Iterable[tuple[int, int]]) -> "NFWord":
        return reduce(self, raw)

    def parse_word(self, text: str) -> "NFWord":
        text = text.strip()
        if text in ("", "1"):
            return self.identity
        raw: list[tuple[int, int]] = []
        for token in text.split("."):
            match = _TOKEN_RE.fullmatch(token)
            if match is None:
                raise FreeProductError(f"Invalid letter {token!r} in word {text!r}")
            exponent = int(match.group(2)) if match.group(2) is not None else 1
            raw.append((self.index_of(match.group(1)), exponent))
        return reduce(self, raw)


@dataclass(frozen=True)
class NFWord:
    group: FreeProduct
    letters: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        letters = tuple(Letter(*letter) for letter in self.letters)
        object.__setattr__(self, "letters", letters)
        previous = None
        for letter in letters:
            if not 0 <= letter.factor_index < len(self.group.factors):
                raise FreeProductError(f"Invalid factor index {letter.factor_index}")
            factor = self.group.factors[letter.factor_index]
            if letter.exponent == 0 or factor.canonical_exponent(letter.exponent) != letter.exponent:
                raise FreeProductError(f"Exponent {letter.exponent} is not canonical for {factor.name}")
            if letter.factor_index == previous:
                raise FreeProductError("Adjacent letters must come from different factors")
            previous = letter.factor_index

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __mul__(self, other: "NFWord") -> "NFWord":
        return multiply(self, other)

    def __invert__(self) -> "NFWord":
        return inverse(self)

    def __pow__(self, power: int) -> "NFWord":
        return power_of(self, power)

    def format(self) -> str:
        if not self.letters:
            return "1"
        names = self.group.names
        return ".".join(f"{names[letter.factor_index]}^{letter.exponent}" for letter in self.letters)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class CyclicWord:
    group: FreeProduct
    letters: tuple[Letter, ...] = ()

    def as_word(self) -> NFWord:
        return NFWord(self.group, self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def format(self) -> str:
        return f"({self.as_word().format()})"


@dataclass(frozen=True)
class ConjugacyResult:
    conjugate: bool
    conjugator: NFWord | None = None

    def __bool__(self) -> bool:
        return self.conjugate


def _require_same_group(*words: NFWord) -> FreeProduct:
    group = words[0].group
    for word in words[1:]:
        if word.group != group:
            raise FreeProductError(f"Group mismatch: {group.format()} vs {word.group.format()}")
    return group


def reduce(group: FreeProduct, raw: Iterable[tuple[int, int]]) -> NFWord:
    stack: list[Letter] = []
    count = len(group.factors)
    for factor_index, exponent in raw:
        if not 0 <= factor_index < count:
            raise FreeProductError(f"Invalid factor index {factor_index} for {group.format()}")
        factor = group.factors[factor_index]
        exponent = factor.canonical_exponent(exponent)
        if stack and stack[-1].factor_index == factor_index:
            exponent = factor.canonical_exponent(stack.pop().exponent + exponent)
        if exponent:
            stack.append(Letter(factor_index, exponent))
    return NFWord(group, tuple(stack))


def multiply(a: NFWord, b: NFWord) -> NFWord:
    group = _require_same_group(a, b)
    return reduce(group, a.letters + b.letters)


def inverse(w: NFWord) -> NFWord:
    return reduce(w.group, [(letter.factor_index, -letter.exponent) for letter in reversed(w.letters)])


def power_of(w: NFWord, power: int) -> NFWord:
    base = w if power >= 0 else inverse(w)
    return reduce(w.group, base.letters * abs(power))


def rotate(w: NFWord, k: int) -> NFWord:
    if not w.letters:
        return w
    k %= len(w.letters)
    return reduce(w.group, w.letters[k:] + w.letters[:k])


def cyclically_reduce(w: NFWord) -> tuple[CyclicWord, NFWord]:
    """Return the canonical cyclic word of `w` and `u` with w = u.cw.u^-1."""
    group = w.group
    letters = list(w.letters)
    peeled: list[Letter] = []
    while len(letters) >= 2 and letters[0].factor_index == letters[-1].factor_index:
        first, last = letters[0], letters[-1]
        merged = group.factors[first.factor_index].canonical_exponent(last.exponent + first.exponent)
        peeled.append(first)
        letters = letters[1:-1] + ([Letter(first.factor_index, merged)] if merged else [])
    shift = 0
    if len(letters) > 1:
        shift = min(range(len(letters)), key=lambda k: letters[k:] + letters[:k])
    rotated = tuple(letters[shift:] + letters[:shift])
    conjugator = reduce(group, peeled + letters[:shift])
    return CyclicWord(group, rotated), conjugator


def are_conjugate(w1: NFWord, w2: NFWord) -> ConjugacyResult:
    _require_same_group(w1, w2)
    cw1, u1 = cyclically_reduce(w1)
    cw2, u2 = cyclically_reduce(w2)
    if cw1.letters != cw2.letters:
        return ConjugacyResult(False)
    return ConjugacyResult(True, multiply(u2, inverse(u1)))


def conjugate_to_power(w: NFWord, base: NFWord) -> int | None:
    """Find s with w conjugate to base^s.

    Returns 0 for the identity word and follows the `s = 1` convention when
    both words are trivial.
    """
    _require_same_group(w, base)
    if base.is_identity:
        return 1 if w.is_identity else None
    if w.is_identity:
        return 0
    cw, _ = cyclically_reduce(w)
    cb, _ = cyclically_reduce(base)
    if len(cb) == 1:
        if len(cw) != 1:
            return None
        (base_index, base_exponent), (word_index, word_exponent) = cb.letters[0], cw.letters[0]
        if base_index != word_index:
            return None
        factor = w.group.factors[base_index]
        if factor.is_finite:
            candidates = [s for k in range(1, factor.order) for s in (k, -k)]
        elif word_exponent % base_exponent:
            return None
        else:
            candidates = [word_exponent // base_exponent]
    else:
        if len(cw) % len(cb):
            return None
        quotient = len(cw) // len(cb)
        candidates = [quotient, -quotient]
    for s in candidates:
        if are_conjugate(w, power_of(base, s)):
            return s
    return None


def conjugate_into_cyclic_subgroup_family(w: NFWord, bases: Sequence[NFWord]) -> tuple[NFWord, int] | None:
    for base in bases:
        s = conjugate_to_power(w, base)
        if s is not None:
            return base, s
    return None


def conjugate_into_factor(w: NFWord) -> int | None:
    """Index of a factor containing a conjugate of `w`, or None."""
    cw, _ = cyclically_reduce(w)
    if not cw.letters:
        return 0
    if len(cw) == 1:
        return cw.letters[0].factor_index
    return None


def _letter_choices(group: FreeProduct, exponent_bound: int) -> tuple[Letter, ...]:
    return tuple(
        Letter(index, exponent)
        for index, factor in enumerate(group.factors)
        for exponent in factor.exponent_choices(exponent_bound)
    )


def _sequences(choices: Sequence[Letter], length: int, prefix: tuple[Letter, ...] = ()) -> Iterator[tuple[Letter, ...]]:
    # Depth first, so memory stays proportional to the word length.
    if len(prefix) == length:
        yield prefix
        return
    for letter in choices:
        if prefix and prefix[-1].factor_index == letter.factor_index:
            continue
        yield from _sequences(choices, length, prefix + (letter,))


def _join(group: FreeProduct, left: tuple[Letter, ...], right: tuple[Letter, ...]) -> tuple[Letter, ...]:
    """Product of two normal forms; cancellation only happens at the seam."""
    i, j = len(left), 0
    merged: tuple[Letter, ...] = ()
    while i and j < len(right) and left[i - 1].factor_index == right[j].factor_index:
        index = right[j].factor_index
        exponent = group.factors[index].canonical_exponent(left[i - 1].exponent + right[j].exponent)
        i, j = i - 1, j + 1
        if exponent:
            merged = (Letter(index, exponent),)
            break
    return left[:i] + merged + right[j:]


def enumerate_reduced_words(group: FreeProduct, max_len: int, exponent_bound: int = 1) -> Iterator[NFWord]:
    """Yield every reduced word up to `max_len`, by length then lexicographically."""
    choices = _letter_choices(group, exponent_bound)
    for length in range(max_len + 1):
        for letters in _sequences(choices, length):
            yield NFWord(group, letters)


def default_exponent_bound(*words: NFWord) -> int:
    largest = 0
    for word in words:
        for letter in word.letters:
            if not word.group.factors[letter.factor_index].is_finite:
                largest = max(largest, abs(letter.exponent))
    return max(1, 2 * largest)


def oracle_conjugate_search(
    w1: NFWord,
    w2: NFWord,
    max_len: int,
    *,
    exponent_bound: int | None = None,
) -> NFWord | None:
    group = _require_same_group(w1, w2)
    if max_len < 0:
        raise FreeProductError("max_len must be non-negative")
    bound = exponent_bound if exponent_bound is not None else default_exponent_bound(w1, w2)
    choices = _letter_choices(group, bound)
    for length in range(max_len + 1):
        for letters in _sequences(choices, length):
            # u.w1.u^-1 == w2 exactly when u.w1 == w2.u
            if _join(group, letters, w1.letters) == _join(group, w2.letters, letters):
                return NFWord(group, letters)
    logger.debug("No conjugator up to length %d for %s and %s", max_len, w1, w2)
    return None
