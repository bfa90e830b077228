"""Seifert fundamental-group presentations and quotient homomorphisms onto free products."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from services.freeprod import CyclicFactor, FreeProduct, FreeProductError, NFWord, INFINITE

logger = logging.getLogger(__name__)

GeneratorWord = tuple[tuple[str, int], ...]

FIBER_SYMBOL = "h"

_SYMBOL_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?")


class PresentationError(ValueError):
    pass


class SeifertDataError(PresentationError):
    pass


class EliminationError(PresentationError):
    pass


class QuotientError(RuntimeError):
    pass


class WellDefinednessError(QuotientError):
    def __init__(self, relator: GeneratorWord, image: NFWord):
        self.relator = relator
        self.image = image
        super().__init__(f"Relator {format_generator_word(relator)} maps to {image.format()}, not the identity")


def format_generator_word(word: GeneratorWord) -> str:
    if not word:
        return "1"
    return ".".join(f"{symbol}^{exponent}" for symbol, exponent in word)


def parse_generator_word(text: str) -> GeneratorWord:
    text = text.strip()
    if text in ("", "1"):
        return ()
    letters: list[tuple[str, int]] = []
    for token in text.split("."):
        match = _SYMBOL_RE.fullmatch(token)
        if match is None:
            raise PresentationError(f"Invalid letter {token!r} in word {text!r}")
        exponent = int(match.group(2)) if match.group(2) is not None else 1
        if exponent == 0:
            raise PresentationError(f"Zero exponent in word {text!r}")
        letters.append((match.group(1), exponent))
    return tuple(letters)


def invert_generator_word(word: GeneratorWord) -> GeneratorWord:
    return tuple((symbol, -exponent) for symbol, exponent in reversed(word))


def _commutator_with_fiber(symbol: str, fiber_exponent: int) -> GeneratorWord:
    return ((symbol, 1), (FIBER_SYMBOL, 1), (symbol, -1), (FIBER_SYMBOL, fiber_exponent))


@dataclass(frozen=True)
class SeifertPiece:
    """Seifert invariants of one piece.

    `genus` counts handles for an orientable base and crosscaps otherwise.
    `fiber_signs` holds the local orientation signs of the singular fibers
    and is only meaningful over a nonorientable base.
    """

    base_orientable: bool = True
    genus: int = 0
    boundary_count: int = 0
    fibers: tuple[tuple[int, int], ...] = ()
    fiber_signs: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "fibers", tuple((int(a), int(b)) for a, b in self.fibers))
        if self.fiber_signs is not None:
            object.__setattr__(self, "fiber_signs", tuple(int(sign) for sign in self.fiber_signs))
        if self.genus < 0 or self.boundary_count < 0:
            raise SeifertDataError("genus and boundary count must be non-negative")
        if not self.base_orientable and self.genus < 1:
            raise SeifertDataError("a nonorientable base needs at least one crosscap")
        for alpha, beta in self.fibers:
            if alpha < 2:
                raise SeifertDataError(f"fiber multiplicity must be at least 2, got ({alpha},{beta})")
            if not 0 < beta < alpha:
                raise SeifertDataError(f"fiber ({alpha},{beta}) needs 0 < beta < alpha")
        if self.fiber_signs is not None:
            if self.base_orientable:
                raise SeifertDataError("fiber signs only apply to a nonorientable base")
            if len(self.fiber_signs) != len(self.fibers):
                raise SeifertDataError("one sign is required per singular fiber")
            if any(sign not in (1, -1) for sign in self.fiber_signs):
                raise SeifertDataError("fiber signs must be +1 or -1")

    @property
    def fibration_orientable(self) -> bool:
        return self.base_orientable

    @property
    def p(self) -> int:
        return len(self.fibers)

    @property
    def p_large(self) -> int:
        return sum(1 for alpha, _ in self.fibers if alpha > 2)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(alpha for alpha, _ in self.fibers)

    @property
    def deltas(self) -> tuple[int, ...]:
        if self.fiber_signs is not None:
            return self.fiber_signs
        return (1,) * len(self.fibers)

    @property
    def surface_generators(self) -> tuple[str, ...]:
        names = tuple(f"a{i}" for i in range(1, self.genus + 1))
        if self.base_orientable:
            names += tuple(f"b{i}" for i in range(1, self.genus + 1))
        return names

    @property
    def fiber_generators(self) -> tuple[str, ...]:
        return tuple(f"c{i}" for i in range(1, self.p + 1))

    @property
    def boundary_generators(self) -> tuple[str, ...]:
        return tuple(f"d{i}" for i in range(1, self.boundary_count + 1))

    @property
    def generators(self) -> tuple[str, ...]:
        return self.surface_generators + self.fiber_generators + self.boundary_generators + (FIBER_SYMBOL,)

    def fiber_of(self, symbol: str) -> tuple[int, int]:
        return self.fibers[self.fiber_generators.index(symbol)]


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    relators: tuple[GeneratorWord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(tuple(relator) for relator in self.relators))
        declared = set(self.generators)
        if len(declared) != len(self.generators):
            raise PresentationError(f"Duplicate generators in {self.generators}")
        for relator in self.relators:
            for symbol, _ in relator:
                if symbol not in declared:
                    raise PresentationError(f"Relator {format_generator_word(relator)} uses undeclared {symbol}")

    @property
    def long_relator(self) -> GeneratorWord:
        return self.relators[-1]

    def format(self) -> str:
        relators = ", ".join(format_generator_word(relator) for relator in self.relators)
        return f"< {', '.join(self.generators)} | {relators} >"


def seifert_presentation(piece: SeifertPiece) -> GroupPresentation:
    relators: list[GeneratorWord] = []
    if piece.base_orientable:
        for symbol in piece.generators[:-1]:
            relators.append(_commutator_with_fiber(symbol, -1))
    else:
        for symbol in piece.surface_generators:
            relators.append(_commutator_with_fiber(symbol, 1))
        for symbol, delta in zip(piece.fiber_generators, piece.deltas):
            relators.append(_commutator_with_fiber(symbol, -delta))
        for symbol in piece.boundary_generators:
            relators.append(_commutator_with_fiber(symbol, -1))
    for symbol, (alpha, beta) in zip(piece.fiber_generators, piece.fibers):
        relators.append(((symbol, alpha), (FIBER_SYMBOL, beta)))
    long_relator: list[tuple[str, int]] = []
    if piece.base_orientable:
        for i in range(1, piece.genus + 1):
            long_relator.extend([(f"a{i}", 1), (f"b{i}", 1), (f"a{i}", -1), (f"b{i}", -1)])
    else:
        long_relator.extend((f"a{i}", 2) for i in range(1, piece.genus + 1))
    long_relator.extend((symbol, 1) for symbol in piece.fiber_generators)
    long_relator.extend((symbol, 1) for symbol in piece.boundary_generators)
    relators.append(tuple(long_relator))
    return GroupPresentation(piece.generators, tuple(relators))


@dataclass(frozen=True)
class QuotientHom:
    domain: GroupPresentation
    codomain: FreeProduct
    images: tuple[tuple[str, NFWord], ...]
    verified: bool = False
    failures: tuple[GeneratorWord, ...] = field(default=())

    def image_of(self, symbol: str) -> NFWord:
        for name, image in self.images:
            if name == symbol:
                return image
        raise QuotientError(f"Generator {symbol} has no image")

    @property
    def kept(self) -> tuple[str, ...]:
        return tuple(name for name, image in self.images if not image.is_identity)

    def image_map(self) -> dict[str, str]:
        return {name: image.format() for name, image in self.images}


def _coerce_image(codomain: FreeProduct, value: NFWord | str) -> NFWord:
    if isinstance(value, str):
        try:
            return codomain.parse_word(value)
        except FreeProductError as exc:
            raise QuotientError(str(exc)) from exc
    if value.group != codomain:
        raise QuotientError(f"Image {value.format()} lives in {value.group.format()}, not {codomain.format()}")
    return value


def _evaluate(codomain: FreeProduct, images: Mapping[str, NFWord], word: GeneratorWord) -> NFWord:
    result = codomain.identity
    for symbol, exponent in word:
        if symbol not in images:
            raise QuotientError(f"Generator {symbol} has no image")
        result = result * (images[symbol] ** exponent)
    return result


def quotient_map(
    pres: GroupPresentation,
    kept: Iterable[str],
    codomain: FreeProduct,
    images: Mapping[str, NFWord | str],
    *,
    strict: bool = True,
) -> QuotientHom:
    """Build the homomorphism that keeps `kept` and sends every other generator to 1.

    Relators are checked by substitution. With `strict` a failing relator raises
    WellDefinednessError; otherwise the hom comes back unverified with the
    failing relators listed.
    """
    kept = tuple(kept)
    declared = set(pres.generators)
    for symbol in (*kept, *images):
        if symbol not in declared:
            raise QuotientError(f"Unknown generator {symbol}")
    resolved: dict[str, NFWord] = {}
    for symbol in pres.generators:
        if symbol in kept:
            if symbol not in images:
                raise QuotientError(f"Kept generator {symbol} has no image")
            resolved[symbol] = _coerce_image(codomain, images[symbol])
        else:
            image = _coerce_image(codomain, images.get(symbol, codomain.identity))
            if not image.is_identity:
                raise QuotientError(f"Generator {symbol} is not kept but maps to {image.format()}")
            resolved[symbol] = image
    failures: list[GeneratorWord] = []
    for relator in pres.relators:
        image = _evaluate(codomain, resolved, relator)
        if not image.is_identity:
            if strict:
                raise WellDefinednessError(relator, image)
            failures.append(relator)
    if failures:
        logger.debug("Quotient onto %s fails on %d relators", codomain.format(), len(failures))
    return QuotientHom(
        pres,
        codomain,
        tuple((symbol, resolved[symbol]) for symbol in pres.generators),
        verified=not failures,
        failures=tuple(failures),
    )


def partial_hom(pres: GroupPresentation, codomain: FreeProduct, images: Mapping[str, NFWord | str]) -> QuotientHom:
    """An unverified assignment; unlisted generators map to 1."""
    resolved = {symbol: _coerce_image(codomain, value) for symbol, value in images.items()}
    for symbol in resolved:
        if symbol not in pres.generators:
            raise QuotientError(f"Unknown generator {symbol}")
    return QuotientHom(
        pres,
        codomain,
        tuple((symbol, resolved.get(symbol, codomain.identity)) for symbol in pres.generators),
        verified=False,
    )


def eliminate_generator(hom: QuotientHom, long_relator: GeneratorWord, eliminated: str) -> QuotientHom:
    positions = [index for index, (symbol, _) in enumerate(long_relator) if symbol == eliminated]
    if len(positions) != 1:
        raise EliminationError(f"{eliminated} occurs {len(positions)} times in {format_generator_word(long_relator)}")
    position = positions[0]
    exponent = long_relator[position][1]
    if exponent not in (1, -1):
        raise EliminationError(f"{eliminated} occurs with exponent {exponent}")
    images = dict(hom.images)
    images.pop(eliminated, None)
    before = _evaluate(hom.codomain, images, long_relator[:position])
    after = _evaluate(hom.codomain, images, long_relator[position + 1 :])
    # X e Y = 1 gives e = X^-1 Y^-1; X e^-1 Y = 1 gives e = Y X.
    solved = ~before * ~after if exponent == 1 else after * before
    images[eliminated] = solved
    kept = [symbol for symbol in hom.domain.generators if symbol == eliminated or not images[symbol].is_identity]
    logger.debug("Eliminated %s as %s", eliminated, solved.format())
    return quotient_map(hom.domain, kept, hom.codomain, images)


def apply_hom(hom: QuotientHom, word: GeneratorWord) -> NFWord:
    if not hom.verified:
        raise QuotientError("Cannot apply an unverified homomorphism")
    return _evaluate(hom.codomain, dict(hom.images), word)


def canonical_quotient(piece: SeifertPiece, kept: Sequence[str], eliminated: str | None = None) -> QuotientHom:
    """Quotient keeping `kept` as free cyclic factors, optionally solving `eliminated` from the long relator.

    Singular-fiber generators keep their multiplicity as factor order; every
    other kept generator becomes an infinite cyclic factor. The fiber class
    and everything not kept map to 1.
    """
    pres = seifert_presentation(piece)
    fiber_names = piece.fiber_generators
    factors = []
    for symbol in kept:
        if symbol == FIBER_SYMBOL or symbol not in pres.generators:
            raise QuotientError(f"Cannot keep {symbol} in a quotient of this piece")
        order = piece.fiber_of(symbol)[0] if symbol in fiber_names else INFINITE
        factors.append(CyclicFactor(symbol, order))
    codomain = FreeProduct(tuple(factors))
    images = {symbol: codomain.letter(symbol) for symbol in kept}
    if eliminated is None:
        return quotient_map(pres, kept, codomain, images)
    if eliminated in kept:
        raise EliminationError(f"{eliminated} cannot be both kept and eliminated")
    return eliminate_generator(partial_hom(pres, codomain, images), pres.long_relator, eliminated)


def symbolic_hom(symbols: Sequence[str]) -> QuotientHom:
    """Identity map of the free group on `symbols`, used for bookkeeping-only witnesses."""
    pres = GroupPresentation(tuple(symbols), ())
    codomain = FreeProduct(tuple(CyclicFactor(symbol, INFINITE) for symbol in symbols))
    return quotient_map(pres, symbols, codomain, {symbol: codomain.letter(symbol) for symbol in symbols})
