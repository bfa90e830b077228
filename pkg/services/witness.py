"""Witness class pairs, their product expansions, and the two nonvanishing criteria."""
from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from services.freeprod import CyclicFactor, FreeProduct, NFWord, INFINITE, cyclically_reduce
from services.presentations import (
    FIBER_SYMBOL,
    GeneratorWord,
    GroupPresentation,
    QuotientHom,
    SeifertPiece,
    apply_hom,
    canonical_quotient,
    format_generator_word,
    parse_generator_word,
    quotient_map,
    symbolic_hom,
)

logger = logging.getLogger(__name__)

TWO_CURVES = "TwoCurves"
FIGURE_EIGHT = "FigureEight"
NONORIENTABLE_FIGURE_EIGHT = "NonorientableFigureEight"
CLOSED_SEIFERT = "ClosedSeifert"
CONNECTED_SUM = "ConnectedSum"
NONSEPARATING_SPHERE = "NonseparatingSphere"
NONSEPARATING_TORUS = "NonseparatingTorus"
HYPERBOLIC_GLUING = "HyperbolicGluing"

ARGUMENTS = (
    TWO_CURVES,
    FIGURE_EIGHT,
    NONORIENTABLE_FIGURE_EIGHT,
    CLOSED_SEIFERT,
    CONNECTED_SUM,
    NONSEPARATING_SPHERE,
    NONSEPARATING_TORUS,
    HYPERBOLIC_GLUING,
)
PIECE_ARGUMENTS = (TWO_CURVES, FIGURE_EIGHT, NONORIENTABLE_FIGURE_EIGHT, CLOSED_SEIFERT)

MODEL_QUOTIENT = "quotient"
MODEL_FREE_FACTOR = "free-factor"
MODEL_SYMBOLIC = "symbolic"

BASE_DEGREES = {
    "MarkedLoop": 0,
    "VerticalTorusFamily": 1,
    "SphereFamilyComposed": 1,
    "FiberFamily": 3,
    "ConstantLoopCycle": 3,
}


class ArgumentNotApplicable(ValueError):
    pass


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessClass:
    degree: int
    class_word: GeneratorWord
    construction_tag: str
    delta_applied: bool = False

    def __post_init__(self) -> None:
        if self.construction_tag not in BASE_DEGREES:
            raise WitnessError(f"Unknown construction tag {self.construction_tag}")
        expected = BASE_DEGREES[self.construction_tag] + (1 if self.delta_applied else 0)
        if self.degree != expected:
            raise WitnessError(f"{self.construction_tag} classes have degree {expected}, got {self.degree}")


@dataclass(frozen=True)
class ExpansionTerm:
    class_word: GeneratorWord
    sign_tracked: bool = False


@dataclass(frozen=True)
class WitnessContext:
    subject: int
    partner: int | None = None
    generators: tuple[str, ...] = ()
    eliminated: str | None = None
    orders: tuple[int, ...] = ()
    detail: str | None = None


@dataclass(frozen=True)
class WitnessPair:
    a: WitnessClass
    b: WitnessClass
    expansion: tuple[ExpansionTerm, ...]
    argument_id: str
    context: WitnessContext
    hom: QuotientHom
    model: str

    def __post_init__(self) -> None:
        if len(self.expansion) not in (4, 8):
            raise WitnessError(f"An expansion has 4 or 8 terms, got {len(self.expansion)}")

    @property
    def terms(self) -> tuple[GeneratorWord, ...]:
        return tuple(term.class_word for term in self.expansion)


def _terms(templates: Sequence[str], **letters: str) -> tuple[ExpansionTerm, ...]:
    result = []
    for template in templates:
        word: list[tuple[str, int]] = []
        for placeholder, exponent in parse_generator_word(template):
            word.append((letters.get(placeholder, placeholder), exponent))
        result.append(ExpansionTerm(tuple(word)))
    return tuple(result)


TWO_CURVES_TERMS = ("x.y.z.y", "x.y", "y.z", "1", "x.y^2.z", "x.y", "y.z", "1")
FIGURE_EIGHT_TERMS = (
    "x.y.x^-1.y^-1",
    "x^-1.y",
    "x.y^-1",
    "1",
    "x.y^-1.x^-1.y",
    "x^-1.y",
    "x.y^-1",
    "1",
)
CLOSED_SEIFERT_TERMS = ("x.h", "h", "x", "1")
CONNECTED_SUM_TERMS = ("g1.g2.g1.g2", "g1.g2", "g1.g2", "1", "g2.g1.g1.g2", "g2.g1", "g1.g2", "1")
SPHERE_TERMS = ("t.t^2", "t", "t^2", "1")
TORUS_TERMS = ("l.h", "l", "h", "1")
HYPERBOLIC_TERMS = ("h.g1.g2", "h", "g1.g2", "1", "h.g2.g1", "h", "g1.g2", "1")


def _first_free_boundary(piece: SeifertPiece, selected: Iterable[str]) -> str:
    chosen = set(selected)
    for symbol in piece.boundary_generators:
        if symbol not in chosen:
            return symbol
    raise ArgumentNotApplicable("no boundary generator is left to eliminate")


def select_context(argument_id: str, piece: SeifertPiece, subject: int) -> WitnessContext:
    """Pick generators deterministically; boundaries count as multiplicity-zero fibers."""
    if argument_id == TWO_CURVES:
        if not piece.base_orientable:
            raise ArgumentNotApplicable("the two-curves argument needs an orientable base")
        candidates = piece.fiber_generators + piece.boundary_generators
        if len(candidates) < 4:
            raise ArgumentNotApplicable(f"two curves needs p + b >= 4, got {len(candidates)}")
        selected = candidates[:3]
        return WitnessContext(subject, generators=selected, eliminated=_first_free_boundary(piece, selected))
    if argument_id == FIGURE_EIGHT:
        if not piece.base_orientable:
            raise ArgumentNotApplicable("the figure-eight argument needs an orientable base")
        large = sorted(
            (index for index, alpha in enumerate(piece.multiplicities) if alpha > 2),
            key=lambda index: (-piece.multiplicities[index], index),
        )
        candidates = tuple(piece.fiber_generators[index] for index in large) + piece.boundary_generators
        if len(candidates) < 3:
            raise ArgumentNotApplicable(f"figure eight needs p' + b >= 3, got {len(candidates)}")
        selected = tuple(sorted(candidates[:2], key=piece.generators.index))
        return WitnessContext(subject, generators=selected, eliminated=_first_free_boundary(piece, selected))
    if argument_id == NONORIENTABLE_FIGURE_EIGHT:
        if piece.base_orientable or piece.boundary_count < 2:
            raise ArgumentNotApplicable("needs a nonorientable base with at least two boundary tori")
        return WitnessContext(subject, generators=("d1", "d2", "a1"), eliminated="d2")
    if argument_id == CLOSED_SEIFERT:
        if piece.boundary_count or not piece.base_orientable:
            raise ArgumentNotApplicable("needs a closed piece over an orientable base")
        if piece.genus >= 1:
            return WitnessContext(subject, generators=("a1",), detail=MODEL_QUOTIENT)
        if piece.p == 0:
            raise ArgumentNotApplicable("no surface or singular-fiber generator is available")
        return WitnessContext(subject, generators=("c1",), detail=MODEL_SYMBOLIC)
    raise ArgumentNotApplicable(f"{argument_id} does not act on a single Seifert piece")


def _factor_hom(names: Sequence[str], orders: Sequence[int]) -> QuotientHom:
    relators = tuple(((name, order),) for name, order in zip(names, orders) if order != INFINITE)
    pres = GroupPresentation(tuple(names), relators)
    codomain = FreeProduct(tuple(CyclicFactor(name, order) for name, order in zip(names, orders)))
    return quotient_map(pres, names, codomain, {name: codomain.letter(name) for name in names})


def build_witness(argument_id: str, context: WitnessContext, *, piece: SeifertPiece | None = None) -> WitnessPair:
    if argument_id in PIECE_ARGUMENTS and piece is None:
        raise ArgumentNotApplicable(f"{argument_id} needs the Seifert piece it acts on")
    gens = context.generators
    if argument_id == TWO_CURVES:
        x, y, z = _arity(gens, 3)
        hom = canonical_quotient(piece, gens, context.eliminated)
        return WitnessPair(
            WitnessClass(1, ((x, 1), (y, 1)), "VerticalTorusFamily"),
            WitnessClass(1, ((y, 1), (z, 1)), "VerticalTorusFamily"),
            _terms(TWO_CURVES_TERMS, x=x, y=y, z=z),
            argument_id,
            context,
            hom,
            MODEL_QUOTIENT,
        )
    if argument_id in (FIGURE_EIGHT, NONORIENTABLE_FIGURE_EIGHT):
        if argument_id == FIGURE_EIGHT:
            x, y = _arity(gens, 2)
            hom = canonical_quotient(piece, gens, context.eliminated)
        else:
            x, y, surface = _arity(gens, 3)
            if context.eliminated != y:
                raise WitnessError("the second boundary generator is the eliminated one")
            hom = canonical_quotient(piece, (x, surface), y)
        return WitnessPair(
            WitnessClass(1, ((x, 1), (y, -1)), "VerticalTorusFamily"),
            WitnessClass(1, ((x, -1), (y, 1)), "VerticalTorusFamily"),
            _terms(FIGURE_EIGHT_TERMS, x=x, y=y),
            argument_id,
            context,
            hom,
            MODEL_QUOTIENT,
        )
    if argument_id == CLOSED_SEIFERT:
        (x,) = _arity(gens, 1)
        if context.detail == MODEL_QUOTIENT:
            hom, model = canonical_quotient(piece, gens), MODEL_QUOTIENT
        else:
            hom, model = symbolic_hom((x, FIBER_SYMBOL)), MODEL_SYMBOLIC
        return WitnessPair(
            WitnessClass(3, ((FIBER_SYMBOL, 1),), "FiberFamily"),
            WitnessClass(1, ((x, 1),), "MarkedLoop", delta_applied=True),
            _terms(CLOSED_SEIFERT_TERMS, x=x),
            argument_id,
            context,
            hom,
            model,
        )
    if argument_id == CONNECTED_SUM:
        if len(context.orders) != 2 or any(order == 1 or order < 0 for order in context.orders):
            raise WitnessError(f"connected sums model two factor orders, got {context.orders}")
        return WitnessPair(
            WitnessClass(1, (("g1", 1), ("g2", 1)), "SphereFamilyComposed"),
            WitnessClass(1, (("g1", 1), ("g2", 1)), "MarkedLoop", delta_applied=True),
            _terms(CONNECTED_SUM_TERMS),
            argument_id,
            context,
            _factor_hom(("g1", "g2"), context.orders),
            MODEL_FREE_FACTOR,
        )
    if argument_id == NONSEPARATING_SPHERE:
        return WitnessPair(
            WitnessClass(1, (("t", 1),), "SphereFamilyComposed"),
            WitnessClass(1, (("t", 2),), "MarkedLoop", delta_applied=True),
            _terms(SPHERE_TERMS),
            argument_id,
            context,
            _factor_hom(("t",), (INFINITE,)),
            MODEL_QUOTIENT,
        )
    if argument_id == NONSEPARATING_TORUS:
        if context.detail not in ("edge", "piece"):
            raise WitnessError(f"a nonseparating torus comes from an edge or a piece, got {context.detail}")
        return WitnessPair(
            WitnessClass(1, (("l", 1),), "VerticalTorusFamily"),
            WitnessClass(1, ((FIBER_SYMBOL, 1),), "MarkedLoop", delta_applied=True),
            _terms(TORUS_TERMS),
            argument_id,
            context,
            symbolic_hom(("l", FIBER_SYMBOL)),
            MODEL_SYMBOLIC,
        )
    if argument_id == HYPERBOLIC_GLUING:
        if context.partner is None:
            raise WitnessError("hyperbolic gluing needs a neighboring piece")
        return WitnessPair(
            WitnessClass(1, ((FIBER_SYMBOL, 1),), "VerticalTorusFamily"),
            WitnessClass(1, (("g1", 1), ("g2", 1)), "MarkedLoop", delta_applied=True),
            _terms(HYPERBOLIC_TERMS),
            argument_id,
            context,
            symbolic_hom((FIBER_SYMBOL, "g1", "g2")),
            MODEL_SYMBOLIC,
        )
    raise ArgumentNotApplicable(f"unknown argument {argument_id}")


def _arity(gens: tuple[str, ...], count: int) -> tuple[str, ...]:
    if len(gens) != count:
        raise ArgumentNotApplicable(f"expected {count} generators, got {len(gens)}")
    return gens


def _image(word: GeneratorWord, context: QuotientHom | FreeProduct) -> NFWord:
    if isinstance(context, QuotientHom):
        return apply_hom(context, word)
    result = context.identity
    for symbol, exponent in word:
        result = result * context.letter(symbol, exponent)
    return result


def class_key(word: GeneratorWord, context: QuotientHom | FreeProduct) -> tuple:
    cw, _ = cyclically_reduce(_image(word, context))
    return cw.letters


def mod2_survivors(
    terms: Sequence[ExpansionTerm | GeneratorWord], context: QuotientHom | FreeProduct
) -> tuple[GeneratorWord, ...]:
    """One representative, in first-occurrence order, per conjugacy class of odd multiplicity."""
    words = [term.class_word if isinstance(term, ExpansionTerm) else tuple(term) for term in terms]
    keys = [class_key(word, context) for word in words]
    counts = Counter(keys)
    survivors: list[GeneratorWord] = []
    seen: set[tuple] = set()
    for word, key in zip(words, keys):
        if counts[key] % 2 and key not in seen:
            survivors.append(word)
        seen.add(key)
    logger.debug("Survivors mod 2: %s", [format_generator_word(word) for word in survivors])
    return tuple(survivors)


def _pair_key(first: GeneratorWord, second: GeneratorWord) -> frozenset[str]:
    return frozenset((format_generator_word(first), format_generator_word(second)))


def three_distinct_criterion(
    terms: Sequence[ExpansionTerm | GeneratorWord],
    context: QuotientHom | FreeProduct | None = None,
    known_distinct: Iterable[tuple[GeneratorWord, GeneratorWord]] = (),
) -> bool:
    """True when three of the four terms are pairwise distinct classes.

    Distinctness comes from non-conjugate images in `context`, or from
    `known_distinct` pairs established elsewhere.
    """
    words = [term.class_word if isinstance(term, ExpansionTerm) else tuple(term) for term in terms]
    if len(words) != 4:
        raise WitnessError(f"the three-distinct criterion takes 4 terms, got {len(words)}")
    known = {_pair_key(first, second) for first, second in known_distinct}
    keys = [class_key(word, context) for word in words] if context is not None else None

    def distinct(i: int, j: int) -> bool:
        if words[i] == words[j]:
            return False
        if _pair_key(words[i], words[j]) in known:
            return True
        return keys is not None and keys[i] != keys[j]

    return any(
        distinct(i, j) and distinct(i, k) and distinct(j, k) for i, j, k in itertools.combinations(range(4), 3)
    )
