from __future__ import annotations

import itertools
import random

import pytest

from services.freeprod import FreeProduct
from services.presentations import (
    EliminationError,
    GroupPresentation,
    PresentationError,
    QuotientError,
    SeifertDataError,
    SeifertPiece,
    WellDefinednessError,
    apply_hom,
    canonical_quotient,
    eliminate_generator,
    format_generator_word,
    invert_generator_word,
    parse_generator_word,
    partial_hom,
    quotient_map,
    seifert_presentation,
    symbolic_hom,
)


def _relators(piece: SeifertPiece) -> list[str]:
    return [format_generator_word(relator) for relator in seifert_presentation(piece).relators]


def test_solid_torus_presentation() -> None:
    pres = seifert_presentation(SeifertPiece(boundary_count=1))
    assert pres.generators == ("d1", "h")
    assert _relators(SeifertPiece(boundary_count=1)) == ["d1^1.h^1.d1^-1.h^-1", "d1^1"]


def test_orientable_presentation_with_fibers() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((2, 1), (3, 1)))
    assert seifert_presentation(piece).generators == ("c1", "c2", "d1", "h")
    assert _relators(piece) == [
        "c1^1.h^1.c1^-1.h^-1",
        "c2^1.h^1.c2^-1.h^-1",
        "d1^1.h^1.d1^-1.h^-1",
        "c1^2.h^1",
        "c2^3.h^1",
        "c1^1.c2^1.d1^1",
    ]


def test_orientable_surface_relator_uses_commutators() -> None:
    piece = SeifertPiece(genus=1, fibers=((3, 2),))
    pres = seifert_presentation(piece)
    assert pres.generators == ("a1", "b1", "c1", "h")
    assert format_generator_word(pres.long_relator) == "a1^1.b1^1.a1^-1.b1^-1.c1^1"
    assert "c1^3.h^2" in _relators(piece)


def test_nonorientable_presentation() -> None:
    piece = SeifertPiece(base_orientable=False, genus=1, boundary_count=2)
    relators = _relators(piece)
    assert "a1^1.h^1.a1^-1.h^1" in relators
    assert relators[-1] == "a1^2.d1^1.d2^1"
    assert seifert_presentation(piece).generators == ("a1", "d1", "d2", "h")


def test_nonorientable_fiber_signs() -> None:
    piece = SeifertPiece(base_orientable=False, genus=2, fibers=((3, 1), (5, 2)), fiber_signs=(1, -1))
    relators = _relators(piece)
    assert "c1^1.h^1.c1^-1.h^-1" in relators
    assert "c2^1.h^1.c2^-1.h^1" in relators
    assert relators[-1] == "a1^2.a2^2.c1^1.c2^1"


@pytest.mark.parametrize(
    "orientable,genus,boundary,fibers",
    [
        (orientable, genus, boundary, fibers)
        for orientable in (True, False)
        for genus in (0, 1, 2)
        for boundary in (0, 1, 3)
        for fibers in ((), ((2, 1),), ((3, 1), (5, 2)))
        if orientable or genus >= 1
    ],
)
def test_relator_count_formula(orientable: bool, genus: int, boundary: int, fibers: tuple) -> None:
    piece = SeifertPiece(base_orientable=orientable, genus=genus, boundary_count=boundary, fibers=fibers)
    pres = seifert_presentation(piece)
    p = len(fibers)
    surface = 2 * genus if orientable else genus
    assert len(pres.relators) == (surface + p + boundary) + p + 1
    assert len(pres.generators) == surface + p + boundary + 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"fibers": ((3, 3),)},
        {"fibers": ((3, 0),)},
        {"fibers": ((1, 0),)},
        {"base_orientable": False, "genus": 0},
        {"fibers": ((3, 1),), "fiber_signs": (1,)},
        {"base_orientable": False, "genus": 1, "fibers": ((3, 1),), "fiber_signs": (1, 1)},
        {"base_orientable": False, "genus": 1, "fibers": ((3, 1),), "fiber_signs": (2,)},
        {"boundary_count": -1},
    ],
)
def test_invalid_seifert_data(kwargs: dict) -> None:
    with pytest.raises(SeifertDataError):
        SeifertPiece(**kwargs)


def test_piece_counts() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((2, 1), (3, 1), (5, 1)))
    assert piece.p == 3
    assert piece.p_large == 2
    assert piece.multiplicities == (2, 3, 5)
    assert piece.deltas == (1, 1, 1)
    assert piece.fibration_orientable


def test_generator_word_syntax() -> None:
    assert parse_generator_word("c1^1.c2^-2") == (("c1", 1), ("c2", -2))
    assert parse_generator_word("c1") == (("c1", 1),)
    assert parse_generator_word("1") == ()
    assert format_generator_word(()) == "1"
    assert invert_generator_word((("c1", 1), ("c2", -2))) == (("c2", 2), ("c1", -1))
    with pytest.raises(PresentationError):
        parse_generator_word("c1^")
    with pytest.raises(PresentationError):
        parse_generator_word("c1^0")


def test_presentation_rejects_undeclared_symbols() -> None:
    with pytest.raises(PresentationError):
        GroupPresentation(("x",), ((("y", 1),),))


def test_two_curves_quotient_is_well_defined() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((3, 1), (3, 1), (3, 1)))
    hom = canonical_quotient(piece, ("c1", "c2", "c3"), "d1")
    assert hom.verified
    assert hom.codomain.format() == "Z3*Z3*Z3"
    assert hom.image_of("d1").format() == "c3^2.c2^2.c1^2"
    assert hom.image_of("h").is_identity
    assert hom.kept == ("c1", "c2", "c3", "d1")


def test_nonorientable_quotient_onto_free_group() -> None:
    piece = SeifertPiece(base_orientable=False, genus=1, boundary_count=2)
    hom = canonical_quotient(piece, ("d1", "a1"), "d2")
    assert hom.verified
    assert hom.codomain.format() == "d1=Z*a1=Z"
    assert hom.image_of("d2").format() == "d1^-1.a1^-2"


def test_wrong_image_is_reported() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((3, 1), (5, 1), (7, 1)))
    pres = seifert_presentation(piece)
    codomain = FreeProduct.parse("c1=Z3*c2=Z5*c3=Z7")
    images = {"c1": "c2^1", "c2": "c2^1", "c3": "c3^1"}
    hom = quotient_map(pres, ("c1", "c2", "c3"), codomain, images, strict=False)
    assert not hom.verified
    assert (("c1", 3), ("h", 1)) in hom.failures
    with pytest.raises(WellDefinednessError) as excinfo:
        quotient_map(pres, ("c1", "c2", "c3"), codomain, images)
    assert excinfo.value.relator == (("c1", 3), ("h", 1))


def test_quotient_map_guards() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((3, 1), (3, 1)))
    pres = seifert_presentation(piece)
    codomain = FreeProduct.parse("c1=Z3*c2=Z3")
    with pytest.raises(QuotientError):
        quotient_map(pres, ("c1", "zz"), codomain, {"c1": "c1^1"})
    with pytest.raises(QuotientError):
        quotient_map(pres, ("c1", "c2"), codomain, {"c1": "c1^1"})
    with pytest.raises(QuotientError):
        quotient_map(pres, ("c1",), codomain, {"c1": "c1^1", "c2": "c2^1"})


def test_eliminate_generator_examples() -> None:
    pres = GroupPresentation(("x", "y"), ((("x", 1), ("y", -1)),))
    codomain = FreeProduct.parse("x=Z")
    hom = eliminate_generator(partial_hom(pres, codomain, {"x": "x^1"}), pres.long_relator, "y")
    assert hom.verified
    assert hom.image_of("y").format() == "x^1"


def test_eliminate_generator_rejects_unsolvable_relators() -> None:
    pres = GroupPresentation(("c1", "d1"), ((("c1", 2), ("d1", 1), ("c1", 1)),))
    codomain = FreeProduct.parse("d1=Z")
    hom = partial_hom(pres, codomain, {"d1": "d1^1"})
    with pytest.raises(EliminationError):
        eliminate_generator(hom, (("c1", 2),), "c1")
    with pytest.raises(EliminationError):
        eliminate_generator(hom, pres.long_relator, "c1")
    with pytest.raises(EliminationError):
        eliminate_generator(hom, pres.long_relator, "x9")


def test_apply_hom() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((3, 1), (4, 1), (5, 1)))
    hom = canonical_quotient(piece, ("c1", "c2", "c3"), "d1")
    assert apply_hom(hom, (("c1", 1), ("c2", 2), ("c3", 1))).format() == "c1^1.c2^2.c3^1"
    product = hom.codomain.parse_word("c1^1.c2^1.c3^1")
    assert apply_hom(hom, (("h", 2), ("d1", 3))) == product ** -3
    assert apply_hom(hom, ()).is_identity
    with pytest.raises(QuotientError):
        apply_hom(hom, (("zz", 1),))


def test_apply_hom_requires_verified_hom() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((3, 1), (3, 1)))
    pres = seifert_presentation(piece)
    hom = partial_hom(pres, FreeProduct.parse("c1=Z3"), {"c1": "c1^1"})
    with pytest.raises(QuotientError):
        apply_hom(hom, (("c1", 1),))


def test_apply_hom_is_multiplicative() -> None:
    piece = SeifertPiece(boundary_count=2, fibers=((3, 1), (2, 1)))
    hom = canonical_quotient(piece, ("c1", "c2", "d1"), "d2")
    symbols = piece.generators
    rng = random.Random(5)
    for _ in range(100):
        u = tuple((rng.choice(symbols), rng.choice((-2, -1, 1, 2))) for _ in range(rng.randint(0, 4)))
        v = tuple((rng.choice(symbols), rng.choice((-2, -1, 1, 2))) for _ in range(rng.randint(0, 4)))
        assert apply_hom(hom, u + v) == apply_hom(hom, u) * apply_hom(hom, v)


def test_canonical_recipes_always_verify() -> None:
    for boundary, p in itertools.product(range(1, 5), range(0, 4)):
        if not 2 <= boundary + p <= 6:
            continue
        fibers = tuple((alpha, 1) for alpha in (2, 3, 5)[:p])
        piece = SeifertPiece(boundary_count=boundary, fibers=fibers)
        kept = piece.fiber_generators + piece.boundary_generators[:-1]
        assert canonical_quotient(piece, kept, piece.boundary_generators[-1]).verified
    for boundary in range(2, 5):
        piece = SeifertPiece(base_orientable=False, genus=1, boundary_count=boundary, fibers=((3, 1),))
        assert canonical_quotient(piece, ("d1", "a1"), "d2").verified


def test_canonical_quotient_rejects_fiber_class() -> None:
    piece = SeifertPiece(boundary_count=1, fibers=((3, 1),))
    with pytest.raises(QuotientError):
        canonical_quotient(piece, ("h",))


def test_symbolic_hom() -> None:
    hom = symbolic_hom(("l", "h"))
    assert hom.verified
    assert hom.codomain.format() == "l=Z*h=Z"
    assert apply_hom(hom, (("l", 1), ("h", 1))).format() == "l^1.h^1"
