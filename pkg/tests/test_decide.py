from __future__ import annotations

import itertools

import pytest

from loopwitness.constants import (
    CENTRAL_FIBER,
    FINITE_FUNDAMENTAL_GROUP,
    FINITE_GROUP_RULE,
    SCOPE_BETA_VERBATIM,
    SCOPE_FAKE_SPHERE,
    SCOPE_FINITE_SEIFERT,
    SCOPE_GLUING_MAPS,
)
from loopwitness.corpus import CorpusEntry, build_corpus
from services.certify import (
    NONTRIVIAL_ON_DOUBLE_COVER,
    NONTRIVIAL_ON_M,
    TRIVIAL,
    Axiom,
    Certificate,
    CoverStep,
    InjectivityLemma,
    Mod2Survivors,
    ThreeDistinct,
    verify,
)
from services.covers import ASSEMBLY_B3, assemble_double_cover
from services.decide import ManifoldClassifier, classify
from services.decomposition import (
    ClassificationError,
    DecompositionGraph,
    FinitePi1,
    Gluing,
    HyperbolicPiece,
    Irreducible,
    ManifoldSpec,
    ValidationError,
)
from services.presentations import SeifertPiece
from services.witness import NONSEPARATING_TORUS

CORPUS = build_corpus()

TWO_FIBER_TYPES = ((2, 1), (3, 1), (3, 2), (5, 2))
EVEN_ENDS = (((2, 1), (2, 1)), ((2, 1), (3, 1)), ((2, 1), (5, 2)))


def _tree(*nodes: SeifertPiece) -> ManifoldSpec:
    edges = [Gluing(index, 0 if index == 0 else 1, index + 1, 0) for index in range(len(nodes) - 1)]
    return ManifoldSpec((Irreducible(DecompositionGraph(nodes, tuple(edges))),))


def _disk(*fibers: tuple[int, int], boundary: int = 1) -> SeifertPiece:
    return SeifertPiece(boundary_count=boundary, fibers=fibers)


def _assert_sound(spec: ManifoldSpec) -> Certificate:
    verdict, cert = classify(spec)
    report = verify(cert, spec)
    assert report.ok, report.lines()
    assert verdict == cert.verdict
    return cert


@pytest.mark.parametrize("entry", CORPUS.entries, ids=lambda entry: entry.name)
def test_corpus_verdicts(entry: CorpusEntry) -> None:
    cert = _assert_sound(entry.spec)
    verdict = cert.verdict
    assert verdict.kind == entry.verdict
    assert verdict.argument_id == entry.argument_id
    assert verdict.cover_recipe == entry.recipe


@pytest.mark.parametrize(
    "entry",
    [entry for entry in CORPUS.entries if entry.verdict == NONTRIVIAL_ON_DOUBLE_COVER],
    ids=lambda entry: entry.name,
)
def test_cover_certificates_nest_once(entry: CorpusEntry) -> None:
    _, cert = classify(entry.spec)
    assert [type(step) for step in cert.steps] == [CoverStep]
    inner = cert.cover_certificate
    assert inner is not None and inner.cover_certificate is None
    assert not any(isinstance(step, CoverStep) for step in inner.steps)
    assert inner.verdict.kind == NONTRIVIAL_ON_M
    assert inner.verdict.pair == cert.verdict.pair
    assert SCOPE_BETA_VERBATIM in cert.scope_notes


def test_trivial_verdicts_carry_no_witness() -> None:
    for name in ("closed-hyperbolic", "hyperbolic-piece", "hyperbolic-fake-sphere"):
        verdict, cert = classify(CORPUS.get(name).spec)
        assert verdict.kind == TRIVIAL
        assert verdict.pair is None
        assert len(cert.steps) == 1


def test_fake_sphere_is_noted_and_warned() -> None:
    classifier = ManifoldClassifier()
    _, cert = classifier.classify(CORPUS.get("hyperbolic-fake-sphere").spec)
    assert SCOPE_FAKE_SPHERE in cert.scope_notes
    assert classifier.last_warnings == [SCOPE_FAKE_SPHERE]


def test_finite_seifert_states_its_euler_characteristic() -> None:
    verdict, cert = classify(CORPUS.get("poincare-sphere").spec)
    assert verdict.reason == FINITE_GROUP_RULE
    axiom = cert.steps[0]
    assert isinstance(axiom, Axiom) and axiom.kind == FINITE_FUNDAMENTAL_GROUP
    assert axiom.claim == "orbifold euler 1/30"
    assert SCOPE_FINITE_SEIFERT in cert.scope_notes


def test_closed_seifert_uses_central_fiber_axioms() -> None:
    _, cert = classify(CORPUS.get("brieskorn-237").spec)
    axioms = [step for step in cert.steps if isinstance(step, Axiom)]
    assert axioms and all(axiom.kind == CENTRAL_FIBER for axiom in axioms)
    assert isinstance(cert.steps[-1], ThreeDistinct)


def test_piece_witness_step_chain() -> None:
    _, cert = classify(CORPUS.get("case3-two-curves").spec)
    assert [step.STEP for step in cert.steps] == [
        "Mod2Survivors",
        "QuotientDistinctness",
        "BoundaryExclusion",
        "InjectivityLemma",
    ]
    survivors = cert.steps[0]
    lemma = cert.steps[3]
    assert isinstance(survivors, Mod2Survivors) and isinstance(lemma, InjectivityLemma)
    assert (lemma.w1, lemma.w2) == survivors.survivors
    assert SCOPE_GLUING_MAPS in cert.scope_notes


def test_hyperbolic_gluing_step_chain() -> None:
    _, cert = classify(CORPUS.get("hyperbolic-seifert").spec)
    assert [step.STEP for step in cert.steps] == [
        "Mod2Survivors",
        "Axiom",
        "Axiom",
        "AmalgamDistinctness",
        "FactorExclusion",
        "InjectivityLemma",
    ]


def test_cover_depth_limit_is_enforced() -> None:
    classifier = ManifoldClassifier(cover_depth_limit=1)
    with pytest.raises(ClassificationError):
        classifier.classify(CORPUS.get("b3-pair").spec)


def test_invalid_specs_are_rejected_before_deciding() -> None:
    with pytest.raises(ValidationError):
        classify(ManifoldSpec(()))
    with pytest.raises(ValidationError):
        classify(ManifoldSpec((FinitePi1(0),)))
    with pytest.raises(ValidationError):
        classify(_tree(_disk((3, 1)), _disk((2, 1), (3, 1))))


@pytest.mark.parametrize(
    ("first", "second"),
    list(itertools.combinations_with_replacement(itertools.combinations_with_replacement(TWO_FIBER_TYPES, 2), 2)),
)
def test_every_two_piece_tree_is_decided(first, second) -> None:
    cert = _assert_sound(_tree(_disk(*first), _disk(*second)))
    assert cert.verdict.kind in (NONTRIVIAL_ON_M, NONTRIVIAL_ON_DOUBLE_COVER)


@pytest.mark.parametrize(("first", "last"), list(itertools.combinations_with_replacement(EVEN_ENDS, 2)))
def test_three_piece_chains_through_a_two_boundary_piece(first, last) -> None:
    cert = _assert_sound(_tree(_disk(*first), _disk((2, 1), boundary=2), _disk(*last)))
    assert cert.verdict.kind == NONTRIVIAL_ON_DOUBLE_COVER


@pytest.mark.parametrize(
    "piece",
    [HyperbolicPiece(2), _disk((3, 1), boundary=2), SeifertPiece(boundary_count=2, fibers=((2, 1), (5, 2)))],
    ids=["hyperbolic", "seifert-one-fiber", "seifert-two-fibers"],
)
def test_piece_glued_to_itself_has_a_nonseparating_torus(piece) -> None:
    spec = ManifoldSpec((Irreducible(DecompositionGraph((piece,), (Gluing(0, 0, 0, 1),))),))
    cert = _assert_sound(spec)
    assert cert.verdict.kind == NONTRIVIAL_ON_M
    assert cert.verdict.argument_id == NONSEPARATING_TORUS


def test_cover_graphs_classify_once_minimality_is_relaxed() -> None:
    base = CORPUS.get("b3-pair").spec.summands[0].graph
    cover_graph, _ = assemble_double_cover(base, ASSEMBLY_B3)
    cover = ManifoldSpec((Irreducible(cover_graph),))
    with pytest.raises(ValidationError):
        classify(cover)
    verdict, cert = classify(cover, require_minimal=False)
    assert verdict.kind == NONTRIVIAL_ON_M
    assert verify(cert, cover, require_minimal=False).ok
    assert not verify(cert, cover).ok
