"""Decide nontrivial extended loop products for a described 3-manifold and certify the answer."""
from __future__ import annotations

import logging
from typing import Callable

from loopwitness.constants import (
    ABSTRACT_FACTOR_ORDER,
    ALGEBRAICALLY_HYPERBOLIC_RULE,
    CENTRAL_FIBER,
    DECISION_LIMITS,
    FINITE_FUNDAMENTAL_GROUP,
    FINITE_GROUP_RULE,
    HOMOLOGICAL_INTERSECTION,
    HYPERBOLIC_MALNORMALITY,
    SCOPE_BETA_VERBATIM,
    SCOPE_FACTOR_MODEL,
    SCOPE_FAKE_SPHERE,
    SCOPE_FINITE_SEIFERT,
    SCOPE_GLUING_MAPS,
    SEIFERT_CENTRALIZER_CHOICE,
)
from services.certify import (
    AMALGAM_GROUP,
    AMALGAM_SIDES,
    AMALGAM_WORDS,
    NONTRIVIAL_ON_DOUBLE_COVER,
    NONTRIVIAL_ON_M,
    TRIVIAL,
    WITNESS_REASON,
    AmalgamDistinctness,
    BoundaryExclusion,
    CertStep,
    Certificate,
    CoverStep,
    FactorExclusion,
    InjectivityLemma,
    Mod2Survivors,
    QuotientDistinctness,
    ThreeDistinct,
    Verdict,
    distinct_claim,
    euler_claim,
    factor_claim,
    finite_seifert_node,
    make_axiom,
    make_rule,
    modeled_factor_order,
    pair_to_dict,
    parse_distinct_claim,
    spec_digest,
)
from services.covers import (
    ORIENTATION_COVER,
    CoverError,
    CoverVerificationError,
    assemble_double_cover,
    orbifold_euler,
    refibre_mobius_ends,
    select_recipe,
)
from services.decomposition import (
    ClassificationError,
    ClosedHyperbolic,
    DecompositionGraph,
    FinitePi1,
    HyperbolicPiece,
    Irreducible,
    ManifoldSpec,
    S2xS1,
    classify_pieces,
    ensure_valid,
    has_nonseparating_torus,
)
from services.freeprod import are_conjugate, conjugate_into_cyclic_subgroup_family
from services.presentations import FIBER_SYMBOL, SeifertPiece, apply_hom, format_generator_word
from services.specfile import graph_to_dict
from services.witness import (
    CLOSED_SEIFERT,
    CONNECTED_SUM,
    FIGURE_EIGHT,
    HYPERBOLIC_GLUING,
    MODEL_QUOTIENT,
    NONORIENTABLE_FIGURE_EIGHT,
    NONSEPARATING_SPHERE,
    NONSEPARATING_TORUS,
    TWO_CURVES,
    WitnessContext,
    WitnessPair,
    build_witness,
    class_key,
    mod2_survivors,
    select_context,
    three_distinct_criterion,
)

logger = logging.getLogger(__name__)

# Word-level argument for each gluing case of an all-Seifert tree.
CASE_ARGUMENTS = {
    1: FIGURE_EIGHT,
    2: NONORIENTABLE_FIGURE_EIGHT,
    3: TWO_CURVES,
    4: FIGURE_EIGHT,
}
COVER_CASES = (5, 6)


class ManifoldClassifier:
    """Walks the decision tree and emits a certificate for every verdict."""

    def __init__(
        self,
        *,
        cover_depth_limit: int = DECISION_LIMITS.cover_depth,
        log_callback: Callable[[str], None] | None = None,
    ) -> None:
        self._cover_depth_limit = cover_depth_limit
        self._log_callback = log_callback
        self.last_warnings: list[str] = []

    def _log(self, message: str) -> None:
        logger.info(message)
        if self._log_callback:
            self._log_callback(message)

    def _warn(self, message: str) -> None:
        logger.warning(message)
        if message not in self.last_warnings:
            self.last_warnings.append(message)

    def classify(self, spec: ManifoldSpec, *, require_minimal: bool = True) -> tuple[Verdict, Certificate]:
        self.last_warnings = []
        cert = self._classify(spec, depth=1, require_minimal=require_minimal)
        self._log(f"Verdict: {cert.verdict.label()}")
        return cert.verdict, cert

    def _classify(self, spec: ManifoldSpec, *, depth: int, require_minimal: bool = True) -> Certificate:
        nested = depth > 1
        ensure_valid(spec, require_minimal=require_minimal and not nested, require_closed=True)
        notes: list[str] = []
        if any(isinstance(summand, FinitePi1) and summand.fake for summand in spec.summands):
            notes.append(SCOPE_FAKE_SPHERE)
            self._warn(SCOPE_FAKE_SPHERE)
        nontrivial = spec.nontrivial_summands()
        if len(nontrivial) >= 2:
            return self._connected_sum(spec, notes)
        if not nontrivial:
            self._log("Trivial fundamental group: finite-group rule")
            return self._finish(spec, Verdict(NONTRIVIAL_ON_M, reason=FINITE_GROUP_RULE), [make_rule(FINITE_GROUP_RULE)], notes)
        index, summand = nontrivial[0]
        if isinstance(summand, S2xS1):
            return self._nonseparating_sphere(spec, index, notes)
        if isinstance(summand, FinitePi1):
            self._log(f"Summand {index} has finite fundamental group of order {summand.order}")
            return self._finish(spec, Verdict(NONTRIVIAL_ON_M, reason=FINITE_GROUP_RULE), [make_rule(FINITE_GROUP_RULE)], notes)
        if isinstance(summand, ClosedHyperbolic):
            return self._trivial(spec, notes)
        return self._irreducible(spec, summand, notes, depth=depth)

    # -- certificates

    def _finish(self, spec: ManifoldSpec, verdict: Verdict, steps: list[CertStep], notes: list[str], cover: Certificate | None = None) -> Certificate:
        return Certificate(spec_digest(spec), verdict, tuple(steps), tuple(notes), cover)

    @staticmethod
    def _witness_verdict(pair: WitnessPair) -> Verdict:
        return Verdict(NONTRIVIAL_ON_M, argument_id=pair.argument_id, reason=WITNESS_REASON, pair=pair_to_dict(pair))

    def _trivial(self, spec: ManifoldSpec, notes: list[str]) -> Certificate:
        self._log("Closed hyperbolic: algebraically hyperbolic, products vanish")
        verdict = Verdict(TRIVIAL, reason=ALGEBRAICALLY_HYPERBOLIC_RULE)
        return self._finish(spec, verdict, [make_rule(ALGEBRAICALLY_HYPERBOLIC_RULE)], notes)

    def _connected_sum(self, spec: ManifoldSpec, notes: list[str]) -> Certificate:
        (first, a), (second, b) = spec.nontrivial_summands()[:2]
        orders = (modeled_factor_order(a), modeled_factor_order(b))
        self._log(f"Connected sum of summands {first} and {second}, modeled by orders {orders}")
        pair = build_witness(CONNECTED_SUM, WitnessContext(first, partner=second, orders=orders))
        steps: list[CertStep] = []
        for position, (index, summand) in enumerate(((first, a), (second, b)), start=1):
            if not isinstance(summand, S2xS1):
                steps.append(make_axiom(ABSTRACT_FACTOR_ORDER, index, factor_claim(f"g{position}", orders[position - 1])))
        survivors = mod2_survivors(pair.expansion, pair.hom)
        if not any(class_key(word, pair.hom) for word in survivors):
            raise ClassificationError(f"no nontrivial class survives for factor orders {orders}")
        steps.append(Mod2Survivors(pair_to_dict(pair), tuple(format_generator_word(word) for word in survivors)))
        return self._finish(spec, self._witness_verdict(pair), steps, notes + [SCOPE_FACTOR_MODEL])

    def _nonseparating_sphere(self, spec: ManifoldSpec, index: int, notes: list[str]) -> Certificate:
        self._log(f"Summand {index} is S2xS1: nonseparating sphere")
        pair = build_witness(NONSEPARATING_SPHERE, WitnessContext(index))
        return self._three_distinct(spec, pair, [], notes)

    def _three_distinct(self, spec: ManifoldSpec, pair: WitnessPair, axioms: list, notes: list[str]) -> Certificate:
        known = [parse_distinct_claim(axiom.claim) for axiom in axioms]
        hom = pair.hom if pair.model == MODEL_QUOTIENT else None
        if not three_distinct_criterion(pair.expansion, hom, known):
            raise ClassificationError(f"{pair.argument_id}: fewer than three distinct classes")
        steps: list[CertStep] = list(axioms)
        steps.append(ThreeDistinct(pair_to_dict(pair), tuple(range(len(axioms)))))
        return self._finish(spec, self._witness_verdict(pair), steps, notes)

    # -- irreducible summands

    def _irreducible(self, spec: ManifoldSpec, summand: Irreducible, notes: list[str], *, depth: int) -> Certificate:
        graph = summand.graph
        if graph.edges:
            notes = notes + [SCOPE_GLUING_MAPS]
        if len(graph.nodes) == 1 and not graph.edges:
            node = graph.nodes[0]
            if isinstance(node, HyperbolicPiece):
                return self._trivial(spec, notes)
            return self._closed_seifert(spec, graph, node, notes, depth=depth)
        torus = has_nonseparating_torus(graph)
        if torus:
            return self._nonseparating_torus(spec, torus.index, torus.kind, notes)
        hyperbolic = [index for index, node in enumerate(graph.nodes) if isinstance(node, HyperbolicPiece)]
        if hyperbolic:
            return self._hyperbolic_gluing(spec, graph, hyperbolic[0], notes)
        case = classify_pieces(graph)
        self._log(f"Gluing case {case.case} at node {case.piece_index} (p={case.p}, b={case.b})")
        if case.case in COVER_CASES:
            return self._via_cover(spec, graph, None, notes, depth=depth)
        return self._piece_witness(spec, graph, CASE_ARGUMENTS[case.case], case.piece_index, notes)

    def _closed_seifert(self, spec: ManifoldSpec, graph: DecompositionGraph, piece: SeifertPiece, notes: list[str], *, depth: int) -> Certificate:
        if finite_seifert_node(graph) is not None:
            euler = orbifold_euler(piece)
            self._log(f"Closed Seifert piece with orbifold Euler {euler}: finite fundamental group")
            steps = [make_axiom(FINITE_FUNDAMENTAL_GROUP, 0, euler_claim(euler)), make_rule(FINITE_GROUP_RULE)]
            verdict = Verdict(NONTRIVIAL_ON_M, reason=FINITE_GROUP_RULE)
            return self._finish(spec, verdict, steps, notes + [SCOPE_FINITE_SEIFERT])
        if not piece.base_orientable:
            return self._via_cover(spec, graph, ORIENTATION_COVER, notes, depth=depth)
        context = select_context(CLOSED_SEIFERT, piece, 0)
        pair = build_witness(CLOSED_SEIFERT, context, piece=piece)
        x = f"{context.generators[0]}^1"
        fiber = f"{FIBER_SYMBOL}^1"
        claims = [distinct_claim(fiber, "1")]
        if context.detail != MODEL_QUOTIENT:
            claims += [distinct_claim(x, "1"), distinct_claim(x, fiber)]
        axioms = [make_axiom(CENTRAL_FIBER, 0, claim) for claim in claims]
        self._log(f"Closed Seifert witness on {context.generators[0]} ({pair.model} model)")
        return self._three_distinct(spec, pair, axioms, notes)

    def _nonseparating_torus(self, spec: ManifoldSpec, index: int, kind: str, notes: list[str]) -> Certificate:
        self._log(f"Nonseparating torus from {kind} {index}")
        pair = build_witness(NONSEPARATING_TORUS, WitnessContext(index, detail=kind))
        claims = (distinct_claim("l^1", "1"), distinct_claim("h^1", "1"), distinct_claim("l^1", "h^1"))
        axioms = [make_axiom(HOMOLOGICAL_INTERSECTION, index, claim) for claim in claims]
        return self._three_distinct(spec, pair, axioms, notes)

    def _hyperbolic_gluing(self, spec: ManifoldSpec, graph: DecompositionGraph, hyperbolic: int, notes: list[str]) -> Certificate:
        edge_index = graph.edges_at(hyperbolic)[0]
        edge = graph.edges[edge_index]
        neighbor = edge.node_b if edge.node_a == hyperbolic else edge.node_a
        self._log(f"Hyperbolic node {hyperbolic} glued to node {neighbor} along edge {edge_index}")
        pair = build_witness(HYPERBOLIC_GLUING, WitnessContext(hyperbolic, partner=neighbor, detail=str(edge_index)))
        survivors = tuple(format_generator_word(word) for word in mod2_survivors(pair.expansion, pair.hom))
        if survivors != AMALGAM_WORDS:
            raise ClassificationError(f"hyperbolic gluing survivors are {survivors}")
        claim = f"edge {edge_index}"
        neighbor_kind = (
            HYPERBOLIC_MALNORMALITY if isinstance(graph.nodes[neighbor], HyperbolicPiece) else SEIFERT_CENTRALIZER_CHOICE
        )
        w1, w2 = survivors
        steps: list[CertStep] = [
            Mod2Survivors(pair_to_dict(pair), survivors),
            make_axiom(HYPERBOLIC_MALNORMALITY, hyperbolic, claim),
            make_axiom(neighbor_kind, neighbor, claim),
            AmalgamDistinctness(w1, w2, hyperbolic, neighbor, edge_index, (1, 2)),
            FactorExclusion(AMALGAM_GROUP, w1, dict(AMALGAM_SIDES)),
            InjectivityLemma((hyperbolic, neighbor), w1, w2, 3, 4),
        ]
        return self._finish(spec, self._witness_verdict(pair), steps, notes)

    def _piece_witness(self, spec: ManifoldSpec, graph: DecompositionGraph, argument_id: str, node: int, notes: list[str]) -> Certificate:
        piece = graph.nodes[node]
        context = select_context(argument_id, piece, node)
        pair = build_witness(argument_id, context, piece=piece)
        survivors = mod2_survivors(pair.expansion, pair.hom)
        if len(survivors) != 2:
            raise ClassificationError(f"{argument_id} on node {node} leaves {len(survivors)} surviving classes")
        hom = pair.hom
        images = [apply_hom(hom, word) for word in survivors]
        if are_conjugate(*images):
            raise ClassificationError(f"{argument_id} survivors are conjugate in {hom.codomain.format()}")
        bases = [hom.image_of(symbol) for symbol in piece.boundary_generators]
        excluded = next(
            (word for word, image in zip(survivors, images) if conjugate_into_cyclic_subgroup_family(image, bases) is None),
            None,
        )
        if excluded is None:
            raise ClassificationError(f"both {argument_id} survivors are conjugate into boundary subgroups")
        w1, w2 = (format_generator_word(word) for word in survivors)
        codomain = hom.codomain.format()
        image_map = hom.image_map()
        self._log(f"{argument_id} on node {node}: survivors [{w1}] and [{w2}] in {codomain}")
        steps: list[CertStep] = [
            Mod2Survivors(pair_to_dict(pair), (w1, w2)),
            QuotientDistinctness(node, codomain, image_map, w1, w2),
            BoundaryExclusion(node, codomain, dict(image_map), format_generator_word(excluded), tuple(b.format() for b in bases)),
            InjectivityLemma((node,), w1, w2, 1, 2),
        ]
        return self._finish(spec, self._witness_verdict(pair), steps, notes)

    # -- covers

    def _via_cover(self, spec: ManifoldSpec, graph: DecompositionGraph, recipe: str | None, notes: list[str], *, depth: int) -> Certificate:
        if depth >= self._cover_depth_limit:
            raise ClassificationError(f"a cover is needed at depth {depth}, beyond the limit {self._cover_depth_limit}")
        rewritten_graph, rewritten = refibre_mobius_ends(graph)
        try:
            if recipe is None:
                choice = select_recipe(rewritten_graph)
                recipe, designated = choice.recipe, choice.designated
            else:
                designated = 0
            cover, metadata = assemble_double_cover(rewritten_graph, recipe, designated=designated, rewritten=rewritten)
        except (CoverError, CoverVerificationError) as exc:
            raise ClassificationError(f"no double cover applies: {exc}") from exc
        self._log(
            f"{recipe} cover at node {designated}: orbifold Euler {metadata.base_euler} to {metadata.cover_euler}"
        )
        self._warn(SCOPE_BETA_VERBATIM)
        cover_spec = ManifoldSpec((Irreducible(cover),))
        inner = self._classify(cover_spec, depth=depth + 1)
        if inner.verdict.kind != NONTRIVIAL_ON_M or inner.verdict.pair is None:
            raise ClassificationError(f"the {recipe} cover concludes {inner.verdict.kind}")
        step = CoverStep(recipe, designated, rewritten, graph_to_dict(graph), graph_to_dict(cover))
        verdict = Verdict(
            NONTRIVIAL_ON_DOUBLE_COVER,
            argument_id=inner.verdict.argument_id,
            reason=WITNESS_REASON,
            pair=inner.verdict.pair,
            cover_recipe=recipe,
        )
        return self._finish(spec, verdict, [step], notes + [SCOPE_BETA_VERBATIM], cover=inner)


_DEFAULT_CLASSIFIER = ManifoldClassifier()


def classify(spec: ManifoldSpec, *, require_minimal: bool = True) -> tuple[Verdict, Certificate]:
    return _DEFAULT_CLASSIFIER.classify(spec, require_minimal=require_minimal)
