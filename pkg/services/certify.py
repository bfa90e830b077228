"""Certificates for loop-product verdicts and the verifier that rechecks them."""
from __future__ import annotations

import hashlib
import json
import logging
import re
import types
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Any, Callable, ClassVar, Mapping, Sequence, Union, get_args, get_origin, get_type_hints

from loopwitness.constants import (
    ABSTRACT_FACTOR_ORDER,
    ALGEBRAICALLY_HYPERBOLIC_RULE,
    AXIOM_CITATIONS,
    AXIOM_KINDS,
    AXIOM_STATEMENTS,
    AXIOM_WHITELIST,
    CENTRAL_FIBER,
    CITED_RULES,
    COVER_DERIVATION,
    FINITE_FUNDAMENTAL_GROUP,
    FINITE_GROUP_RULE,
    HOMOLOGICAL_INTERSECTION,
    HYPERBOLIC_MALNORMALITY,
    SEIFERT_CENTRALIZER_CHOICE,
)
from services.covers import RECIPES, assemble_double_cover, orbifold_euler, refibre_mobius_ends
from services.decomposition import (
    ClosedHyperbolic,
    DecompositionGraph,
    FinitePi1,
    HyperbolicPiece,
    Irreducible,
    ManifoldSpec,
    S2xS1,
    Summand,
    has_nonseparating_torus,
    non_bridge_edges,
    validate,
)
from services.freeprod import (
    INFINITE,
    CyclicFactor,
    FreeProduct,
    FreeProductError,
    NFWord,
    are_conjugate,
    conjugate_into_cyclic_subgroup_family,
    conjugate_into_factor,
)
from services.presentations import (
    FIBER_SYMBOL,
    GeneratorWord,
    PresentationError,
    QuotientError,
    QuotientHom,
    SeifertPiece,
    apply_hom,
    format_generator_word,
    parse_generator_word,
    quotient_map,
    seifert_presentation,
)
from services.specfile import canonical_json, graph_to_dict, spec_from_dict, spec_to_dict
from services.witness import (
    CLOSED_SEIFERT,
    CONNECTED_SUM,
    HYPERBOLIC_GLUING,
    MODEL_QUOTIENT,
    NONSEPARATING_SPHERE,
    NONSEPARATING_TORUS,
    PIECE_ARGUMENTS,
    WitnessClass,
    WitnessContext,
    WitnessPair,
    build_witness,
    class_key,
    mod2_survivors,
    select_context,
    three_distinct_criterion,
)

logger = logging.getLogger(__name__)

TRIVIAL = "TRIVIAL"
NONTRIVIAL_ON_M = "NONTRIVIAL_ON_M"
NONTRIVIAL_ON_DOUBLE_COVER = "NONTRIVIAL_ON_DOUBLE_COVER"
VERDICT_KINDS = (TRIVIAL, NONTRIVIAL_ON_M, NONTRIVIAL_ON_DOUBLE_COVER)

WITNESS_REASON = "witness"

AMALGAM_WORDS = ("h^1.g1^1.g2^1", "h^1.g2^1.g1^1")
AMALGAM_GROUP = "G1=Z*G2=Z"
AMALGAM_SIDES = {FIBER_SYMBOL: 0, "g1": 0, "g2": 1}

_CLAIM_RE = re.compile(r"(\S+) != (\S+)")
_FACTOR_CLAIM_RE = re.compile(r"(g1|g2)=(Z\d*)")


class CertificateError(ValueError):
    pass


class _StepFailure(Exception):
    pass


# --------------------------------------------------------------------------- steps


@dataclass(frozen=True)
class QuotientDistinctness:
    STEP: ClassVar[str] = "QuotientDistinctness"
    node: int
    codomain: str
    images: dict[str, str]
    w1: str
    w2: str


@dataclass(frozen=True)
class BoundaryExclusion:
    STEP: ClassVar[str] = "BoundaryExclusion"
    node: int
    codomain: str
    images: dict[str, str]
    w: str
    boundary_bases: tuple[str, ...]


@dataclass(frozen=True)
class FactorExclusion:
    STEP: ClassVar[str] = "FactorExclusion"
    group: str
    w: str
    sides: dict[str, int]


@dataclass(frozen=True)
class AmalgamDistinctness:
    STEP: ClassVar[str] = "AmalgamDistinctness"
    w1: str
    w2: str
    hyperbolic_node: int
    neighbor_node: int
    edge: int
    conditions: tuple[int, ...]


@dataclass(frozen=True)
class InjectivityLemma:
    STEP: ClassVar[str] = "InjectivityLemma"
    nodes: tuple[int, ...]
    w1: str
    w2: str
    distinctness: int
    exclusion: int


@dataclass(frozen=True)
class Mod2Survivors:
    STEP: ClassVar[str] = "Mod2Survivors"
    pair: dict[str, Any]
    survivors: tuple[str, ...]


@dataclass(frozen=True)
class ThreeDistinct:
    STEP: ClassVar[str] = "ThreeDistinct"
    pair: dict[str, Any]
    support: tuple[int, ...]


@dataclass(frozen=True)
class CoverStep:
    STEP: ClassVar[str] = "CoverStep"
    recipe: str
    designated: int
    rewritten: tuple[int, ...]
    input_graph: dict[str, Any]
    output_graph: dict[str, Any]


@dataclass(frozen=True)
class Axiom:
    STEP: ClassVar[str] = "Axiom"
    kind: str
    subject: int
    claim: str
    statement: str
    citation: str


@dataclass(frozen=True)
class CitedRule:
    STEP: ClassVar[str] = "CitedRule"
    proposition: str
    citation: str


CertStep = Union[
    QuotientDistinctness,
    BoundaryExclusion,
    FactorExclusion,
    AmalgamDistinctness,
    InjectivityLemma,
    Mod2Survivors,
    ThreeDistinct,
    CoverStep,
    Axiom,
    CitedRule,
]

STEP_TYPES: dict[str, type] = {
    cls.STEP: cls
    for cls in (
        QuotientDistinctness,
        BoundaryExclusion,
        FactorExclusion,
        AmalgamDistinctness,
        InjectivityLemma,
        Mod2Survivors,
        ThreeDistinct,
        CoverStep,
        Axiom,
        CitedRule,
    )
}


def make_axiom(kind: str, subject: int, claim: str) -> Axiom:
    statement = AXIOM_STATEMENTS[kind].format(subject=subject, claim=claim)
    return Axiom(kind, subject, claim, statement, AXIOM_CITATIONS[kind])


def make_rule(proposition: str) -> CitedRule:
    return CitedRule(proposition, CITED_RULES[proposition])


def step_to_dict(step: CertStep) -> dict[str, Any]:
    data = asdict(step)
    data["step"] = step.STEP
    return data


def _coerce(value: Any, hint: Any, where: str) -> Any:
    if hint is Any:
        return value
    origin = get_origin(hint)
    if origin in (Union, types.UnionType):
        options = get_args(hint)
        if value is None and type(None) in options:
            return None
        (inner,) = [option for option in options if option is not type(None)]
        return _coerce(value, inner, where)
    if origin is tuple:
        if not isinstance(value, list):
            raise CertificateError(f"{where}: expected a list")
        item = get_args(hint)[0]
        return tuple(_coerce(entry, item, f"{where}[{index}]") for index, entry in enumerate(value))
    if origin is dict:
        if not isinstance(value, dict):
            raise CertificateError(f"{where}: expected an object")
        _, item = get_args(hint)
        return {str(key): _coerce(entry, item, f"{where}.{key}") for key, entry in value.items()}
    if hint is bool:
        ok = isinstance(value, bool)
    elif hint is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, hint)
    if not ok:
        raise CertificateError(f"{where}: expected {getattr(hint, '__name__', hint)}, got {value!r}")
    return value


def _record_from_dict(cls: type, data: Any, where: str) -> Any:
    if not isinstance(data, dict):
        raise CertificateError(f"{where}: expected an object")
    hints = get_type_hints(cls)
    names = [item.name for item in fields(cls)]
    expected = set(names) | ({"step"} if hasattr(cls, "STEP") else set())
    if set(data) != expected:
        difference = sorted(set(data) ^ expected)
        raise CertificateError(f"{where}: fields {difference} do not match {cls.__name__}")
    return cls(**{name: _coerce(data[name], hints[name], f"{where}.{name}") for name in names})


def step_from_dict(data: Any, where: str = "step") -> CertStep:
    if not isinstance(data, dict) or data.get("step") not in STEP_TYPES:
        raise CertificateError(f"{where}: unknown step {data.get('step') if isinstance(data, dict) else data!r}")
    return _record_from_dict(STEP_TYPES[data["step"]], data, where)


# --------------------------------------------------------------------------- certificate


@dataclass(frozen=True)
class Verdict:
    kind: str
    argument_id: str | None = None
    reason: str | None = None
    pair: dict[str, Any] | None = None
    cover_recipe: str | None = None

    @property
    def derivation(self) -> str:
        if self.reason != WITNESS_REASON:
            return self.reason or ""
        if self.kind == NONTRIVIAL_ON_DOUBLE_COVER:
            return COVER_DERIVATION
        return self.argument_id or ""

    def label(self) -> str:
        detail = self.argument_id if self.reason == WITNESS_REASON else self.reason
        if self.cover_recipe:
            detail = f"{detail} after {self.cover_recipe}"
        return f"{self.kind} ({detail})"


@dataclass(frozen=True)
class Certificate:
    spec_digest: str
    verdict: Verdict
    steps: tuple[CertStep, ...]
    scope_notes: tuple[str, ...] = ()
    cover_certificate: Certificate | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec_digest": self.spec_digest,
            "verdict": asdict(self.verdict),
            "steps": [step_to_dict(step) for step in self.steps],
            "scope_notes": list(self.scope_notes),
            "cover_certificate": self.cover_certificate.to_dict() if self.cover_certificate else None,
        }

    def dumps(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Any, where: str = "certificate") -> Certificate:
        if not isinstance(data, dict):
            raise CertificateError(f"{where}: expected an object")
        expected = {"spec_digest", "verdict", "steps", "scope_notes", "cover_certificate"}
        if set(data) != expected:
            raise CertificateError(f"{where}: fields {sorted(set(data) ^ expected)} are unexpected or missing")
        steps = data["steps"]
        if not isinstance(steps, list):
            raise CertificateError(f"{where}.steps: expected a list")
        nested = data["cover_certificate"]
        return cls(
            spec_digest=_coerce(data["spec_digest"], str, f"{where}.spec_digest"),
            verdict=_record_from_dict(Verdict, data["verdict"], f"{where}.verdict"),
            steps=tuple(step_from_dict(step, f"{where}.steps[{index}]") for index, step in enumerate(steps)),
            scope_notes=_coerce(data["scope_notes"], tuple[str, ...], f"{where}.scope_notes"),
            cover_certificate=None if nested is None else cls.from_dict(nested, f"{where}.cover_certificate"),
        )

    @classmethod
    def loads(cls, text: str) -> Certificate:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CertificateError(f"certificate is not valid JSON ({exc.msg} at line {exc.lineno})") from exc
        return cls.from_dict(data)


def spec_digest(spec: ManifoldSpec) -> str:
    return hashlib.sha256(canonical_json(spec_to_dict(spec)).encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------- shared facts


def subject_graph(spec: ManifoldSpec) -> DecompositionGraph | None:
    """The decomposition graph of the only nontrivial summand, when that summand is irreducible."""
    nontrivial = spec.nontrivial_summands()
    if len(nontrivial) == 1 and isinstance(nontrivial[0][1], Irreducible):
        return nontrivial[0][1].graph
    return None


def finite_seifert_node(graph: DecompositionGraph | None) -> tuple[int, SeifertPiece] | None:
    if graph is None or len(graph.nodes) != 1 or graph.edges or not graph.closed:
        return None
    node = graph.nodes[0]
    if isinstance(node, SeifertPiece) and node.boundary_count == 0 and orbifold_euler(node) > 0:
        return 0, node
    return None


def _smallest_odd_prime(n: int) -> int | None:
    while n % 2 == 0 and n > 1:
        n //= 2
    candidate = 3
    while candidate * candidate <= n:
        if n % candidate == 0:
            return candidate
        candidate += 2
    return n if n > 1 else None


def modeled_factor_order(summand: Summand) -> int:
    """Order of the cyclic free factor standing in for a prime summand; 0 means infinite."""
    if isinstance(summand, (S2xS1, ClosedHyperbolic)):
        return INFINITE
    if isinstance(summand, FinitePi1):
        odd = _smallest_odd_prime(summand.order)
        if odd is not None:
            return odd
        return 4 if summand.order % 4 == 0 else 2
    if finite_seifert_node(summand.graph) is not None:
        return 2
    return INFINITE


def factor_claim(symbol: str, order: int) -> str:
    return f"{symbol}={CyclicFactor(symbol, order).format()}"


def context_to_dict(context: WitnessContext) -> dict[str, Any]:
    return {
        "subject": context.subject,
        "partner": context.partner,
        "generators": list(context.generators),
        "eliminated": context.eliminated,
        "orders": list(context.orders),
        "detail": context.detail,
    }


def _class_to_dict(witness_class: WitnessClass) -> dict[str, Any]:
    return {
        "degree": witness_class.degree,
        "class_word": format_generator_word(witness_class.class_word),
        "construction_tag": witness_class.construction_tag,
        "delta_applied": witness_class.delta_applied,
    }


def pair_to_dict(pair: WitnessPair) -> dict[str, Any]:
    return {
        "argument_id": pair.argument_id,
        "model": pair.model,
        "context": context_to_dict(pair.context),
        "a": _class_to_dict(pair.a),
        "b": _class_to_dict(pair.b),
        "expansion": [format_generator_word(word) for word in pair.terms],
        "hom": {"codomain": pair.hom.codomain.format(), "images": pair.hom.image_map()},
    }


def _context_from_dict(data: Any) -> WitnessContext:
    hints: dict[str, Any] = {
        "subject": int,
        "partner": int | None,
        "generators": tuple[str, ...],
        "eliminated": str | None,
        "orders": tuple[int, ...],
        "detail": str | None,
    }
    if not isinstance(data, dict) or set(data) != set(hints):
        raise CertificateError("pair.context: fields do not match a witness context")
    return WitnessContext(**{name: _coerce(data[name], hint, f"pair.context.{name}") for name, hint in hints.items()})


def _strict_generator_word(text: Any) -> GeneratorWord:
    if not isinstance(text, str):
        raise _StepFailure(f"word {text!r} is not text")
    try:
        word = parse_generator_word(text)
    except PresentationError as exc:
        raise _StepFailure(str(exc)) from exc
    if format_generator_word(word) != text:
        raise _StepFailure(f"word {text!r} is not in canonical form")
    return word


def _strict_group(text: str) -> FreeProduct:
    group = FreeProduct.parse(text)
    if group.format() != text:
        raise _StepFailure(f"group {text!r} is not in canonical form")
    return group


def _strict_group_word(group: FreeProduct, text: str) -> NFWord:
    word = group.parse_word(text)
    if word.format() != text:
        raise _StepFailure(f"word {text!r} is not in normal form in {group.format()}")
    return word


# --------------------------------------------------------------------------- reports


@dataclass(frozen=True)
class StepReport:
    index: int
    step: str
    ok: bool
    message: str = ""

    def format(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        suffix = f": {self.message}" if self.message else ""
        return f"[{self.index}] {self.step} {status}{suffix}"


@dataclass(frozen=True)
class VerificationReport:
    steps: tuple[StepReport, ...] = ()
    problems: tuple[str, ...] = ()
    nested: VerificationReport | None = None

    @property
    def ok(self) -> bool:
        nested_ok = self.nested is None or self.nested.ok
        return not self.problems and all(step.ok for step in self.steps) and nested_ok

    def lines(self, indent: str = "") -> list[str]:
        result = [indent + step.format() for step in self.steps]
        result.extend(f"{indent}problem: {problem}" for problem in self.problems)
        if self.nested is not None:
            result.append(f"{indent}cover certificate:")
            result.extend(self.nested.lines(indent + "  "))
        return result

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "steps": [asdict(step) for step in self.steps],
            "problems": list(self.problems),
            "cover_certificate": self.nested.to_dict() if self.nested else None,
        }


def _failed(message: str) -> VerificationReport:
    return VerificationReport(problems=(message,))


# --------------------------------------------------------------------------- verifier


@dataclass
class _Context:
    spec: ManifoldSpec
    graph: DecompositionGraph | None
    steps: Sequence[CertStep]
    derivation: str


class CertificateVerifier:
    """Recomputes every checkable step and the chain from steps to verdict."""

    def __init__(self, *, log_callback: Callable[[str], None] | None = None) -> None:
        self._log_callback = log_callback
        self.last_warnings: list[str] = []

    def _log(self, message: str) -> None:
        logger.info(message)
        if self._log_callback:
            self._log_callback(message)

    def verify(
        self, cert: Certificate, spec: ManifoldSpec, *, nested: bool = False, require_minimal: bool = True
    ) -> VerificationReport:
        """`require_minimal=False` admits documents written by `cover`, whose pieces need not be minimal."""
        self.last_warnings = []
        return self._verify(cert, spec, nested=nested, require_minimal=require_minimal)

    def _verify(
        self, cert: Certificate, spec: ManifoldSpec, *, nested: bool, require_minimal: bool = True
    ) -> VerificationReport:
        problems: list[str] = []
        digest = spec_digest(spec)
        if cert.spec_digest != digest:
            problems.append(f"digest mismatch: certificate names {cert.spec_digest[:12]}, spec is {digest[:12]}")
        validation = validate(spec, require_minimal=require_minimal and not nested, require_closed=True)
        problems.extend(f"spec does not validate: {violation.format()}" for violation in validation.violations)
        if cert.verdict.kind not in VERDICT_KINDS:
            problems.append(f"unknown verdict kind {cert.verdict.kind!r}")
        derivation = cert.verdict.derivation
        if derivation not in AXIOM_WHITELIST:
            problems.append(f"unknown derivation {derivation!r}")
        context = _Context(spec, subject_graph(spec), cert.steps, derivation)
        reports: list[StepReport] = []
        for index, step in enumerate(cert.steps):
            try:
                message = self._check_step(index, step, context)
                reports.append(StepReport(index, step.STEP, True, message))
            except (_StepFailure, CertificateError, FreeProductError, PresentationError, QuotientError) as exc:
                reports.append(StepReport(index, step.STEP, False, str(exc)))
            except (ValueError, RuntimeError, KeyError, IndexError, TypeError, AttributeError) as exc:
                reports.append(StepReport(index, step.STEP, False, f"recomputation failed: {exc}"))
        nested_report: VerificationReport | None = None
        if not problems:
            try:
                nested_report = self._check_entailment(cert, context, nested=nested)
            except (_StepFailure, ValueError, RuntimeError, KeyError, IndexError, TypeError, AttributeError) as exc:
                problems.append(f"verdict not entailed: {exc}")
        report = VerificationReport(tuple(reports), tuple(problems), nested_report)
        for line in report.lines():
            if "FAIL" in line or "problem" in line:
                self._log(line)
        logger.debug("Verification of %s: %s", cert.verdict.label(), "ok" if report.ok else "failed")
        return report

    # -- individual steps

    def _check_step(self, index: int, step: CertStep, context: _Context) -> str:
        checker = getattr(self, f"_check_{step.STEP}")
        return checker(index, step, context) or ""

    @staticmethod
    def _earlier(index: int, reference: int, context: _Context, *kinds: type) -> CertStep:
        if not 0 <= reference < index:
            raise _StepFailure(f"reference {reference} is not an earlier step")
        target = context.steps[reference]
        if kinds and not isinstance(target, kinds):
            names = " or ".join(kind.STEP for kind in kinds)
            raise _StepFailure(f"step {reference} is a {target.STEP}, expected {names}")
        return target

    @staticmethod
    def _graph(context: _Context) -> DecompositionGraph:
        if context.graph is None:
            raise _StepFailure("the manifold has no single irreducible summand")
        return context.graph

    def _seifert(self, context: _Context, node: int) -> SeifertPiece:
        graph = self._graph(context)
        if not 0 <= node < len(graph.nodes) or not isinstance(graph.nodes[node], SeifertPiece):
            raise _StepFailure(f"node {node} is not a Seifert piece")
        return graph.nodes[node]

    def _verified_hom(self, context: _Context, node: int, codomain: str, images: Mapping[str, str]) -> QuotientHom:
        pres = seifert_presentation(self._seifert(context, node))
        group = _strict_group(codomain)
        if set(images) != set(pres.generators):
            raise _StepFailure(f"images must name every generator of {pres.format()}")
        parsed = {symbol: _strict_group_word(group, text) for symbol, text in images.items()}
        kept = [symbol for symbol, word in parsed.items() if not word.is_identity]
        return quotient_map(pres, kept, group, parsed)

    def _check_QuotientDistinctness(self, index: int, step: QuotientDistinctness, context: _Context) -> str:
        hom = self._verified_hom(context, step.node, step.codomain, step.images)
        image1 = apply_hom(hom, _strict_generator_word(step.w1))
        image2 = apply_hom(hom, _strict_generator_word(step.w2))
        if are_conjugate(image1, image2):
            raise _StepFailure(f"{image1.format()} and {image2.format()} are conjugate in {step.codomain}")
        return f"{image1.format()} vs {image2.format()}"

    def _check_BoundaryExclusion(self, index: int, step: BoundaryExclusion, context: _Context) -> str:
        hom = self._verified_hom(context, step.node, step.codomain, step.images)
        piece = self._seifert(context, step.node)
        if not hom.image_of(FIBER_SYMBOL).is_identity:
            raise _StepFailure("the fiber must map to 1")
        expected = tuple(hom.image_of(symbol).format() for symbol in piece.boundary_generators)
        if step.boundary_bases != expected:
            raise _StepFailure(f"boundary bases {list(step.boundary_bases)} differ from the images {list(expected)}")
        image = apply_hom(hom, _strict_generator_word(step.w))
        bases = [hom.image_of(symbol) for symbol in piece.boundary_generators]
        found = conjugate_into_cyclic_subgroup_family(image, bases)
        if found is not None:
            base, power = found
            raise _StepFailure(f"{image.format()} is conjugate to ({base.format()})^{power}")
        return image.format()

    def _check_FactorExclusion(self, index: int, step: FactorExclusion, context: _Context) -> str:
        group = _strict_group(step.group)
        word = _strict_generator_word(step.w)
        image = group.identity
        for symbol, exponent in word:
            if symbol not in step.sides or not 0 <= step.sides[symbol] < len(group.factors):
                raise _StepFailure(f"{symbol} has no factor assigned")
            image = image * group.word([(step.sides[symbol], exponent)])
        factor = conjugate_into_factor(image)
        if factor is not None:
            raise _StepFailure(f"{image.format()} is conjugate into factor {group.names[factor]}")
        return image.format()

    def _check_AmalgamDistinctness(self, index: int, step: AmalgamDistinctness, context: _Context) -> str:
        graph = self._graph(context)
        if (step.w1, step.w2) != AMALGAM_WORDS:
            raise _StepFailure(f"the amalgam rule concerns {AMALGAM_WORDS[0]} and {AMALGAM_WORDS[1]}")
        if not 0 <= step.hyperbolic_node < len(graph.nodes) or not isinstance(
            graph.nodes[step.hyperbolic_node], HyperbolicPiece
        ):
            raise _StepFailure(f"node {step.hyperbolic_node} is not hyperbolic")
        if not 0 <= step.edge < len(graph.edges):
            raise _StepFailure(f"edge {step.edge} does not exist")
        edge = graph.edges[step.edge]
        if {edge.node_a, edge.node_b} != {step.hyperbolic_node, step.neighbor_node} or edge.node_a == edge.node_b:
            raise _StepFailure(f"edge {step.edge} does not join nodes {step.hyperbolic_node} and {step.neighbor_node}")
        neighbor = graph.nodes[step.neighbor_node]
        needed = {(HYPERBOLIC_MALNORMALITY, step.hyperbolic_node)}
        if isinstance(neighbor, HyperbolicPiece):
            needed.add((HYPERBOLIC_MALNORMALITY, step.neighbor_node))
        else:
            needed.add((SEIFERT_CENTRALIZER_CHOICE, step.neighbor_node))
        supplied = set()
        for reference in step.conditions:
            axiom = self._earlier(index, reference, context, Axiom)
            if axiom.claim != f"edge {step.edge}":
                raise _StepFailure(f"axiom {reference} concerns {axiom.claim}, not edge {step.edge}")
            supplied.add((axiom.kind, axiom.subject))
        if supplied != needed:
            raise _StepFailure(f"conditions supply {sorted(supplied)}, need {sorted(needed)}")
        return ""

    def _check_InjectivityLemma(self, index: int, step: InjectivityLemma, context: _Context) -> str:
        graph = self._graph(context)
        if non_bridge_edges(graph):
            raise _StepFailure("the decomposition graph is not a tree")
        distinct = self._earlier(index, step.distinctness, context, QuotientDistinctness, AmalgamDistinctness)
        if {distinct.w1, distinct.w2} != {step.w1, step.w2}:
            raise _StepFailure(f"step {step.distinctness} separates other words")
        if isinstance(distinct, QuotientDistinctness):
            nodes = (distinct.node,)
            exclusion = self._earlier(index, step.exclusion, context, BoundaryExclusion)
            if exclusion.node != distinct.node:
                raise _StepFailure("the exclusion concerns another node")
        else:
            nodes = (distinct.hyperbolic_node, distinct.neighbor_node)
            exclusion = self._earlier(index, step.exclusion, context, FactorExclusion)
        if step.nodes != nodes:
            raise _StepFailure(f"nodes {list(step.nodes)} do not match step {step.distinctness}")
        if exclusion.w not in (step.w1, step.w2):
            raise _StepFailure(f"the excluded word {exclusion.w} is neither {step.w1} nor {step.w2}")
        return ""

    def _rebuild_pair(self, record: Mapping[str, Any], context: _Context) -> WitnessPair:
        argument_id = record.get("argument_id")
        witness_context = _context_from_dict(record.get("context"))
        piece = self._seifert(context, witness_context.subject) if argument_id in PIECE_ARGUMENTS else None
        pair = build_witness(argument_id, witness_context, piece=piece)
        if pair_to_dict(pair) != dict(record):
            raise _StepFailure("the witness pair does not match its recomputation")
        return pair

    def _check_Mod2Survivors(self, index: int, step: Mod2Survivors, context: _Context) -> str:
        pair = self._rebuild_pair(step.pair, context)
        survivors = tuple(format_generator_word(word) for word in mod2_survivors(pair.expansion, pair.hom))
        if step.survivors != survivors:
            raise _StepFailure(f"survivors are {list(survivors)}, certificate lists {list(step.survivors)}")
        return ", ".join(survivors) or "none"

    def _check_ThreeDistinct(self, index: int, step: ThreeDistinct, context: _Context) -> str:
        pair = self._rebuild_pair(step.pair, context)
        known = []
        for reference in step.support:
            axiom = self._earlier(index, reference, context, Axiom)
            if axiom.subject != pair.context.subject:
                raise _StepFailure(f"axiom {reference} concerns {axiom.subject}, not {pair.context.subject}")
            known.append(parse_distinct_claim(axiom.claim))
        hom = pair.hom if pair.model == MODEL_QUOTIENT else None
        if not three_distinct_criterion(pair.expansion, hom, known):
            raise _StepFailure("no three of the four terms are pairwise distinct")
        return ""

    def _check_CoverStep(self, index: int, step: CoverStep, context: _Context) -> str:
        graph = self._graph(context)
        if step.recipe not in RECIPES:
            raise _StepFailure(f"unknown recipe {step.recipe!r}")
        if graph_to_dict(graph) != step.input_graph:
            raise _StepFailure("the input graph is not the manifold's decomposition")
        rewritten_graph, rewritten = refibre_mobius_ends(graph)
        if rewritten != step.rewritten:
            raise _StepFailure(f"re-fibred nodes are {list(rewritten)}, certificate lists {list(step.rewritten)}")
        cover, _ = assemble_double_cover(rewritten_graph, step.recipe, designated=step.designated, rewritten=rewritten)
        if graph_to_dict(cover) != step.output_graph:
            raise _StepFailure("the output graph does not match the recomputed cover")
        return f"{len(graph.nodes)} pieces to {len(cover.nodes)}"

    def _check_Axiom(self, index: int, step: Axiom, context: _Context) -> str:
        if step.kind not in AXIOM_KINDS:
            raise _StepFailure(f"unknown axiom kind {step.kind!r}")
        if step.kind not in AXIOM_WHITELIST.get(context.derivation, frozenset()):
            raise _StepFailure(f"{step.kind} is not admitted for {context.derivation}")
        if step.citation != AXIOM_CITATIONS[step.kind]:
            raise _StepFailure("the citation does not match the axiom kind")
        if step.statement != AXIOM_STATEMENTS[step.kind].format(subject=step.subject, claim=step.claim):
            raise _StepFailure("the statement does not match subject and claim")
        if step.kind in (CENTRAL_FIBER, HOMOLOGICAL_INTERSECTION):
            parse_distinct_claim(step.claim)
            if step.kind == CENTRAL_FIBER:
                piece = self._seifert(context, step.subject)
                if not piece.base_orientable or piece.boundary_count:
                    raise _StepFailure(f"node {step.subject} is not closed over an orientable base")
        elif step.kind == ABSTRACT_FACTOR_ORDER:
            if not 0 <= step.subject < len(context.spec.summands):
                raise _StepFailure(f"summand {step.subject} does not exist")
            match = _FACTOR_CLAIM_RE.fullmatch(step.claim)
            order = modeled_factor_order(context.spec.summands[step.subject])
            if match is None or step.claim != factor_claim(match.group(1), order):
                raise _StepFailure(f"summand {step.subject} is modeled by order {order}, not {step.claim}")
        elif step.kind in (HYPERBOLIC_MALNORMALITY, SEIFERT_CENTRALIZER_CHOICE):
            graph = self._graph(context)
            kind = HyperbolicPiece if step.kind == HYPERBOLIC_MALNORMALITY else SeifertPiece
            if not 0 <= step.subject < len(graph.nodes) or not isinstance(graph.nodes[step.subject], kind):
                raise _StepFailure(f"node {step.subject} is not a {kind.__name__}")
            edges = {f"edge {edge}" for edge in graph.edges_at(step.subject)}
            if step.claim not in edges:
                raise _StepFailure(f"{step.claim} does not meet node {step.subject}")
        elif step.kind == FINITE_FUNDAMENTAL_GROUP:
            found = finite_seifert_node(context.graph)
            if found is None or found[0] != step.subject:
                raise _StepFailure(f"node {step.subject} is not a closed Seifert piece with positive orbifold Euler")
            if step.claim != euler_claim(orbifold_euler(found[1])):
                raise _StepFailure(f"claim {step.claim!r} does not match the orbifold Euler characteristic")
        return ""

    def _check_CitedRule(self, index: int, step: CitedRule, context: _Context) -> str:
        if step.proposition not in CITED_RULES:
            raise _StepFailure(f"unknown rule {step.proposition!r}")
        if step.citation != CITED_RULES[step.proposition]:
            raise _StepFailure("the citation does not match the rule")
        if step.proposition != context.derivation:
            raise _StepFailure(f"rule {step.proposition} does not match the derivation {context.derivation}")
        nontrivial = context.spec.nontrivial_summands()
        if step.proposition == ALGEBRAICALLY_HYPERBOLIC_RULE:
            graph = context.graph
            single_hyperbolic = (
                graph is not None
                and len(graph.nodes) == 1
                and not graph.edges
                and isinstance(graph.nodes[0], HyperbolicPiece)
                and graph.nodes[0].cusp_count == 0
            )
            closed_hyperbolic = len(nontrivial) == 1 and isinstance(nontrivial[0][1], ClosedHyperbolic)
            if not (single_hyperbolic or closed_hyperbolic):
                raise _StepFailure("the manifold is not a closed hyperbolic manifold")
        else:
            finite_summand = len(nontrivial) == 1 and isinstance(nontrivial[0][1], FinitePi1)
            if nontrivial and not finite_summand and finite_seifert_node(context.graph) is None:
                raise _StepFailure("the fundamental group is not known to be finite")
        return ""

    # -- verdict

    def _check_entailment(self, cert: Certificate, context: _Context, *, nested: bool) -> VerificationReport | None:
        verdict = cert.verdict
        steps = cert.steps
        if nested and (cert.cover_certificate is not None or any(isinstance(step, CoverStep) for step in steps)):
            raise _StepFailure("a cover certificate may not take a further cover")
        if verdict.kind != NONTRIVIAL_ON_DOUBLE_COVER and cert.cover_certificate is not None:
            raise _StepFailure("only double-cover verdicts carry a cover certificate")
        if verdict.reason == ALGEBRAICALLY_HYPERBOLIC_RULE:
            _expect(verdict.kind == TRIVIAL and verdict.pair is None, "trivial verdicts carry no witness")
            _expect([step.STEP for step in steps] == [CitedRule.STEP], "a trivial verdict rests on one cited rule")
            return None
        if verdict.reason == FINITE_GROUP_RULE:
            _expect(verdict.kind == NONTRIVIAL_ON_M and verdict.pair is None, "finite-group verdicts carry no witness")
            _expect(any(isinstance(step, CitedRule) for step in steps), "the finite-group rule is not cited")
            found = finite_seifert_node(context.graph)
            if found is not None:
                _expect(
                    any(isinstance(s, Axiom) and s.kind == FINITE_FUNDAMENTAL_GROUP for s in steps),
                    "finiteness of the Seifert piece is not stated",
                )
            return None
        _expect(verdict.reason == WITNESS_REASON, f"unknown reason {verdict.reason!r}")
        _expect(verdict.pair is not None, "the verdict names no witness pair")
        _expect(verdict.argument_id == verdict.pair.get("argument_id"), "the verdict and its pair disagree")
        if verdict.kind == NONTRIVIAL_ON_DOUBLE_COVER:
            return self._check_cover_entailment(cert, context)
        _expect(verdict.kind == NONTRIVIAL_ON_M, f"unexpected verdict {verdict.kind}")
        _expect(verdict.cover_recipe is None, "a verdict on M names no cover recipe")
        self._check_witness_entailment(cert, context)
        return None

    def _check_cover_entailment(self, cert: Certificate, context: _Context) -> VerificationReport:
        covers = [step for step in cert.steps if isinstance(step, CoverStep)]
        _expect(len(covers) == 1 and len(cert.steps) == 1, "a double-cover verdict has exactly one cover step")
        _expect(cert.cover_certificate is not None, "the cover certificate is missing")
        step = covers[0]
        _expect(cert.verdict.cover_recipe == step.recipe, "the verdict names another recipe")
        inner = cert.cover_certificate
        _expect(inner.verdict.kind == NONTRIVIAL_ON_M, "the cover certificate does not conclude on the cover")
        _expect(inner.verdict.pair == cert.verdict.pair, "the cover witness differs from the verdict's")
        cover_spec = spec_from_dict({"summands": [step.output_graph]})
        return self._verify(inner, cover_spec, nested=True)

    def _check_witness_entailment(self, cert: Certificate, context: _Context) -> None:
        verdict = cert.verdict
        record = verdict.pair
        argument_id = verdict.argument_id
        pair = self._rebuild_pair(record, context)
        self._check_pair_context(pair, context)
        steps = cert.steps
        survivors_steps = [s for s in steps if isinstance(s, Mod2Survivors) and s.pair == record]
        three_steps = [s for s in steps if isinstance(s, ThreeDistinct) and s.pair == record]
        if argument_id in (CLOSED_SEIFERT, NONSEPARATING_SPHERE, NONSEPARATING_TORUS):
            _expect(three_steps, "no three-distinct step for the verdict's pair")
            if argument_id == NONSEPARATING_TORUS:
                kinds = {steps[i].kind for s in three_steps for i in s.support}
                _expect(kinds <= {HOMOLOGICAL_INTERSECTION}, "torus distinctness rests on intersection numbers")
            return
        _expect(survivors_steps, "no survivor computation for the verdict's pair")
        survivors = survivors_steps[0].survivors
        if argument_id == CONNECTED_SUM:
            words = [parse_generator_word(text) for text in survivors]
            _expect(any(class_key(word, pair.hom) for word in words), "no nontrivial class survives")
            for position, summand_index in enumerate((pair.context.subject, pair.context.partner), start=1):
                if isinstance(context.spec.summands[summand_index], S2xS1):
                    continue
                claim = factor_claim(f"g{position}", pair.context.orders[position - 1])
                _expect(
                    any(isinstance(s, Axiom) and s.kind == ABSTRACT_FACTOR_ORDER and s.subject == summand_index
                        and s.claim == claim for s in steps),
                    f"the order of summand {summand_index} is not stated",
                )
            return
        _expect(len(survivors) == 2, "the survivors are not a pair of classes")
        lemmas = [s for s in steps if isinstance(s, InjectivityLemma) and {s.w1, s.w2} == set(survivors)]
        _expect(lemmas, "no injectivity step separates the survivors")
        lemma = lemmas[0]
        distinct = steps[lemma.distinctness]
        if argument_id == HYPERBOLIC_GLUING:
            _expect(tuple(survivors) == AMALGAM_WORDS, "hyperbolic gluing survivors are hg1g2 and hg2g1")
            _expect(isinstance(distinct, AmalgamDistinctness), "the distinctness is not the amalgam rule")
            _expect(
                (distinct.hyperbolic_node, distinct.neighbor_node, str(distinct.edge))
                == (pair.context.subject, pair.context.partner, pair.context.detail),
                "the amalgam rule concerns other pieces",
            )
            exclusion = steps[lemma.exclusion]
            _expect(
                exclusion.group == AMALGAM_GROUP and exclusion.sides == AMALGAM_SIDES,
                "the factor exclusion uses another model",
            )
            return
        _expect(isinstance(distinct, QuotientDistinctness), "the distinctness is not a quotient computation")
        _expect(lemma.nodes == (pair.context.subject,), "the injectivity step lifts another node")

    def _check_pair_context(self, pair: WitnessPair, context: _Context) -> None:
        witness_context = pair.context
        argument_id = pair.argument_id
        spec = context.spec
        if argument_id in PIECE_ARGUMENTS:
            piece = self._seifert(context, witness_context.subject)
            _expect(
                select_context(argument_id, piece, witness_context.subject) == witness_context,
                "the generators are not the deterministic choice",
            )
            if argument_id == CLOSED_SEIFERT:
                graph = self._graph(context)
                _expect(len(graph.nodes) == 1 and graph.closed, "the closed-Seifert argument needs a single closed piece")
            return
        if argument_id == CONNECTED_SUM:
            nontrivial = spec.nontrivial_summands()
            _expect(len(nontrivial) >= 2, "a connected-sum witness needs two nontrivial summands")
            (first, a), (second, b) = nontrivial[:2]
            expected = WitnessContext(first, partner=second, orders=(modeled_factor_order(a), modeled_factor_order(b)))
            _expect(witness_context == expected, "the summands or their modeled orders are not the expected ones")
            return
        if argument_id == NONSEPARATING_SPHERE:
            spheres = [index for index, summand in enumerate(spec.summands) if isinstance(summand, S2xS1)]
            _expect(spheres and witness_context == WitnessContext(spheres[0]), "the sphere is not the first S2xS1")
            return
        if argument_id == NONSEPARATING_TORUS:
            torus = has_nonseparating_torus(self._graph(context))
            _expect(
                bool(torus) and witness_context == WitnessContext(torus.index, detail=torus.kind),
                "the torus does not match the decomposition",
            )
            return
        if argument_id == HYPERBOLIC_GLUING:
            graph = self._graph(context)
            subject = witness_context.subject
            _expect(
                0 <= subject < len(graph.nodes) and isinstance(graph.nodes[subject], HyperbolicPiece),
                "the subject is not a hyperbolic piece",
            )
            return
        raise _StepFailure(f"unknown argument {argument_id!r}")


def _expect(condition: Any, message: str) -> None:
    if not condition:
        raise _StepFailure(message)


def parse_distinct_claim(claim: str) -> tuple[GeneratorWord, GeneratorWord]:
    match = _CLAIM_RE.fullmatch(claim)
    if match is None:
        raise _StepFailure(f"claim {claim!r} is not of the form 'u != v'")
    first, second = (_strict_generator_word(text) for text in match.groups())
    if first == second:
        raise _StepFailure(f"claim {claim!r} separates a word from itself")
    return first, second


def distinct_claim(first: str, second: str) -> str:
    return f"{first} != {second}"


def euler_claim(value: Fraction) -> str:
    return f"orbifold euler {value}"


_DEFAULT_VERIFIER = CertificateVerifier()


def verify(cert: Certificate, spec: ManifoldSpec, *, require_minimal: bool = True) -> VerificationReport:
    return _DEFAULT_VERIFIER.verify(cert, spec, require_minimal=require_minimal)


def verify_document(data: Any, spec: ManifoldSpec, *, require_minimal: bool = True) -> VerificationReport:
    """Verify a certificate still in its JSON form; malformed documents fail instead of raising."""
    try:
        cert = Certificate.from_dict(data)
    except CertificateError as exc:
        return _failed(f"malformed certificate: {exc}")
    return verify(cert, spec, require_minimal=require_minimal)


# --------------------------------------------------------------------------- narrative


def _describe(index: int, step: CertStep) -> str:
    if isinstance(step, QuotientDistinctness):
        return f"node {step.node}: {step.w1} and {step.w2} have non-conjugate images in {step.codomain}"
    if isinstance(step, BoundaryExclusion):
        bases = ", ".join(step.boundary_bases) or "none"
        return f"node {step.node}: the image of {step.w} misses every boundary subgroup generated by {bases}"
    if isinstance(step, FactorExclusion):
        return f"{step.w} has cyclic length at least 2 in {step.group}, so it is not conjugate into a factor"
    if isinstance(step, AmalgamDistinctness):
        conditions = ", ".join(str(reference) for reference in step.conditions)
        return (
            f"edge {step.edge}: {step.w1} and {step.w2} are distinct in the amalgam of nodes "
            f"{step.hyperbolic_node} and {step.neighbor_node}, given steps {conditions}"
        )
    if isinstance(step, InjectivityLemma):
        nodes = ", ".join(str(node) for node in step.nodes)
        return (
            f"nodes {nodes}: {step.w1} and {step.w2} stay distinct in the whole manifold group "
            f"(distinct by step {step.distinctness}, kept off the edge groups by step {step.exclusion})"
        )
    if isinstance(step, Mod2Survivors):
        generators = ", ".join(step.pair["context"]["generators"]) or "g1, g2"
        survivors = ", ".join(f"[{word}]" for word in step.survivors) or "none"
        return f"{step.pair['argument_id']} on {generators}: classes of odd multiplicity {survivors}"
    if isinstance(step, ThreeDistinct):
        terms = ", ".join(step.pair["expansion"])
        support = ", ".join(str(reference) for reference in step.support) or "none"
        return f"{step.pair['argument_id']} terms {terms}: three pairwise distinct classes (supporting steps {support})"
    if isinstance(step, CoverStep):
        rewritten = f", re-fibring nodes {list(step.rewritten)}" if step.rewritten else ""
        return (
            f"{step.recipe} double cover designated at node {step.designated}{rewritten}: "
            f"{len(step.input_graph['nodes'])} pieces lift to {len(step.output_graph['nodes'])}"
        )
    if isinstance(step, Axiom):
        return f"axiom {step.kind}: {step.statement}. {step.citation}"
    return f"rule {step.proposition}: {step.citation}"


def _narrative(cert: Certificate, indent: str) -> list[str]:
    verdict = cert.verdict
    lines = [f"{indent}Verdict: {verdict.label()}", f"{indent}Spec digest: {cert.spec_digest}"]
    if verdict.pair is not None:
        pair = verdict.pair
        lines.append(
            f"{indent}Witness: a = [{pair['a']['class_word']}] ({pair['a']['construction_tag']}), "
            f"b = [{pair['b']['class_word']}] ({pair['b']['construction_tag']})"
        )
    lines.extend(f"{indent}[{index}] {_describe(index, step)}" for index, step in enumerate(cert.steps))
    lines.extend(f"{indent}Note: {note}" for note in cert.scope_notes)
    if cert.cover_certificate is not None:
        lines.append(f"{indent}On the cover:")
        lines.extend(_narrative(cert.cover_certificate, indent + "  "))
    return lines


def explain(cert: Certificate, spec: ManifoldSpec, *, require_minimal: bool = True) -> str:
    report = verify(cert, spec, require_minimal=require_minimal)
    if not report.ok:
        raise CertificateError("refusing to explain a certificate that does not verify")
    return "\n".join(_narrative(cert, "")) + "\n"
