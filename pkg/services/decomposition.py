"""Manifold descriptions: prime summands, torus-decomposition graphs and their validation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

import networkx as nx

from services.presentations import SeifertPiece

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperbolicPiece:
    cusp_count: int = 0


Node = Union[SeifertPiece, HyperbolicPiece]


class Gluing(NamedTuple):
    node_a: int
    slot_a: int
    node_b: int
    slot_b: int


def slot_count(node: Node) -> int:
    if isinstance(node, HyperbolicPiece):
        return node.cusp_count
    return node.boundary_count


@dataclass(frozen=True)
class DecompositionGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Gluing, ...] = ()
    closed: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(Gluing(*edge) for edge in self.edges))

    def multigraph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(len(self.nodes)))
        for index, edge in enumerate(self.edges):
            graph.add_edge(edge.node_a, edge.node_b, key=index)
        return graph

    def edges_at(self, node: int) -> list[int]:
        return [index for index, edge in enumerate(self.edges) if node in (edge.node_a, edge.node_b)]

    def neighbors(self, node: int) -> list[int]:
        result: list[int] = []
        for index in self.edges_at(node):
            edge = self.edges[index]
            other = edge.node_b if edge.node_a == node else edge.node_a
            if other not in result:
                result.append(other)
        return result

    def seifert_nodes(self) -> Iterator[tuple[int, SeifertPiece]]:
        for index, node in enumerate(self.nodes):
            if isinstance(node, SeifertPiece):
                yield index, node

    @property
    def all_seifert(self) -> bool:
        return all(isinstance(node, SeifertPiece) for node in self.nodes)


@dataclass(frozen=True)
class S2xS1:
    pass


@dataclass(frozen=True)
class FinitePi1:
    order: int = 1
    fake: bool = False

    @property
    def is_trivial(self) -> bool:
        return self.order == 1


@dataclass(frozen=True)
class ClosedHyperbolic:
    pass


@dataclass(frozen=True)
class Irreducible:
    graph: DecompositionGraph

    @property
    def closed(self) -> bool:
        return self.graph.closed


Summand = Union[S2xS1, FinitePi1, ClosedHyperbolic, Irreducible]


@dataclass(frozen=True)
class ManifoldSpec:
    summands: tuple[Summand, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "summands", tuple(self.summands))

    def nontrivial_summands(self) -> list[tuple[int, Summand]]:
        """Summands with nontrivial fundamental group, in input order."""
        return [
            (index, summand)
            for index, summand in enumerate(self.summands)
            if not (isinstance(summand, FinitePi1) and summand.is_trivial)
        ]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def format(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(violation.code for violation in self.violations)


class ValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(violation.format() for violation in report.violations))


class ClassificationError(RuntimeError):
    pass


def validate_graph(graph: DecompositionGraph, *, require_minimal: bool = True, where: str = "graph") -> list[Violation]:
    violations: list[Violation] = []
    if not graph.nodes:
        return [Violation("EmptySpec", f"{where} has no pieces")]
    used: set[tuple[int, int]] = set()
    for index, edge in enumerate(graph.edges):
        for node, slot in ((edge.node_a, edge.slot_a), (edge.node_b, edge.slot_b)):
            if not 0 <= node < len(graph.nodes):
                violations.append(Violation("SlotMismatch", f"{where} edge {index} names missing node {node}"))
                continue
            if not 0 <= slot < slot_count(graph.nodes[node]):
                violations.append(
                    Violation(
                        "SlotMismatch",
                        f"{where} edge {index} uses slot {slot} of node {node}, which has {slot_count(graph.nodes[node])}",
                    )
                )
                continue
            if (node, slot) in used:
                violations.append(Violation("SlotReused", f"{where} slot {slot} of node {node} is glued twice"))
            used.add((node, slot))
    if graph.closed:
        for node_index, node in enumerate(graph.nodes):
            free = [slot for slot in range(slot_count(node)) if (node_index, slot) not in used]
            if free:
                violations.append(
                    Violation("DanglingBoundary", f"{where} node {node_index} leaves boundary slots {free} unglued")
                )
    if not any(v.code == "SlotMismatch" for v in violations) and not nx.is_connected(graph.multigraph()):
        violations.append(Violation("Disconnected", f"{where} is not connected"))
    if require_minimal and graph.edges:
        for node_index, piece in graph.seifert_nodes():
            if piece.base_orientable and piece.genus == 0 and piece.boundary_count + piece.p <= 2:
                violations.append(
                    Violation(
                        "MinimalityViolation",
                        f"{where} node {node_index} has b+p = {piece.boundary_count + piece.p} over a disk or annulus base",
                    )
                )
    return violations


def validate(spec: ManifoldSpec, *, require_minimal: bool = True, require_closed: bool = False) -> ValidationReport:
    if not spec.summands:
        return ValidationReport((Violation("EmptySpec", "no summands"),))
    violations: list[Violation] = []
    for index, summand in enumerate(spec.summands):
        where = f"summand {index}"
        if isinstance(summand, FinitePi1) and summand.order < 1:
            violations.append(Violation("InvalidOrder", f"{where} has order {summand.order}"))
        elif isinstance(summand, Irreducible):
            violations.extend(validate_graph(summand.graph, require_minimal=require_minimal, where=where))
            if require_closed and not summand.closed:
                violations.append(Violation("OpenManifold", f"{where} has unglued boundary by declaration"))
    report = ValidationReport(tuple(violations))
    if not report.ok:
        logger.debug("Validation found %s", ", ".join(report.codes))
    return report


def ensure_valid(spec: ManifoldSpec, **options: bool) -> None:
    report = validate(spec, **options)
    if not report.ok:
        raise ValidationError(report)


def non_bridge_edges(graph: DecompositionGraph) -> tuple[int, ...]:
    """Edge indices whose removal keeps their endpoints connected."""
    multigraph = graph.multigraph()
    found: list[int] = []
    for index, edge in enumerate(graph.edges):
        if edge.node_a == edge.node_b:
            found.append(index)
            continue
        trimmed = multigraph.copy()
        trimmed.remove_edge(edge.node_a, edge.node_b, key=index)
        if nx.has_path(trimmed, edge.node_a, edge.node_b):
            found.append(index)
    return tuple(found)


@dataclass(frozen=True)
class TorusWitness:
    found: bool
    kind: str | None = None
    index: int | None = None

    def __bool__(self) -> bool:
        return self.found


def has_nonseparating_torus(graph: DecompositionGraph) -> TorusWitness:
    cycle_edges = non_bridge_edges(graph)
    if cycle_edges:
        return TorusWitness(True, "edge", cycle_edges[0])
    for index, piece in graph.seifert_nodes():
        if piece.base_orientable and piece.genus >= 1:
            return TorusWitness(True, "piece", index)
    return TorusWitness(False)


@dataclass(frozen=True)
class PieceCase:
    case: int
    piece_index: int
    p: int
    p_large: int
    b: int
    multiplicities: tuple[int, ...]


def _case_of(case: int, index: int, piece: SeifertPiece) -> PieceCase:
    return PieceCase(case, index, piece.p, piece.p_large, piece.boundary_count, piece.multiplicities)


def classify_pieces(graph: DecompositionGraph) -> PieceCase:
    """First matching gluing case, scanning cases in order and pieces by index."""
    if not graph.all_seifert:
        raise ClassificationError("piece classification needs an all-Seifert graph")
    pieces = list(graph.seifert_nodes())
    predicates = (
        (1, lambda s: s.base_orientable and s.boundary_count >= 3),
        (2, lambda s: not s.base_orientable and s.boundary_count >= 2),
        (3, lambda s: s.base_orientable and s.p + s.boundary_count >= 4),
        (
            4,
            lambda s: s.base_orientable
            and s.p + s.boundary_count == 3
            and 1 <= s.boundary_count <= 2
            and 2 not in s.multiplicities,
        ),
    )
    for case, predicate in predicates:
        for index, piece in pieces:
            if predicate(piece):
                return _case_of(case, index, piece)
    if all(
        piece.base_orientable and piece.p + piece.boundary_count == 3 and 2 in piece.multiplicities
        for _, piece in pieces
    ):
        return _case_of(5, pieces[0][0], pieces[0][1])
    for index, piece in pieces:
        if not piece.base_orientable and piece.boundary_count == 1:
            return _case_of(6, index, piece)
    raise ClassificationError("no gluing case applies to this graph")
