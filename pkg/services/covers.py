"""Double covers of Seifert pieces and of whole torus decompositions."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

import networkx as nx

from services.decomposition import (
    DecompositionGraph,
    Gluing,
    Node,
    non_bridge_edges,
    validate_graph,
)
from services.presentations import SeifertPiece

logger = logging.getLogger(__name__)

ORIENTATION_COVER = "OrientationCover"
CONSTRUCTION_1 = "Construction1"
CONSTRUCTION_2 = "Construction2"
CONSTRUCTION_3 = "Construction3"
ASSEMBLY_B1 = "AssemblyB1"
ASSEMBLY_B2 = "AssemblyB2"
ASSEMBLY_B3 = "AssemblyB3"
CASE6_RECIPE = "Case6Recipe"

PIECE_CONSTRUCTIONS = (ORIENTATION_COVER, CONSTRUCTION_1, CONSTRUCTION_2, CONSTRUCTION_3)
ASSEMBLY_RECIPES = (ASSEMBLY_B1, ASSEMBLY_B2, ASSEMBLY_B3, CASE6_RECIPE)
RECIPES = PIECE_CONSTRUCTIONS + ASSEMBLY_RECIPES


class CoverError(ValueError):
    pass


class RecipeNotApplicableError(CoverError):
    pass


class CoverVerificationError(RuntimeError):
    pass


def orbifold_euler(piece: SeifertPiece) -> Fraction:
    surface = 2 - 2 * piece.genus if piece.base_orientable else 2 - piece.genus
    singular = sum((1 - Fraction(1, alpha) for alpha in piece.multiplicities), Fraction(0))
    return surface - piece.boundary_count - singular


def graph_euler(graph: DecompositionGraph) -> Fraction:
    return sum((orbifold_euler(piece) for _, piece in graph.seifert_nodes()), Fraction(0))


@dataclass(frozen=True)
class BoundaryPreimage:
    cover_piece: int
    cover_slot: int
    base_slot: int
    degree: int


@dataclass(frozen=True)
class CoverResult:
    total_pieces: tuple[SeifertPiece, ...]
    deck_action: str
    boundary_map: tuple[BoundaryPreimage, ...]
    construction_id: str
    base: SeifertPiece

    def preimages(self, base_slot: int) -> list[BoundaryPreimage]:
        found = [entry for entry in self.boundary_map if entry.base_slot == base_slot]
        return sorted(found, key=lambda entry: (entry.cover_piece, entry.cover_slot))


def verify_cover(result: CoverResult) -> None:
    cover_euler = sum((orbifold_euler(piece) for piece in result.total_pieces), Fraction(0))
    if cover_euler != 2 * orbifold_euler(result.base):
        raise CoverVerificationError(
            f"{result.construction_id}: cover Euler {cover_euler} is not twice {orbifold_euler(result.base)}"
        )
    for base_slot in range(result.base.boundary_count):
        degree = sum(entry.degree for entry in result.preimages(base_slot))
        if degree != 2:
            raise CoverVerificationError(f"{result.construction_id}: base slot {base_slot} is covered with degree {degree}")
    cover_slots = Counter((entry.cover_piece, entry.cover_slot) for entry in result.boundary_map)
    expected = {(index, slot) for index, piece in enumerate(result.total_pieces) for slot in range(piece.boundary_count)}
    if set(cover_slots) != expected or any(count != 1 for count in cover_slots.values()):
        raise CoverVerificationError(f"{result.construction_id}: cover boundary slots are not mapped one to one")


def _checked(result: CoverResult) -> CoverResult:
    verify_cover(result)
    return result


def _require(condition: bool, construction: str, message: str) -> None:
    if not condition:
        raise CoverError(f"{construction} needs {message}")


def orientation_double_cover(piece: SeifertPiece) -> CoverResult:
    _require(not piece.base_orientable, ORIENTATION_COVER, "a nonorientable base")
    b = piece.boundary_count
    cover = SeifertPiece(
        base_orientable=True,
        genus=piece.genus - 1,
        boundary_count=2 * b,
        fibers=piece.fibers + piece.fibers,
    )
    boundary_map = tuple(
        BoundaryPreimage(0, cover_slot, base_slot, 1)
        for base_slot in range(b)
        for cover_slot in (base_slot, b + base_slot)
    )
    return _checked(CoverResult((cover,), "orientation-reversing involution of the base", boundary_map, ORIENTATION_COVER, piece))


def _planar_orientable(piece: SeifertPiece, construction: str, boundary: int) -> None:
    _require(piece.base_orientable, construction, "an orientable base")
    _require(piece.genus == 0, construction, "a planar base")
    _require(piece.boundary_count == boundary, construction, f"exactly {boundary} boundary components")


def construction1(piece: SeifertPiece, *, involution_slot: int = 0) -> CoverResult:
    _planar_orientable(piece, CONSTRUCTION_1, 2)
    _require(piece.fibers == ((2, 1),), CONSTRUCTION_1, "a single singular fiber of type (2,1)")
    _require(involution_slot in (0, 1), CONSTRUCTION_1, "the involution slot to be 0 or 1")
    other = 1 - involution_slot
    cover = SeifertPiece(boundary_count=3)
    boundary_map = (
        BoundaryPreimage(0, 0, involution_slot, 2),
        BoundaryPreimage(0, 1, other, 1),
        BoundaryPreimage(0, 2, other, 1),
    )
    return _checked(CoverResult((cover,), "rotation by pi about the order-2 cone point", boundary_map, CONSTRUCTION_1, piece))


def construction2(piece: SeifertPiece) -> CoverResult:
    _planar_orientable(piece, CONSTRUCTION_2, 1)
    _require(piece.p == 2 and (2, 1) in piece.fibers, CONSTRUCTION_2, "fibers (2,1) and (r,s)")
    remaining = list(piece.fibers)
    remaining.remove((2, 1))
    partner = remaining[0]
    cover = SeifertPiece(boundary_count=1, fibers=(partner, partner))
    boundary_map = (BoundaryPreimage(0, 0, 0, 2),)
    return _checked(CoverResult((cover,), "rotation by pi about the order-2 cone point", boundary_map, CONSTRUCTION_2, piece))


def construction3(piece: SeifertPiece) -> CoverResult:
    _planar_orientable(piece, CONSTRUCTION_3, 1)
    _require(piece.fibers == ((2, 1), (2, 1)), CONSTRUCTION_3, "exactly two fibers of type (2,1)")
    cover = SeifertPiece(boundary_count=2)
    boundary_map = (BoundaryPreimage(0, 0, 0, 1), BoundaryPreimage(0, 1, 0, 1))
    return _checked(CoverResult((cover,), "rotation exchanging the two cone points", boundary_map, CONSTRUCTION_3, piece))


PIECE_COVERS: dict[str, Callable[[SeifertPiece], CoverResult]] = {
    ORIENTATION_COVER: orientation_double_cover,
    CONSTRUCTION_1: construction1,
    CONSTRUCTION_2: construction2,
    CONSTRUCTION_3: construction3,
}


def is_mobius_end(piece: Node) -> bool:
    return (
        isinstance(piece, SeifertPiece)
        and not piece.base_orientable
        and piece.genus == 1
        and piece.boundary_count == 1
        and piece.p == 0
    )


def refibre_mobius_ends(graph: DecompositionGraph) -> tuple[DecompositionGraph, tuple[int, ...]]:
    """Re-fibre twisted I-bundles over the Klein bottle over a disk with two (2,1) fibers."""
    rewritten = tuple(index for index, node in enumerate(graph.nodes) if is_mobius_end(node))
    if not rewritten:
        return graph, ()
    nodes = tuple(
        SeifertPiece(boundary_count=1, fibers=((2, 1), (2, 1))) if index in rewritten else node
        for index, node in enumerate(graph.nodes)
    )
    logger.debug("Re-fibred Mobius-band pieces %s", rewritten)
    return replace(graph, nodes=nodes), rewritten


def chain_order(graph: DecompositionGraph) -> list[int]:
    """Node indices along a path-shaped graph, starting from its lower-index end."""
    multigraph = graph.multigraph()
    if len(graph.nodes) < 2:
        raise RecipeNotApplicableError("a chain needs at least two pieces")
    simple = nx.Graph(multigraph)
    if multigraph.number_of_edges() != len(graph.nodes) - 1 or not nx.is_tree(simple):
        raise RecipeNotApplicableError("the decomposition graph is not a tree")
    if max(degree for _, degree in simple.degree()) > 2:
        raise RecipeNotApplicableError("the decomposition graph is not a chain")
    start = min(node for node, degree in simple.degree() if degree == 1)
    return list(nx.dfs_preorder_nodes(simple, start))


def _seifert(graph: DecompositionGraph, index: int, recipe: str) -> SeifertPiece:
    node = graph.nodes[index]
    if not isinstance(node, SeifertPiece):
        raise RecipeNotApplicableError(f"{recipe}: node {index} is not a Seifert piece")
    return node


def _odd_partner(piece: SeifertPiece) -> tuple[int, int] | None:
    if not (piece.base_orientable and piece.genus == 0 and piece.boundary_count == 1 and piece.p == 2):
        return None
    if (2, 1) not in piece.fibers:
        return None
    remaining = list(piece.fibers)
    remaining.remove((2, 1))
    return remaining[0]


@dataclass(frozen=True)
class RecipeChoice:
    recipe: str
    designated: int


def select_recipe(graph: DecompositionGraph) -> RecipeChoice:
    order = chain_order(graph)
    ends = sorted({order[0], order[-1]})
    nonorientable = [index for index in ends if not _seifert(graph, index, "recipe selection").base_orientable]
    if nonorientable:
        return RecipeChoice(CASE6_RECIPE, nonorientable[0])
    odd = []
    for index in ends:
        partner = _odd_partner(_seifert(graph, index, "recipe selection"))
        if partner is not None and partner[0] != 2:
            odd.append(index)
    if odd:
        return RecipeChoice(ASSEMBLY_B1 if len(order) >= 3 else ASSEMBLY_B2, odd[0])
    return RecipeChoice(ASSEMBLY_B3, ends[0])


def _neighbor_slot(graph: DecompositionGraph, node: int, neighbor: int) -> int:
    for edge in graph.edges:
        if edge.node_a == node and edge.node_b == neighbor:
            return edge.slot_b
        if edge.node_b == node and edge.node_a == neighbor:
            return edge.slot_a
    raise RecipeNotApplicableError(f"nodes {node} and {neighbor} are not glued")


def _fail(recipe: str, message: str) -> RecipeNotApplicableError:
    return RecipeNotApplicableError(f"{recipe}: {message}")


def _plan(graph: DecompositionGraph, recipe: str, designated: int) -> dict[int, CoverResult]:
    """Which base nodes are replaced by a single-piece cover, per recipe."""
    if not 0 <= designated < len(graph.nodes):
        raise _fail(recipe, f"node {designated} does not exist")
    if recipe in PIECE_CONSTRUCTIONS:
        piece = _seifert(graph, designated, recipe)
        try:
            return {designated: PIECE_COVERS[recipe](piece)}
        except CoverError as exc:
            raise _fail(recipe, str(exc)) from exc
    order = chain_order(graph)
    ends = (order[0], order[-1])
    if designated not in ends:
        raise _fail(recipe, f"node {designated} is not an end of the chain")
    far_end = ends[1] if designated == ends[0] else ends[0]
    piece = _seifert(graph, designated, recipe)
    if recipe == CASE6_RECIPE:
        if piece.base_orientable or piece.boundary_count != 1:
            raise _fail(recipe, f"node {designated} is not a nonorientable piece with one boundary torus")
        return {designated: orientation_double_cover(piece)}
    partner = _odd_partner(piece)
    if recipe in (ASSEMBLY_B1, ASSEMBLY_B2):
        if partner is None or partner[0] == 2:
            raise _fail(recipe, f"node {designated} does not carry fibers (2,1) and (r,s) with r != 2")
        if recipe == ASSEMBLY_B2:
            if len(order) != 2:
                raise _fail(recipe, "the chain must have exactly two pieces")
            other = _seifert(graph, far_end, recipe)
            if _odd_partner(other) is None:
                raise _fail(recipe, f"node {far_end} does not carry fibers (2,1) and (s,t)")
            return {designated: construction2(piece), far_end: construction2(other)}
        if len(order) < 3:
            raise _fail(recipe, "the chain must have at least three pieces")
        second = order[1] if designated == order[0] else order[-2]
        middle = _seifert(graph, second, recipe)
        if not (middle.base_orientable and middle.genus == 0 and middle.boundary_count == 2 and middle.fibers == ((2, 1),)):
            raise _fail(recipe, f"node {second} is not a two-boundary piece with a single (2,1) fiber")
        slot = _neighbor_slot(graph, designated, second)
        return {designated: construction2(piece), second: construction1(middle, involution_slot=slot)}
    if recipe == ASSEMBLY_B3:
        other = _seifert(graph, far_end, recipe)
        for index, end in ((designated, piece), (far_end, other)):
            if not (end.base_orientable and end.genus == 0 and end.boundary_count == 1 and end.fibers == ((2, 1), (2, 1))):
                raise _fail(recipe, f"node {index} is not a one-boundary piece with two (2,1) fibers")
        return {designated: construction3(piece), far_end: construction3(other)}
    raise _fail(recipe, "unknown recipe")


@dataclass(frozen=True)
class CoverMetadata:
    recipe: str
    designated: int
    rewritten: tuple[int, ...]
    origins: tuple[tuple[int, str], ...]
    base_euler: str
    cover_euler: str


def assemble_double_cover(
    graph: DecompositionGraph,
    recipe: str,
    *,
    designated: int | None = None,
    rewritten: tuple[int, ...] = (),
) -> tuple[DecompositionGraph, CoverMetadata]:
    """Build the double cover of `graph` prescribed by `recipe`.

    Nodes covered by a construction become a single cover piece; every other
    node lifts to two copies. Base edges lift to one edge between
    degree-two preimages or to two edges between degree-one preimages.
    """
    if recipe not in RECIPES:
        raise RecipeNotApplicableError(f"unknown recipe {recipe!r}")
    if designated is None:
        designated = select_recipe(graph).designated if recipe in ASSEMBLY_RECIPES else 0
    plans = _plan(graph, recipe, designated)
    nodes: list[Node] = []
    origins: list[tuple[int, str]] = []
    lifts: dict[int, list[int]] = {}
    for index, node in enumerate(graph.nodes):
        if index in plans:
            lifts[index] = [len(nodes)]
            nodes.append(plans[index].total_pieces[0])
            origins.append((index, plans[index].construction_id))
        else:
            lifts[index] = [len(nodes), len(nodes) + 1]
            nodes.extend([node, node])
            origins.extend([(index, "sheet0"), (index, "sheet1")])

    def preimages(node: int, slot: int) -> list[tuple[int, int, int]]:
        if node in plans:
            return [(lifts[node][0], entry.cover_slot, entry.degree) for entry in plans[node].preimages(slot)]
        return [(lift, slot, 1) for lift in lifts[node]]

    edges: list[Gluing] = []
    for index, edge in enumerate(graph.edges):
        side_a = preimages(edge.node_a, edge.slot_a)
        side_b = preimages(edge.node_b, edge.slot_b)
        degrees_a = [degree for *_, degree in side_a]
        degrees_b = [degree for *_, degree in side_b]
        if degrees_a != degrees_b:
            raise CoverVerificationError(f"{recipe}: edge {index} lifts with degrees {degrees_a} against {degrees_b}")
        for (node_a, slot_a, _), (node_b, slot_b, _) in zip(side_a, side_b):
            edges.append(Gluing(node_a, slot_a, node_b, slot_b))
    cover = DecompositionGraph(tuple(nodes), tuple(edges), closed=graph.closed)
    base_euler, cover_euler = graph_euler(graph), graph_euler(cover)
    if cover_euler != 2 * base_euler:
        raise CoverVerificationError(f"{recipe}: cover Euler {cover_euler} is not twice {base_euler}")
    violations = validate_graph(cover, require_minimal=False, where="cover")
    if violations:
        raise CoverVerificationError(f"{recipe}: " + "; ".join(v.format() for v in violations))
    if recipe == ASSEMBLY_B3 and not non_bridge_edges(cover):
        raise CoverVerificationError(f"{recipe}: the cover has no non-separating torus")
    logger.info("Assembled %s cover at node %d: %d pieces, %d gluings", recipe, designated, len(nodes), len(edges))
    metadata = CoverMetadata(recipe, designated, tuple(rewritten), tuple(origins), str(base_euler), str(cover_euler))
    return cover, metadata

