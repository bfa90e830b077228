"""Reading and writing manifold spec documents."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Mapping

from services.covers import CoverMetadata
from services.decomposition import (
    ClosedHyperbolic,
    DecompositionGraph,
    FinitePi1,
    Gluing,
    HyperbolicPiece,
    Irreducible,
    ManifoldSpec,
    Node,
    S2xS1,
    Summand,
    ValidationError,
    ValidationReport,
    Violation,
)
from services.presentations import SeifertDataError, SeifertPiece

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"


class SpecParseError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def canonical_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _expect_int(value: Any, field: str, *, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecParseError(field, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise SpecParseError(field, f"expected at least {minimum}, got {value}")
    return value


def _expect_bool(value: Any, field: str) -> bool:
    if not isinstance(value, bool):
        raise SpecParseError(field, f"expected true or false, got {value!r}")
    return value


def _expect_list(value: Any, field: str) -> list:
    if not isinstance(value, list):
        raise SpecParseError(field, f"expected a list, got {type(value).__name__}")
    return value


def _expect_object(value: Any, field: str, allowed: set[str]) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise SpecParseError(field, f"expected an object, got {type(value).__name__}")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise SpecParseError(f"{field}.{unknown[0]}", "unknown field")
    return value


def _node_from_dict(data: Any, field: str, default_delta: int = 1) -> Node:
    if not isinstance(data, dict):
        raise SpecParseError(field, "expected an object")
    kind = data.get("kind")
    if kind == "hyperbolic":
        data = _expect_object(data, field, {"kind", "cusps"})
        return HyperbolicPiece(_expect_int(data.get("cusps", 0), f"{field}.cusps", minimum=0))
    if kind != "seifert":
        raise SpecParseError(f"{field}.kind", f"expected 'seifert' or 'hyperbolic', got {kind!r}")
    data = _expect_object(data, field, {"kind", "base_orientable", "genus", "boundary", "fibers", "deltas"})
    fibers = []
    for index, entry in enumerate(_expect_list(data.get("fibers", []), f"{field}.fibers")):
        entry_field = f"{field}.fibers[{index}]"
        if not isinstance(entry, list) or len(entry) != 2:
            raise SpecParseError(entry_field, "expected [alpha, beta]")
        fibers.append((_expect_int(entry[0], f"{entry_field}[0]"), _expect_int(entry[1], f"{entry_field}[1]")))
    deltas = None
    base_orientable = _expect_bool(data.get("base_orientable", True), f"{field}.base_orientable")
    if data.get("deltas") is None and not base_orientable and fibers and default_delta != 1:
        deltas = (default_delta,) * len(fibers)
    elif data.get("deltas") is not None:
        deltas = tuple(
            _expect_int(value, f"{field}.deltas[{index}]")
            for index, value in enumerate(_expect_list(data["deltas"], f"{field}.deltas"))
        )
    try:
        return SeifertPiece(
            base_orientable=base_orientable,
            genus=_expect_int(data.get("genus", 0), f"{field}.genus"),
            boundary_count=_expect_int(data.get("boundary", 0), f"{field}.boundary"),
            fibers=tuple(fibers),
            fiber_signs=deltas,
        )
    except SeifertDataError as exc:
        raise ValidationError(ValidationReport((Violation("InvalidSeifertData", f"{field}: {exc}"),))) from exc


def _summand_from_dict(data: Any, field: str, default_delta: int = 1) -> Summand:
    if not isinstance(data, dict):
        raise SpecParseError(field, "expected an object")
    kind = data.get("kind")
    if kind == "s2xs1":
        _expect_object(data, field, {"kind"})
        return S2xS1()
    if kind == "closed_hyperbolic":
        _expect_object(data, field, {"kind"})
        return ClosedHyperbolic()
    if kind == "finite_pi1":
        data = _expect_object(data, field, {"kind", "order", "fake"})
        return FinitePi1(
            order=_expect_int(data.get("order", 1), f"{field}.order"),
            fake=_expect_bool(data.get("fake", False), f"{field}.fake"),
        )
    if kind != "irreducible":
        raise SpecParseError(f"{field}.kind", f"unknown summand kind {kind!r}")
    data = _expect_object(data, field, {"kind", "closed", "nodes", "edges"})
    nodes = tuple(
        _node_from_dict(node, f"{field}.nodes[{index}]", default_delta)
        for index, node in enumerate(_expect_list(data.get("nodes", []), f"{field}.nodes"))
    )
    edges = []
    for index, edge in enumerate(_expect_list(data.get("edges", []), f"{field}.edges")):
        edge_field = f"{field}.edges[{index}]"
        if not isinstance(edge, list) or len(edge) != 4:
            raise SpecParseError(edge_field, "expected [node, slot, node, slot]")
        edges.append(Gluing(*(_expect_int(value, f"{edge_field}[{i}]", minimum=0) for i, value in enumerate(edge))))
    closed = _expect_bool(data.get("closed", True), f"{field}.closed")
    return Irreducible(DecompositionGraph(nodes, tuple(edges), closed=closed))


def spec_from_dict(data: Any, *, default_delta: int = 1) -> ManifoldSpec:
    """Build a spec from the `manifold` section.

    `default_delta` fills the fiber signs of nonorientable pieces that list none.
    """
    data = _expect_object(data, "manifold", {"summands"})
    summands = _expect_list(data.get("summands"), "manifold.summands")
    return ManifoldSpec(
        tuple(_summand_from_dict(summand, f"manifold.summands[{index}]", default_delta) for index, summand in enumerate(summands))
    )


def node_to_dict(node: Node) -> dict[str, Any]:
    if isinstance(node, HyperbolicPiece):
        return {"kind": "hyperbolic", "cusps": node.cusp_count}
    data: dict[str, Any] = {
        "kind": "seifert",
        "base_orientable": node.base_orientable,
        "genus": node.genus,
        "boundary": node.boundary_count,
        "fibers": [[alpha, beta] for alpha, beta in node.fibers],
    }
    if node.fiber_signs is not None:
        data["deltas"] = list(node.fiber_signs)
    return data


def graph_to_dict(graph: DecompositionGraph) -> dict[str, Any]:
    return {
        "kind": "irreducible",
        "closed": graph.closed,
        "nodes": [node_to_dict(node) for node in graph.nodes],
        "edges": [list(edge) for edge in graph.edges],
    }


def summand_to_dict(summand: Summand) -> dict[str, Any]:
    if isinstance(summand, S2xS1):
        return {"kind": "s2xs1"}
    if isinstance(summand, ClosedHyperbolic):
        return {"kind": "closed_hyperbolic"}
    if isinstance(summand, FinitePi1):
        return {"kind": "finite_pi1", "order": summand.order, "fake": summand.fake}
    return graph_to_dict(summand.graph)


def spec_to_dict(spec: ManifoldSpec) -> dict[str, Any]:
    return {"summands": [summand_to_dict(summand) for summand in spec.summands]}


def covering_to_dict(metadata: CoverMetadata) -> dict[str, Any]:
    data = asdict(metadata)
    data["rewritten"] = list(metadata.rewritten)
    data["origins"] = [[node, tag] for node, tag in metadata.origins]
    return data


@dataclass(frozen=True)
class SpecDocument:
    spec: ManifoldSpec
    covering: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"version": FORMAT_VERSION, "manifold": spec_to_dict(self.spec)}
        if self.covering is not None:
            data["covering"] = self.covering
        return data

    @property
    def require_minimal(self) -> bool:
        # Covers of a minimal decomposition may carry b+p = 2 pieces.
        return self.covering is None

    def dumps(self) -> str:
        return canonical_json(self.to_dict())


def parse_document(text: str, *, default_delta: int = 1) -> SpecDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError("document", f"not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    data = _expect_object(data, "document", {"version", "manifold", "covering"})
    if data.get("version") != FORMAT_VERSION:
        raise SpecParseError("version", f"expected {FORMAT_VERSION!r}, got {data.get('version')!r}")
    if "manifold" not in data:
        raise SpecParseError("manifold", "missing")
    covering = data.get("covering")
    if covering is not None and not isinstance(covering, dict):
        raise SpecParseError("covering", "expected an object")
    return SpecDocument(spec_from_dict(data["manifold"], default_delta=default_delta), covering)


def read_document(path: Path, *, default_delta: int = 1) -> SpecDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(str(path), f"cannot read file ({exc.strerror})") from exc
    return parse_document(text, default_delta=default_delta)


def write_document(path: Path, document: SpecDocument) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.dumps(), encoding="utf-8")
    logger.debug("Wrote spec document %s", path)
