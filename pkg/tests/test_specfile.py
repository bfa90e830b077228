from __future__ import annotations

import json
from pathlib import Path

import pytest

from loopwitness.corpus import build_corpus
from services.decomposition import Irreducible, ValidationError
from services.presentations import SeifertPiece
from services.specfile import (
    SpecDocument,
    SpecParseError,
    canonical_json,
    parse_document,
    read_document,
    spec_to_dict,
    write_document,
)


def _document(summands: list) -> str:
    return json.dumps({"version": "1", "manifold": {"summands": summands}})


def _seifert(**fields) -> dict:
    return {"kind": "seifert", **fields}


def test_corpus_documents_parse_back(tmp_path: Path) -> None:
    for entry in build_corpus().entries:
        path = tmp_path / f"{entry.name}.json"
        write_document(path, entry.document())
        assert read_document(path).spec == entry.spec


def test_canonical_json_is_sorted_and_terminated() -> None:
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_seifert_node_fields() -> None:
    text = _document(
        [
            {
                "kind": "irreducible",
                "nodes": [
                    _seifert(genus=1, base_orientable=False, boundary=1, fibers=[[3, 1]], deltas=[-1]),
                    _seifert(boundary=1, fibers=[[2, 1], [2, 1]]),
                ],
                "edges": [[0, 0, 1, 0]],
            }
        ]
    )
    summand = parse_document(text).spec.summands[0]
    assert isinstance(summand, Irreducible)
    assert summand.graph.nodes[0] == SeifertPiece(
        base_orientable=False, genus=1, boundary_count=1, fibers=((3, 1),), fiber_signs=(-1,)
    )
    assert summand.graph.closed


def test_default_delta_fills_nonorientable_signs() -> None:
    text = _document([{"kind": "irreducible", "nodes": [_seifert(base_orientable=False, genus=2, fibers=[[3, 1]])]}])
    node = parse_document(text, default_delta=-1).spec.summands[0].graph.nodes[0]
    assert node.fiber_signs == (-1,)
    assert parse_document(text).spec.summands[0].graph.nodes[0].fiber_signs is None


@pytest.mark.parametrize(
    ("text", "field"),
    [
        ("{not json", "document"),
        (json.dumps({"version": "2", "manifold": {"summands": []}}), "version"),
        (json.dumps({"version": "1"}), "manifold"),
        (_document([{"kind": "lens"}]), "manifold.summands[0].kind"),
        (_document([{"kind": "s2xs1", "extra": 1}]), "manifold.summands[0].extra"),
        (_document([{"kind": "finite_pi1", "order": "5"}]), "manifold.summands[0].order"),
        (
            _document([{"kind": "irreducible", "nodes": [_seifert(fibers=[[2]])]}]),
            "manifold.summands[0].nodes[0].fibers[0]",
        ),
        (
            _document([{"kind": "irreducible", "nodes": [_seifert()], "edges": [[0, 0, 0]]}]),
            "manifold.summands[0].edges[0]",
        ),
    ],
)
def test_parse_errors_name_the_field(text: str, field: str) -> None:
    with pytest.raises(SpecParseError) as excinfo:
        parse_document(text)
    assert excinfo.value.field == field


def test_bad_seifert_invariants_are_validation_errors() -> None:
    text = _document([{"kind": "irreducible", "nodes": [_seifert(fibers=[[3, 3]])]}])
    with pytest.raises(ValidationError) as excinfo:
        parse_document(text)
    assert excinfo.value.report.codes == ("InvalidSeifertData",)


def test_missing_file_is_a_parse_error(tmp_path: Path) -> None:
    with pytest.raises(SpecParseError):
        read_document(tmp_path / "absent.json")


def test_covering_metadata_is_kept() -> None:
    spec = build_corpus().get("b3-pair").spec
    document = SpecDocument(spec, {"recipe": "AssemblyB3"})
    parsed = parse_document(document.dumps())
    assert parsed.covering == {"recipe": "AssemblyB3"}
    assert spec_to_dict(parsed.spec) == spec_to_dict(spec)
