"""Built-in example manifolds with their expected verdicts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

from services.decomposition import (
    ClosedHyperbolic,
    DecompositionGraph,
    FinitePi1,
    Gluing,
    HyperbolicPiece,
    Irreducible,
    ManifoldSpec,
    S2xS1,
)
from services.presentations import SeifertPiece
from services.specfile import SpecDocument


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    category: str
    spec: ManifoldSpec
    verdict: str
    argument_id: str | None = None
    recipe: str | None = None

    def document(self) -> SpecDocument:
        return SpecDocument(self.spec)


@dataclass(frozen=True)
class Corpus:
    entries: List[CorpusEntry]

    def by_category(self) -> Dict[str, List[CorpusEntry]]:
        grouped: Dict[str, List[CorpusEntry]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.category, []).append(entry)
        return grouped

    def get(self, name: str) -> CorpusEntry:
        for entry in self.entries:
            if entry.name == name:
                return entry
        raise KeyError(name)


def _graph(*nodes, edges=()) -> ManifoldSpec:
    return ManifoldSpec((Irreducible(DecompositionGraph(tuple(nodes), tuple(Gluing(*edge) for edge in edges))),))


def _disk(*fibers: tuple[int, int], boundary: int = 1) -> SeifertPiece:
    return SeifertPiece(boundary_count=boundary, fibers=tuple(fibers))


def build_corpus() -> Corpus:
    trivial, on_m, on_cover = "TRIVIAL", "NONTRIVIAL_ON_M", "NONTRIVIAL_ON_DOUBLE_COVER"
    entries = [
        CorpusEntry("closed-hyperbolic", "summands", ManifoldSpec((ClosedHyperbolic(),)), trivial),
        CorpusEntry("hyperbolic-piece", "summands", _graph(HyperbolicPiece(0)), trivial),
        CorpusEntry(
            "hyperbolic-fake-sphere",
            "summands",
            ManifoldSpec((ClosedHyperbolic(), FinitePi1(1, fake=True))),
            trivial,
        ),
        CorpusEntry("s2xs1", "summands", ManifoldSpec((S2xS1(),)), on_m, "NonseparatingSphere"),
        CorpusEntry(
            "lens-sum", "summands", ManifoldSpec((FinitePi1(8), FinitePi1(8))), on_m, "ConnectedSum"
        ),
        CorpusEntry(
            "s2xs1-hyperbolic-sum", "summands", ManifoldSpec((S2xS1(), ClosedHyperbolic())), on_m, "ConnectedSum"
        ),
        CorpusEntry("lens-space", "summands", ManifoldSpec((FinitePi1(5),)), on_m),
        CorpusEntry("three-sphere", "summands", ManifoldSpec((FinitePi1(1),)), on_m),
        CorpusEntry(
            "poincare-sphere", "closed-seifert", _graph(SeifertPiece(fibers=((2, 1), (3, 1), (5, 1)))), on_m
        ),
        CorpusEntry(
            "brieskorn-237",
            "closed-seifert",
            _graph(SeifertPiece(fibers=((2, 1), (3, 1), (7, 1)))),
            on_m,
            "ClosedSeifert",
        ),
        CorpusEntry(
            "torus-base-one-fiber",
            "closed-seifert",
            _graph(SeifertPiece(genus=1, fibers=((2, 1),))),
            on_m,
            "ClosedSeifert",
        ),
        CorpusEntry(
            "klein-base",
            "closed-seifert",
            _graph(SeifertPiece(base_orientable=False, genus=2)),
            on_cover,
            "ClosedSeifert",
            "OrientationCover",
        ),
        CorpusEntry(
            "case1-star",
            "seifert-tree",
            _graph(
                _disk(boundary=3),
                _disk((2, 1), (3, 1)),
                _disk((2, 1), (3, 1)),
                _disk((2, 1), (3, 1)),
                edges=((0, 0, 1, 0), (0, 1, 2, 0), (0, 2, 3, 0)),
            ),
            on_m,
            "FigureEight",
        ),
        CorpusEntry(
            "case2-crosscap",
            "seifert-tree",
            _graph(
                _disk((3, 1), (3, 1)),
                SeifertPiece(base_orientable=False, genus=1, boundary_count=2),
                _disk((3, 1), (3, 1)),
                edges=((0, 0, 1, 0), (1, 1, 2, 0)),
            ),
            on_m,
            "NonorientableFigureEight",
        ),
        CorpusEntry(
            "case3-two-curves",
            "seifert-tree",
            _graph(_disk((2, 1), (3, 1), (5, 1)), _disk((2, 1), (2, 1)), edges=((0, 0, 1, 0),)),
            on_m,
            "TwoCurves",
        ),
        CorpusEntry(
            "case4-figure-eight",
            "seifert-tree",
            _graph(_disk((3, 1), (5, 2)), _disk((2, 1), (2, 1)), edges=((0, 0, 1, 0),)),
            on_m,
            "FigureEight",
        ),
        CorpusEntry(
            "b1-chain",
            "cover",
            _graph(
                _disk((2, 1), (3, 1)),
                _disk((2, 1), boundary=2),
                _disk((2, 1), (3, 1)),
                edges=((0, 0, 1, 0), (1, 1, 2, 0)),
            ),
            on_cover,
            "FigureEight",
            "AssemblyB1",
        ),
        CorpusEntry(
            "b2-pair",
            "cover",
            _graph(_disk((2, 1), (3, 1)), _disk((2, 1), (5, 1)), edges=((0, 0, 1, 0),)),
            on_cover,
            "FigureEight",
            "AssemblyB2",
        ),
        CorpusEntry(
            "b3-pair",
            "cover",
            _graph(_disk((2, 1), (2, 1)), _disk((2, 1), (2, 1)), edges=((0, 0, 1, 0),)),
            on_cover,
            "NonseparatingTorus",
            "AssemblyB3",
        ),
        CorpusEntry(
            "case6-crosscap-end",
            "cover",
            _graph(
                SeifertPiece(base_orientable=False, genus=1, boundary_count=1, fibers=((3, 1),)),
                _disk((2, 1), (2, 1)),
                edges=((0, 0, 1, 0),),
            ),
            on_cover,
            "TwoCurves",
            "Case6Recipe",
        ),
        CorpusEntry(
            "mobius-end",
            "cover",
            _graph(
                SeifertPiece(base_orientable=False, genus=1, boundary_count=1),
                _disk((2, 1), (2, 1)),
                edges=((0, 0, 1, 0),),
            ),
            on_cover,
            "NonseparatingTorus",
            "AssemblyB3",
        ),
        CorpusEntry(
            "hyperbolic-seifert",
            "hyperbolic",
            _graph(HyperbolicPiece(1), _disk((2, 1), (3, 1)), edges=((0, 0, 1, 0),)),
            on_m,
            "HyperbolicGluing",
        ),
        CorpusEntry(
            "hyperbolic-pair",
            "hyperbolic",
            _graph(HyperbolicPiece(1), HyperbolicPiece(1), edges=((0, 0, 1, 0),)),
            on_m,
            "HyperbolicGluing",
        ),
        CorpusEntry(
            "parallel-gluing",
            "hyperbolic",
            _graph(HyperbolicPiece(2), _disk((3, 1), boundary=2), edges=((0, 0, 1, 0), (0, 1, 1, 1))),
            on_m,
            "NonseparatingTorus",
        ),
    ]
    return Corpus(entries)
