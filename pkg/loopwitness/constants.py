"""Immutable tables shared by the decision engine, the verifier and the CLI."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ExitCodes:
    ok: int = 0
    parse: int = 2
    validation: int = 3
    internal: int = 4
    verify_failed: int = 5


@dataclass(frozen=True)
class DecisionLimits:
    cover_depth: int = 2
    oracle_bound: int = 12


EXIT_CODES = ExitCodes()
DECISION_LIMITS = DecisionLimits()

PACKAGE_ROOT = Path(__file__).resolve().parent

HYPERBOLIC_MALNORMALITY = "HyperbolicMalnormality"
SEIFERT_CENTRALIZER_CHOICE = "SeifertCentralizerChoice"
HOMOLOGICAL_INTERSECTION = "HomologicalIntersection"
FINITE_FUNDAMENTAL_GROUP = "FiniteFundamentalGroup"
ABSTRACT_FACTOR_ORDER = "AbstractFactorOrder"
CENTRAL_FIBER = "CentralFiber"

AXIOM_KINDS = (
    HYPERBOLIC_MALNORMALITY,
    SEIFERT_CENTRALIZER_CHOICE,
    HOMOLOGICAL_INTERSECTION,
    FINITE_FUNDAMENTAL_GROUP,
    ABSTRACT_FACTOR_ORDER,
    CENTRAL_FIBER,
)

AXIOM_CITATIONS = {
    HYPERBOLIC_MALNORMALITY: (
        "A cusp subgroup of a finite-volume hyperbolic piece is malnormal: "
        "a parabolic element has cyclic-by-peripheral centralizer, so g^-1 H g meets H trivially off H."
    ),
    SEIFERT_CENTRALIZER_CHOICE: (
        "The gluing identification may be swapped on the torus so that the chosen peripheral "
        "element of the Seifert side is not central in its piece group."
    ),
    HOMOLOGICAL_INTERSECTION: (
        "A loop meeting a nonseparating torus once has intersection number one with it, "
        "while the torus classes have intersection number zero, so their free homotopy classes differ."
    ),
    FINITE_FUNDAMENTAL_GROUP: (
        "A closed Seifert manifold whose base orbifold has positive Euler characteristic "
        "has finite fundamental group."
    ),
    ABSTRACT_FACTOR_ORDER: (
        "A prime summand with nontrivial fundamental group contains a cyclic subgroup of the modeled order, "
        "and cyclic subgroups of distinct free factors generate their free product."
    ),
    CENTRAL_FIBER: (
        "The regular fiber of a Seifert piece over an orientable base is central of infinite order "
        "and is not a power of any surface or singular-fiber generator."
    ),
}

AXIOM_STATEMENTS = {
    HYPERBOLIC_MALNORMALITY: "cusp subgroup of node {subject} at {claim} is malnormal",
    SEIFERT_CENTRALIZER_CHOICE: "peripheral element of node {subject} at {claim} is not central",
    HOMOLOGICAL_INTERSECTION: "across the torus at {subject}: {claim}",
    FINITE_FUNDAMENTAL_GROUP: "node {subject} is finite with {claim}",
    ABSTRACT_FACTOR_ORDER: "summand {subject} models {claim}",
    CENTRAL_FIBER: "in node {subject}: {claim}",
}

FINITE_GROUP_RULE = "finitegroup"
ALGEBRAICALLY_HYPERBOLIC_RULE = "algebraically-hyperbolic"

CITED_RULES = {
    FINITE_GROUP_RULE: (
        "A closed 3-manifold with finite fundamental group has nontrivial extended loop products; "
        "the proof is homotopy-theoretic and carries no word-level witness."
    ),
    ALGEBRAICALLY_HYPERBOLIC_RULE: (
        "A closed algebraically hyperbolic 3-manifold has trivial extended loop products, "
        "and so do all of its finite covers."
    ),
}

COVER_DERIVATION = "cover"

# Axiom kinds a certificate may rely on, keyed by derivation id.
AXIOM_WHITELIST: dict[str, frozenset[str]] = {
    "TwoCurves": frozenset(),
    "FigureEight": frozenset(),
    "NonorientableFigureEight": frozenset(),
    "ClosedSeifert": frozenset({CENTRAL_FIBER}),
    "ConnectedSum": frozenset({ABSTRACT_FACTOR_ORDER}),
    "NonseparatingSphere": frozenset(),
    "NonseparatingTorus": frozenset({HOMOLOGICAL_INTERSECTION}),
    "HyperbolicGluing": frozenset({HYPERBOLIC_MALNORMALITY, SEIFERT_CENTRALIZER_CHOICE}),
    FINITE_GROUP_RULE: frozenset({FINITE_FUNDAMENTAL_GROUP}),
    ALGEBRAICALLY_HYPERBOLIC_RULE: frozenset(),
    COVER_DERIVATION: frozenset(),
}

SCOPE_GLUING_MAPS = "Gluing maps between pieces are not modeled; word-level claims hold for every gluing."
SCOPE_BETA_VERBATIM = "Seifert beta invariants are carried verbatim through covers and do not enter any word computation."
SCOPE_FAKE_SPHERE = "A fake-sphere summand leaves the fundamental group unchanged, so the word-level certificate is unaffected."
SCOPE_FINITE_SEIFERT = "Finiteness of the closed Seifert piece is read off a positive orbifold Euler characteristic."
SCOPE_FACTOR_MODEL = "Prime summands are modeled by cyclic free factors of the listed orders."
