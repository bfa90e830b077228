"""Command-line entrypoint: classify, verify, cover, oracle, explain and corpus."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from loopwitness.constants import EXIT_CODES
from loopwitness.corpus import build_corpus
from loopwitness.paths import certificate_path, cover_path
from loopwitness.settings import SettingsStore, ToolSettings
from services.certify import Certificate, CertificateError, explain, subject_graph, verify_document
from services.covers import RECIPES, CoverError, assemble_double_cover, refibre_mobius_ends
from services.decide import ManifoldClassifier
from services.decomposition import ClassificationError, Irreducible, ManifoldSpec, ValidationError
from services.freeprod import FreeProduct, FreeProductError, are_conjugate, oracle_conjugate_search
from services.specfile import SpecDocument, SpecParseError, covering_to_dict, read_document, write_document
from services.witness import ArgumentNotApplicable, WitnessError

logger = logging.getLogger("loopwitness")


class CommandFailed(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _emit(args: argparse.Namespace, text_lines: Sequence[str], payload: dict[str, Any]) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        for line in text_lines:
            sys.stdout.write(line + "\n")


def _read_spec(path: Path, settings: ToolSettings) -> SpecDocument:
    return read_document(path, default_delta=settings.default_delta)


def _read_certificate(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CommandFailed(EXIT_CODES.verify_failed, f"{path}: cannot read certificate ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise CommandFailed(EXIT_CODES.verify_failed, f"{path}: certificate is not valid JSON ({exc.msg})") from exc


def cmd_classify(args: argparse.Namespace, settings: ToolSettings) -> int:
    document = _read_spec(args.spec, settings)
    classifier = ManifoldClassifier(log_callback=logger.debug)
    verdict, cert = classifier.classify(document.spec, require_minimal=document.require_minimal)
    for warning in classifier.last_warnings:
        logger.warning(warning)
    out = Path(args.out) if args.out else certificate_path(args.spec, settings.certificate_suffix)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(cert.dumps(), encoding="utf-8")
    logger.info("Wrote certificate %s", out)
    _emit(
        args,
        [verdict.kind],
        {
            "verdict": verdict.kind,
            "argument_id": verdict.argument_id,
            "reason": verdict.reason,
            "cover_recipe": verdict.cover_recipe,
            "certificate": str(out),
        },
    )
    return EXIT_CODES.ok


def cmd_verify(args: argparse.Namespace, settings: ToolSettings) -> int:
    document = _read_spec(args.spec, settings)
    data = _read_certificate(args.certificate)
    report = verify_document(data, document.spec, require_minimal=document.require_minimal)
    lines = report.lines() + ["PASS" if report.ok else "FAIL"]
    _emit(args, lines, report.to_dict())
    return EXIT_CODES.ok if report.ok else EXIT_CODES.verify_failed


def cmd_explain(args: argparse.Namespace, settings: ToolSettings) -> int:
    document = _read_spec(args.spec, settings)
    cert = Certificate.from_dict(_read_certificate(args.certificate))
    narrative = explain(cert, document.spec, require_minimal=document.require_minimal)
    _emit(args, narrative.rstrip("\n").splitlines(), {"narrative": narrative})
    return EXIT_CODES.ok


def cmd_cover(args: argparse.Namespace, settings: ToolSettings) -> int:
    document = _read_spec(args.spec, settings)
    graph = subject_graph(document.spec)
    if graph is None:
        raise CommandFailed(EXIT_CODES.validation, "covers act on a spec with a single irreducible summand")
    graph, rewritten = refibre_mobius_ends(graph)
    cover, metadata = assemble_double_cover(graph, args.recipe, designated=args.node, rewritten=rewritten)
    out = Path(args.out) if args.out else cover_path(args.spec)
    write_document(out, SpecDocument(ManifoldSpec((Irreducible(cover),)), covering_to_dict(metadata)))
    ratio = "2" if metadata.base_euler != "0" else "n/a"
    _emit(
        args,
        [
            f"base orbifold Euler: {metadata.base_euler}",
            f"cover orbifold Euler: {metadata.cover_euler}",
            f"ratio: {ratio}",
            f"wrote {out}",
        ],
        {"base_euler": metadata.base_euler, "cover_euler": metadata.cover_euler, "recipe": args.recipe, "cover": str(out)},
    )
    return EXIT_CODES.ok


def cmd_oracle(args: argparse.Namespace, settings: ToolSettings) -> int:
    try:
        group = FreeProduct.parse(args.group)
        w1 = group.parse_word(args.w1)
        w2 = group.parse_word(args.w2)
    except FreeProductError as exc:
        raise CommandFailed(EXIT_CODES.parse, str(exc)) from exc
    bound = args.bound if args.bound is not None else settings.oracle_bound
    exact = are_conjugate(w1, w2)
    found = oracle_conjugate_search(w1, w2, bound)
    answer = f"conjugator {found.format()}" if found is not None else f"none up to bound {bound}"
    _emit(
        args,
        [answer, f"exact: {'conjugate' if exact else 'not conjugate'}"],
        {
            "group": group.format(),
            "bound": bound,
            "conjugator": found.format() if found is not None else None,
            "exact": bool(exact),
            "exact_conjugator": exact.conjugator.format() if exact.conjugator is not None else None,
        },
    )
    return EXIT_CODES.ok


def cmd_corpus(args: argparse.Namespace, settings: ToolSettings) -> int:
    out = Path(args.out)
    written = []
    for entry in build_corpus().entries:
        path = out / f"{entry.name}.json"
        write_document(path, entry.document())
        written.append(path)
    _emit(args, [str(path) for path in written], {"written": [str(path) for path in written]})
    return EXIT_CODES.ok


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loopwitness",
        description="Decide and certify nontrivial extended loop products of closed 3-manifolds",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More diagnostics on stderr")
    parser.add_argument("--json", action="store_true", default=None, help="Machine-readable output")
    parser.add_argument("--settings", type=Path, help="Settings file to read defaults from")
    commands = parser.add_subparsers(dest="command", required=True)

    classify = commands.add_parser("classify", help="Classify a spec and write its certificate")
    classify.add_argument("spec", type=Path)
    classify.add_argument("--out", type=Path, help="Certificate path (default: next to the spec)")
    classify.set_defaults(handler=cmd_classify)

    verify = commands.add_parser("verify", help="Recheck a certificate against its spec")
    verify.add_argument("spec", type=Path)
    verify.add_argument("certificate", type=Path)
    verify.set_defaults(handler=cmd_verify)

    explain_cmd = commands.add_parser("explain", help="Narrate a verified certificate")
    explain_cmd.add_argument("spec", type=Path)
    explain_cmd.add_argument("certificate", type=Path)
    explain_cmd.set_defaults(handler=cmd_explain)

    cover = commands.add_parser("cover", help="Build a double cover and write it as a spec")
    cover.add_argument("spec", type=Path)
    cover.add_argument("--recipe", required=True, choices=RECIPES)
    cover.add_argument("--node", type=int, default=None, help="Designated node (default: recipe's choice)")
    cover.add_argument("--out", type=Path)
    cover.set_defaults(handler=cmd_cover)

    oracle = commands.add_parser("oracle", help="Search for a conjugator by bounded enumeration")
    oracle.add_argument("--group", required=True, help="e.g. Z3*Z5 or x=Z2*y=Z")
    oracle.add_argument("--w1", required=True)
    oracle.add_argument("--w2", required=True)
    oracle.add_argument("--bound", type=int, default=None, help="Longest conjugator tried")
    oracle.set_defaults(handler=cmd_oracle)

    corpus = commands.add_parser("corpus", help="Write the built-in example specs")
    corpus.add_argument("--out", type=Path, required=True)
    corpus.set_defaults(handler=cmd_corpus)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    settings = SettingsStore(args.settings).load()
    if args.json is None:
        args.json = settings.json_output
    try:
        return args.handler(args, settings)
    except CommandFailed as exc:
        logger.error("%s", exc)
        return exc.code
    except SpecParseError as exc:
        logger.error("parse error: %s", exc)
        return EXIT_CODES.parse
    except ValidationError as exc:
        for violation in exc.report.violations:
            logger.error("validation: %s", violation.format())
        return EXIT_CODES.validation
    except CoverError as exc:
        logger.error("recipe not applicable: %s", exc)
        return EXIT_CODES.validation
    except CertificateError as exc:
        logger.error("certificate: %s", exc)
        return EXIT_CODES.verify_failed
    except ClassificationError as exc:
        logger.error("classification failed: %s", exc)
        return EXIT_CODES.internal
    except (ArgumentNotApplicable, WitnessError) as exc:
        logger.error("witness construction failed: %s", exc)
        return EXIT_CODES.internal
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error: %s", exc)
        return EXIT_CODES.internal


if __name__ == "__main__":
    raise SystemExit(main())
