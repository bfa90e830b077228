"""Locations of files written next to their inputs."""
from __future__ import annotations

from pathlib import Path

CERTIFICATE_SUFFIX = ".cert.json"
COVER_SUFFIX = ".cover.json"


def _stem(path: Path) -> str:
    name = path.name
    for suffix in (COVER_SUFFIX, CERTIFICATE_SUFFIX, ".json"):
        if name.endswith(suffix) and len(name) > len(suffix):
            return name[: -len(suffix)]
    return path.stem


def certificate_path(spec_path: Path, suffix: str = CERTIFICATE_SUFFIX) -> Path:
    """`knot.json` certifies into `knot.cert.json` in the same directory."""
    spec_path = Path(spec_path)
    return spec_path.with_name(_stem(spec_path) + suffix)


def cover_path(spec_path: Path) -> Path:
    spec_path = Path(spec_path)
    return spec_path.with_name(_stem(spec_path) + COVER_SUFFIX)
