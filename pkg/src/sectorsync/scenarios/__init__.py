"""Bundled, self-contained scenario files.

Reference scenarios by name from the command line with ``--config
bundled:NAME``; ``python -m sectorsync.scenarios`` prints the directory so
the files can be inspected or copied.
"""
from __future__ import annotations

from importlib.resources import files
from pathlib import Path

__all__ = ["available", "path"]


def _root() -> Path:
    return Path(str(files(__package__)))


def available() -> list[str]:
    """Names of the shipped scenario configs."""
    return sorted(p.stem for p in _root().glob("*.cfg"))


def path(name: str) -> Path:
    """Filesystem path of a bundled scenario config."""
    stem = name.removesuffix(".cfg")
    candidate = _root() / f"{stem}.cfg"
    if not candidate.is_file():
        raise FileNotFoundError(
            f"no bundled scenario {name!r}; available: {', '.join(available())}"
        )
    return candidate
