"""Bundled example circuits (``.rfc`` files shipped with the package)."""

from __future__ import annotations

from importlib import resources

from .dsl import parse
from .model import Circuit

__all__ = ["names", "path", "source", "load"]


def names() -> list[str]:
    files = resources.files(__package__).joinpath("circuits")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".rfc"))


def path(name: str):
    return resources.files(__package__).joinpath("circuits", f"{name}.rfc")


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str) -> Circuit:
    return parse(source(name))
