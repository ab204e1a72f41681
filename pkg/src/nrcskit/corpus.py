"""Access to the bundled example files."""

from __future__ import annotations

from importlib import resources

from .nrcs import NrcsSyntaxError, Tree, parse_tree
from .ordinal import Ordinal, parse_ordinal
from .ordinal_encoding import EncodingParams


def names() -> list[str]:
    return sorted(p.name for p in resources.files("nrcskit.data").iterdir()
                  if p.is_file() and not p.name.startswith(("_", ".")))


def read(name: str) -> str:
    return resources.files("nrcskit.data").joinpath(name).read_text(encoding="utf-8")


def parse_encoders(text: str) -> tuple[EncodingParams, list[tuple[Ordinal, Tree]]]:
    """Parse an 'encoders k=K ell=L' file of 'ordinal = tree' lines."""
    params = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("encoders"):
            fields = dict(f.split("=") for f in line.split()[1:])
            params = EncodingParams(int(fields["k"]), int(fields["ell"]))
            continue
        lhs, sep, rhs = line.partition("=")
        if not sep:
            raise NrcsSyntaxError("expected 'ordinal = tree'", lineno)
        rows.append((parse_ordinal(lhs), parse_tree(rhs.strip(), lineno)))
    if params is None:
        raise NrcsSyntaxError("missing 'encoders k=.. ell=..' header", 1)
    return params, rows
