"""IRMA codes and the hierarchical retrieval error.

An IRMA code has 13 characters from ``0-9a-z`` in four structures
(technical, directional, anatomical, biological) of lengths 4, 3, 3, 3,
written ``TTTT-DDD-AAA-BBB``.  The error of a retrieved image against a
query is::

    sum over structures j, positions i:  (1 / b[j, i]) * (1 / i) * delta(j, i)

where ``delta(j, i)`` is 1 as soon as any position ``h <= i`` of structure
``j`` differs, and ``b[j, i]`` is the number of branches (possible
characters) at that position.  Structures and positions are 1-based.

Branch table files hold one ``j,i,count`` line per position.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError, InvalidArgumentError, InvalidStateError, IrmaParseError

STRUCTURE_LENGTHS = (4, 3, 3, 3)
STRUCTURE_NAMES = ("technical", "directional", "anatomical", "biological")
ALPHABET = frozenset("0123456789abcdefghijklmnopqrstuvwxyz")
N_CHARS = sum(STRUCTURE_LENGTHS)
POSITIONS = [(j, i) for j, n in enumerate(STRUCTURE_LENGTHS, start=1) for i in range(1, n + 1)]


@dataclass(frozen=True)
class IrmaCode:
    structures: tuple  # four strings

    @property
    def text(self) -> str:
        return "-".join(self.structures)

    def char(self, j: int, i: int) -> str:
        return self.structures[j - 1][i - 1]

    def __str__(self):
        return self.text


def parse_irma(text: str) -> IrmaCode:
    """Parse ``TTTT-DDD-AAA-BBB`` or the bare 13-character form."""
    raw = text.strip().lower()
    if len(raw) == N_CHARS + 3:
        for pos in (4, 8, 12):
            if raw[pos] != "-":
                raise IrmaParseError(
                    f"expected '-' at position {pos} of {text!r}, found {raw[pos]!r}", text, pos
                )
        body = raw.replace("-", "", 3)
        offsets = [p for p in range(len(raw)) if p not in (4, 8, 12)]
    elif len(raw) == N_CHARS:
        body = raw
        offsets = list(range(N_CHARS))
    else:
        raise IrmaParseError(
            f"IRMA code must have 13 characters (or 16 with separators), got {len(raw)}: {text!r}", text
        )
    for k, ch in enumerate(body):
        if ch not in ALPHABET:
            raise IrmaParseError(
                f"invalid character {ch!r} at position {offsets[k]} of {text!r}", text, offsets[k]
            )
    structures, start = [], 0
    for n in STRUCTURE_LENGTHS:
        structures.append(body[start : start + n])
        start += n
    return IrmaCode(tuple(structures))


def _check_index(j, i):
    if not 1 <= j <= len(STRUCTURE_LENGTHS) or not 1 <= i <= STRUCTURE_LENGTHS[j - 1]:
        raise InvalidArgumentError(f"no IRMA position (structure {j}, index {i})")


def delta(query: IrmaCode, retrieved: IrmaCode, j: int, i: int) -> int:
    _check_index(j, i)
    return int(query.structures[j - 1][:i] != retrieved.structures[j - 1][:i])


class BranchTable:
    """Branch counts ``b[j, i]`` keyed by 1-based (structure, position)."""

    def __init__(self, counts: dict):
        missing = [p for p in POSITIONS if p not in counts]
        if missing:
            raise InvalidArgumentError(f"branch table lacks positions {missing}")
        for p, v in counts.items():
            if p not in POSITIONS:
                raise InvalidArgumentError(f"unknown branch table position {p}")
            if not v >= 1:
                raise InvalidArgumentError(f"branch count at {p} must be >= 1, got {v}")
        self.counts = {p: float(counts[p]) for p in POSITIONS}

    @classmethod
    def uniform(cls, b: float) -> "BranchTable":
        return cls({p: b for p in POSITIONS})

    def __getitem__(self, key):
        return self.counts[key]

    def __eq__(self, other):
        return isinstance(other, BranchTable) and self.counts == other.counts

    def __repr__(self):
        return f"BranchTable({self.counts})"


def build_branch_table(codes, prefix_conditioned: bool = False) -> BranchTable:
    """Derive branch counts from a set of codes.

    By default ``b[j, i]`` is the number of distinct characters seen at that
    position.  With ``prefix_conditioned`` it is the mean, over the distinct
    prefixes ``structure[:i-1]``, of the number of distinct characters that
    follow each prefix.
    """
    codes = set(codes)
    if not codes:
        raise InvalidArgumentError("cannot build a branch table from an empty code set")
    counts = {}
    for j, i in POSITIONS:
        if prefix_conditioned:
            children = defaultdict(set)
            for c in codes:
                s = c.structures[j - 1]
                children[s[: i - 1]].add(s[i - 1])
            counts[(j, i)] = max(1.0, sum(len(v) for v in children.values()) / len(children))
        else:
            counts[(j, i)] = max(1, len({c.char(j, i) for c in codes}))
    return BranchTable(counts)


def structure_errors(query: IrmaCode, retrieved: IrmaCode, table: BranchTable) -> list[float]:
    """Per-structure contributions to :func:`image_error`."""
    out = []
    for j, n in enumerate(STRUCTURE_LENGTHS, start=1):
        q, r = query.structures[j - 1], retrieved.structures[j - 1]
        err = 0.0
        for i in range(1, n + 1):
            if q[:i] != r[:i]:
                try:
                    b = table.counts[(j, i)]
                except KeyError:
                    raise InvalidStateError(f"branch table has no entry for ({j}, {i})") from None
                err += 1.0 / (b * i)
        out.append(err)
    return out


def image_error(query: IrmaCode, retrieved: IrmaCode, table: BranchTable) -> float:
    return sum(structure_errors(query, retrieved, table))


def total_error(pairs, table: BranchTable) -> float:
    return sum(image_error(q, r, table) for q, r in pairs)


def max_image_error(table: BranchTable) -> float:
    return sum(1.0 / (table[(j, i)] * i) for j, i in POSITIONS)


# --------------------------------------------------------------------------
# files
# --------------------------------------------------------------------------


def load_irma_codes(path) -> dict:
    """Read ``image_id;TTTT-DDD-AAA-BBB`` lines into ``{id: IrmaCode}``."""
    path = Path(path)
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(";")
        if len(parts) < 2:
            raise FormatError(f"{path}:{lineno}: expected 'image_id;irma_code'", path=path)
        try:
            # manifests carry the code in the last field
            out[parts[0].strip()] = parse_irma(parts[-1])
        except IrmaParseError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}", path=path) from exc
    return out


def save_irma_codes(path, codes: dict) -> None:
    lines = [f"{k};{v.text}" for k, v in codes.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_branch_table(path) -> BranchTable:
    path = Path(path)
    counts = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            j, i, b = line.split(",")
            counts[(int(j), int(i))] = float(b)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: expected 'j,i,count'", path=path) from exc
    try:
        return BranchTable(counts)
    except InvalidArgumentError as exc:
        raise FormatError(f"{path}: {exc}", path=path) from exc


def save_branch_table(path, table: BranchTable) -> None:
    lines = [f"{j},{i},{table[(j, i)]!r}" for j, i in POSITIONS]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
