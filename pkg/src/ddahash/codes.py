"""Packed binary codes and the line-oriented code file format.

Bit ``i`` of a k-bit code lives in byte ``i // 8`` at bit position
``7 - i % 8`` (most significant bit first), which is what ``np.packbits``
produces.  Pad bits in the last byte are always zero.

Code file layout (UTF-8 text)::

    #ddahash-codes v1 <fingerprint>
    <image_id> <k> <hex>
    ...

``<hex>`` holds ``ceil(k / 8)`` bytes as lowercase hex digits.  Lines
starting with ``#`` after the header are comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError

CODES_MAGIC = "#ddahash-codes v1"


def n_bytes(k: int) -> int:
    return (k + 7) // 8


@dataclass(frozen=True, eq=False)
class BinaryCode:
    """A k-bit code stored as ``ceil(k/8)`` packed bytes."""

    packed: np.ndarray
    length: int

    def __post_init__(self):
        packed = np.ascontiguousarray(self.packed, dtype=np.uint8)
        if packed.ndim != 1 or packed.size != n_bytes(self.length):
            raise InvalidArgumentError(
                f"a {self.length}-bit code needs {n_bytes(self.length)} bytes, got {packed.size}"
            )
        pad = 8 * packed.size - self.length
        if pad and packed[-1] & ((1 << pad) - 1):
            raise InvalidArgumentError("pad bits of a packed code must be zero")
        packed.setflags(write=False)
        object.__setattr__(self, "packed", packed)

    @classmethod
    def from_bits(cls, bits) -> "BinaryCode":
        bits = np.asarray(bits).astype(bool).ravel()
        return cls(np.packbits(bits), bits.size)

    @classmethod
    def from_hex(cls, text: str, length: int) -> "BinaryCode":
        try:
            raw = bytes.fromhex(text)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad hex string {text!r}") from exc
        return cls(np.frombuffer(raw, dtype=np.uint8), length)

    @classmethod
    def from_int(cls, value: int, length: int) -> "BinaryCode":
        """Code whose bit 0 is the most significant bit of ``value``."""
        if value < 0 or value >> length:
            raise InvalidArgumentError(f"{value} does not fit in {length} bits")
        pad = 8 * n_bytes(length) - length
        raw = (value << pad).to_bytes(n_bytes(length), "big")
        return cls(np.frombuffer(raw, dtype=np.uint8), length)

    def bits(self) -> np.ndarray:
        return np.unpackbits(self.packed, count=self.length)

    def hex(self) -> str:
        return self.packed.tobytes().hex()

    def to_int(self) -> int:
        pad = 8 * self.packed.size - self.length
        return int.from_bytes(self.packed.tobytes(), "big") >> pad

    def __len__(self):
        return self.length

    def __eq__(self, other):
        if not isinstance(other, BinaryCode):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.packed, other.packed)

    def __hash__(self):
        return hash((self.length, self.packed.tobytes()))

    def __repr__(self):
        return f"BinaryCode({self.length} bits, 0x{self.hex()})"


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (n, k) 0/1 matrix into (n, ceil(k/8)) bytes, MSB first."""
    bits = np.asarray(bits)
    if bits.ndim != 2:
        raise InvalidArgumentError("expected a 2-D bit matrix")
    return np.packbits(bits.astype(bool), axis=1)


def to_words(packed: np.ndarray) -> np.ndarray:
    """View packed byte rows as uint64 words, zero-padding each row."""
    packed = np.atleast_2d(np.asarray(packed, dtype=np.uint8))
    n, nb = packed.shape
    nw = max(1, (nb + 7) // 8)
    buf = np.zeros((n, nw * 8), dtype=np.uint8)
    buf[:, :nb] = packed
    return buf.view(np.uint64)


# --------------------------------------------------------------------------
# code files
# --------------------------------------------------------------------------


def save_codes(path, ids, codes, fingerprint: str = "-", comments=()) -> None:
    """Write ``(id, BinaryCode)`` records; ids must be whitespace-free.

    ``comments`` are written as ``#`` lines right after the header.
    """
    lines = [f"{CODES_MAGIC} {fingerprint}"] + [f"#{c}" for c in comments]
    for image_id, code in zip(ids, codes, strict=True):
        if not image_id or any(ch.isspace() for ch in image_id):
            raise InvalidArgumentError(f"image id {image_id!r} must be a non-empty token")
        lines.append(f"{image_id} {code.length} {code.hex()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_codes(path) -> tuple[list[str], list[BinaryCode]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("code file is not UTF-8", path=path) from exc
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CODES_MAGIC):
        actual = lines[0][: len(CODES_MAGIC)] if lines else ""
        raise FormatError(
            f"{path}: expected header {CODES_MAGIC!r}, found {actual!r}",
            path=path,
            expected=CODES_MAGIC,
            actual=actual,
        )
    ids, codes = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'id k hex'", path=path)
        image_id, k, hexstr = parts
        try:
            k = int(k)
            if len(hexstr) != 2 * n_bytes(k):
                raise InvalidArgumentError(f"hex length {len(hexstr)} does not match k={k}")
            codes.append(BinaryCode.from_hex(hexstr, k))
        except (ValueError, InvalidArgumentError) as exc:
            raise FormatError(f"{path}:{lineno}: {exc}", path=path) from exc
        ids.append(image_id)
    return ids, codes
