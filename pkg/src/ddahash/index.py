"""Hamming-space retrieval.

Strategies, all returning the single nearest database entry ("first hit")
with ties broken in favour of the lowest database index:

* :func:`exhaustive_search` scans every code.
* :func:`semantic_hash_retrieve` probes a hash table keyed by short codes
  at every key within Hamming radius ``H`` of the query's short code, then
  re-ranks the gathered candidates by long-code distance.
* :func:`combined_search` ranks by the sum of two length-normalised
  Hamming distances (e.g. RABC and DDA codes).
* :func:`pearson_retrieve` is the raw-pixel correlation baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import kernels
from .codes import BinaryCode, n_bytes, to_words
from .errors import InvalidArgumentError, InvalidStateError

MAX_KEY_BITS = 24


class CodeDatabase:
    """Ordered ``(image id, code)`` records sharing one code length."""

    def __init__(self, ids, packed, length: int):
        packed = np.ascontiguousarray(packed, dtype=np.uint8)
        if packed.ndim != 2 or packed.shape[1] != n_bytes(length):
            raise InvalidArgumentError(f"packed codes of shape {packed.shape} do not hold {length}-bit codes")
        ids = [str(i) for i in ids]
        if len(ids) != packed.shape[0]:
            raise InvalidArgumentError(f"{len(ids)} ids for {packed.shape[0]} codes")
        if len(set(ids)) != len(ids):
            raise InvalidArgumentError("image ids must be unique")
        self.ids = ids
        self.packed = packed
        self.length = length
        self.words = to_words(packed) if len(ids) else np.zeros((0, 1), dtype=np.uint64)

    @classmethod
    def from_codes(cls, ids, codes) -> "CodeDatabase":
        codes = list(codes)
        if not codes:
            raise InvalidArgumentError("no codes given; use the constructor for an empty database")
        k = codes[0].length
        if any(c.length != k for c in codes):
            raise InvalidArgumentError("all codes in a database must have the same length")
        return cls(ids, np.stack([c.packed for c in codes]), k)

    def __len__(self):
        return len(self.ids)

    def code(self, i: int) -> BinaryCode:
        return BinaryCode(self.packed[i], self.length)

    def index_of(self, image_id: str) -> int:
        return self.ids.index(image_id)

    def query_words(self, query: BinaryCode) -> np.ndarray:
        if query.length != self.length:
            raise InvalidArgumentError(f"query has {query.length} bits, database codes have {self.length}")
        return to_words(query.packed)[0]


@dataclass(frozen=True)
class Hit:
    index: int
    image_id: str
    distance: float
    candidates: int


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    if a.length != b.length:
        raise InvalidArgumentError(f"cannot compare a {a.length}-bit code with a {b.length}-bit code")
    return int(np.bitwise_count(np.bitwise_xor(a.packed, b.packed)).sum())


def exhaustive_search(query: BinaryCode, db: CodeDatabase) -> Hit:
    """Nearest code by Hamming distance; the lowest index wins ties."""
    if len(db) == 0:
        raise InvalidStateError("cannot search an empty database")
    i, d = kernels.first_hit(db.words, db.query_words(query))
    return Hit(i, db.ids[i], d, len(db))


# --------------------------------------------------------------------------
# Hamming balls and semantic hashing
# --------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _flip_masks(k: int, radius: int, exact: bool) -> np.ndarray:
    masks = []
    for h in range(radius if exact else 0, radius + 1):
        for bits in combinations(range(k), h):
            m = 0
            for b in bits:
                m |= 1 << b
            masks.append(m)
    out = np.array(masks, dtype=np.int64)
    out.setflags(write=False)
    return out


def flip_masks(k: int, radius: int, exact: bool = False) -> np.ndarray:
    """XOR masks reaching every key at distance ``<= radius`` (``== radius`` if exact)."""
    if not 0 <= radius <= k:
        raise InvalidArgumentError(f"bit flips must be in [0, {k}], got {radius}")
    return _flip_masks(k, radius, exact)


def enumerate_ball(code: BinaryCode, radius: int, exact: bool = False) -> list[BinaryCode]:
    """All codes within Hamming distance ``radius`` of ``code``, itself included."""
    if code.length > MAX_KEY_BITS:
        raise InvalidArgumentError(f"ball enumeration supports codes up to {MAX_KEY_BITS} bits")
    key = code.to_int()
    return [BinaryCode.from_int(int(key ^ m), code.length) for m in flip_masks(code.length, radius, exact)]


def _keys_of(packed: np.ndarray, k: int) -> np.ndarray:
    keys = np.zeros(packed.shape[0], dtype=np.int64)
    for b in range(packed.shape[1]):
        keys = (keys << 8) | packed[:, b]
    return keys >> (8 * packed.shape[1] - k)


class HashIndex:
    """Hash table from short codes to database entries, plus long codes.

    Buckets are stored CSR-style: ``order`` holds database indices sorted by
    short key (ascending index within a key) and bucket ``key`` is
    ``order[offsets[key]:offsets[key + 1]]``.
    """

    def __init__(self, short: CodeDatabase, long: CodeDatabase):
        if short.ids != long.ids:
            raise InvalidArgumentError("short and long code databases must list the same ids in the same order")
        if short.length > MAX_KEY_BITS:
            raise InvalidArgumentError(f"short codes longer than {MAX_KEY_BITS} bits cannot be used as keys")
        self.short = short
        self.long = long
        self.key_bits = short.length
        self.keys = _keys_of(short.packed, short.length)
        self.order = np.argsort(self.keys, kind="stable").astype(np.int64)
        counts = np.bincount(self.keys, minlength=1 << self.key_bits)
        self.offsets = np.zeros(counts.size + 1, dtype=np.int64)
        np.cumsum(counts, out=self.offsets[1:])

    def __len__(self):
        return len(self.short)

    @property
    def ids(self):
        return self.short.ids

    def bucket(self, key: int) -> list[str]:
        return [self.ids[i] for i in self.order[self.offsets[key] : self.offsets[key + 1]]]

    def buckets(self) -> dict:
        """Non-empty buckets as ``{key: [image ids]}``."""
        nz = np.flatnonzero(np.diff(self.offsets))
        return {int(k): self.bucket(int(k)) for k in nz}

    def candidates(self, query_short: BinaryCode, radius: int, exact: bool = False) -> list[int]:
        """Database indices in every bucket within ``radius`` of the query key."""
        keys = query_short.to_int() ^ flip_masks(self.key_bits, radius, exact)
        return [int(i) for k in keys for i in self.order[self.offsets[k] : self.offsets[k + 1]]]


def build_index(short_ids, short_codes, long_ids, long_codes) -> HashIndex:
    return HashIndex(CodeDatabase.from_codes(short_ids, short_codes), CodeDatabase.from_codes(long_ids, long_codes))


def semantic_hash_retrieve(
    query_short: BinaryCode, query_long: BinaryCode, index: HashIndex, radius: int, exact: bool = False
) -> Hit | None:
    """Multi-probe lookup plus long-code re-ranking.

    Returns ``None`` when no probed bucket holds any entry; callers may then
    fall back to :func:`exhaustive_search`.
    """
    if query_short.length != index.key_bits:
        raise InvalidArgumentError(f"query short code has {query_short.length} bits, index keys have {index.key_bits}")
    keys = query_short.to_int() ^ flip_masks(index.key_bits, radius, exact)
    q_long = index.long.query_words(query_long)
    i, d, n = kernels.probe_rerank(index.offsets, index.order, index.long.words, q_long, keys)
    if i < 0:
        return None
    return Hit(i, index.ids[i], d, n)


# --------------------------------------------------------------------------
# combined distance and the correlation baseline
# --------------------------------------------------------------------------


def combined_distance(q_rabc: BinaryCode, c_rabc: BinaryCode, q_dda: BinaryCode, c_dda: BinaryCode) -> float:
    """``d(rabc) / len(rabc) + d(dda) / len(dda)``, in [0, 2]."""
    return hamming(q_rabc, c_rabc) / q_rabc.length + hamming(q_dda, c_dda) / q_dda.length


def combined_distances(q_first: BinaryCode, q_second: BinaryCode, first: CodeDatabase, second: CodeDatabase) -> np.ndarray:
    if first.ids != second.ids:
        raise InvalidArgumentError("both code databases must list the same ids in the same order")
    d1 = kernels.hamming_scan(first.words, first.query_words(q_first))
    d2 = kernels.hamming_scan(second.words, second.query_words(q_second))
    return d1 / first.length + d2 / second.length


def combined_search(q_first: BinaryCode, q_second: BinaryCode, first: CodeDatabase, second: CodeDatabase) -> Hit:
    """First hit under :func:`combined_distance` (lowest index on ties)."""
    if len(first) == 0:
        raise InvalidStateError("cannot search an empty database")
    d = combined_distances(q_first, q_second, first, second)
    i = int(np.argmin(d))
    return Hit(i, first.ids[i], float(d[i]), len(first))


PEARSON_TIE_TOL = 1e-12


def pearson_scores(query, db_images) -> np.ndarray:
    """|Pearson correlation| of ``query`` with every row; NaN for flat rows."""
    q = np.asarray(query, dtype=np.float64).ravel()
    x = np.asarray(db_images, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != q.size:
        raise InvalidArgumentError(f"database of shape {x.shape} does not match query length {q.size}")
    qc = q - q.mean()
    qn = np.sqrt(qc @ qc)
    if qn == 0.0:
        raise InvalidArgumentError("query has zero variance")
    xc = x - x.mean(axis=1, keepdims=True)
    xn = np.sqrt(np.einsum("ij,ij->i", xc, xc))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.abs(xc @ qc) / (xn * qn)
    r[xn == 0.0] = np.nan
    return r


def pearson_retrieve(query, db_images, ids=None) -> Hit:
    """Database image with the highest absolute correlation to ``query``.

    Zero-variance database images are skipped.  Scores within
    ``PEARSON_TIE_TOL`` of the best count as ties and go to the lowest index.
    """
    r = pearson_scores(query, db_images)
    if r.size == 0 or np.all(np.isnan(r)):
        raise InvalidStateError("no database image with non-zero variance")
    best = np.nanmax(r)
    i = int(np.flatnonzero(r >= best - PEARSON_TIE_TOL)[0])
    ids = list(range(r.size)) if ids is None else ids
    return Hit(i, str(ids[i]), float(r[i]), r.size)
