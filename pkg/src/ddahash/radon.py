"""Radon projections, median Radon barcodes (RBC) and autoencoder barcodes (RABC).

A projection at angle ``theta`` is the column-sum profile of the image
rotated by ``-theta`` about pixel ``(n // 2, n // 2)``.  It is computed by
splatting every pixel onto the rotated column axis with linear weights
(see :func:`ddahash.kernels.radon_splat`), so angle 0 reproduces the plain
column sums exactly.  Corner mass that rotates past the first or last
column is accumulated in that edge bin, which keeps every projection's
total equal to the image total.

Projection dump layout (little-endian)::

    magic      5 bytes  b"DDAR1"
    n_angles   uint32
    n_bins     uint32
    count      uint32
    angles     n_angles float64 (radians)
    count x    uint16 id length, UTF-8 id bytes,
               n_angles*n_bins float64 projection values (angle-major)
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hasher, kernels, nn
from .codes import BinaryCode
from .dataio import resize_bilinear
from .errors import FormatError, InvalidArgumentError

N_ANGLES = 16
IMAGE_SIZE = 256
PROJ_MAGIC = b"DDAR1"


def default_angles(n_angles: int = N_ANGLES) -> np.ndarray:
    """``n_angles`` evenly spaced angles in ``[0, pi)``."""
    if n_angles < 1:
        raise InvalidArgumentError("n_angles must be >= 1")
    return np.arange(n_angles) * (np.pi / n_angles)


@dataclass
class RadonProjectionSet:
    image_id: str
    angles: np.ndarray
    projections: np.ndarray  # (n_angles, n_bins)

    @property
    def n_bins(self) -> int:
        return self.projections.shape[1]

    def flat(self) -> np.ndarray:
        return self.projections.ravel()


def radon_projections(image, n_angles: int = N_ANGLES, image_id: str = "", size: int | None = IMAGE_SIZE, angles=None):
    """Project a square non-negative image at ``n_angles`` angles.

    ``size`` pins the expected side length (256 by default); pass ``None``
    to accept any square image.  The result has one bin per image column.
    """
    img = np.ascontiguousarray(image, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise InvalidArgumentError(f"Radon projections need a square image, got shape {img.shape}")
    if size is not None and img.shape[0] != size:
        raise InvalidArgumentError(f"expected a {size}x{size} image, got {img.shape[0]}x{img.shape[1]}")
    if img.size and img.min() < 0:
        raise InvalidArgumentError("image intensities must be non-negative")
    theta = default_angles(n_angles) if angles is None else np.asarray(angles, dtype=np.float64)
    proj = kernels.radon_splat(img, np.cos(theta), np.sin(theta), img.shape[1])
    return RadonProjectionSet(image_id, theta, proj)


def project_images(images, ids=None, n_angles: int = N_ANGLES, size: int = IMAGE_SIZE, threads: int = 1):
    """Resize raw 8-bit images to ``size`` and project each one.

    Intensities are scaled into [0, 1] first.  Projection of separate
    images is independent, so ``threads > 1`` fans the work out.
    """
    ids = [str(i) for i in range(len(images))] if ids is None else list(ids)

    def one(k):
        img = resize_bilinear(images[k], size, size) / 255.0
        return radon_projections(img, n_angles, ids[k], size)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, range(len(images))))
    return [one(k) for k in range(len(images))]


def barcode_bits(projections) -> np.ndarray:
    """Bit matrix of the median binarisation, one row per projection."""
    p = np.asarray(projections, dtype=np.float64)
    return p >= np.median(p, axis=-1, keepdims=True)


def radon_barcode(p: RadonProjectionSet) -> BinaryCode:
    """Set a bit wherever a bin is >= the median of its own projection."""
    return BinaryCode.from_bits(barcode_bits(p.projections).ravel())


# --------------------------------------------------------------------------
# scaling
# --------------------------------------------------------------------------


@dataclass
class ProjectionScaler:
    """Per-dimension min-max scaling fitted on training projections."""

    mins: np.ndarray
    maxs: np.ndarray
    _span: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=np.float64)
        self.maxs = np.asarray(self.maxs, dtype=np.float64)
        if self.mins.shape != self.maxs.shape or np.any(self.mins > self.maxs):
            raise InvalidArgumentError("scaler needs matching min/max vectors with min <= max")
        self._span = self.maxs - self.mins

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mins.size:
            raise InvalidArgumentError(f"expected vectors of length {self.mins.size}, got {x.shape[-1]}")
        live = self._span > 0
        out = np.zeros(np.broadcast_shapes(x.shape, self.mins.shape))
        np.divide(x - self.mins, self._span, out=out, where=live)
        out[..., ~live] = 0.0
        return np.clip(out, 0.0, 1.0)

    def inverse(self, y) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) * self._span + self.mins


def _as_matrix(train):
    if isinstance(train, np.ndarray):
        return np.atleast_2d(train).astype(np.float64)
    return np.stack([p.flat() if isinstance(p, RadonProjectionSet) else np.ravel(p) for p in train])


def fit_scaler(train) -> ProjectionScaler:
    """Fit on projection sets (or a ``(n, d)`` matrix of flattened ones)."""
    if len(train) == 0:
        raise InvalidArgumentError("cannot fit a scaler on an empty training set")
    x = _as_matrix(train)
    return ProjectionScaler(x.min(axis=0), x.max(axis=0))


def apply_scaler(scaler: ProjectionScaler, p) -> np.ndarray:
    if isinstance(p, RadonProjectionSet):
        p = p.flat()
    elif not isinstance(p, np.ndarray):
        p = _as_matrix(p)
    return scaler.transform(p)


def save_scaler(path, scaler: ProjectionScaler) -> None:
    head = b"DDAS1" + struct.pack("<I", scaler.mins.size)
    body = scaler.mins.astype("<f8").tobytes() + scaler.maxs.astype("<f8").tobytes()
    Path(path).write_bytes(head + body)


def load_scaler(path) -> ProjectionScaler:
    data = Path(path).read_bytes()
    if data[:5] != b"DDAS1":
        raise FormatError(f"{path}: bad magic: expected b'DDAS1', got {data[:5]!r}", path, b"DDAS1", data[:5])
    (d,) = struct.unpack_from("<I", data, 5)
    if len(data) != 9 + 16 * d:
        raise FormatError(f"{path}: expected {9 + 16 * d} bytes, found {len(data)}", path)
    v = np.frombuffer(data, dtype="<f8", offset=9).astype(np.float64)
    return ProjectionScaler(v[:d], v[d:])


# --------------------------------------------------------------------------
# RABC
# --------------------------------------------------------------------------


def train_rabc(
    scaled,
    rng=0,
    geometry=hasher.PRESETS["rabc"].geometry,
    epochs: int = hasher.EPOCHS,
    finetune_epochs: int = hasher.PRESETS["rabc"].finetune_epochs,
    optimizer: str = hasher.PRESETS["rabc"].finetune_optimizer,
    batch_size: int = hasher.BATCH_SIZE,
    use_dropout: bool = True,
    on_epoch=None,
) -> nn.Network:
    """Train a de-noising autoencoder on scaled projections; returns the encoder.

    Uses the same two stages as the image hashers (layer-wise pretraining
    with RMSProp, then end-to-end fine-tuning).
    """
    x = np.asarray(scaled, dtype=np.float64)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise InvalidArgumentError("RABC inputs must be scaled into [0, 1]")
    rng = nn.make_rng(rng)
    pre_cb = None if on_epoch is None else (lambda i, e, loss: on_epoch("pretrain", e, loss))
    ft_cb = None if on_epoch is None else (lambda e, loss: on_epoch("finetune", e, loss))
    enc, dec = hasher.layer_train(x, geometry, rng, epochs, batch_size, on_epoch=pre_cb)
    model = hasher.fine_tune(
        x, geometry, enc, dec, optimizer, use_dropout, rng, finetune_epochs, batch_size, on_epoch=ft_cb
    )
    return hasher.build_encoder(model)


# --------------------------------------------------------------------------
# projection dumps
# --------------------------------------------------------------------------


def save_projections(path, sets) -> None:
    sets = list(sets)
    if not sets:
        raise InvalidArgumentError("nothing to save")
    angles = sets[0].angles
    n_angles, n_bins = sets[0].projections.shape
    parts = [PROJ_MAGIC, struct.pack("<III", n_angles, n_bins, len(sets)), angles.astype("<f8").tobytes()]
    for s in sets:
        if s.projections.shape != (n_angles, n_bins) or not np.array_equal(s.angles, angles):
            raise InvalidArgumentError(f"projection set {s.image_id!r} has a different layout")
        raw_id = s.image_id.encode("utf-8")
        parts += [struct.pack("<H", len(raw_id)), raw_id, s.projections.astype("<f8").tobytes()]
    Path(path).write_bytes(b"".join(parts))


def load_projections(path) -> list[RadonProjectionSet]:
    path = Path(path)
    data = path.read_bytes()
    if data[:5] != PROJ_MAGIC:
        raise FormatError(f"{path}: bad magic: expected {PROJ_MAGIC!r}, got {data[:5]!r}", path, PROJ_MAGIC, data[:5])
    try:
        n_angles, n_bins, count = struct.unpack_from("<III", data, 5)
        pos = 17
        angles = np.frombuffer(data, "<f8", n_angles, pos).astype(np.float64)
        pos += 8 * n_angles
        out = []
        for _ in range(count):
            (ln,) = struct.unpack_from("<H", data, pos)
            pos += 2
            image_id = data[pos : pos + ln].decode("utf-8")
            pos += ln
            vals = np.frombuffer(data, "<f8", n_angles * n_bins, pos).astype(np.float64)
            pos += 8 * n_angles * n_bins
            out.append(RadonProjectionSet(image_id, angles, vals.reshape(n_angles, n_bins)))
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: truncated or corrupt projection dump: {exc}", path) from exc
    if pos != len(data):
        raise FormatError(f"{path}: {len(data) - pos} trailing bytes", path)
    return out
