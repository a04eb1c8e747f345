"""Image loading, preprocessing, synthetic data, manifests and model files.

Model file layout (all integers and floats little-endian)::

    magic        5 bytes   b"DDAH1"
    n_layers     uint32
    n_layers x   uint8 kind (0 = dense/sigmoid, 1 = dense/softmax, 2 = dropout)
                 uint32 fan_in, uint32 fan_out, float64 p (0.0 for dense)
    for every dense layer, in order:
                 fan_out*fan_in float64 weights (row-major, shape fan_out x fan_in)
                 fan_out float64 bias

Manifest layout: one ``image_id;relative_path;irma_code`` line per image
(the IRMA code may be empty), paths relative to the manifest's directory.
An optional first line ``#split=train`` (or ``test``) tags the split.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .errors import FormatError, ImageLoadError, InvalidArgumentError
from .irma import IrmaCode, parse_irma

MODEL_MAGIC = b"DDAH1"
_KIND_SIGMOID, _KIND_SOFTMAX, _KIND_DROPOUT = 0, 1, 2
_LAYER = struct.Struct("<BIId")


# --------------------------------------------------------------------------
# images
# --------------------------------------------------------------------------


def _pgm_tokens(data: bytes, count: int, pos: int):
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated header")
        tokens.append(data[start:pos])
    return tokens, pos


def _decode_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
    w, h, maxval = int(w), int(h), int(maxval)
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise ValueError(f"bad header values {w}x{h} maxval={maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = w * h * dtype.itemsize
        raw = data[pos : pos + need]
        if len(raw) != need:
            raise ValueError(f"truncated pixel data: {len(raw)} of {need} bytes")
        img = np.frombuffer(raw, dtype=dtype).reshape(h, w)
    else:
        try:
            values, _ = _pgm_tokens(data, w * h, pos)
        except ValueError:
            raise ValueError("truncated pixel data") from None
        img = np.array([int(v) for v in values], dtype=np.int64).reshape(h, w)
    if img.max(initial=0) > maxval:
        raise ValueError("pixel value exceeds maxval")
    if maxval != 255:
        img = np.rint(img.astype(np.float64) * (255.0 / maxval))
    return img.astype(np.uint8)


def load_grayscale(path) -> np.ndarray:
    """Read a PGM (P2/P5) or, if Pillow is installed, a PNG as uint8 (h, w)."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageLoadError(str(exc), path) from exc
    if data[:2] in (b"P2", b"P5"):
        try:
            return _decode_pgm(data)
        except ValueError as exc:
            raise ImageLoadError(f"corrupt PGM: {exc}", path) from exc
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            from PIL import Image
        except ImportError:
            raise ImageLoadError("PNG support needs Pillow", path) from None
        try:
            with Image.open(path) as im:
                im.load()
                return np.asarray(im.convert("L"), dtype=np.uint8)
        except OSError as exc:
            raise ImageLoadError(f"corrupt PNG: {exc}", path) from exc
    raise ImageLoadError("unsupported image format (expected PGM or PNG)", path)


def save_pgm(path, image) -> None:
    img = np.asarray(image)
    if img.ndim != 2:
        raise InvalidArgumentError("PGM images must be 2-D")
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def _bilinear_axis(n_src: int, n_dst: int):
    # pixel-centre alignment, clamped at the edges
    pos = (np.arange(n_dst) + 0.5) * (n_src / n_dst) - 0.5
    pos = np.clip(pos, 0.0, n_src - 1)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, n_src - 1)
    return lo, hi, pos - lo


def resize_bilinear(image, width: int, height: int) -> np.ndarray:
    """Bilinear resize to ``(height, width)``; returns float64."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 1:
        raise InvalidArgumentError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"target size must be >= 1, got {width}x{height}")
    if img.shape == (height, width):
        return img.copy()
    r0, r1, fr = _bilinear_axis(img.shape[0], height)
    c0, c1, fc = _bilinear_axis(img.shape[1], width)
    rows = img[r0] * (1.0 - fr)[:, None] + img[r1] * fr[:, None]
    return rows[:, c0] * (1.0 - fc) + rows[:, c1] * fc


def normalize(image) -> np.ndarray:
    """Divide 8-bit intensities by 255 and flatten row-major."""
    return np.clip(np.asarray(image, dtype=np.float64) / 255.0, 0.0, 1.0).ravel()


def preprocess(image, size: int = 32) -> np.ndarray:
    """Resize to ``size`` x ``size`` and normalise into a vector in [0, 1]."""
    return normalize(resize_bilinear(image, size, size))


def preprocess_many(images, size: int = 32) -> np.ndarray:
    return np.stack([preprocess(img, size) for img in images]) if len(images) else np.zeros((0, size * size))


# --------------------------------------------------------------------------
# manifests
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: Path
    irma: IrmaCode | None = None


@dataclass
class Manifest:
    entries: list
    split: str | None = None

    @property
    def ids(self) -> list[str]:
        return [e.image_id for e in self.entries]

    def irma_codes(self) -> dict:
        return {e.image_id: e.irma for e in self.entries if e.irma is not None}

    def load_images(self) -> list[np.ndarray]:
        missing = [e.image_id for e in self.entries if not e.path.is_file()]
        if missing:
            raise ImageLoadError(f"missing images for ids {missing[:10]}" + (" ..." if len(missing) > 10 else ""), self.entries[0].path.parent)
        return [load_grayscale(e.path) for e in self.entries]


def read_manifest(path) -> Manifest:
    path = Path(path)
    root = path.parent
    entries, split, seen = [], None, set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#split="):
                split = line.split("=", 1)[1].strip()
            continue
        parts = line.split(";")
        if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
            raise FormatError(f"{path}:{lineno}: expected 'image_id;relative_path;irma_code'", path=path)
        image_id = parts[0].strip()
        if image_id in seen:
            raise FormatError(f"{path}:{lineno}: duplicate image id {image_id!r}", path=path)
        seen.add(image_id)
        code = parts[2].strip() if len(parts) == 3 else ""
        try:
            irma = parse_irma(code) if code else None
        except InvalidArgumentError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}", path=path) from exc
        entries.append(ManifestEntry(image_id, root / parts[1].strip(), irma))
    return Manifest(entries, split)


def write_manifest(path, entries, split=None) -> None:
    path = Path(path)
    lines = [f"#split={split}"] if split else []
    for e in entries:
        rel = Path(e.path)
        if rel.is_absolute():
            rel = rel.relative_to(path.parent)
        lines.append(f"{e.image_id};{rel.as_posix()};{e.irma.text if e.irma else ''}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# synthetic data
# --------------------------------------------------------------------------

_B36 = "0123456789abcdefghijklmnopqrstuvwxyz"


def synthetic_irma(label: int) -> str:
    """Hierarchical IRMA code for class ``label``; nearby labels share prefixes."""
    group = label // 4
    t = "1121" if group % 2 == 0 else "1123"
    d = f"{_B36[1 + group % 5]}{'a' if label % 2 else '2'}0"
    a = f"{_B36[(1 + group) % 36]}{_B36[1 + label % 4]}{_B36[(group // 35) % 36]}"
    return f"{t}-{d}-{a}-700"


def _class_templates(classes, rng):
    groups = {}
    templates = []
    for c in range(classes):
        g = c // 4
        if g not in groups:
            groups[g] = [_random_shape(rng, big=True)]
        own = [_random_shape(rng) for _ in range(int(rng.integers(2, 4)))]
        templates.append(groups[g] + own)
    return templates


def _random_shape(rng, big=False):
    kind = int(rng.integers(0, 3))
    cy, cx = rng.uniform(0.25, 0.75, size=2)
    ry, rx = rng.uniform(0.18, 0.3, size=2) if big else rng.uniform(0.06, 0.18, size=2)
    angle = rng.uniform(0, np.pi)
    level = rng.uniform(0.35, 1.0)
    return kind, cy, cx, ry, rx, angle, level


def _draw(shapes, size, rng, jitter):
    yy, xx = (np.mgrid[0:size, 0:size] + 0.5) / size
    img = np.full((size, size), 0.08) + 0.1 * yy
    for kind, cy, cx, ry, rx, angle, level in shapes:
        cy += rng.normal(0, jitter)
        cx += rng.normal(0, jitter)
        s = 1.0 + rng.normal(0, jitter)
        ry, rx = ry * s, rx * s
        level *= 1.0 + rng.normal(0, jitter)
        ca, sa = np.cos(angle), np.sin(angle)
        u = ((xx - cx) * ca + (yy - cy) * sa) / rx
        v = (-(xx - cx) * sa + (yy - cy) * ca) / ry
        if kind == 0:
            mask = u * u + v * v <= 1.0
        elif kind == 1:
            mask = (np.abs(u) <= 1.0) & (np.abs(v) <= 1.0)
        else:
            mask = (np.abs(u) <= 1.0) & (np.abs(v) <= 0.25)
        img = np.where(mask, np.maximum(img, level), img)
    return img


@dataclass
class SyntheticSet:
    ids: list
    labels: np.ndarray
    images: np.ndarray  # (n, size, size) uint8
    irma: list  # IrmaCode per image


def generate_synthetic(n: int, classes: int, size: int = 64, seed: int = 0, noise: float = 0.2, jitter: float = 0.08) -> SyntheticSet:
    """Deterministic class-structured grayscale images with IRMA codes.

    Each class draws a fixed set of ellipses, boxes and bars (classes in
    the same group of four share one large shape); every instance jitters
    position, scale and brightness and adds Gaussian noise.  Image ``i``
    belongs to class ``i % classes``.
    """
    if n < 1 or classes < 1:
        raise InvalidArgumentError("n and classes must be >= 1")
    if size < 2:
        raise InvalidArgumentError("size must be >= 2")
    rng = nn.make_rng(seed)
    templates = _class_templates(classes, rng)
    labels = np.arange(n) % classes
    images = np.empty((n, size, size), dtype=np.uint8)
    for i, c in enumerate(labels):
        img = _draw(templates[c], size, rng, jitter)
        img = img + rng.normal(0.0, noise, size=img.shape)
        images[i] = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    width = len(str(n - 1))
    ids = [f"img{i:0{width}d}" for i in range(n)]
    codes = {c: parse_irma(synthetic_irma(c)) for c in range(classes)}
    return SyntheticSet(ids, labels, images, [codes[c] for c in labels])


def split_indices(n: int, test_fraction: float, seed: int = 0):
    """Deterministic shuffled train/test split of ``range(n)``."""
    if not 0.0 < test_fraction < 1.0:
        raise InvalidArgumentError("test_fraction must be in (0, 1)")
    perm = nn.make_rng(seed).permutation(n)
    n_test = max(1, int(round(n * test_fraction)))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def write_synthetic(out_dir, data: SyntheticSet, test_fraction: float = 0.125, seed: int = 0):
    """Write PGM files plus ``train.manifest`` / ``test.manifest``."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    entries = []
    for image_id, img, code in zip(data.ids, data.images, data.irma):
        rel = Path("images") / f"{image_id}.pgm"
        save_pgm(out / rel, img)
        entries.append(ManifestEntry(image_id, rel, code))
    train, test = split_indices(len(entries), test_fraction, seed)
    write_manifest(out / "train.manifest", [entries[i] for i in train], "train")
    write_manifest(out / "test.manifest", [entries[i] for i in test], "test")
    return out / "train.manifest", out / "test.manifest"


# --------------------------------------------------------------------------
# model files
# --------------------------------------------------------------------------


def model_to_bytes(model: nn.Network) -> bytes:
    parts = [MODEL_MAGIC, struct.pack("<I", len(model.layers))]
    width = model.n_inputs
    for layer in model.layers:
        if isinstance(layer, nn.Dropout):
            parts.append(_LAYER.pack(_KIND_DROPOUT, width, width, layer.p))
        else:
            kind = _KIND_SIGMOID if layer.activation == "sigmoid" else _KIND_SOFTMAX
            parts.append(_LAYER.pack(kind, layer.fan_in, layer.fan_out, 0.0))
            width = layer.fan_out
    for d in model.dense_layers:
        parts.append(np.ascontiguousarray(d.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(d.bias, dtype="<f8").tobytes())
    return b"".join(parts)


def model_from_bytes(data: bytes, path=None) -> nn.Network:
    where = f"{path}: " if path else ""
    magic = data[: len(MODEL_MAGIC)]
    if magic != MODEL_MAGIC:
        raise FormatError(
            f"{where}bad magic: expected {MODEL_MAGIC!r}, got {magic!r}", path, MODEL_MAGIC, magic
        )
    pos = len(MODEL_MAGIC)
    try:
        (n_layers,) = struct.unpack_from("<I", data, pos)
        pos += 4
        specs = []
        for _ in range(n_layers):
            specs.append(_LAYER.unpack_from(data, pos))
            pos += _LAYER.size
        layers = []
        for kind, fan_in, fan_out, p in specs:
            if kind == _KIND_DROPOUT:
                layers.append(nn.Dropout(p))
                continue
            if kind not in (_KIND_SIGMOID, _KIND_SOFTMAX):
                raise FormatError(f"{where}unknown layer kind {kind}", path)
            count = fan_in * fan_out
            w = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(fan_out, fan_in)
            pos += 8 * count
            b = np.frombuffer(data, dtype="<f8", count=fan_out, offset=pos)
            pos += 8 * fan_out
            act = "sigmoid" if kind == _KIND_SIGMOID else "softmax"
            layers.append(nn.Dense(w.astype(np.float64), b.astype(np.float64), act))
    except (struct.error, ValueError) as exc:
        raise FormatError(f"{where}truncated or corrupt model: {exc}", path) from exc
    if pos != len(data):
        raise FormatError(f"{where}{len(data) - pos} trailing bytes after model", path)
    try:
        return nn.Network(layers)
    except InvalidArgumentError as exc:
        raise FormatError(f"{where}inconsistent layers: {exc}", path) from exc


def save_model(path, model: nn.Network) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> nn.Network:
    path = Path(path)
    return model_from_bytes(path.read_bytes(), path)
