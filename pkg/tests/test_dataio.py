import numpy as np
import pytest

from ddahash.dataio import (
    ManifestEntry,
    generate_synthetic,
    load_grayscale,
    load_model,
    model_from_bytes,
    model_to_bytes,
    preprocess,
    read_manifest,
    resize_bilinear,
    save_model,
    save_pgm,
    split_indices,
    write_manifest,
    write_synthetic,
)
from ddahash.errors import FormatError, ImageLoadError, InvalidArgumentError
from ddahash.hasher import build_dda, layer_train
from ddahash.irma import parse_irma


def test_tiny_pgm(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n# comment\n2 2\n255\n" + bytes([0, 64, 128, 255]))
    img = load_grayscale(p)
    assert img.dtype == np.uint8 and img.tolist() == [[0, 64], [128, 255]]
    x = preprocess(img, size=2)
    assert x.shape == (4,)
    np.testing.assert_allclose(x, [0, 64 / 255, 128 / 255, 1.0])


def test_ascii_pgm_and_maxval(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_text("P2\n3 1\n15\n0 15 5\n")
    assert load_grayscale(p).tolist() == [[0, 255, 85]]


@pytest.mark.parametrize("payload", [b"P5\n2 2\n255\n" + bytes(3), b"P5\n2 2\n", b"P2\n2 2\n255\n1 2 3", b"GIF89a"])
def test_corrupt_images(tmp_path, payload):
    p = tmp_path / "bad.pgm"
    p.write_bytes(payload)
    with pytest.raises(ImageLoadError) as info:
        load_grayscale(p)
    assert info.value.path == p


def test_missing_image(tmp_path):
    with pytest.raises(ImageLoadError):
        load_grayscale(tmp_path / "nope.pgm")


def test_png_via_pillow(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    arr = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    Image.fromarray(arr).save(tmp_path / "a.png")
    assert np.array_equal(load_grayscale(tmp_path / "a.png"), arr)


def test_pgm_round_trip(tmp_path):
    img = np.random.default_rng(0).integers(0, 256, size=(5, 7), dtype=np.uint8)
    save_pgm(tmp_path / "a.pgm", img)
    assert np.array_equal(load_grayscale(tmp_path / "a.pgm"), img)


def test_checkerboard_downscale_averages():
    board = (np.indices((8, 8)).sum(axis=0) % 2) * 255
    out = resize_bilinear(board, 4, 4)
    np.testing.assert_allclose(out, 127.5)


def test_resize_identity_and_constant():
    img = np.random.default_rng(1).random((6, 9))
    out = resize_bilinear(img, 9, 6)
    assert np.array_equal(out, img) and out is not img
    np.testing.assert_allclose(resize_bilinear(np.full((5, 3), 7.0), 11, 4), 7.0)
    with pytest.raises(InvalidArgumentError):
        resize_bilinear(img, 0, 3)


def test_resize_upscale_is_monotone_on_ramp():
    ramp = np.tile(np.arange(4.0), (2, 1))
    out = resize_bilinear(ramp, 8, 2)
    assert np.all(np.diff(out[0]) >= 0)
    assert out[0, 0] == 0 and out[0, -1] == 3


def test_manifest_round_trip(tmp_path):
    entries = [
        ManifestEntry("a", tmp_path / "x" / "a.pgm", parse_irma("1121-4a0-914-700")),
        ManifestEntry("b", "x/b.pgm", None),
    ]
    write_manifest(tmp_path / "m.txt", entries, split="train")
    m = read_manifest(tmp_path / "m.txt")
    assert m.split == "train" and m.ids == ["a", "b"]
    assert m.entries[1].path == tmp_path / "x" / "b.pgm"
    assert list(m.irma_codes()) == ["a"]
    with pytest.raises(ImageLoadError, match="a"):
        m.load_images()


def test_manifest_errors(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("a;x.pgm\na;y.pgm\n")
    with pytest.raises(FormatError, match="duplicate"):
        read_manifest(p)
    p.write_text("a;x.pgm;not-a-code\n")
    with pytest.raises(FormatError):
        read_manifest(p)


def test_synthetic_is_deterministic(tmp_path):
    a = generate_synthetic(40, 10, size=32, seed=3)
    b = generate_synthetic(40, 10, size=32, seed=3)
    assert np.array_equal(a.images, b.images) and a.ids == b.ids
    assert a.labels.tolist() == [i % 10 for i in range(40)]
    assert a.irma[0] == a.irma[10] != a.irma[1]
    train, test = write_synthetic(tmp_path, a, test_fraction=0.25, seed=1)
    tr, te = read_manifest(train), read_manifest(test)
    assert len(tr.entries) == 30 and len(te.entries) == 10
    assert not set(tr.ids) & set(te.ids)
    imgs = te.load_images()
    idx = a.ids.index(te.ids[0])
    assert np.array_equal(imgs[0], a.images[idx])


def test_synthetic_classes_are_separable():
    data = generate_synthetic(200, 10, size=32, seed=0)
    x = data.images.reshape(200, -1).astype(float)
    means = np.stack([x[data.labels == c].mean(axis=0) for c in range(10)])
    d = ((x[:, None, :] - means[None]) ** 2).sum(-1)
    assert (d.argmin(axis=1) == data.labels).mean() > 0.8


def test_split_indices():
    tr, te = split_indices(100, 0.125, seed=0)
    assert len(te) == 12 and len(tr) == 88
    assert sorted(np.concatenate([tr, te]).tolist()) == list(range(100))
    with pytest.raises(InvalidArgumentError):
        split_indices(10, 1.0)


def small_model():
    rng = np.random.default_rng(0)
    x = rng.random((20, 16))
    enc, dec = layer_train(x, [(16, 8), (8, 4)], rng=0, epochs=1)
    return build_dda([(16, 8), (8, 4)], enc, dec)


def test_model_round_trip(tmp_path):
    model = small_model()
    save_model(tmp_path / "m.bin", model)
    first = (tmp_path / "m.bin").read_bytes()
    back = load_model(tmp_path / "m.bin")
    assert repr(back.layers) == repr(model.layers)
    for p, q in zip(back.params(), model.params()):
        assert np.array_equal(p, q)
    save_model(tmp_path / "m2.bin", back)
    assert (tmp_path / "m2.bin").read_bytes() == first


def test_model_errors():
    data = model_to_bytes(small_model())
    with pytest.raises(FormatError) as info:
        model_from_bytes(b"XXXXX" + data[5:])
    assert info.value.expected == b"DDAH1" and info.value.actual == b"XXXXX"
    with pytest.raises(FormatError, match="truncated"):
        model_from_bytes(data[:-3])
    with pytest.raises(FormatError, match="trailing"):
        model_from_bytes(data + b"\0")
