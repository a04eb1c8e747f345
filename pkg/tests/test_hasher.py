import numpy as np
import pytest

from ddahash import hasher, nn
from ddahash.errors import InvalidArgumentError, InvalidStateError


def glorot_pair(geometry):
    enc = [nn.glorot_init(a, b, 0) for a, b in geometry]
    dec = [nn.glorot_init(b, a, 1) for a, b in geometry]
    return enc, dec


def test_dda16_layer_sequence():
    geo = hasher.PRESETS["dda16"].geometry
    enc, dec = glorot_pair(geo)
    model = hasher.build_dda(geo, enc, dec)
    assert repr(model.layers) == (
        "[Sig(1024->768), Sig(768->512), Dropout(0.2), Sig(512->16), "
        "Sig(16->512), Sig(512->768), Softmax(768->1024)]"
    )
    x = np.random.default_rng(0).random((2, 1024))
    out = model.predict(x)
    np.testing.assert_allclose(out.sum(axis=1), 1.0)
    encoder = hasher.build_encoder(model)
    assert repr(encoder.layers) == "[Sig(1024->768), Sig(768->512), Dropout(0.2), Sig(512->16)]"
    assert hasher.encode(encoder, x).shape == (2, 2)


def test_no_dropout_and_output_activation():
    geo = [(8, 4), (4, 2)]
    enc, dec = glorot_pair(geo)
    m = hasher.build_dda(geo, enc, dec, use_dropout=False, output_activation="sigmoid")
    assert repr(m.layers) == "[Sig(8->4), Sig(4->2), Sig(2->4), Sig(4->8)]"


def test_build_dda_copies_weights():
    geo = [(8, 4)]
    enc, dec = glorot_pair(geo)
    m = hasher.build_dda(geo, enc, dec)
    m.dense_layers[0].weights[:] = 0
    assert enc[0][0].any()


def test_geometry_validation():
    assert hasher.parse_geometry("1024x768,768x512") == [(1024, 768), (768, 512)]
    assert hasher.parse_geometry("1024-768-512") == [(1024, 768), (768, 512)]
    for bad in ["", "10x5,6x2", "10x0", "axb", "10x5x2"]:
        with pytest.raises(InvalidArgumentError):
            hasher.parse_geometry(bad)
    enc, dec = glorot_pair([(8, 4)])
    with pytest.raises(InvalidArgumentError):
        hasher.build_dda([(8, 4), (4, 2)], enc, dec)


def test_binarize_threshold_is_strict():
    assert hasher.binarize([0.2, 0.7, 0.5]).bits().tolist() == [0, 1, 0]
    packed = hasher.binarize_rows(np.array([[0.2, 0.7, 0.5], [0.51, 0.5, 1.0]]))
    assert packed[:, 0].tolist() == [0b01000000, 0b10100000]


def test_encoder_extraction_errors():
    lone = nn.Network([nn.Dense.glorot(8, 4, 0)])
    with pytest.raises(InvalidStateError):
        hasher.build_encoder(lone)
    assert hasher.as_encoder(lone) is lone
    odd = nn.Network([nn.Dense.glorot(8, 4, 0), nn.Dense.glorot(4, 3, 0)])
    with pytest.raises(InvalidStateError):
        hasher.build_encoder(odd)


def toy_images(n=120, d=64, seed=0):
    rng = np.random.default_rng(seed)
    protos = rng.random((6, d)) > 0.5
    x = protos[np.arange(n) % 6].astype(float)
    flip = rng.random(x.shape) < 0.05
    return np.abs(x - flip)


def test_layer_train_shapes_and_isolation():
    x = toy_images()
    seen = []
    enc, dec = hasher.layer_train(x, [(64, 32), (32, 8)], rng=0, epochs=3, on_epoch=lambda *a: seen.append(a))
    assert [w.shape for w, _ in enc] == [(32, 64), (8, 32)]
    assert [w.shape for w, _ in dec] == [(64, 32), (32, 8)]
    assert [(i, e) for i, e, _ in seen] == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    # training a second layer never touches the first one
    enc1, _ = hasher.layer_train(x, [(64, 32)], rng=0, epochs=3)
    assert np.array_equal(enc1[0][0], enc[0][0])


def test_fine_tune_reduces_loss_and_is_deterministic():
    x = toy_images()
    geo = [(64, 16)]
    enc, dec = hasher.layer_train(x, geo, rng=0, epochs=5)
    losses = []
    m = hasher.fine_tune(x, geo, enc, dec, "adam", rng=1, epochs=15, on_epoch=lambda e, l: losses.append(l))
    assert losses[-1] < losses[0]
    m2 = hasher.fine_tune(x, geo, enc, dec, "adam", rng=1, epochs=15)
    assert all(np.array_equal(a, b) for a, b in zip(m.params(), m2.params()))
    bits = np.unpackbits(hasher.encode(m, x), axis=1)[:, :16].astype(int)
    d = np.abs(bits[:, None, :] - bits[None, :, :]).sum(-1)
    same = (np.arange(120)[:, None] % 6) == (np.arange(120)[None, :] % 6)
    assert d[same].mean() < d[~same].mean()


def test_zero_epochs_keeps_pretrained_weights():
    x = toy_images()
    enc, dec = hasher.layer_train(x, [(64, 16)], rng=0, epochs=2)
    m = hasher.fine_tune(x, [(64, 16)], enc, dec, epochs=0)
    assert np.array_equal(m.dense_layers[0].weights, enc[0][0])
