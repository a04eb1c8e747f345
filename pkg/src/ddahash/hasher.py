"""Deep de-noising autoencoder hashing.

Training happens in two stages.  :func:`layer_train` pretrains each encoder
layer on its own as a small de-noising autoencoder
(``Dropout -> Sigmoid -> Sigmoid``).  :func:`fine_tune` then stacks the
pretrained layers into one deep autoencoder, puts a dropout layer right
before the coding layer, turns the last decoder layer into a softmax, and
trains the whole stack end to end.  Once trained, the decoder is dropped
(:func:`build_encoder`) and the coding-layer activations are thresholded
at 0.5 (:func:`binarize`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import nn
from .codes import BinaryCode, pack_rows
from .errors import InvalidArgumentError, InvalidStateError

logger = logging.getLogger(__name__)

EPOCHS = 100
BATCH_SIZE = 16
DROPOUT_P = 0.2


@dataclass(frozen=True)
class Preset:
    name: str
    geometry: tuple
    finetune_optimizer: str
    finetune_epochs: int = EPOCHS


PRESETS = {
    "dda16": Preset("dda16", ((1024, 768), (768, 512), (512, 16)), "rmsprop"),
    "dda512": Preset("dda512", ((1024, 768), (768, 512)), "adam"),
    "rabc": Preset("rabc", ((4096, 2048),), "adam", finetune_epochs=2200),
}


def check_geometry(geometry) -> list[tuple[int, int]]:
    """Validate an encoder geometry and return it as a list of int pairs."""
    try:
        geo = [(int(a), int(b)) for a, b in geometry]
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"geometry must be a list of (fan_in, fan_out) pairs: {geometry!r}") from exc
    if not geo:
        raise InvalidArgumentError("geometry is empty")
    for i, (a, b) in enumerate(geo):
        if a < 1 or b < 1:
            raise InvalidArgumentError(f"geometry pair {i} has non-positive size {(a, b)}")
        if i and geo[i - 1][1] != a:
            raise InvalidArgumentError(
                f"geometry pair {i} starts at {a} but the previous pair ends at {geo[i - 1][1]}"
            )
    return geo


def parse_geometry(text: str) -> list[tuple[int, int]]:
    """Parse ``"1024x768,768x512"`` (or ``1024-768-512`` chains)."""
    text = text.strip()
    try:
        if "x" in text:
            pairs = [tuple(int(v) for v in part.split("x")) for part in text.split(",")]
        else:
            dims = [int(v) for v in text.replace(",", "-").split("-")]
            pairs = list(zip(dims[:-1], dims[1:]))
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse geometry {text!r}") from exc
    if any(len(p) != 2 for p in pairs):
        raise InvalidArgumentError(f"cannot parse geometry {text!r}")
    return check_geometry(pairs)


def _as_images(images, width):
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != width:
        raise InvalidArgumentError(f"images of shape {x.shape} do not match input width {width}")
    if x.shape[0] == 0:
        raise InvalidArgumentError("no training images")
    return x


def layer_train(
    images,
    geometry,
    rng=0,
    epochs: int = EPOCHS,
    batch_size: int = BATCH_SIZE,
    p: float = DROPOUT_P,
    optimizer: str = "rmsprop",
    on_epoch=None,
):
    """Greedy layer-wise de-noising pretraining.

    For every ``(fan_in, fan_out)`` pair a network
    ``Dropout(p) -> Sig(fan_in->fan_out) -> Sig(fan_out->fan_in)`` is trained
    to reconstruct its own clean input.  Layer ``i > 0`` is trained on the
    clean (test-mode) encoding produced by the already trained layer ``i-1``.

    Returns ``(encoder, decoder)``: two lists of ``(weights, bias)`` tuples,
    with ``decoder[i]`` the reconstruction layer paired with ``encoder[i]``.
    ``on_epoch(layer_index, epoch, loss)`` is called after every epoch.
    """
    geo = check_geometry(geometry)
    x = _as_images(images, geo[0][0])
    rng = nn.make_rng(rng)
    encoder, decoder = [], []
    for i, (fan_in, fan_out) in enumerate(geo):
        net = nn.Network(
            [
                nn.Dropout(p),
                nn.Dense.glorot(fan_in, fan_out, rng),
                nn.Dense.glorot(fan_out, fan_in, rng),
            ]
        )
        cb = None if on_epoch is None else (lambda e, loss, i=i: on_epoch(i, e, loss))
        hist = nn.train_epochs(net, x, epochs, batch_size, optimizer, rng, on_epoch=cb)
        if hist:
            logger.info("layer %d %s: loss %.4f -> %.4f", i, (fan_in, fan_out), hist[0], hist[-1])
        enc, dec = net.layers[1], net.layers[2]
        encoder.append((enc.weights, enc.bias))
        decoder.append((dec.weights, dec.bias))
        if i + 1 < len(geo):
            x = enc.forward(x)
    return encoder, decoder


def build_dda(
    geometry,
    encoder,
    decoder,
    use_dropout: bool = True,
    p: float = DROPOUT_P,
    output_activation: str = "softmax",
) -> nn.Network:
    """Stack pretrained weights into a full (untrained) deep autoencoder.

    Encoder sigmoid layers in order, with ``Dropout(p)`` inserted right
    before the coding layer, then the decoder layers in reverse order.  The
    last decoder layer uses ``output_activation``; the rest are sigmoid.
    Weights are copied, so training the result leaves the inputs untouched.
    """
    geo = check_geometry(geometry)
    if len(encoder) != len(geo) or len(decoder) != len(geo):
        raise InvalidArgumentError(
            f"{len(geo)} geometry pairs but {len(encoder)} encoder and {len(decoder)} decoder weight sets"
        )
    layers = []
    for i, ((fan_in, fan_out), (w, b)) in enumerate(zip(geo, encoder)):
        if np.shape(w) != (fan_out, fan_in):
            raise InvalidArgumentError(f"encoder weights {i} have shape {np.shape(w)}, expected {(fan_out, fan_in)}")
        if use_dropout and i == len(geo) - 1:
            layers.append(nn.Dropout(p))
        layers.append(nn.Dense(np.copy(w), np.copy(b), "sigmoid"))
    for j in range(len(geo) - 1, -1, -1):
        fan_in, fan_out = geo[j]
        w, b = decoder[j]
        if np.shape(w) != (fan_in, fan_out):
            raise InvalidArgumentError(f"decoder weights {j} have shape {np.shape(w)}, expected {(fan_in, fan_out)}")
        act = output_activation if j == 0 else "sigmoid"
        layers.append(nn.Dense(np.copy(w), np.copy(b), act))
    return nn.Network(layers)


def fine_tune(
    images,
    geometry,
    encoder,
    decoder,
    optimizer: str = "rmsprop",
    use_dropout: bool = True,
    rng=0,
    epochs: int = EPOCHS,
    batch_size: int = BATCH_SIZE,
    p: float = DROPOUT_P,
    output_activation: str = "softmax",
    on_epoch=None,
) -> nn.Network:
    """Train the stacked autoencoder end to end and return it.

    ``use_dropout=False`` leaves out the pre-coding dropout layer.
    """
    model = build_dda(geometry, encoder, decoder, use_dropout, p, output_activation)
    x = _as_images(images, model.n_inputs)
    hist = nn.train_epochs(model, x, epochs, batch_size, optimizer, rng, on_epoch=on_epoch)
    if hist:
        logger.info("fine-tune %s: loss %.4f -> %.4f", optimizer, hist[0], hist[-1])
    return model


def _coding_layer_index(model: nn.Network) -> int:
    """Index into ``model.layers`` of the coding layer of a mirrored stack."""
    dense = model.dense_layers
    n = len(dense)
    if n < 2 or n % 2:
        raise InvalidStateError(f"model has {n} dense layers; expected an even-sized encoder/decoder stack")
    for k in range(n // 2):
        enc, dec = dense[k], dense[n - 1 - k]
        if (enc.fan_in, enc.fan_out) != (dec.fan_out, dec.fan_in):
            raise InvalidStateError(f"dense layers {k} and {n - 1 - k} are not mirror images: {enc!r} vs {dec!r}")
    target = dense[n // 2 - 1]
    return next(i for i, layer in enumerate(model.layers) if layer is target)


def build_encoder(model: nn.Network) -> nn.Network:
    """Drop the decoder half, keeping everything up to the coding layer."""
    idx = _coding_layer_index(model)
    coding = model.layers[idx]
    if coding.activation != "sigmoid":
        raise InvalidStateError("the coding layer must be a sigmoid layer")
    return nn.Network([layer.copy() for layer in model.layers[: idx + 1]])


def is_autoencoder(model: nn.Network) -> bool:
    try:
        _coding_layer_index(model)
    except InvalidStateError:
        return False
    return True


def as_encoder(model: nn.Network) -> nn.Network:
    """``build_encoder`` for full autoencoders; encoders pass through."""
    return build_encoder(model) if is_autoencoder(model) else model


def binarize(activations) -> BinaryCode:
    """Bit ``i`` is set iff ``activations[i] > 0.5``."""
    a = np.asarray(activations, dtype=np.float64).ravel()
    return BinaryCode.from_bits(a > 0.5)


def binarize_rows(activations) -> np.ndarray:
    """Row-wise :func:`binarize`, returning packed ``(n, ceil(k/8))`` bytes."""
    return pack_rows(np.asarray(activations) > 0.5)


def encode(encoder: nn.Network, images, chunk: int = 1024) -> np.ndarray:
    """Packed binary codes for ``images`` (rows) under a frozen encoder."""
    enc = as_encoder(encoder)
    x = np.asarray(images, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    parts = [binarize_rows(enc.predict(x[s : s + chunk])) for s in range(0, x.shape[0], chunk)]
    if not parts:
        return np.zeros((0, (enc.n_outputs + 7) // 8), dtype=np.uint8)
    return np.concatenate(parts)


def encode_codes(encoder: nn.Network, images) -> list[BinaryCode]:
    enc = as_encoder(encoder)
    k = enc.n_outputs
    return [BinaryCode(row, k) for row in encode(enc, images)]
