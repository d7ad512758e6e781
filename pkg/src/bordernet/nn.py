"""Minimal convolutional network engine: manual backprop, Adam, two nets.

Layers operate on float arrays shaped (batch, channels, height, width)
or (batch, features); every layer implements forward/backward by hand
and exposes its parameters for the optimizer.  Convolution uses
cross-correlation semantics (no kernel flip) with zero padding, im2col
under the hood.  Networks are described declaratively by NetworkSpec so
they can be rebuilt bit-exactly from a checkpoint.

Two architectures are provided:

* ``lenet5_spec``: the classic 5-layer conv net sized for 1x28x28 input
  (ReLU activations, 2x2 max pooling, padding 2 on the first conv).
* ``bordernet_spec``: the same net preceded by the frozen oriented
  filter bank, either as one 4-channel convolution ("bank") or as four
  chained single-channel convolutions ("cascade").  Frozen weights never
  enter the optimizer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import filters as _filters
from .datasets import NORMALIZED, LabeledSet

CHECKPOINT_FORMAT = "bordernet-checkpoint"
CHECKPOINT_VERSION = 1


class Param:
    """A trainable (or frozen) array with its gradient slot."""

    __slots__ = ("name", "value", "grad", "trainable")

    def __init__(self, name, value, trainable=True):
        self.name = name
        self.value = value
        self.grad = None
        self.trainable = trainable


def _he_uniform(rng, shape, fan_in, dtype):
    limit = math.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


# ---------------------------------------------------------------------------
# Layers

class Conv2D:
    """2-D cross-correlation with zero padding."""

    def __init__(self, in_channels, out_channels, kernel, stride=1, pad=0, *,
                 weights=None, bias=None, trainable=True, rng=None, dtype=np.float32):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = pad
        if weights is None:
            if rng is None:
                raise ValueError("random init needs an rng")
            fan_in = in_channels * kernel * kernel
            weights = _he_uniform(rng, (out_channels, in_channels, kernel, kernel), fan_in, dtype)
        else:
            weights = np.asarray(weights, dtype=dtype).copy()
            if weights.shape != (out_channels, in_channels, kernel, kernel):
                raise ValueError(f"weight shape {weights.shape} does not match layer geometry")
        if bias is None:
            bias = np.zeros(out_channels, dtype=dtype)
        else:
            bias = np.asarray(bias, dtype=dtype).copy()
        self.w = Param("weights", weights, trainable)
        self.b = Param("bias", bias, trainable)
        self._cache = None

    @property
    def trainable(self):
        return self.w.trainable

    def params(self):
        return [self.w, self.b]

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {c}")
        oh = (h + 2 * self.pad - self.kernel) // self.stride + 1
        ow = (w + 2 * self.pad - self.kernel) // self.stride + 1
        if oh < 1 or ow < 1:
            raise ValueError("kernel larger than padded input")
        return (self.out_channels, oh, ow)

    def _im2col(self, x):
        b, c, h, w = x.shape
        k, st, p = self.kernel, self.stride, self.pad
        oh = (h + 2 * p - k) // st + 1
        ow = (w + 2 * p - k) // st + 1
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        cols = np.empty((b, c, k, k, oh, ow), dtype=x.dtype)
        for i in range(k):
            for j in range(k):
                cols[:, :, i, j] = xp[:, :, i:i + st * oh:st, j:j + st * ow:st]
        return cols.reshape(b, c * k * k, oh * ow), oh, ow

    def forward(self, x):
        cols, oh, ow = self._im2col(x)
        wmat = self.w.value.reshape(self.out_channels, -1)
        out = np.matmul(wmat, cols)
        out += self.b.value[:, None]
        self._cache = (x.shape, cols)
        return out.reshape(x.shape[0], self.out_channels, oh, ow)

    def backward(self, grad_out):
        x_shape, cols = self._cache
        b = grad_out.shape[0]
        gmat = grad_out.reshape(b, self.out_channels, -1)
        self.w.grad = np.einsum("bop,bkp->ok", gmat, cols).reshape(self.w.value.shape)
        self.b.grad = grad_out.sum(axis=(0, 2, 3))
        wmat = self.w.value.reshape(self.out_channels, -1)
        dcols = np.matmul(wmat.T, gmat)
        return self._col2im(dcols, x_shape)

    def _col2im(self, dcols, x_shape):
        b, c, h, w = x_shape
        k, st, p = self.kernel, self.stride, self.pad
        oh = (h + 2 * p - k) // st + 1
        ow = (w + 2 * p - k) // st + 1
        dxp = np.zeros((b, c, h + 2 * p, w + 2 * p), dtype=dcols.dtype)
        d6 = dcols.reshape(b, c, k, k, oh, ow)
        for i in range(k):
            for j in range(k):
                dxp[:, :, i:i + st * oh:st, j:j + st * ow:st] += d6[:, :, i, j]
        return dxp[:, :, p:p + h, p:p + w] if p else dxp


class ReLU:
    def __init__(self):
        self._mask = None

    def params(self):
        return []

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0)

    def backward(self, grad_out):
        return grad_out * self._mask


class MaxPool2:
    """2x2 max pooling, stride 2; gradients route to one argmax per window."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if h % 2 or w % 2:
            raise ValueError(f"pooling needs even spatial dims, got {h}x{w}")
        return (c, h // 2, w // 2)

    def forward(self, x):
        b, c, h, w = x.shape
        win = x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        win = win.reshape(b, c, h // 2, w // 2, 4)
        idx = win.argmax(axis=-1)
        self._cache = (x.shape, idx)
        return np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]

    def backward(self, grad_out):
        (b, c, h, w), idx = self._cache
        dwin = np.zeros((b, c, h // 2, w // 2, 4), dtype=grad_out.dtype)
        np.put_along_axis(dwin, idx[..., None], grad_out[..., None], axis=-1)
        dwin = dwin.reshape(b, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return dwin.reshape(b, c, h, w)


class Flatten:
    def __init__(self):
        self._shape = None

    def params(self):
        return []

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        return grad_out.reshape(self._shape)


class Dense:
    def __init__(self, in_dim, out_dim, *, weights=None, bias=None,
                 trainable=True, rng=None, dtype=np.float32):
        self.in_dim = in_dim
        self.out_dim = out_dim
        if weights is None:
            if rng is None:
                raise ValueError("random init needs an rng")
            weights = _he_uniform(rng, (in_dim, out_dim), in_dim, dtype)
        else:
            weights = np.asarray(weights, dtype=dtype).copy()
        if bias is None:
            bias = np.zeros(out_dim, dtype=dtype)
        else:
            bias = np.asarray(bias, dtype=dtype).copy()
        self.w = Param("weights", weights, trainable)
        self.b = Param("bias", bias, trainable)
        self._x = None

    @property
    def trainable(self):
        return self.w.trainable

    def params(self):
        return [self.w, self.b]

    def out_shape(self, in_shape):
        if len(in_shape) != 1 or in_shape[0] != self.in_dim:
            raise ValueError(f"expected flat input of {self.in_dim}, got {in_shape}")
        return (self.out_dim,)

    def forward(self, x):
        self._x = x
        return x @ self.w.value + self.b.value

    def backward(self, grad_out):
        self.w.grad = self._x.T @ grad_out
        self.b.grad = grad_out.sum(axis=0)
        return grad_out @ self.w.value.T


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch and its gradient w.r.t. logits."""
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    probs = ez / ez.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    picked = z[np.arange(n), labels] - np.log(ez.sum(axis=1))
    loss = -float(picked.mean())
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, grad


# ---------------------------------------------------------------------------
# Declarative network description

@dataclass(frozen=True)
class LayerSpec:
    """One entry of a NetworkSpec; weights are set for frozen layers only."""

    kind: str  # conv | relu | maxpool | flatten | dense
    out_channels: int | None = None
    kernel: int | None = None
    stride: int = 1
    pad: int = 0
    out_dim: int | None = None
    trainable: bool = True
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None

    def config(self) -> dict:
        cfg = {"kind": self.kind, "trainable": self.trainable}
        if self.kind == "conv":
            cfg.update(out_channels=self.out_channels, kernel=self.kernel,
                       stride=self.stride, pad=self.pad)
        elif self.kind == "dense":
            cfg.update(out_dim=self.out_dim)
        return cfg


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layer list, input geometry and an optional default seed."""

    layers: tuple[LayerSpec, ...]
    input_shape: tuple[int, int, int] = (1, 28, 28)
    seed: int | None = None
    name: str = "net"


def conv(out_channels, kernel, stride=1, pad=0, trainable=True, weights=None, bias=None):
    return LayerSpec("conv", out_channels=out_channels, kernel=kernel, stride=stride,
                     pad=pad, trainable=trainable, weights=weights, bias=bias)


def relu():
    return LayerSpec("relu")


def maxpool():
    return LayerSpec("maxpool")


def flatten():
    return LayerSpec("flatten")


def dense(out_dim, trainable=True, weights=None, bias=None):
    return LayerSpec("dense", out_dim=out_dim, trainable=trainable,
                     weights=weights, bias=bias)


def lenet5_spec(in_channels: int = 1) -> NetworkSpec:
    """The baseline digit classifier for 28x28 greyscale input."""
    return NetworkSpec(
        layers=(
            conv(6, 5, pad=2),
            relu(),
            maxpool(),
            conv(16, 5, pad=0),
            relu(),
            maxpool(),
            flatten(),
            dense(120),
            relu(),
            dense(84),
            relu(),
            dense(10),
        ),
        input_shape=(in_channels, 28, 28),
        name="lenet5",
    )


BANK = "bank"
CASCADE = "cascade"


def bordernet_spec(mode: str = BANK) -> NetworkSpec:
    """LeNet5 behind the frozen oriented-filter front end.

    ``bank``: one non-trainable convolution whose 4 output channels are
    the L1-normalized oriented kernels; the first trainable conv then
    takes 4 input channels.  ``cascade``: the four kernels applied one
    after another on a single channel, then the unmodified baseline.
    """
    size = _filters.DEFAULT_SIZE
    pad = size // 2
    if mode == BANK:
        front = (conv(4, size, pad=pad, trainable=False,
                      weights=_filters.bank_weights(normalized=True)),)
        tail_in = 4
    elif mode == CASCADE:
        front = tuple(
            conv(1, size, pad=pad, trainable=False, weights=k.normalized[None, None])
            for k in _filters.bank()
        )
        tail_in = 1
    else:
        raise ValueError(f"mode must be {BANK!r} or {CASCADE!r}, got {mode!r}")
    base = lenet5_spec(in_channels=tail_in)
    return NetworkSpec(layers=front + base.layers, input_shape=(1, 28, 28),
                       name=f"bordernet-{mode}")


class Network:
    """A realized layer stack; build one from a NetworkSpec via build()."""

    def __init__(self, spec: NetworkSpec, layers: list):
        self.spec = spec
        self.layers = layers
        self._first_trainable = next(
            (i for i, layer in enumerate(layers)
             if any(p.trainable for p in layer.params())), len(layers))

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad, to_input: bool = False):
        """Backpropagate; unless ``to_input``, stop at the lowest layer
        that owns a trainable parameter (gradients below it are unused)."""
        stop = 0 if to_input else self._first_trainable
        for i in range(len(self.layers) - 1, stop - 1, -1):
            grad = self.layers[i].backward(grad)
        return grad

    def parameters(self, trainable_only: bool = False) -> list[Param]:
        out = []
        for layer in self.layers:
            for p in layer.params():
                if not trainable_only or p.trainable:
                    out.append(p)
        return out

    def num_parameters(self, trainable_only: bool = False) -> int:
        return sum(p.value.size for p in self.parameters(trainable_only))

    def predict_logits(self, x, batch_size: int = 512):
        chunks = [self.forward(x[i:i + batch_size]) for i in range(0, len(x), batch_size)]
        return np.concatenate(chunks) if chunks else np.empty((0, 0))

    def predict(self, x, batch_size: int = 512):
        return self.predict_logits(x, batch_size=batch_size).argmax(axis=1)


def build(spec: NetworkSpec, seed=None, dtype=np.float32) -> Network:
    """Materialize a spec; random draws come from the seeded generator."""
    if seed is None:
        seed = spec.seed if spec.seed is not None else 0
    rng = np.random.default_rng(seed)
    layers = []
    shape = spec.input_shape
    for i, ls in enumerate(spec.layers):
        if ls.kind == "conv":
            layer = Conv2D(shape[0], ls.out_channels, ls.kernel, ls.stride, ls.pad,
                           weights=ls.weights, bias=ls.bias, trainable=ls.trainable,
                           rng=rng, dtype=dtype)
        elif ls.kind == "relu":
            layer = ReLU()
        elif ls.kind == "maxpool":
            layer = MaxPool2()
        elif ls.kind == "flatten":
            layer = Flatten()
        elif ls.kind == "dense":
            if len(shape) != 1:
                raise ValueError(f"dense layer {i} needs flattened input, got {shape}")
            layer = Dense(shape[0], ls.out_dim, weights=ls.weights, bias=ls.bias,
                          trainable=ls.trainable, rng=rng, dtype=dtype)
        else:
            raise ValueError(f"unknown layer kind {ls.kind!r}")
        shape = layer.out_shape(shape)
        layers.append(layer)
    _assign_param_names(spec, layers)
    return Network(spec, layers)


def _named_params(layers):
    for li, layer in enumerate(layers):
        for p in layer.params():
            yield li, p


def _assign_param_names(spec, layers):
    for li, p in _named_params(layers):
        p.name = f"layer{li}.{spec.layers[li].kind}.{p.name.split('.')[-1]}"


class Adam:
    """Bias-corrected adaptive moment optimizer over a parameter list."""

    def __init__(self, params: list[Param], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = [p for p in params if p.trainable]
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if g is None:
                raise ValueError(f"parameter {p.name} has no gradient")
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for {p.name}")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def adam_step(optimizer: Adam) -> None:
    optimizer.step()


# ---------------------------------------------------------------------------
# Training and evaluation

def _seedseq(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def train(spec: NetworkSpec, data: LabeledSet, *, epochs: int = 10,
          batch_size: int = 64, seed=0, shuffle_seed=None, lr: float = 1e-3,
          dtype=np.float32, verbose: bool = False) -> Network:
    """Train a fresh network on a normalized labeled set.

    Deterministic for fixed arguments: the init draws come from ``seed``
    and the per-epoch shuffle from ``shuffle_seed`` (derived from
    ``seed`` when not given, so two models can share a shuffle stream
    while drawing independent weights).
    """
    if data.range_tag != NORMALIZED:
        raise ValueError("training expects a normalized dataset")
    n = len(data.labels)
    if n == 0:
        raise ValueError("empty dataset")
    if data.labels.min() < 0 or data.labels.max() >= 10:
        raise ValueError("labels must lie in [0, 10)")
    init_ss, shuf_ss = _seedseq(seed).spawn(2)
    if shuffle_seed is not None:
        shuf_ss = _seedseq(shuffle_seed)
    net = build(spec, seed=init_ss, dtype=dtype)
    shuffle_rng = np.random.default_rng(shuf_ss)

    x = data.images.astype(dtype, copy=False).reshape((n,) + spec.input_shape)
    y = data.labels
    opt = Adam(net.parameters(trainable_only=True), lr=lr)
    for epoch in range(epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            sel = order[start:start + batch_size]
            logits = net.forward(x[sel])
            loss, dlogits = softmax_cross_entropy(logits, y[sel])
            net.backward(dlogits.astype(dtype, copy=False))
            opt.step()
            total += loss * len(sel)
        if verbose:
            print(f"  epoch {epoch + 1}/{epochs}: mean loss {total / n:.4f}")
    return net


def evaluate(model: Network, data: LabeledSet, batch_size: int = 512) -> float:
    """Classification accuracy on a normalized labeled set."""
    if data.range_tag != NORMALIZED:
        raise ValueError("evaluation expects a normalized dataset")
    n = len(data.labels)
    if n == 0:
        raise ValueError("empty dataset")
    dtype = model.parameters()[0].value.dtype if model.parameters() else np.float32
    x = data.images.astype(dtype, copy=False).reshape(n, 1, 28, 28)
    pred = model.predict(x, batch_size=batch_size)
    return float((pred == data.labels).mean())


# ---------------------------------------------------------------------------
# Checkpoints: spec + every parameter array, bit-exact round trip

def save_checkpoint(model: Network, path) -> None:
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "name": model.spec.name,
        "input_shape": list(model.spec.input_shape),
        "layers": [ls.config() for ls in model.spec.layers],
    }
    arrays = {"meta": np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)}
    for i, layer in enumerate(model.layers):
        for p in layer.params():
            arrays[f"layer{i}.{p.name.split('.')[-1]}"] = p.value
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> Network:
    with np.load(path) as npz:
        meta = json.loads(bytes(npz["meta"]).decode("utf-8"))
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"not a model checkpoint: {path}")
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        specs = []
        for i, cfg in enumerate(meta["layers"]):
            kind = cfg["kind"]
            w = npz.get(f"layer{i}.weights")
            b = npz.get(f"layer{i}.bias")
            if kind == "conv":
                specs.append(LayerSpec(kind, out_channels=cfg["out_channels"],
                                       kernel=cfg["kernel"], stride=cfg["stride"],
                                       pad=cfg["pad"], trainable=cfg["trainable"],
                                       weights=w, bias=b))
            elif kind == "dense":
                specs.append(LayerSpec(kind, out_dim=cfg["out_dim"],
                                       trainable=cfg["trainable"], weights=w, bias=b))
            else:
                specs.append(LayerSpec(kind))
        dtype = None
        for i, cfg in enumerate(meta["layers"]):
            arr = npz.get(f"layer{i}.weights")
            if arr is not None:
                dtype = arr.dtype
                break
    spec = NetworkSpec(layers=tuple(specs), input_shape=tuple(meta["input_shape"]),
                       name=meta.get("name", "net"))
    return build(spec, seed=0, dtype=dtype if dtype is not None else np.float32)
