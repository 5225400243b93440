"""Two-branch regression head and its training loop.

The head runs a small MLP over the 384-d sentence embedding (deep branch)
and another over the 7-bucket length one-hot (wide branch), concatenates the
two branch outputs, and maps them through a final linear layer to the
standardized [valence, arousal] pair. Training minimizes Smooth-L1 loss with
Adam updates under a warmup-linear learning-rate schedule, fully determined
by the config seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .embedder import EmbeddingStore, get_embedding, text_key
from .errors import DataError, FormatError, MissingEmbeddingError
from .features import (
    N_LENGTH_BUCKETS,
    VAPoint,
    VAScaler,
    destandardize,
    fit_scaler,
    wide_feature,
)

DEEP_INPUT_DIM = 384
WIDE_INPUT_DIM = N_LENGTH_BUCKETS
OUT_DIM = 2

# Default topology: the branch widths are a design choice, sized for a
# ~10k-sentence corpus (the two-branch shape itself is fixed).
DEFAULT_DEEP_DIMS = (DEEP_INPUT_DIM, 128, 64)
DEFAULT_WIDE_DIMS = (WIDE_INPUT_DIM, 16)

ACT_RELU = "relu"
ACT_IDENTITY = "identity"

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CKPT_FORMAT = "ckpt.v1"


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str  # "relu" | "identity"


@dataclass
class WideDeepHead:
    """Two relu MLP branches fused by concatenation into a 2-output linear layer.

    Both branch lists must be non-empty; the fusion layer is identity with
    input width deep_out + wide_out and exactly 2 outputs.
    """

    deep_branch: list[DenseLayer]
    wide_branch: list[DenseLayer]
    fusion: DenseLayer


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 32
    base_lr: float = 2e-4
    warmup_fraction: float = 0.1
    smooth_l1_beta: float = 1.0
    validation_fraction: float = 0.1
    seed: int = 0


@dataclass
class TrainReport:
    """Per-epoch metrics, all in standardized-target space."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_r2: list[float] = field(default_factory=list)


def _branch_dims(layers: list[DenseLayer]) -> list[int]:
    dims = [layers[0].weights.shape[1]]
    for layer in layers:
        dims.append(layer.weights.shape[0])
    return dims


def _validate_head(head: WideDeepHead) -> None:
    if not head.deep_branch or not head.wide_branch:
        raise ValueError("both branches must have at least one layer")
    for name, layers in (("deep", head.deep_branch), ("wide", head.wide_branch)):
        prev_out = None
        for i, layer in enumerate(layers):
            out, n_in = layer.weights.shape
            if layer.bias.shape != (out,):
                raise ValueError(f"{name} layer {i}: bias shape {layer.bias.shape} != ({out},)")
            if prev_out is not None and n_in != prev_out:
                raise ValueError(f"{name} layer {i}: input width {n_in} != previous output {prev_out}")
            if layer.activation not in (ACT_RELU, ACT_IDENTITY):
                raise ValueError(f"{name} layer {i}: unknown activation {layer.activation!r}")
            prev_out = out
    fuse_in = head.deep_branch[-1].weights.shape[0] + head.wide_branch[-1].weights.shape[0]
    if head.fusion.weights.shape != (OUT_DIM, fuse_in):
        raise ValueError(
            f"fusion shape {head.fusion.weights.shape} != ({OUT_DIM}, {fuse_in})"
        )
    if head.fusion.bias.shape != (OUT_DIM,):
        raise ValueError("fusion bias must have 2 entries")
    if head.fusion.activation != ACT_IDENTITY:
        raise ValueError("fusion activation must be identity")


def flatten_head(head: WideDeepHead):
    """Pack the head into the flat kernel layout.

    Returns (params, deep_dims, wide_dims, deep_act, wide_act); see
    ``kernels`` for the layout contract.
    """
    _validate_head(head)
    chunks = []
    for layer in [*head.deep_branch, *head.wide_branch, head.fusion]:
        chunks.append(np.ascontiguousarray(layer.weights, dtype=np.float64).ravel())
        chunks.append(np.asarray(layer.bias, dtype=np.float64))
    params = np.concatenate(chunks)
    deep_dims = np.array(_branch_dims(head.deep_branch), dtype=np.int64)
    wide_dims = np.array(_branch_dims(head.wide_branch), dtype=np.int64)
    deep_act = np.array(
        [1 if l.activation == ACT_RELU else 0 for l in head.deep_branch], dtype=np.int64
    )
    wide_act = np.array(
        [1 if l.activation == ACT_RELU else 0 for l in head.wide_branch], dtype=np.int64
    )
    return params, deep_dims, wide_dims, deep_act, wide_act


def head_from_params(params, deep_dims, wide_dims, deep_act=None, wide_act=None) -> WideDeepHead:
    """Inverse of flatten_head; copies parameter slices into fresh layers."""

    def take(n_out, n_in, off):
        w = np.array(params[off:off + n_out * n_in]).reshape(n_out, n_in)
        off += n_out * n_in
        b = np.array(params[off:off + n_out])
        return w, b, off + n_out

    off = 0
    deep = []
    for i in range(len(deep_dims) - 1):
        w, b, off = take(int(deep_dims[i + 1]), int(deep_dims[i]), off)
        act = ACT_RELU if deep_act is None or deep_act[i] == 1 else ACT_IDENTITY
        deep.append(DenseLayer(weights=w, bias=b, activation=act))
    wide = []
    for i in range(len(wide_dims) - 1):
        w, b, off = take(int(wide_dims[i + 1]), int(wide_dims[i]), off)
        act = ACT_RELU if wide_act is None or wide_act[i] == 1 else ACT_IDENTITY
        wide.append(DenseLayer(weights=w, bias=b, activation=act))
    fuse_in = int(deep_dims[-1]) + int(wide_dims[-1])
    w, b, off = take(OUT_DIM, fuse_in, off)
    return WideDeepHead(deep_branch=deep, wide_branch=wide,
                        fusion=DenseLayer(weights=w, bias=b, activation=ACT_IDENTITY))


def forward_batch(head: WideDeepHead, x_deep: np.ndarray, x_wide: np.ndarray) -> np.ndarray:
    """Run the head over (n, deep_in) / (n, wide_in) inputs; returns (n, 2)."""
    params, dd, wd, da, wa = flatten_head(head)
    x_deep = np.ascontiguousarray(x_deep, dtype=np.float64)
    x_wide = np.ascontiguousarray(x_wide, dtype=np.float64)
    if x_deep.ndim != 2 or x_deep.shape[1] != dd[0]:
        raise ValueError(f"deep input width {x_deep.shape} does not match head input {dd[0]}")
    if x_wide.ndim != 2 or x_wide.shape[1] != wd[0] or x_wide.shape[0] != x_deep.shape[0]:
        raise ValueError(f"wide input shape {x_wide.shape} does not match head/batch")
    return kernels.head_forward(x_deep, x_wide, params, dd, wd, da, wa)


def forward(head: WideDeepHead, embedding: np.ndarray, wide: np.ndarray) -> np.ndarray:
    """Single-sample forward pass; returns the standardized 2-vector."""
    emb = np.asarray(embedding, dtype=np.float64)
    w = np.asarray(wide, dtype=np.float64)
    if emb.ndim != 1 or w.ndim != 1:
        raise ValueError("forward expects 1-d embedding and wide inputs")
    return forward_batch(head, emb[None, :], w[None, :])[0]


def smooth_l1(pred, target, beta: float = 1.0) -> float:
    """Mean Smooth-L1: quadratic below beta, linear above, averaged over elements."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    d = np.abs(p - t)
    elem = np.where(d < beta, 0.5 * d * d / beta, d - 0.5 * beta)
    return float(np.sum(elem) / elem.size)


def loss_and_gradients(head: WideDeepHead, batch, beta: float = 1.0):
    """Mean Smooth-L1 loss and its exact gradient as one flat vector.

    ``batch`` is (x_deep, x_wide, target) with shapes (n, deep_in),
    (n, wide_in), (n, 2); the gradient layout matches ``flatten_head``.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    x_deep, x_wide, target = batch
    x_deep = np.ascontiguousarray(x_deep, dtype=np.float64)
    x_wide = np.ascontiguousarray(x_wide, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if x_deep.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    params, dd, wd, da, wa = flatten_head(head)
    loss, grad = kernels.head_loss_grad(x_deep, x_wide, target, params, dd, wd, da, wa, beta)
    return float(loss), grad


def gradients(head: WideDeepHead, batch, beta: float = 1.0) -> np.ndarray:
    return loss_and_gradients(head, batch, beta)[1]


def lr_at_step(step: int, total_steps: int, config: TrainConfig) -> float:
    """Warmup-linear schedule: rise to base_lr over the warmup, decay to 0."""
    warmup_steps = math.ceil(config.warmup_fraction * total_steps)
    if step < warmup_steps:
        return config.base_lr * step / warmup_steps
    if total_steps == warmup_steps:
        return 0.0
    return config.base_lr * (total_steps - step) / (total_steps - warmup_steps)


def r_squared(preds, targets) -> float:
    """Coefficient of determination, uniformly averaged over the 2 dimensions.

    A dimension with zero target variance contributes 1 when its residuals
    are exactly zero, else 0.
    """
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.size == 0 or p.shape != t.shape:
        raise ValueError(f"need equal non-empty shapes, got {p.shape} vs {t.shape}")
    scores = []
    for d in range(p.shape[1]):
        ss_res = float(np.sum((p[:, d] - t[:, d]) ** 2))
        ss_tot = float(np.sum((t[:, d] - t[:, d].mean()) ** 2))
        if ss_tot == 0.0:
            scores.append(1.0 if ss_res == 0.0 else 0.0)
        else:
            scores.append(1.0 - ss_res / ss_tot)
    return float(np.mean(scores))


def _validate_config(config: TrainConfig) -> None:
    if config.epochs <= 0 or config.batch_size <= 0:
        raise ValueError("epochs and batch_size must be positive")
    if config.base_lr <= 0 or config.smooth_l1_beta <= 0:
        raise ValueError("base_lr and smooth_l1_beta must be positive")
    if not 0 < config.warmup_fraction < 1:
        raise ValueError("warmup_fraction must be in (0, 1)")
    if not 0 < config.validation_fraction < 1:
        raise ValueError("validation_fraction must be in (0, 1)")


def split_indices(n: int, validation_fraction: float, seed: int):
    """Seeded shuffle split; also used by eval to re-derive the holdout."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = max(1, int(n * validation_fraction))
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def _init_params(rng, deep_dims, wide_dims):
    # Glorot-uniform weights, zero biases, drawn in flat-layout order.
    chunks = []
    dims_chain = (
        [(deep_dims[i], deep_dims[i + 1]) for i in range(len(deep_dims) - 1)]
        + [(wide_dims[i], wide_dims[i + 1]) for i in range(len(wide_dims) - 1)]
        + [(deep_dims[-1] + wide_dims[-1], OUT_DIM)]
    )
    for n_in, n_out in dims_chain:
        limit = math.sqrt(6.0 / (n_in + n_out))
        chunks.append(rng.uniform(-limit, limit, size=n_out * n_in))
        chunks.append(np.zeros(n_out))
    return np.concatenate(chunks)


def build_features(sentences, store: EmbeddingStore):
    """Stack embeddings and wide features for a sentence list; fails on gaps."""
    missing = [text_key(s.body) for s in sentences if text_key(s.body) not in store]
    if missing:
        raise MissingEmbeddingError(missing)
    x_deep = np.stack([store.entries[text_key(s.body)] for s in sentences])
    x_wide = np.stack([wide_feature(s.body) for s in sentences])
    return np.ascontiguousarray(x_deep), np.ascontiguousarray(x_wide)


def evaluate_predictions(pred_std, target_std, beta: float):
    """(smooth_l1 loss, R^2) of standardized predictions against targets."""
    return smooth_l1(pred_std, target_std, beta), r_squared(pred_std, target_std)


def train(sentences, store: EmbeddingStore, config: TrainConfig):
    """Train the default-architecture head on an emotion corpus.

    Deterministic given the seed: the split, the parameter init, and every
    shuffle come from one seeded generator. The scaler is fitted on the
    training split only. Returns (head, scaler, report).
    """
    _validate_config(config)
    if len(sentences) < 10:
        raise DataError(f"need at least 10 sentences to train, got {len(sentences)}")
    if store.dim != DEEP_INPUT_DIM:
        raise DataError(f"embedding store dim {store.dim} != {DEEP_INPUT_DIM}")

    x_deep, x_wide = build_features(sentences, store)

    train_idx, val_idx = split_indices(len(sentences), config.validation_fraction, config.seed)
    scaler = fit_scaler([VAPoint(sentences[i].valence, sentences[i].arousal) for i in train_idx])
    targets = np.array([[s.valence, s.arousal] for s in sentences], dtype=np.float64)
    targets_std = (targets - scaler.mean) / scaler.std

    xd_tr, xw_tr, y_tr = x_deep[train_idx], x_wide[train_idx], targets_std[train_idx]
    xd_val, xw_val, y_val = x_deep[val_idx], x_wide[val_idx], targets_std[val_idx]

    deep_dims = np.array(DEFAULT_DEEP_DIMS, dtype=np.int64)
    wide_dims = np.array(DEFAULT_WIDE_DIMS, dtype=np.int64)
    deep_act = np.ones(len(DEFAULT_DEEP_DIMS) - 1, dtype=np.int64)
    wide_act = np.ones(len(DEFAULT_WIDE_DIMS) - 1, dtype=np.int64)

    # The split consumed the generator's first draw; keep drawing from the
    # same stream so init and shuffles stay coupled to the single seed.
    rng = np.random.default_rng(config.seed)
    rng.permutation(len(sentences))
    params = _init_params(rng, DEFAULT_DEEP_DIMS, DEFAULT_WIDE_DIMS)

    m = np.zeros_like(params)
    v = np.zeros_like(params)
    n_train = len(train_idx)
    n_batches = math.ceil(n_train / config.batch_size)
    total_steps = config.epochs * n_batches

    report = TrainReport()
    adam_t = 0
    global_step = 0
    for _ in range(config.epochs):
        order = rng.permutation(n_train)
        loss_sum = 0.0
        for b in range(n_batches):
            sel = order[b * config.batch_size:(b + 1) * config.batch_size]
            lr = lr_at_step(global_step, total_steps, config)
            loss, grad = kernels.head_loss_grad(
                np.ascontiguousarray(xd_tr[sel]),
                np.ascontiguousarray(xw_tr[sel]),
                np.ascontiguousarray(y_tr[sel]),
                params, deep_dims, wide_dims, deep_act, wide_act,
                config.smooth_l1_beta,
            )
            adam_t += 1
            kernels.adam_update(params, grad, m, v, adam_t, lr,
                                ADAM_BETA1, ADAM_BETA2, ADAM_EPS)
            loss_sum += float(loss) * len(sel)
            global_step += 1
        pred_val = kernels.head_forward(xd_val, xw_val, params,
                                        deep_dims, wide_dims, deep_act, wide_act)
        val_loss, val_r2 = evaluate_predictions(pred_val, y_val, config.smooth_l1_beta)
        report.train_loss.append(loss_sum / n_train)
        report.val_loss.append(val_loss)
        report.val_r2.append(val_r2)

    head = head_from_params(params, deep_dims, wide_dims, deep_act, wide_act)
    return head, scaler, report


def predict_va(head: WideDeepHead, scaler: VAScaler, store: EmbeddingStore, body: str) -> VAPoint:
    """Free text to a VA point: stored embedding + length one-hot through the head."""
    z = forward(head, get_embedding(store, body), wide_feature(body))
    return destandardize(z, scaler)


def save_checkpoint(head: WideDeepHead, scaler: VAScaler, config, path) -> None:
    """Write a ckpt.v1 JSON document; float reprs keep the roundtrip lossless."""
    _validate_head(head)
    layers = []
    for layer in [*head.deep_branch, *head.wide_branch, head.fusion]:
        out, n_in = layer.weights.shape
        layers.append({
            "in": int(n_in),
            "out": int(out),
            "act": layer.activation,
            "w": [float(x) for x in layer.weights.ravel()],
            "b": [float(x) for x in layer.bias],
        })
    doc = {
        "format": CKPT_FORMAT,
        "scaler": {"mean": [float(x) for x in scaler.mean],
                   "std": [float(x) for x in scaler.std]},
        "layers": layers,
        # The flat layer list alone cannot be split back into branches, so
        # the echo also records the branch widths.
        "config": {
            "arch": {
                "deep_dims": _branch_dims(head.deep_branch),
                "wide_dims": _branch_dims(head.wide_branch),
            },
            "train": asdict(config) if config is not None else None,
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path):
    """Read a ckpt.v1 file; returns (head, scaler, config_echo)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not a valid checkpoint document: {exc}") from None
    if not isinstance(doc, dict) or "format" not in doc:
        raise FormatError(f"{path}: missing format field")
    if doc["format"] != CKPT_FORMAT:
        raise FormatError(f"{path}: format {doc['format']!r} unsupported, expected {CKPT_FORMAT!r}")
    try:
        arch = doc["config"]["arch"]
        deep_dims = [int(x) for x in arch["deep_dims"]]
        wide_dims = [int(x) for x in arch["wide_dims"]]
        raw_layers = doc["layers"]
        n_deep = len(deep_dims) - 1
        n_wide = len(wide_dims) - 1
        if len(raw_layers) != n_deep + n_wide + 1:
            raise FormatError(f"{path}: layer count {len(raw_layers)} does not match arch")
        parsed = []
        for spec in raw_layers:
            w = np.array(spec["w"], dtype=np.float64).reshape(spec["out"], spec["in"])
            b = np.array(spec["b"], dtype=np.float64)
            if b.shape != (spec["out"],):
                raise FormatError(f"{path}: bias length does not match layer out width")
            parsed.append(DenseLayer(weights=w, bias=b, activation=spec["act"]))
        head = WideDeepHead(
            deep_branch=parsed[:n_deep],
            wide_branch=parsed[n_deep:n_deep + n_wide],
            fusion=parsed[-1],
        )
        _validate_head(head)
        scaler = VAScaler(
            mean=np.array(doc["scaler"]["mean"], dtype=np.float64),
            std=np.array(doc["scaler"]["std"], dtype=np.float64),
        )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed checkpoint: {exc}") from None
    return head, scaler, doc["config"]
