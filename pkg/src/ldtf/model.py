"""Deep-narrow transformer over embedding rows, trained by hand-written backprop.

The embedding matrix (rows x seq_len, default 18 x 241) is attended over its
feature rows: every projection is a seq_len x seq_len matrix applied from the
right, the attention weight matrix is rows x rows, and the six head outputs
are concatenated along the sequence axis before the output projection
(6*seq_len x seq_len). Each encoder layer is attention -> add & layer norm ->
feed-forward -> add & layer norm, with dropout on both sub-layer outputs
during training. The classifier flattens the final activation and applies a
single fully connected layer plus softmax.

Everything is float64 numpy; gradients come from reverse-mode differentiation
written out below, not from an autograd framework.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import NonFiniteActivation, NonFiniteLoss, ShapeMismatch

LN_EPS = 1e-8   # small enough that unit-variance rows normalize to 1 +/- 1e-8

# Externally reported totals for this architecture, kept so `count_params`
# can print the comparison. No integer feed-forward width reproduces them
# from the tensor shapes implemented here; the residual gap is part of the
# report rather than something the code forces.
REFERENCE_PER_LAYER = 9_258_742
REFERENCE_TOTAL = 74_087_228


@dataclass(frozen=True)
class ModelConfig:
    rows: int = 18            # embedding feature rows (the attention axis)
    seq_len: int = 241
    num_heads: int = 6
    num_layers: int = 8
    ffb_hidden: int = 964     # 4 * seq_len
    num_classes: int = 5
    dropout: float = 0.10
    seed: int = 0

    def __post_init__(self):
        positive = {"rows": self.rows, "seq_len": self.seq_len,
                    "num_heads": self.num_heads, "num_layers": self.num_layers,
                    "ffb_hidden": self.ffb_hidden}
        for name, value in positive.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass
class LayerParams:
    w_query: np.ndarray    # (heads, seq_len, seq_len)
    w_key: np.ndarray      # (heads, seq_len, seq_len)
    w_value: np.ndarray    # (heads, seq_len, seq_len)
    w_out: np.ndarray      # (heads * seq_len, seq_len)
    ln1_scale: np.ndarray  # (seq_len,)
    ln1_shift: np.ndarray
    ln2_scale: np.ndarray
    ln2_shift: np.ndarray
    ffb_w1: np.ndarray     # (seq_len, ffb_hidden)
    ffb_b1: np.ndarray     # (ffb_hidden,)
    ffb_w2: np.ndarray     # (ffb_hidden, seq_len)
    ffb_b2: np.ndarray     # (seq_len,)


@dataclass
class ModelParams:
    config: ModelConfig
    layers: list[LayerParams]
    classifier_w: np.ndarray   # (rows * seq_len, num_classes)
    classifier_b: np.ndarray   # (num_classes,)


LAYER_TENSOR_NAMES = ("w_query", "w_key", "w_value", "w_out",
                      "ln1_scale", "ln1_shift", "ln2_scale", "ln2_shift",
                      "ffb_w1", "ffb_b1", "ffb_w2", "ffb_b2")


def iter_tensors(params: ModelParams) -> Iterator[tuple[str, np.ndarray]]:
    """All learnable tensors in a fixed order (serialization, SGD, checks)."""
    for i, layer in enumerate(params.layers):
        for name in LAYER_TENSOR_NAMES:
            yield f"layer{i}.{name}", getattr(layer, name)
    yield "classifier_w", params.classifier_w
    yield "classifier_b", params.classifier_b


def zeros_like_params(params: ModelParams) -> ModelParams:
    layers = [LayerParams(**{n: np.zeros_like(getattr(l, n)) for n in LAYER_TENSOR_NAMES})
              for l in params.layers]
    return ModelParams(config=params.config, layers=layers,
                       classifier_w=np.zeros_like(params.classifier_w),
                       classifier_b=np.zeros_like(params.classifier_b))


def _uniform_init(rng: np.random.Generator, fan_in: int, fan_out: int,
                  shape: tuple[int, ...]) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_params(config: ModelConfig, seed: int | None = None) -> ModelParams:
    """Deterministic initialization: uniform(-a, a) with a = sqrt(6/(fan_in+fan_out))
    for every linear map, ones/zeros for the norm scales/shifts, zero biases."""
    rng = np.random.default_rng([config.seed if seed is None else seed, 0])
    ell, h = config.seq_len, config.num_heads
    layers = []
    for _ in range(config.num_layers):
        layers.append(LayerParams(
            w_query=_uniform_init(rng, ell, ell, (h, ell, ell)),
            w_key=_uniform_init(rng, ell, ell, (h, ell, ell)),
            w_value=_uniform_init(rng, ell, ell, (h, ell, ell)),
            w_out=_uniform_init(rng, h * ell, ell, (h * ell, ell)),
            ln1_scale=np.ones(ell), ln1_shift=np.zeros(ell),
            ln2_scale=np.ones(ell), ln2_shift=np.zeros(ell),
            ffb_w1=_uniform_init(rng, ell, config.ffb_hidden, (ell, config.ffb_hidden)),
            ffb_b1=np.zeros(config.ffb_hidden),
            ffb_w2=_uniform_init(rng, config.ffb_hidden, ell, (config.ffb_hidden, ell)),
            ffb_b2=np.zeros(ell),
        ))
    flat = config.rows * config.seq_len
    return ModelParams(
        config=config,
        layers=layers,
        classifier_w=_uniform_init(rng, flat, config.num_classes,
                                   (flat, config.num_classes)),
        classifier_b=np.zeros(config.num_classes),
    )


# --- forward pieces ---------------------------------------------------------

_ATTENTION_HOOKS: list[Callable[[np.ndarray], None]] = []


def register_attention_hook(fn: Callable[[np.ndarray], None]) -> Callable:
    """Register an observer called with every attention weight matrix
    (shape (..., rows, rows)) produced by a forward pass."""
    _ATTENTION_HOOKS.append(fn)
    return fn


def unregister_attention_hook(fn: Callable) -> None:
    _ATTENTION_HOOKS.remove(fn)


def _softmax_last(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _attention_weights(q: np.ndarray, k: np.ndarray) -> np.ndarray:
    d = q.shape[-2]
    weights = _softmax_last(q @ k.swapaxes(-1, -2) / np.sqrt(d))
    for hook in _ATTENTION_HOOKS:
        hook(weights)
    return weights


def attention_head(y: np.ndarray, w_query: np.ndarray, w_key: np.ndarray,
                   w_value: np.ndarray) -> np.ndarray:
    """One attention head: softmax((YWq)(YWk)^T / sqrt(rows)) (YWv)."""
    ell = y.shape[-1]
    for name, w in (("w_query", w_query), ("w_key", w_key), ("w_value", w_value)):
        if w.shape != (ell, ell):
            raise ShapeMismatch(f"{name} must be ({ell}, {ell}), got {w.shape}")
    weights = _attention_weights(y @ w_query, y @ w_key)
    return weights @ (y @ w_value)


def _stack_heads(w: np.ndarray) -> np.ndarray:
    """(H, L, L) head matrices -> (L, H*L) so all heads apply in one GEMM."""
    heads, ell, _ = w.shape
    return w.transpose(1, 0, 2).reshape(ell, heads * ell)


def _split_heads(x2: np.ndarray, b: int, d: int, heads: int, ell: int) -> np.ndarray:
    """(B*d, H*L) GEMM output -> (B, H, d, L)."""
    return x2.reshape(b, d, heads, ell).transpose(0, 2, 1, 3)


def _merge_heads(x4: np.ndarray) -> np.ndarray:
    """(B, H, d, L) -> (B*d, H*L), the inverse of _split_heads."""
    b, heads, d, ell = x4.shape
    return x4.transpose(0, 2, 1, 3).reshape(b * d, heads * ell)


def _mab_cached(y: np.ndarray, layer: LayerParams) -> tuple[np.ndarray, tuple]:
    """Multi-head attention on a batch (B, rows, seq_len), with cache.

    The per-head projections and the output projection are flattened into
    single large matrix products; small batched products remain only for
    the (rows x rows) attention itself.
    """
    b, d, ell = y.shape
    heads = layer.w_query.shape[0]
    if layer.w_out.shape != (heads * ell, ell):
        raise ShapeMismatch(f"w_out must be ({heads * ell}, {ell}), got {layer.w_out.shape}")
    y2 = y.reshape(b * d, ell)
    q = _split_heads(y2 @ _stack_heads(layer.w_query), b, d, heads, ell)
    k = _split_heads(y2 @ _stack_heads(layer.w_key), b, d, heads, ell)
    v = _split_heads(y2 @ _stack_heads(layer.w_value), b, d, heads, ell)
    weights = _attention_weights(q, k)                # (B, H, d, d)
    hcat = _merge_heads(weights @ v)                  # (B*d, H*L)
    out = (hcat @ layer.w_out).reshape(b, d, ell)
    return out, (y2, q, k, v, weights, hcat)


def _mab_backward(dout: np.ndarray, layer: LayerParams, cache: tuple,
                  grads: LayerParams) -> np.ndarray:
    y2, q, k, v, weights, hcat = cache
    b, d, ell = dout.shape
    heads = layer.w_query.shape[0]

    dout2 = dout.reshape(b * d, ell)
    grads.w_out += hcat.T @ dout2
    dh = _split_heads(dout2 @ layer.w_out.T, b, d, heads, ell)

    dweights = dh @ v.swapaxes(-1, -2)
    dv = weights.swapaxes(-1, -2) @ dh
    # softmax rows, then the 1/sqrt(d) score scaling
    dscores = weights * (dweights - (dweights * weights).sum(axis=-1, keepdims=True))
    dscores /= np.sqrt(d)
    dq = dscores @ k
    dk = dscores.swapaxes(-1, -2) @ q

    dy2 = np.zeros_like(y2)
    for dproj, w, name in ((dq, layer.w_query, "w_query"),
                           (dk, layer.w_key, "w_key"),
                           (dv, layer.w_value, "w_value")):
        dproj2 = _merge_heads(dproj)                  # (B*d, H*L)
        dw2 = y2.T @ dproj2                           # (L, H*L)
        getattr(grads, name)[...] += dw2.reshape(ell, heads, ell).transpose(1, 0, 2)
        dy2 += dproj2 @ _stack_heads(w).T
    return dy2.reshape(b, d, ell)


def _layernorm_cached(x: np.ndarray, scale: np.ndarray,
                      shift: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Normalize each row over its last axis, then apply scale/shift."""
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mean) * inv
    return scale * xhat + shift, (xhat, inv, scale)


def _layernorm_backward(dout: np.ndarray, cache: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xhat, inv, scale = cache
    reduce_axes = tuple(range(dout.ndim - 1))
    dscale = (dout * xhat).sum(axis=reduce_axes)
    dshift = dout.sum(axis=reduce_axes)
    dxhat = dout * scale
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dscale, dshift


def _ffb_cached(u: np.ndarray, layer: LayerParams) -> tuple[np.ndarray, tuple]:
    """Row-wise two-layer network: relu(u W1 + b1) W2 + b2."""
    shape = u.shape
    u2 = u.reshape(-1, shape[-1])
    pre = u2 @ layer.ffb_w1 + layer.ffb_b1
    act = np.maximum(pre, 0.0)
    out = act @ layer.ffb_w2 + layer.ffb_b2
    return out.reshape(shape), (u2, pre > 0, act, shape)


def _ffb_backward(dout: np.ndarray, layer: LayerParams, cache: tuple,
                  grads: LayerParams) -> np.ndarray:
    u2, relu_mask, act, shape = cache
    d2 = dout.reshape(-1, shape[-1])
    grads.ffb_w2 += act.T @ d2
    grads.ffb_b2 += d2.sum(axis=0)
    dact = (d2 @ layer.ffb_w2.T) * relu_mask
    grads.ffb_w1 += u2.T @ dact
    grads.ffb_b1 += dact.sum(axis=0)
    return (dact @ layer.ffb_w1.T).reshape(shape)


def _dropout_mask(shape: tuple[int, int], rate: float, train_mode: bool,
                  rng: np.random.Generator | None) -> np.ndarray | None:
    """Inverted-scaling mask shared across the batch, or None when inactive."""
    if not train_mode or rate <= 0.0 or rng is None:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _encoder_layer_cached(y: np.ndarray, layer: LayerParams, dropout: float,
                          train_mode: bool, rng: np.random.Generator | None
                          ) -> tuple[np.ndarray, tuple]:
    d, ell = y.shape[-2], y.shape[-1]
    attn, mab_cache = _mab_cached(y, layer)
    mask1 = _dropout_mask((d, ell), dropout, train_mode, rng)
    r1 = y + (attn if mask1 is None else attn * mask1)
    u, ln1_cache = _layernorm_cached(r1, layer.ln1_scale, layer.ln1_shift)
    ff, ffb_cache = _ffb_cached(u, layer)
    mask2 = _dropout_mask((d, ell), dropout, train_mode, rng)
    r2 = u + (ff if mask2 is None else ff * mask2)
    out, ln2_cache = _layernorm_cached(r2, layer.ln2_scale, layer.ln2_shift)
    return out, (mab_cache, mask1, ln1_cache, ffb_cache, mask2, ln2_cache)


def _encoder_layer_backward(dout: np.ndarray, layer: LayerParams, cache: tuple,
                            grads: LayerParams) -> np.ndarray:
    mab_cache, mask1, ln1_cache, ffb_cache, mask2, ln2_cache = cache
    dr2, dscale2, dshift2 = _layernorm_backward(dout, ln2_cache)
    grads.ln2_scale += dscale2
    grads.ln2_shift += dshift2
    dff = dr2 if mask2 is None else dr2 * mask2
    du = dr2 + _ffb_backward(dff, layer, ffb_cache, grads)
    dr1, dscale1, dshift1 = _layernorm_backward(du, ln1_cache)
    grads.ln1_scale += dscale1
    grads.ln1_shift += dshift1
    dattn = dr1 if mask1 is None else dr1 * mask1
    return dr1 + _mab_backward(dattn, layer, mab_cache, grads)


def _forward_batch(x: np.ndarray, params: ModelParams, train_mode: bool,
                   rng: np.random.Generator | None, keep_caches: bool
                   ) -> tuple[np.ndarray, np.ndarray, list]:
    """Run the full stack on (B, rows, seq_len); returns (logits, flat, caches)."""
    cfg = params.config
    if x.ndim != 3 or x.shape[1:] != (cfg.rows, cfg.seq_len):
        raise ShapeMismatch(
            f"input must be (batch, {cfg.rows}, {cfg.seq_len}), got {x.shape}"
        )
    caches = []
    y = x
    for i, layer in enumerate(params.layers):
        y, cache = _encoder_layer_cached(y, layer, cfg.dropout, train_mode, rng)
        if not np.all(np.isfinite(y)):
            raise NonFiniteActivation(i)
        if keep_caches:
            caches.append(cache)
    flat = y.reshape(y.shape[0], -1)
    logits = flat @ params.classifier_w + params.classifier_b
    if not np.all(np.isfinite(logits)):
        raise NonFiniteActivation(cfg.num_layers)
    return logits, flat, caches


# --- public forward surfaces --------------------------------------------------

def mab_forward(y: np.ndarray, layer: LayerParams) -> np.ndarray:
    """Multi-head attention block on one (rows, seq_len) input."""
    out, _ = _mab_cached(y[None], layer)
    return out[0]


def encoder_layer_forward(y: np.ndarray, layer: LayerParams, dropout: float = 0.0,
                          train_mode: bool = False,
                          rng: np.random.Generator | None = None) -> np.ndarray:
    """One full encoder layer on a (rows, seq_len) input."""
    out, _ = _encoder_layer_cached(y[None], layer, dropout, train_mode, rng)
    return out[0]


def model_forward(x: np.ndarray, params: ModelParams, train_mode: bool = False,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Class probability vector for one embedding matrix (rows, seq_len)."""
    x = getattr(x, "matrix", x)
    logits, _, _ = _forward_batch(np.asarray(x, dtype=np.float64)[None],
                                  params, train_mode, rng, keep_caches=False)
    return _softmax_last(logits)[0]


def predict_batch(x: np.ndarray, params: ModelParams,
                  chunk: int = 256) -> np.ndarray:
    """Argmax class indices for a stack of embeddings (B, rows, seq_len)."""
    x = np.asarray(x, dtype=np.float64)
    preds = []
    for start in range(0, x.shape[0], chunk):
        logits, _, _ = _forward_batch(x[start:start + chunk], params,
                                      train_mode=False, rng=None, keep_caches=False)
        preds.append(np.argmax(logits, axis=1))
    return np.concatenate(preds) if preds else np.zeros(0, dtype=np.intp)


# --- loss, gradients, optimization ---------------------------------------------

def _stack_batch(batch) -> tuple[np.ndarray, np.ndarray]:
    """Accept [(embedding, class)] pairs or an (X, y) array pair."""
    if isinstance(batch, tuple) and len(batch) == 2 and not isinstance(batch[0], tuple):
        x, y = batch
        return np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.intp)
    mats = [np.asarray(getattr(item, "matrix", item), dtype=np.float64)
            for item, _ in batch]
    labels = [int(label) for _, label in batch]
    return np.stack(mats), np.asarray(labels, dtype=np.intp)


def loss_and_grads(batch, params: ModelParams,
                   rng: np.random.Generator | None = None,
                   train_mode: bool = True) -> tuple[float, ModelParams]:
    """Mean cross-entropy over the batch plus gradients for every tensor.

    Dropout masks are drawn once per call (shared across the batch) and
    reused exactly in the backward pass. Passing rng=None disables dropout.
    """
    loss, grads, _ = _loss_grads_preds(batch, params, rng, train_mode)
    return loss, grads


def _loss_grads_preds(batch, params: ModelParams,
                      rng: np.random.Generator | None,
                      train_mode: bool) -> tuple[float, ModelParams, np.ndarray]:
    x, labels = _stack_batch(batch)
    if x.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    cfg = params.config
    if labels.min() < 0 or labels.max() >= cfg.num_classes:
        raise ValueError(f"labels must lie in [0, {cfg.num_classes})")

    logits, flat, caches = _forward_batch(x, params, train_mode, rng,
                                          keep_caches=True)
    b = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    loss = float(np.mean(logsumexp - logits[np.arange(b), labels]))
    if not np.isfinite(loss):
        raise NonFiniteLoss(f"loss is {loss}")

    probs = _softmax_last(logits)
    dlogits = probs.copy()
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b

    grads = zeros_like_params(params)
    grads.classifier_w += flat.T @ dlogits
    grads.classifier_b += dlogits.sum(axis=0)
    dy = (dlogits @ params.classifier_w.T).reshape(x.shape)
    for layer, glayer, cache in zip(reversed(params.layers),
                                    reversed(grads.layers), reversed(caches)):
        dy = _encoder_layer_backward(dy, layer, cache, glayer)
    return loss, grads, np.argmax(logits, axis=1)


def sgd_step(params: ModelParams, grads: ModelParams, lr: float = 0.001) -> ModelParams:
    """Plain in-place SGD: theta <- theta - lr * grad."""
    for (_, p), (_, g) in zip(iter_tensors(params), iter_tensors(grads)):
        if p.shape != g.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} != parameter {p.shape}")
        p -= lr * g
    return params


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float
    val_recall_macro: float | None = None
    val_precision_macro: float | None = None


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)


def train(embeddings: np.ndarray, labels: np.ndarray, config: ModelConfig,
          epochs: int, batch_size: int = 64, learning_rate: float = 0.001,
          val_data: tuple[np.ndarray, np.ndarray] | None = None,
          params: ModelParams | None = None,
          log: Callable[[str], None] | None = None
          ) -> tuple[ModelParams, TrainHistory]:
    """Minibatch SGD over a balanced, embedded training set.

    Shuffling, dropout, and initialization each consume their own stream
    derived from config.seed, so a fixed seed reproduces the run exactly
    in single-threaded mode. The last partial batch is kept. epochs=0
    returns freshly initialized parameters and an empty history.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.intp)
    if x.shape[0] != y.shape[0]:
        raise ValueError("embeddings and labels differ in length")
    if x.shape[0] == 0 and epochs > 0:
        raise ValueError("training set is empty")
    if params is None:
        params = init_params(config)
    dropout_rng = np.random.default_rng([config.seed, 1])
    shuffle_rng = np.random.default_rng([config.seed, 2])

    history = TrainHistory()
    n = x.shape[0]
    for epoch in range(1, epochs + 1):
        order = shuffle_rng.permutation(n)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, batch_size):
            take = order[start:start + batch_size]
            bx, by = x[take], y[take]
            loss, grads, preds = _loss_grads_preds((bx, by), params,
                                                   rng=dropout_rng, train_mode=True)
            sgd_step(params, grads, learning_rate)
            total_loss += loss * len(take)
            correct += int(np.sum(preds == by))
        stats = EpochStats(epoch=epoch, loss=total_loss / n, accuracy=correct / n)
        if val_data is not None:
            from .evaluate import confusion_matrix, recall_precision

            vx, vy = val_data
            preds = predict_batch(vx, params)
            report = recall_precision(confusion_matrix(preds, vy, config.num_classes))
            stats.val_recall_macro = report.macro_recall
            stats.val_precision_macro = report.macro_precision
        history.epochs.append(stats)
        if log is not None:
            msg = f"epoch {stats.epoch}: loss={stats.loss:.6f} acc={stats.accuracy:.4f}"
            if stats.val_recall_macro is not None:
                msg += (f" val_recall={stats.val_recall_macro:.4f}"
                        f" val_precision={stats.val_precision_macro:.4f}")
            log(msg)
    return params, history


# --- parameter accounting -------------------------------------------------------

@dataclass(frozen=True)
class ParamCounts:
    per_layer: int
    classifier: int
    total: int
    breakdown: dict = field(default_factory=dict)


def count_params(config: ModelConfig) -> ParamCounts:
    """Learnable-tensor counts implied by the shapes above.

    per_layer = heads*3*L^2            (query/key/value projections, no bias)
              + heads*L*L              (output projection)
              + 2 * 2L                 (two layer norms, scale+shift each)
              + L*h + h + h*L + L      (feed-forward weights and biases)
    classifier = rows*L*C + C
    total      = num_layers * per_layer + classifier

    The breakdown is returned so alternative shape readings (biased
    projections, a different feed-forward width) can be recomputed
    instead of trusting one frozen number.
    """
    ell, h = config.seq_len, config.ffb_hidden
    heads = config.num_heads
    projections = heads * 3 * ell * ell
    out_proj = heads * ell * ell
    norms = 2 * 2 * ell
    ffb = ell * h + h + h * ell + ell
    per_layer = projections + out_proj + norms + ffb
    classifier = config.rows * ell * config.num_classes + config.num_classes
    total = config.num_layers * per_layer + classifier
    return ParamCounts(
        per_layer=per_layer, classifier=classifier, total=total,
        breakdown={"projections": projections, "out_proj": out_proj,
                   "norms": norms, "ffb": ffb},
    )
