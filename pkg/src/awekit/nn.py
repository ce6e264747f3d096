"""From-scratch differentiable kernel: MLP classifier, fusion, Adam.

Everything is plain float64 numpy with hand-derived gradients; correctness
is pinned by central finite differences in the test suite. The classifier
is two ReLU hidden layers into a softmax. Fusion is either concatenation
of fixed vectors (done at dataset assembly) or bidirectional single-head
cross-attention over the raw sequences, whose two pooled outputs are
concatenated and fed to the classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import LabelError, ParameterError, SequenceError, ShapeError


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _glorot_bias(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=fan_out)


@dataclass
class MlpParams:
    """Dense classifier weights: d_in -> h1 -> h2 -> n_classes."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    @classmethod
    def init(
        cls,
        d_in: int,
        n_classes: int,
        hidden1: int = 128,
        hidden2: int = 16,
        rng: np.random.Generator | None = None,
    ) -> "MlpParams":
        # biases share their layer's uniform range; exact zeros would park
        # dead rows on the ReLU kink, where gradients are ill-defined
        rng = rng or np.random.default_rng(0)
        return cls(
            w1=_glorot(rng, d_in, hidden1),
            b1=_glorot_bias(rng, d_in, hidden1),
            w2=_glorot(rng, hidden1, hidden2),
            b2=_glorot_bias(rng, hidden1, hidden2),
            w3=_glorot(rng, hidden2, n_classes),
            b3=_glorot_bias(rng, hidden2, n_classes),
        )

    def items(self) -> list[tuple[str, np.ndarray]]:
        return [
            ("w1", self.w1), ("b1", self.b1),
            ("w2", self.w2), ("b2", self.b2),
            ("w3", self.w3), ("b3", self.b3),
        ]


@dataclass
class CrossAttentionParams:
    """Bidirectional single-head attention weights.

    Both sequences are first projected to a shared model dimension; each
    direction has its own query/key/value matrices.
    """

    proj_audio: np.ndarray  # [d_audio, d_model]
    proj_text: np.ndarray   # [d_text, d_model]
    wq_audio: np.ndarray    # audio queries over text keys/values
    wk_text: np.ndarray
    wv_text: np.ndarray
    wq_text: np.ndarray     # text queries over audio keys/values
    wk_audio: np.ndarray
    wv_audio: np.ndarray

    @classmethod
    def init(
        cls,
        d_audio: int,
        d_text: int,
        d_model: int = 128,
        rng: np.random.Generator | None = None,
    ) -> "CrossAttentionParams":
        rng = rng or np.random.default_rng(0)
        square = lambda: _glorot(rng, d_model, d_model)  # noqa: E731
        return cls(
            proj_audio=_glorot(rng, d_audio, d_model),
            proj_text=_glorot(rng, d_text, d_model),
            wq_audio=square(),
            wk_text=square(),
            wv_text=square(),
            wq_text=square(),
            wk_audio=square(),
            wv_audio=square(),
        )

    @property
    def d_model(self) -> int:
        return self.proj_audio.shape[1]

    def items(self) -> list[tuple[str, np.ndarray]]:
        return [
            ("proj_audio", self.proj_audio), ("proj_text", self.proj_text),
            ("wq_audio", self.wq_audio), ("wk_text", self.wk_text),
            ("wv_text", self.wv_text), ("wq_text", self.wq_text),
            ("wk_audio", self.wk_audio), ("wv_audio", self.wv_audio),
        ]


@dataclass
class TrainConfig:
    """Optimizer and schedule settings; nothing here is searched."""

    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ParameterError("learning_rate must be >= 0")
        if self.batch_size < 1 or self.epochs < 0:
            raise ParameterError("batch_size must be >= 1 and epochs >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise ParameterError("need 0 <= beta1, beta2 < 1 and eps > 0")


# ---------------------------------------------------------------------------
# Forward / backward
# ---------------------------------------------------------------------------


def mlp_logits(x: np.ndarray, params: MlpParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != params.w1.shape[0]:
        raise ShapeError(
            f"input dimension {X.shape[1]} != classifier d_in {params.w1.shape[0]}"
        )
    if not np.all(np.isfinite(X)):
        raise ShapeError("non-finite classifier input")
    z = relu(relu(X @ params.w1 + params.b1) @ params.w2 + params.b2) @ params.w3 + params.b3
    return z[0] if single else z


def mlp_forward(x: np.ndarray, params: MlpParams) -> np.ndarray:
    """Class probabilities for a vector (or batch of row vectors)."""
    return softmax(mlp_logits(x, params), axis=-1)


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """Negative log probability of ``label``.

    For training use :func:`cross_entropy_from_logits`, which evaluates the
    same loss in log space.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= label < probs.shape[-1]:
        raise LabelError(f"label {label} out of range for {probs.shape[-1]} classes")
    return float(-np.log(probs[label]))


def cross_entropy_from_logits(logits: np.ndarray, label: int) -> float:
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.shape[-1]:
        raise LabelError(f"label {label} out of range for {logits.shape[-1]} classes")
    return float(np.log(np.exp(logits - logits.max()).sum()) + logits.max() - logits[label])


def _mlp_forward_cache(X: np.ndarray, p: MlpParams):
    z1 = X @ p.w1 + p.b1
    h1 = relu(z1)
    z2 = h1 @ p.w2 + p.b2
    h2 = relu(z2)
    z3 = h2 @ p.w3 + p.b3
    return z3, (X, z1, h1, z2, h2)


def _batch_loss_from_logits(z3: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient w.r.t. the logits."""
    n = z3.shape[0]
    logp = log_softmax(z3, axis=1)
    loss = -logp[np.arange(n), labels].mean()
    dz3 = softmax(z3, axis=1)
    dz3[np.arange(n), labels] -= 1.0
    return float(loss), dz3 / n


def _mlp_backward(dz3: np.ndarray, cache, p: MlpParams):
    X, z1, h1, z2, h2 = cache
    grads: dict[str, np.ndarray] = {}
    grads["w3"] = h2.T @ dz3
    grads["b3"] = dz3.sum(axis=0)
    dh2 = dz3 @ p.w3.T
    dz2 = dh2 * (z2 > 0)
    grads["w2"] = h1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    dh1 = dz2 @ p.w2.T
    dz1 = dh1 * (z1 > 0)
    grads["w1"] = X.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    dX = dz1 @ p.w1.T
    return grads, dX


def pool_sequence(seq: np.ndarray) -> np.ndarray:
    """Mean over the rows of an [n, d] sequence."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2:
        raise ShapeError(f"expected an [n, d] sequence, got rank {seq.ndim}")
    if seq.shape[0] < 1:
        raise SequenceError("cannot pool an empty sequence")
    return seq.mean(axis=0)


def concat_fuse(audio_vec: np.ndarray, text_vec: np.ndarray) -> np.ndarray:
    """Plain [audio || text] feature concatenation."""
    audio_vec = np.asarray(audio_vec, dtype=np.float64).reshape(-1)
    text_vec = np.asarray(text_vec, dtype=np.float64).reshape(-1)
    if not (np.all(np.isfinite(audio_vec)) and np.all(np.isfinite(text_vec))):
        raise ShapeError("non-finite fusion input")
    return np.concatenate([audio_vec, text_vec])


def _cross_attend_cache(A0: np.ndarray, T0: np.ndarray, p: CrossAttentionParams):
    A0 = np.asarray(A0, dtype=np.float64)
    T0 = np.asarray(T0, dtype=np.float64)
    if A0.ndim != 2 or T0.ndim != 2:
        raise ShapeError("cross-attention inputs must be [n, d] sequences")
    if A0.shape[0] < 1 or T0.shape[0] < 1:
        raise SequenceError("cross-attention needs at least one row on each side")
    scale = 1.0 / np.sqrt(p.d_model)
    A = A0 @ p.proj_audio
    T = T0 @ p.proj_text
    q1, k1, v1 = A @ p.wq_audio, T @ p.wk_text, T @ p.wv_text
    p1 = softmax(q1 @ k1.T * scale, axis=-1)
    o1 = p1 @ v1
    q2, k2, v2 = T @ p.wq_text, A @ p.wk_audio, A @ p.wv_audio
    p2 = softmax(q2 @ k2.T * scale, axis=-1)
    o2 = p2 @ v2
    fused = np.concatenate([o1.mean(axis=0), o2.mean(axis=0)])
    cache = (A0, T0, A, T, q1, k1, v1, p1, q2, k2, v2, p2, scale)
    return fused, cache


def cross_attend(
    audio_seq: np.ndarray, text_seq: np.ndarray, params: CrossAttentionParams
) -> np.ndarray:
    """Attend in both directions, mean-pool each side, concatenate.

    Direction one: audio rows query the text keys/values; direction two is
    the mirror image. Output dimension is ``2 * d_model``.
    """
    fused, _ = _cross_attend_cache(audio_seq, text_seq, params)
    return fused


def _softmax_rows_backward(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    return p * (dp - (dp * p).sum(axis=1, keepdims=True))


def _cross_attend_backward(dfused: np.ndarray, cache, p: CrossAttentionParams):
    A0, T0, A, T, q1, k1, v1, p1, q2, k2, v2, p2, scale = cache
    m = p.d_model
    n_a, n_t = A.shape[0], T.shape[0]
    du1, du2 = dfused[:m], dfused[m:]
    grads: dict[str, np.ndarray] = {}

    do1 = np.repeat(du1[None, :] / n_a, n_a, axis=0)
    dp1 = do1 @ v1.T
    dv1 = p1.T @ do1
    ds1 = _softmax_rows_backward(p1, dp1)
    dq1 = ds1 @ k1 * scale
    dk1 = ds1.T @ q1 * scale
    dA = dq1 @ p.wq_audio.T
    dT = dk1 @ p.wk_text.T + dv1 @ p.wv_text.T
    grads["wq_audio"] = A.T @ dq1
    grads["wk_text"] = T.T @ dk1
    grads["wv_text"] = T.T @ dv1

    do2 = np.repeat(du2[None, :] / n_t, n_t, axis=0)
    dp2 = do2 @ v2.T
    dv2 = p2.T @ do2
    ds2 = _softmax_rows_backward(p2, dp2)
    dq2 = ds2 @ k2 * scale
    dk2 = ds2.T @ q2 * scale
    dT += dq2 @ p.wq_text.T
    dA += dk2 @ p.wk_audio.T + dv2 @ p.wv_audio.T
    grads["wq_text"] = T.T @ dq2
    grads["wk_audio"] = A.T @ dk2
    grads["wv_audio"] = A.T @ dv2

    grads["proj_audio"] = A0.T @ dA
    grads["proj_text"] = T0.T @ dT
    return grads


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """First/second moment accumulators, keyed like the parameter dict."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: Iterable[tuple[str, np.ndarray]],
    grads: dict[str, np.ndarray],
    state: AdamState,
    config: TrainConfig,
) -> AdamState:
    """One in-place update with bias-corrected moments."""
    state.t += 1
    t = state.t
    for name, value in params:
        g = grads[name]
        if g.shape != value.shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, want {value.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        state.m[name] = config.beta1 * state.m[name] + (1 - config.beta1) * g
        state.v[name] = config.beta2 * state.v[name] + (1 - config.beta2) * g * g
        m_hat = state.m[name] / (1 - config.beta1**t)
        v_hat = state.v[name] / (1 - config.beta2**t)
        value -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return state


# ---------------------------------------------------------------------------
# Classifier over either fixed vectors or (audio, text) sequence pairs
# ---------------------------------------------------------------------------


class FusionClassifier:
    """Softmax MLP, optionally preceded by cross-attention fusion.

    In vector mode the input is a feature matrix (plain or concatenated
    features, fused upstream). In pair mode each example is an
    (audio_seq, text_seq) tuple fused by :func:`cross_attend` before the
    classifier; attention and classifier train jointly.
    """

    def __init__(self, mlp: MlpParams, attention: CrossAttentionParams | None = None):
        self.mlp = mlp
        self.attention = attention

    @classmethod
    def for_vectors(
        cls,
        d_in: int,
        n_classes: int,
        hidden1: int = 128,
        hidden2: int = 16,
        rng: np.random.Generator | None = None,
    ) -> "FusionClassifier":
        return cls(MlpParams.init(d_in, n_classes, hidden1, hidden2, rng))

    @classmethod
    def for_pairs(
        cls,
        d_audio: int,
        d_text: int,
        n_classes: int,
        d_model: int = 128,
        hidden1: int = 128,
        hidden2: int = 16,
        rng: np.random.Generator | None = None,
    ) -> "FusionClassifier":
        rng = rng or np.random.default_rng(0)
        attention = CrossAttentionParams.init(d_audio, d_text, d_model, rng)
        mlp = MlpParams.init(2 * d_model, n_classes, hidden1, hidden2, rng)
        return cls(mlp, attention)

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        named = [(f"mlp.{k}", v) for k, v in self.mlp.items()]
        if self.attention is not None:
            named += [(f"attn.{k}", v) for k, v in self.attention.items()]
        return named

    def _fuse_batch(self, inputs: Sequence) -> tuple[np.ndarray, list]:
        fused, caches = [], []
        for audio_seq, text_seq in inputs:
            f, cache = _cross_attend_cache(audio_seq, text_seq, self.attention)
            fused.append(f)
            caches.append(cache)
        return np.stack(fused), caches

    def logits(self, inputs) -> np.ndarray:
        if self.attention is None:
            return mlp_logits(np.asarray(inputs, dtype=np.float64), self.mlp)
        fused, _ = self._fuse_batch(inputs)
        return mlp_logits(fused, self.mlp)

    def predict(self, inputs) -> np.ndarray:
        z = self.logits(inputs)
        return np.argmax(z, axis=-1)

    def loss_and_grads(self, inputs, labels) -> tuple[float, dict[str, np.ndarray]]:
        """Mean batch loss and the gradient of every trainable parameter."""
        labels = np.asarray(labels, dtype=np.int64)
        if self.attention is None:
            X = np.asarray(inputs, dtype=np.float64)
            z3, cache = _mlp_forward_cache(X, self.mlp)
            loss, dz3 = _batch_loss_from_logits(z3, labels)
            mlp_grads, _ = _mlp_backward(dz3, cache, self.mlp)
            return loss, {f"mlp.{k}": v for k, v in mlp_grads.items()}

        fused, caches = self._fuse_batch(inputs)
        z3, cache = _mlp_forward_cache(fused, self.mlp)
        loss, dz3 = _batch_loss_from_logits(z3, labels)
        mlp_grads, dfused = _mlp_backward(dz3, cache, self.mlp)
        grads = {f"mlp.{k}": v for k, v in mlp_grads.items()}
        attn_grads: dict[str, np.ndarray] = {
            k: np.zeros_like(v) for k, v in self.attention.items()
        }
        for row, pair_cache in enumerate(caches):
            for k, g in _cross_attend_backward(dfused[row], pair_cache, self.attention).items():
                attn_grads[k] += g
        for k in attn_grads:
            grads[f"attn.{k}"] = attn_grads[k]
        return loss, grads
