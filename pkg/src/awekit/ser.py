"""Emotion-classification experiment harness.

Builds per-utterance examples for one feature type (Mel, raw frame
representations at a layer, or pooled word embeddings at a layer), with
or without lexical fusion; runs seeded train/test splits; trains the
numpy classifier several times; and aggregates weighted accuracy into
run, sweep, and summary reports.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .awe import build_awes, LayeredUtterance
from .errors import (
    ConfigurationError,
    LayerError,
    ParameterError,
    ShapeError,
    SplitError,
)
from .manifest import Manifest, load_alignments, load_manifest, resolve_path
from .nn import FusionClassifier, TrainConfig, adam_step, AdamState, concat_fuse
from .tensorfile import read_tensor

log = logging.getLogger(__name__)

ALL_LAYERS = "all"

FEATURES = ("mel", "raw", "awe")
FUSIONS = ("none", "concat", "cross_attention")
_FUSION_ALIASES = {"xattn": "cross_attention", "cross-att": "cross_attention"}


@dataclass
class ExperimentConfig:
    """Everything that determines one experiment, and nothing else."""

    manifest_path: str
    feature: str
    fusion: str = "none"
    layer: int | str = 0
    split_ratio: float = 0.8
    n_runs: int = 5
    seeds: list[int] | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    hidden1: int = 128
    hidden2: int = 16
    d_model: int = 128
    text_vector: str = "mean"  # mean | first
    allow_mel_cross_attention: bool = False

    def __post_init__(self) -> None:
        self.fusion = _FUSION_ALIASES.get(self.fusion, self.fusion)
        if self.feature not in FEATURES:
            raise ConfigurationError(f"feature must be one of {FEATURES}, got {self.feature!r}")
        if self.fusion not in FUSIONS:
            raise ConfigurationError(f"fusion must be one of {FUSIONS}, got {self.fusion!r}")
        if self.feature == "mel" and self.fusion == "cross_attention" and not self.allow_mel_cross_attention:
            raise ConfigurationError(
                "mel + cross_attention is rejected by default; "
                "set allow_mel_cross_attention to force it"
            )
        if not 0 < self.split_ratio < 1:
            raise ConfigurationError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.seeds is None:
            self.seeds = list(range(self.n_runs))
        self.seeds = [int(s) for s in self.seeds]
        if len(self.seeds) != self.n_runs:
            raise ConfigurationError(
                f"n_runs={self.n_runs} but {len(self.seeds)} seeds given"
            )
        if self.text_vector not in ("mean", "first"):
            raise ConfigurationError(f"text_vector must be 'mean' or 'first', got {self.text_vector!r}")
        if isinstance(self.layer, str) and self.layer != ALL_LAYERS:
            raise ConfigurationError(f"layer must be an index or '{ALL_LAYERS}', got {self.layer!r}")

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass
class Dataset:
    """Assembled examples: fixed vectors or (audio_seq, text_seq) pairs."""

    mode: str  # "vector" | "pair"
    inputs: list
    labels: np.ndarray
    n_classes: int

    def __len__(self) -> int:
        return len(self.inputs)


@dataclass
class RunReport:
    """One experiment: per-seed weighted accuracies plus their summary."""

    config_fingerprint: str
    feature: str
    fusion: str
    layer: int | str
    seeds: list[int]
    wa_values: list[float]
    mean_wa: float
    std_wa: float
    wall_time_s: float = field(default=0.0, compare=False)


@dataclass
class SweepRow:
    layer: int
    feature: str
    fusion: str
    mean_wa: float
    std_wa: float
    status: str = "ok"
    wa_values: list[float] = field(default_factory=list)


@dataclass
class SweepReport:
    rows: list[SweepRow]
    config_fingerprint: str

    @property
    def failed_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.status != "ok"]


def split(examples: Sequence, ratio: float, seed) -> tuple[list, list]:
    """Seeded shuffle, then the first floor(ratio * n) examples train."""
    train_idx, test_idx = _split_indices(len(examples), ratio, seed)
    return [examples[i] for i in train_idx], [examples[i] for i in test_idx]


def _split_indices(n: int, ratio: float, seed) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < ratio < 1:
        raise ParameterError(f"split ratio must be in (0, 1), got {ratio}")
    if n < 1:
        raise SplitError("cannot split an empty example list")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(ratio * n))
    train, test = perm[:n_train], perm[n_train:]
    if train.size == 0 or test.size == 0:
        raise SplitError(f"split of {n} examples at ratio {ratio} left one side empty")
    return train, test


def weighted_accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Overall fraction correct; class weights are implicit in frequency."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ShapeError(
            f"predictions ({predictions.shape}) and labels ({labels.shape}) differ"
        )
    if predictions.size < 1:
        raise ShapeError("need at least one prediction")
    return float(np.mean(predictions == labels))


def _text_features(matrix: np.ndarray, mode: str) -> np.ndarray:
    return matrix.mean(axis=0) if mode == "mean" else matrix[0]


def assemble_dataset(manifest: Manifest, root: str | Path, config: ExperimentConfig) -> Dataset:
    """One example per utterance for the configured feature and fusion.

    Utterances with no aligned words are skipped (with a log line) on the
    pooled-word path.
    """
    if config.layer == ALL_LAYERS:
        raise ParameterError("assemble_dataset needs a concrete layer; sweeps fix it per run")
    layer = int(config.layer)
    need_text = config.fusion != "none"
    pair_mode = config.fusion == "cross_attention"

    inputs: list = []
    labels: list[int] = []
    label_index = {label: i for i, label in enumerate(manifest.label_set)}

    for utt in manifest.utterances:
        if config.feature == "mel":
            if utt.mel_tensor_path is None:
                raise ConfigurationError(
                    f"utterance {utt.id!r} has no Mel stream; extract one first"
                )
            if layer != 0:
                raise LayerError("the Mel stream has a single layer, use layer 0")
            seq = np.asarray(read_tensor(resolve_path(root, utt.mel_tensor_path))[0], dtype=np.float64)
        elif config.feature == "raw":
            audio = read_tensor(resolve_path(root, utt.audio_tensor_path))
            if not 0 <= layer < audio.shape[0]:
                raise LayerError(f"layer {layer} outside 0..{audio.shape[0] - 1}")
            seq = np.asarray(audio[layer], dtype=np.float64)
        else:  # awe
            audio = read_tensor(resolve_path(root, utt.audio_tensor_path))
            if not 0 <= layer < audio.shape[0]:
                raise LayerError(f"layer {layer} outside 0..{audio.shape[0] - 1}")
            alignments = load_alignments(resolve_path(root, utt.alignment_path))
            if not alignments:
                log.warning("skipping utterance %r: no aligned words", utt.id)
                continue
            records = build_awes(
                LayeredUtterance(id=utt.id, tensor=audio, label=utt.label, transcript=utt.transcript),
                alignments,
                [layer],
                stride_s=manifest.frame_stride_s,
                window_s=manifest.frame_window_s,
            )
            seq = np.stack([r.vector for r in records])

        if need_text:
            text_matrix = np.asarray(
                read_tensor(resolve_path(root, utt.lexical_tensor_path)), dtype=np.float64
            )

        if pair_mode:
            inputs.append((seq, text_matrix))
        elif config.fusion == "concat":
            inputs.append(concat_fuse(seq.mean(axis=0), _text_features(text_matrix, config.text_vector)))
        else:
            inputs.append(seq.mean(axis=0))
        labels.append(label_index[utt.label])

    if not inputs:
        raise ConfigurationError("dataset is empty after assembly")
    return Dataset(
        mode="pair" if pair_mode else "vector",
        inputs=inputs,
        labels=np.asarray(labels, dtype=np.int64),
        n_classes=len(manifest.label_set),
    )


def _train_single(dataset: Dataset, config: ExperimentConfig, seed: int) -> float:
    """Train once: re-seeds split, initialization, and batch order."""
    train_idx, test_idx = _split_indices(len(dataset), config.split_ratio, [seed, 0])
    rng = np.random.default_rng([seed, 1])

    if dataset.mode == "vector":
        X = np.stack(dataset.inputs)
        clf = FusionClassifier.for_vectors(
            X.shape[1], dataset.n_classes, config.hidden1, config.hidden2, rng
        )
        take = lambda ids: X[ids]  # noqa: E731
    else:
        d_audio = dataset.inputs[0][0].shape[1]
        d_text = dataset.inputs[0][1].shape[1]
        clf = FusionClassifier.for_pairs(
            d_audio, d_text, dataset.n_classes, config.d_model, config.hidden1, config.hidden2, rng
        )
        take = lambda ids: [dataset.inputs[i] for i in ids]  # noqa: E731

    tc = replace(config.train, seed=seed)
    state = AdamState()
    batch_rng = np.random.default_rng([seed, 2])
    for _ in range(tc.epochs):
        order = batch_rng.permutation(train_idx.size)
        for lo in range(0, order.size, tc.batch_size):
            ids = train_idx[order[lo : lo + tc.batch_size]]
            _, grads = clf.loss_and_grads(take(ids), dataset.labels[ids])
            adam_step(clf.parameters(), grads, state, tc)

    predictions = clf.predict(take(test_idx))
    return weighted_accuracy(predictions, dataset.labels[test_idx])


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None) -> RunReport:
    """Train ``n_runs`` times and report per-seed WA with mean and std.

    The std is the population std of the per-seed values, matching the
    compact mean (+/- std) presentation of the reports.
    """
    started = time.perf_counter()
    if dataset is None:
        manifest = load_manifest(config.manifest_path)
        dataset = assemble_dataset(manifest, Path(config.manifest_path).parent, config)
    wa_values = [_train_single(dataset, config, seed) for seed in config.seeds]
    return RunReport(
        config_fingerprint=config.fingerprint(),
        feature=config.feature,
        fusion=config.fusion,
        layer=config.layer,
        seeds=list(config.seeds),
        wa_values=wa_values,
        mean_wa=float(np.mean(wa_values)),
        std_wa=float(np.std(wa_values)),
        wall_time_s=time.perf_counter() - started,
    )


def _sweep_cell(args: tuple[ExperimentConfig, int, str]) -> SweepRow:
    config, layer, fusion = args
    cell = replace(config, layer=layer, fusion=fusion)
    try:
        report = run_experiment(cell)
    except Exception as exc:  # marked, not fatal: sweeps degrade gracefully
        log.warning("layer %d fusion %s failed: %s", layer, fusion, exc)
        return SweepRow(
            layer=layer, feature=config.feature, fusion=fusion,
            mean_wa=float("nan"), std_wa=float("nan"),
            status=f"failed: {exc}",
        )
    return SweepRow(
        layer=layer, feature=config.feature, fusion=fusion,
        mean_wa=report.mean_wa, std_wa=report.std_wa,
        wa_values=list(report.wa_values),
    )


def layer_sweep(
    config: ExperimentConfig,
    fusions: Sequence[str] | None = None,
    workers: int = 1,
) -> SweepReport:
    """Run every layer (and fusion variant) and collect one row per cell.

    Rows come back ordered by (layer, fusion) regardless of execution
    order; failed cells are marked rather than aborting the sweep.
    """
    if config.layer != ALL_LAYERS:
        raise ConfigurationError("layer_sweep expects layer='all'")
    manifest = load_manifest(config.manifest_path)
    fusions = list(fusions) if fusions else [config.fusion]
    fusions = [_FUSION_ALIASES.get(f, f) for f in fusions]
    for fusion in fusions:
        if fusion not in FUSIONS:
            raise ConfigurationError(f"unknown fusion {fusion!r}")
    tasks = [
        (config, layer, fusion)
        for layer in range(manifest.n_layers)
        for fusion in fusions
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(t) for t in tasks]
    rows.sort(key=lambda r: (r.layer, fusions.index(r.fusion)))
    return SweepReport(rows=rows, config_fingerprint=config.fingerprint())


def sweep_summary(report: SweepReport) -> list[dict]:
    """Whole-sweep aggregates per (feature, fusion).

    Two stds are reported: across the per-layer means, and across the
    pooled per-seed values of all layers.
    """
    out = []
    seen: list[tuple[str, str]] = []
    for row in report.rows:
        key = (row.feature, row.fusion)
        if key not in seen:
            seen.append(key)
    for feature, fusion in seen:
        ok = [r for r in report.rows if (r.feature, r.fusion) == (feature, fusion) and r.status == "ok"]
        layer_means = [r.mean_wa for r in ok]
        pooled = [wa for r in ok for wa in r.wa_values]
        out.append(
            {
                "feature": feature,
                "fusion": fusion,
                "n_layers_ok": len(ok),
                "mean_wa": float(np.mean(layer_means)) if layer_means else float("nan"),
                "std_across_layers": float(np.std(layer_means)) if layer_means else float("nan"),
                "std_pooled_runs": float(np.std(pooled)) if pooled else float("nan"),
            }
        )
    return out
