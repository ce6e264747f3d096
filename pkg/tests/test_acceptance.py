"""Acceptance suite: one test per release criterion.

Each test prints a [PASS] line when its criterion holds, so
``pytest tests/test_acceptance.py -v -s`` doubles as the acceptance
report. Tolerances are pinned here, not configurable.
"""

from __future__ import annotations

import math
import time
from math import comb
from pathlib import Path

import numpy as np
import pytest

from awekit.awe import build_corpus_awes, save_awe_store, time_to_frame_span
from awekit.manifest import load_alignments, load_manifest, resolve_path
from awekit.neighborhood import (
    EmbeddingSpace,
    all_nearest_neighbors,
    build_lexical_space,
    knn,
    lns,
    lns_layer_report,
    lns_mean,
)
from awekit.nn import (
    CrossAttentionParams,
    FusionClassifier,
    TrainConfig,
    _cross_attend_backward,
    _cross_attend_cache,
)
from awekit.reports import emit_report
from awekit.ser import (
    ALL_LAYERS,
    ExperimentConfig,
    assemble_dataset,
    layer_sweep,
    run_experiment,
)
from awekit.synth import generate_synthetic_corpus
from awekit.tensorfile import read_tensor


def _passed(name: str) -> None:
    print(f"[PASS] {name}")


# ---------------------------------------------------------------------------
# Shared corpora
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def separable_corpus(tmp_path_factory) -> Path:
    return generate_synthetic_corpus(
        tmp_path_factory.mktemp("sep5"),
        n_classes=4, n_utterances=200, n_layers=13, dim=16,
        words_per_utt=6, separation=5.0, vocab_size=40, seed=1001,
    )


@pytest.fixture(scope="module")
def chance_corpus(tmp_path_factory) -> Path:
    return generate_synthetic_corpus(
        tmp_path_factory.mktemp("sep0"),
        n_classes=4, n_utterances=120, n_layers=2, dim=16,
        words_per_utt=6, separation=0.0, vocab_size=40, seed=1002,
    )


@pytest.fixture(scope="module")
def planted_corpus(tmp_path_factory) -> Path:
    return generate_synthetic_corpus(
        tmp_path_factory.mktemp("planted"),
        n_classes=4, n_utterances=160, n_layers=13, dim=12,
        words_per_utt=5, separation=5.0, vocab_size=30,
        signal_layers=[3], seed=1003,
    )


def _experiment(manifest_path, feature, fusion, layer, *, epochs=40, seeds=5,
                lr=3e-3) -> ExperimentConfig:
    return ExperimentConfig(
        manifest_path=str(manifest_path),
        feature=feature,
        fusion=fusion,
        layer=layer,
        n_runs=seeds,
        train=TrainConfig(epochs=epochs, batch_size=32, learning_rate=lr),
        hidden1=32,
        hidden2=16,
        d_model=16,
    )


# ---------------------------------------------------------------------------
# Criterion: KNN oracle equivalence
# ---------------------------------------------------------------------------


def _brute_force_neighbor_map(entries: dict[str, np.ndarray], k: int) -> dict[str, list[str]]:
    """Exhaustive pairwise cosine plus full sort, lexicographic ties."""
    words = sorted(entries)
    sq = {w: float(np.dot(v, v)) for w, v in entries.items()}
    out = {}
    for w in words:
        u = entries[w]
        scored = [
            (o, float(np.dot(u, entries[o]) / math.sqrt(sq[w] * sq[o])))
            for o in words
            if o != w
        ]
        scored.sort(key=lambda t: (-t[1], t[0]))
        out[w] = [o for o, _ in scored[:k]]
    return out


def test_knn_oracle_equivalence_50_random_spaces():
    started = time.perf_counter()
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(20, 501))
        dim = int(rng.integers(4, 65))
        k = int(rng.integers(1, min(16, n)))
        entries = {f"w{i:03d}": rng.normal(size=dim) for i in range(n)}
        space = EmbeddingSpace(entries)
        oracle = _brute_force_neighbor_map(entries, k)
        for word in space.words:
            assert knn(word, space, k).words == oracle[word]
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    _passed(f"knn equals brute-force oracle on 50 spaces ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# Criterion: LNS identity, bounds, symmetry, scale invariance
# ---------------------------------------------------------------------------


def test_lns_identity_bounds_symmetry_scaling():
    for size in (2, 3, 10, 57, 100):
        rng = np.random.default_rng(3000 + size)
        entries = {f"w{i:03d}": rng.normal(size=8) for i in range(size)}
        space = EmbeddingSpace(entries)
        other = EmbeddingSpace(
            {w: rng.normal(size=8) for w in entries}
        )
        for word in space.words:
            for k in range(1, size):
                assert lns(word, space, space, k) == 1.0
        sample_ks = sorted(k for k in {1, 2, size // 2, size - 1} if 1 <= k <= size - 1)
        for word in space.words:
            for k in sample_ks:
                forward = lns(word, space, other, k)
                assert 0.0 <= forward <= 1.0
                assert forward == lns(word, other, space, k)
        scaled_a = EmbeddingSpace({w: 953.0 * v for w, v in entries.items()})
        scaled_b = EmbeddingSpace({w: 2e-3 * v for w, v in other.entries.items()})
        for word in list(space.words)[:: max(1, size // 10)]:
            for k in sample_ks:
                base = lns(word, space, other, k)
                assert lns(word, scaled_a, other, k) == base
                assert lns(word, space, scaled_b, k) == base
    _passed("lns identity=1, bounded, symmetric, scale-invariant (|V| up to 100)")


# ---------------------------------------------------------------------------
# Criterion: random-space LNS calibration
# ---------------------------------------------------------------------------


def _exact_random_subset_jaccard(pool: int, k: int) -> float:
    """Analytic E[J] for two independent uniform k-subsets of a pool."""
    total = comb(pool, k)
    return sum(
        comb(k, i) * comb(pool - k, k - i) / total * (i / (2 * k - i))
        for i in range(0, k + 1)
    )


def _mc_random_subset_jaccard(pool: int, k: int, trials: int, seed: int) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    vals = np.empty(trials)
    for t in range(trials):
        a = set(rng.choice(pool, size=k, replace=False).tolist())
        b = set(rng.choice(pool, size=k, replace=False).tolist())
        vals[t] = len(a & b) / len(a | b)
    return float(vals.mean()), float(vals.std(ddof=1) / trials**0.5)


def test_lns_calibration_on_independent_random_spaces():
    V, dim, n_corpora = 80, 16, 40
    for k in (1, 5):
        oracle_mc, se_mc = _mc_random_subset_jaccard(V - 1, k, 20000, 4242)
        oracle_exact = _exact_random_subset_jaccard(V - 1, k)
        # the Monte-Carlo estimator must agree with its own analytic form
        assert abs(oracle_mc - oracle_exact) <= 4 * se_mc

        corpus_means = []
        for c in range(n_corpora):
            rng = np.random.default_rng([2000, c])
            a = EmbeddingSpace({f"w{i:03d}": rng.normal(size=dim) for i in range(V)})
            b = EmbeddingSpace({f"w{i:03d}": rng.normal(size=dim) for i in range(V)})
            means, _ = lns_mean(a, b, ks=[k])
            corpus_means.append(means[k])
        grand = float(np.mean(corpus_means))
        se_sys = float(np.std(corpus_means, ddof=1) / n_corpora**0.5)
        se = math.sqrt(se_sys**2 + se_mc**2)
        assert abs(grand - oracle_mc) <= 3 * se, (
            f"K={k}: system {grand:.5f} vs oracle {oracle_mc:.5f}, 3SE {3 * se:.5f}"
        )
        if k == 1:
            # at K=1 the expectation reduces to K/(|V|-1) exactly
            assert abs(grand - k / (V - 1)) <= 3 * se_sys
    _passed("mean LNS on independent random spaces matches the random-subset oracle")


# ---------------------------------------------------------------------------
# Criterion: pooling oracle and exhaustive frame-span grid
# ---------------------------------------------------------------------------


def test_pooled_vectors_equal_elementwise_averages(separable_corpus):
    manifest = load_manifest(separable_corpus)
    root = separable_corpus.parent
    per_layer = build_corpus_awes(manifest, root, layers=[0, 3, 12])
    spans_checked = 0
    tensors = {
        utt.id: read_tensor(resolve_path(root, utt.audio_tensor_path))
        for utt in manifest.utterances[:40]
    }
    alignments = {
        utt.id: load_alignments(resolve_path(root, utt.alignment_path))
        for utt in manifest.utterances[:40]
    }
    for layer, records in per_layer.items():
        for rec in records:
            if rec.utterance_id not in tensors:
                continue
            tensor = tensors[rec.utterance_id]
            ali = alignments[rec.utterance_id][rec.token_index]
            span = time_to_frame_span(
                ali.start_s, ali.end_s,
                manifest.frame_stride_s, manifest.frame_window_s,
                tensor.shape[1],
            )
            window = tensor[layer, span.first : span.last]
            expected = [
                sum(float(row[j]) for row in window) / len(window)
                for j in range(window.shape[1])
            ]
            np.testing.assert_allclose(rec.vector, expected, atol=1e-6)
            spans_checked += 1
    assert spans_checked > 500
    _passed(f"pooled vectors equal direct elementwise averages ({spans_checked} spans)")


def test_frame_span_exhaustive_millisecond_grid():
    stride, window, n_frames = 0.020, 0.025, 100
    window_starts = np.arange(n_frames) * stride
    window_ends = window_starts + window
    checked = 0
    for i in range(0, 2000):
        start = i * 0.001
        ends = np.arange(i + 1, 2001) * 0.001
        mask = (window_starts[None, :] < ends[:, None]) & (window_ends[None, :] > start)
        assert mask.any(axis=1).all()
        first = mask.argmax(axis=1)
        last = n_frames - mask[:, ::-1].argmax(axis=1)
        for j, end in enumerate(ends):
            span = time_to_frame_span(start, float(end), stride, window, n_frames)
            assert (span.first, span.last) == (int(first[j]), int(last[j]))
        checked += ends.size
    assert checked == 2001000
    _passed(f"frame spans match the window-overlap rule on {checked} grid pairs")


# ---------------------------------------------------------------------------
# Criterion: gradient correctness
# ---------------------------------------------------------------------------


def _max_fd_error(loss_fn, named_params, grads, step=1e-5) -> float:
    worst = 0.0
    for name, value in named_params:
        grad = grads[name].reshape(-1)
        flat = value.reshape(-1)
        for idx in range(flat.size):
            keep = flat[idx]
            flat[idx] = keep + step
            up = loss_fn()
            flat[idx] = keep - step
            down = loss_fn()
            flat[idx] = keep
            numeric = (up - down) / (2 * step)
            denom = max(abs(numeric), abs(grad[idx]))
            if denom < 1e-8:
                continue
            worst = max(worst, abs(numeric - grad[idx]) / denom)
    return worst


def test_gradients_match_central_finite_differences():
    worst = 0.0
    for seed in range(7):  # plain classifier path
        rng = np.random.default_rng(5000 + seed)
        clf = FusionClassifier.for_vectors(
            int(rng.integers(2, 6)), int(rng.integers(2, 5)),
            hidden1=int(rng.integers(3, 7)), hidden2=int(rng.integers(2, 5)), rng=rng,
        )
        X = rng.normal(size=(int(rng.integers(1, 6)), clf.mlp.w1.shape[0]))
        y = rng.integers(0, clf.mlp.b3.size, size=X.shape[0])
        _, grads = clf.loss_and_grads(X, y)
        worst = max(worst, _max_fd_error(
            lambda: clf.loss_and_grads(X, y)[0], clf.parameters(), grads,
        ))

    for seed in range(7, 13):  # attention alone, random linear functional
        rng = np.random.default_rng(5000 + seed)
        d_a, d_t, d_m = int(rng.integers(2, 5)), int(rng.integers(2, 5)), int(rng.integers(2, 5))
        params = CrossAttentionParams.init(d_a, d_t, d_m, rng)
        audio = rng.normal(size=(int(rng.integers(1, 5)), d_a))
        text = rng.normal(size=(int(rng.integers(1, 5)), d_t))
        direction = rng.normal(size=2 * d_m)

        def attn_loss():
            fused, _ = _cross_attend_cache(audio, text, params)
            return float(fused @ direction)

        _, cache = _cross_attend_cache(audio, text, params)
        grads = _cross_attend_backward(direction, cache, params)
        worst = max(worst, _max_fd_error(attn_loss, params.items(), grads))

    for seed in range(13, 20):  # fused path: attention feeding the classifier
        rng = np.random.default_rng(5000 + seed)
        d_a, d_t, d_m = int(rng.integers(2, 5)), int(rng.integers(2, 5)), int(rng.integers(2, 4))
        clf = FusionClassifier.for_pairs(
            d_a, d_t, int(rng.integers(2, 4)), d_model=d_m,
            hidden1=int(rng.integers(3, 6)), hidden2=int(rng.integers(2, 4)), rng=rng,
        )
        inputs = [
            (rng.normal(size=(int(rng.integers(1, 5)), d_a)),
             rng.normal(size=(int(rng.integers(1, 5)), d_t)))
            for _ in range(int(rng.integers(1, 4)))
        ]
        y = rng.integers(0, clf.mlp.b3.size, size=len(inputs))
        _, grads = clf.loss_and_grads(inputs, y)
        worst = max(worst, _max_fd_error(
            lambda: clf.loss_and_grads(inputs, y)[0], clf.parameters(), grads,
        ))

    assert worst <= 1e-4, f"max relative error {worst:.3e}"
    _passed(f"analytic gradients within 1e-4 of finite differences (worst {worst:.2e}, 20 seeds)")


# ---------------------------------------------------------------------------
# Criterion: end-to-end synthetic classification
# ---------------------------------------------------------------------------


def _nearest_centroid_accuracy(manifest_path: Path, layer: int) -> float:
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent
    config = _experiment(manifest_path, "raw", "none", layer)
    dataset = assemble_dataset(manifest, root, config)
    X = np.stack(dataset.inputs)
    y = dataset.labels
    centroids = np.stack([X[y == c].mean(axis=0) for c in range(dataset.n_classes)])
    d = np.linalg.norm(X[:, None, :] - centroids[None, :, :], axis=2)
    return float(np.mean(np.argmin(d, axis=1) == y))


def test_synthetic_ser_grid_reaches_95_percent(separable_corpus):
    # construction oracle first: the corpus must be trivially separable
    assert _nearest_centroid_accuracy(separable_corpus, layer=2) >= 0.95

    for feature in ("raw", "awe"):
        for fusion in ("none", "concat", "cross_attention"):
            started = time.perf_counter()
            report = run_experiment(_experiment(separable_corpus, feature, fusion, layer=2))
            elapsed = time.perf_counter() - started
            assert report.mean_wa >= 0.95, (
                f"{feature}+{fusion}: mean WA {report.mean_wa:.3f}"
            )
            assert elapsed < 300.0, f"{feature}+{fusion} took {elapsed:.0f}s"
    _passed("separation-5 corpus: every feature x fusion variant reaches WA >= 0.95")


def test_zero_separation_is_chance_level(chance_corpus):
    n_test = 120 - int(0.8 * 120)
    chance = 0.25
    se = math.sqrt(chance * (1 - chance) / (n_test * 5))
    for feature in ("raw", "awe"):
        for fusion in ("none", "concat", "cross_attention"):
            report = run_experiment(
                _experiment(chance_corpus, feature, fusion, layer=0, epochs=15)
            )
            assert abs(report.mean_wa - chance) <= 3 * se, (
                f"{feature}+{fusion}: mean WA {report.mean_wa:.3f} not within "
                f"3SE ({3 * se:.3f}) of chance"
            )
    _passed("separation-0 corpus: every variant at chance within 3 standard errors")


# ---------------------------------------------------------------------------
# Criterion: planted-layer sweep
# ---------------------------------------------------------------------------


def test_planted_layer_wins_the_sweep(planted_corpus):
    config = _experiment(planted_corpus, "raw", "none", ALL_LAYERS, epochs=15, seeds=3)
    report = layer_sweep(config)
    assert len(report.rows) == 13
    by_layer = {row.layer: row.mean_wa for row in report.rows}
    rest = max(wa for layer, wa in by_layer.items() if layer != 3)
    assert by_layer[3] > rest, f"layer 3 {by_layer[3]:.3f} vs best other {rest:.3f}"
    _passed(f"planted layer 3 is the strict sweep maximum ({by_layer[3]:.3f} vs {rest:.3f})")


# ---------------------------------------------------------------------------
# Criterion: byte-identical reports
# ---------------------------------------------------------------------------


def test_reports_are_byte_identical_across_runs(tmp_path, chance_corpus):
    manifest = load_manifest(chance_corpus)
    root = chance_corpus.parent

    def produce(tag: str) -> dict[str, bytes]:
        out = tmp_path / tag
        out.mkdir()
        per_layer = build_corpus_awes(manifest, root, layers=[0, 1])
        store = out / "store"
        save_awe_store(per_layer, store)
        lexical = build_lexical_space(manifest, root, min_count=1)
        lns_rep = lns_layer_report(store, lexical, ks=[2, 5], min_count=1)
        emit_report(lns_rep, out / "lns.csv", format="plot-data")
        run_rep = run_experiment(
            _experiment(chance_corpus, "awe", "concat", layer=1, epochs=4, seeds=2)
        )
        emit_report(run_rep, out / "run.csv")
        sweep_rep = layer_sweep(
            _experiment(chance_corpus, "raw", "none", ALL_LAYERS, epochs=3, seeds=2)
        )
        emit_report(sweep_rep, out / "sweep.csv")
        return {
            p.name: p.read_bytes()
            for p in sorted(out.glob("*.csv")) + sorted(out.glob("*.series.json"))
        }

    first = produce("first")
    second = produce("second")
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], f"{name} differs between runs"
    _passed("lns, run, and sweep reports are byte-identical across repeat runs")


# ---------------------------------------------------------------------------
# Criterion: report shapes
# ---------------------------------------------------------------------------


def test_sweep_emits_39_rows(planted_corpus, tmp_path):
    config = ExperimentConfig(
        manifest_path=str(planted_corpus),
        feature="awe",
        fusion="none",
        layer=ALL_LAYERS,
        n_runs=2,
        train=TrainConfig(epochs=2, batch_size=32),
        hidden1=8,
        hidden2=4,
        d_model=4,
    )
    report = layer_sweep(config, fusions=["none", "concat", "cross_attention"])
    assert len(report.rows) == 39
    path = tmp_path / "sweep.csv"
    emit_report(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "layer,feature,fusion,mean_wa,std_wa,status"
    assert len(lines) == 1 + 39
    _passed("13-layer x 3-fusion sweep emits exactly 39 rows")


def test_lns_report_emits_52_rows(tmp_path_factory, tmp_path):
    corpus_root = tmp_path_factory.mktemp("lns_shape")
    manifest_path = generate_synthetic_corpus(
        corpus_root,
        n_classes=2, n_utterances=60, n_layers=13, dim=8,
        words_per_utt=6, vocab_size=60, separation=1.0, seed=1004,
    )
    manifest = load_manifest(manifest_path)
    per_layer = build_corpus_awes(manifest, corpus_root, layers=range(13))
    lexical = build_lexical_space(manifest, corpus_root, min_count=1)
    report = lns_layer_report(per_layer, lexical, ks=[5, 10, 25, 50], min_count=1)
    assert all(size >= 51 for size in report.vocab_sizes.values())
    path = tmp_path / "lns.csv"
    emit_report(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "layer,K,mean_lns,vocab_size"
    assert len(lines) == 1 + 52
    for line in lines[1:]:
        layer, k, mean, vocab = line.split(",")
        assert 0 <= int(layer) <= 12
        assert int(k) in (5, 10, 25, 50)
        assert 0.0 <= float(mean) <= 1.0
        assert int(vocab) >= 51
    _passed("lns report over K={5,10,25,50} emits exactly 52 schema-exact rows")
