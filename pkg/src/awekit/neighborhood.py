"""Word-type embedding spaces and local neighborhood similarity.

The acoustic side of a comparison holds one mean vector per word type at
one encoder layer; the lexical side holds one mean vector per word type
from a text model. For each shared word we take the K nearest neighbors
under cosine similarity in both spaces and score the overlap of the two
neighbor sets with intersection-over-union. Averaged over the shared
vocabulary and repeated per layer, this traces how closely each layer's
pooled representations mirror lexical neighborhoods.

KNN is exact: a full scan with partial selection, ties broken by word
string so results are reproducible and trivially comparable against a
brute-force rescan.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .awe import AweRecord, load_awe_store_layer, store_layers
from .errors import (
    DegenerateVectorError,
    EmptyVocabularyError,
    LayerError,
    ParameterError,
    ShapeError,
    UnknownWordError,
)
from .manifest import Manifest, resolve_path
from .tensorfile import read_tensor

log = logging.getLogger(__name__)


class EmbeddingSpace:
    """Immutable word-type -> vector map with a cached matrix for scans.

    Words are held in sorted order. Zero vectors are rejected at
    construction with the offending word named; use the aggregation
    helpers if silent filtering is wanted.
    """

    def __init__(self, entries: Mapping[str, np.ndarray], side: str = "") -> None:
        if not entries:
            raise EmptyVocabularyError("an embedding space needs at least one word")
        self.side = side
        self.words: list[str] = sorted(entries)
        vectors = []
        dim = None
        for word in self.words:
            v = np.asarray(entries[word], dtype=np.float64).reshape(-1)
            if dim is None:
                dim = v.size
            elif v.size != dim:
                raise ShapeError(
                    f"word {word!r} has dimension {v.size}, expected {dim}"
                )
            if not np.any(v):
                raise DegenerateVectorError(
                    f"word {word!r} has a zero vector; cosine is undefined"
                )
            vectors.append(v)
        self.dimension: int = int(dim or 0)
        self.matrix: np.ndarray = np.stack(vectors)
        self.sq_norms: np.ndarray = np.einsum("ij,ij->i", self.matrix, self.matrix)
        self._index: dict[str, int] = {w: i for i, w in enumerate(self.words)}

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self.words)

    @property
    def entries(self) -> dict[str, np.ndarray]:
        return {w: self.matrix[i] for w, i in self._index.items()}

    def vector(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self._index[word]]
        except KeyError:
            raise UnknownWordError(f"word {word!r} not in {self.side or 'space'}") from None

    def index_of(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWordError(f"word {word!r} not in {self.side or 'space'}") from None

    def restrict(self, words: Iterable[str]) -> "EmbeddingSpace":
        kept = {w: self.matrix[self._index[w]] for w in words if w in self._index}
        if not kept:
            raise EmptyVocabularyError(f"restriction of {self.side or 'space'} is empty")
        return EmbeddingSpace(kept, side=self.side)


@dataclass(frozen=True)
class NeighborSet:
    """Ordered K nearest neighbors of one word, self excluded."""

    word: str
    neighbors: tuple[tuple[str, float], ...]

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.neighbors]


def cosine(u, v) -> float:
    """Cosine similarity, clamped into [-1, 1] against rounding.

    The denominator is sqrt(|u|^2 * |v|^2), which makes cosine(v, v)
    exactly 1.0 (sqrt of a rounded square returns its root exactly).
    """
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if u.size != v.size:
        raise ShapeError(f"dimension mismatch: {u.size} vs {v.size}")
    uu = float(np.dot(u, u))
    vv = float(np.dot(v, v))
    if uu == 0.0 or vv == 0.0:
        raise DegenerateVectorError("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(u, v) / np.sqrt(uu * vv), -1.0, 1.0))


def _select_top(
    scores: np.ndarray, exclude: int, k: int, words: Sequence[str]
) -> list[tuple[str, float]]:
    """Top-k indices by score, ties by word string, ``exclude`` omitted."""
    n = scores.shape[0]
    scores = scores.copy()
    scores[exclude] = -np.inf
    if k < n - 1:
        part = np.argpartition(-scores, k - 1)[:k]
        threshold = scores[part].min()
        candidates = np.flatnonzero(scores >= threshold)
    else:
        candidates = np.flatnonzero(scores > -np.inf)
    ranked = sorted(candidates.tolist(), key=lambda i: (-scores[i], words[i]))[:k]
    return [(words[i], float(np.clip(scores[i], -1.0, 1.0))) for i in ranked]


def _query_scores(space: EmbeddingSpace, qi: int) -> np.ndarray:
    q = space.matrix[qi]
    return (space.matrix @ q) / np.sqrt(space.sq_norms * space.sq_norms[qi])


def knn(word: str, space: EmbeddingSpace, k: int) -> NeighborSet:
    """The K other words most cosine-similar to ``word``, exact full scan."""
    qi = space.index_of(word)
    if not 1 <= k <= len(space) - 1:
        raise ParameterError(
            f"K must be in [1, {len(space) - 1}] for a {len(space)}-word space, got {k}"
        )
    top = _select_top(_query_scores(space, qi), qi, k, space.words)
    return NeighborSet(word=word, neighbors=tuple(top))


def all_nearest_neighbors(
    space: EmbeddingSpace, k: int, chunk: int = 256
) -> list[list[tuple[str, float]]]:
    """Top-k neighbor lists for every word, scanned in blocks."""
    if not 1 <= k <= len(space) - 1:
        raise ParameterError(
            f"K must be in [1, {len(space) - 1}] for a {len(space)}-word space, got {k}"
        )
    out: list[list[tuple[str, float]]] = []
    m, sq, words = space.matrix, space.sq_norms, space.words
    for lo in range(0, len(space), chunk):
        hi = min(lo + chunk, len(space))
        block = (m[lo:hi] @ m.T) / np.sqrt(sq[lo:hi, None] * sq[None, :])
        for row in range(hi - lo):
            out.append(_select_top(block[row], lo + row, k, words))
    return out


def jaccard(set_a: Iterable[str], set_b: Iterable[str]) -> float:
    """Intersection over union of two word sets."""
    a, b = set(set_a), set(set_b)
    union = a | b
    if not union:
        raise ParameterError("jaccard of two empty sets is undefined")
    return len(a & b) / len(union)


def shared_vocabulary(a: EmbeddingSpace, b: EmbeddingSpace) -> list[str]:
    return sorted(set(a.words) & set(b.words))


def lns(
    word: str, acoustic: EmbeddingSpace, lexical: EmbeddingSpace, k: int
) -> float:
    """Neighbor-set overlap of one word between two spaces.

    Both vocabularies are restricted to their intersection before the
    scans so the neighbor sets draw from the same candidate pool.
    """
    if word not in acoustic or word not in lexical:
        raise UnknownWordError(f"word {word!r} must be present in both spaces")
    shared = shared_vocabulary(acoustic, lexical)
    a = acoustic.restrict(shared) if len(shared) != len(acoustic) else acoustic
    b = lexical.restrict(shared) if len(shared) != len(lexical) else lexical
    return jaccard(knn(word, a, k).words, knn(word, b, k).words)


def lns_mean(
    acoustic: EmbeddingSpace, lexical: EmbeddingSpace, ks: Sequence[int]
) -> tuple[dict[int, float], int]:
    """Mean LNS over the shared vocabulary for each K.

    Returns the per-K means and the shared vocabulary size. Neighbor
    lists are computed once at max(K); smaller K reuse prefixes, which is
    sound because the score-then-word ordering is total.
    """
    shared = shared_vocabulary(acoustic, lexical)
    if len(shared) < 2:
        raise EmptyVocabularyError(
            f"shared vocabulary has {len(shared)} words; need at least 2"
        )
    ks = sorted(set(int(k) for k in ks))
    a = acoustic.restrict(shared)
    b = lexical.restrict(shared)
    k_max = max(ks)
    if not 1 <= k_max <= len(shared) - 1:
        raise ParameterError(
            f"K={k_max} out of range for shared vocabulary of {len(shared)}"
        )
    neigh_a = all_nearest_neighbors(a, k_max)
    neigh_b = all_nearest_neighbors(b, k_max)
    means: dict[int, float] = {}
    for k in ks:
        total = 0.0
        for i in range(len(shared)):
            set_a = [w for w, _ in neigh_a[i][:k]]
            set_b = [w for w, _ in neigh_b[i][:k]]
            total += jaccard(set_a, set_b)
        means[k] = total / len(shared)
    return means, len(shared)


def aggregate_word_types(
    records: Sequence[AweRecord], min_count: int = 1
) -> EmbeddingSpace:
    """One vector per word type: mean over its occurrence vectors.

    Types with fewer than ``min_count`` occurrences are dropped, as are
    (with a log line) types whose mean is a zero vector.
    """
    if not records:
        raise EmptyVocabularyError("no records to aggregate")
    layers = {r.layer for r in records}
    if len(layers) != 1:
        raise LayerError(f"records span layers {sorted(layers)}; expected one")
    layer = layers.pop()

    by_word: dict[str, list[np.ndarray]] = defaultdict(list)
    for r in records:
        by_word[r.word].append(np.asarray(r.vector, dtype=np.float64))

    entries: dict[str, np.ndarray] = {}
    for word, vectors in by_word.items():
        if len(vectors) < min_count:
            continue
        mean = np.mean(vectors, axis=0)
        if not np.any(mean):
            log.warning("dropping word %r: aggregated vector is zero", word)
            continue
        entries[word] = mean
    if not entries:
        raise EmptyVocabularyError(
            f"no word type has >= {min_count} occurrences with a nonzero mean"
        )
    return EmbeddingSpace(entries, side=f"acoustic:L{layer}")


def build_lexical_space(
    manifest: Manifest, root: str | Path, min_count: int = 1
) -> EmbeddingSpace:
    """Word-type space from the corpus lexical tensors.

    Each lexical tensor holds one row per transcript token; a type's
    vector is the mean over all its token occurrences.
    """
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = defaultdict(int)
    for utt in manifest.utterances:
        tokens = [t.lower() for t in utt.transcript.split()]
        matrix = read_tensor(resolve_path(root, utt.lexical_tensor_path))
        if matrix.shape[0] != len(tokens):
            raise ShapeError(
                f"utterance {utt.id!r}: lexical tensor has {matrix.shape[0]} rows "
                f"for {len(tokens)} transcript tokens"
            )
        for token, row in zip(tokens, np.asarray(matrix, dtype=np.float64)):
            if token in sums:
                sums[token] = sums[token] + row
            else:
                sums[token] = row.copy()
            counts[token] += 1

    entries: dict[str, np.ndarray] = {}
    for word, total in sums.items():
        if counts[word] < min_count:
            continue
        mean = total / counts[word]
        if not np.any(mean):
            log.warning("dropping word %r: aggregated vector is zero", word)
            continue
        entries[word] = mean
    if not entries:
        raise EmptyVocabularyError(
            f"no lexical word type has >= {min_count} occurrences with a nonzero mean"
        )
    return EmbeddingSpace(entries, side="lexical")


@dataclass
class LnsReport:
    """Mean LNS per (layer, K) with the shared vocabulary size per layer."""

    per_layer: dict[int, dict[int, float]]
    vocab_sizes: dict[int, int]
    ks: list[int]

    def rows(self) -> list[tuple[int, int, float, int]]:
        out = []
        for layer in sorted(self.per_layer):
            for k in sorted(self.per_layer[layer]):
                out.append((layer, k, self.per_layer[layer][k], self.vocab_sizes[layer]))
        return out


def lns_layer_report(
    awe_store: str | Path | Mapping[int, Sequence[AweRecord]],
    lexical: EmbeddingSpace,
    ks: Sequence[int] = (5, 10, 25, 50),
    min_count: int = 1,
) -> LnsReport:
    """Mean LNS against the lexical space for every stored layer."""
    if isinstance(awe_store, (str, Path)):
        layers = store_layers(awe_store)
        if not layers:
            raise LayerError(f"{awe_store}: no stored layers found")
        loader = lambda layer: load_awe_store_layer(awe_store, layer)  # noqa: E731
    else:
        layers = sorted(awe_store)
        loader = lambda layer: awe_store[layer]  # noqa: E731

    per_layer: dict[int, dict[int, float]] = {}
    vocab_sizes: dict[int, int] = {}
    for layer in layers:
        acoustic = aggregate_word_types(list(loader(layer)), min_count=min_count)
        means, vocab = lns_mean(acoustic, lexical, ks)
        per_layer[layer] = means
        vocab_sizes[layer] = vocab
    return LnsReport(per_layer=per_layer, vocab_sizes=vocab_sizes, ks=sorted(set(int(k) for k in ks)))


@dataclass
class NeighborTableRow:
    word: str
    lexical_neighbors: list[tuple[str, float]]
    acoustic_neighbors: list[tuple[str, float]]
    shared: set[str] = field(default_factory=set)


def neighbor_table(
    words: Sequence[str],
    acoustic: EmbeddingSpace,
    lexical: EmbeddingSpace,
    k: int = 5,
) -> list[NeighborTableRow]:
    """Side-by-side lexical and acoustic neighbor lists, shared words marked."""
    shared_vocab = shared_vocabulary(acoustic, lexical)
    a = acoustic.restrict(shared_vocab)
    b = lexical.restrict(shared_vocab)
    rows = []
    for word in words:
        if word not in a or word not in b:
            raise UnknownWordError(f"word {word!r} not present in both spaces")
        acoustic_set = knn(word, a, k)
        lexical_set = knn(word, b, k)
        rows.append(
            NeighborTableRow(
                word=word,
                lexical_neighbors=list(lexical_set.neighbors),
                acoustic_neighbors=list(acoustic_set.neighbors),
                shared=set(lexical_set.words) & set(acoustic_set.words),
            )
        )
    return rows


def format_neighbor_table(rows: Sequence[NeighborTableRow]) -> str:
    """Plain-text rendering; shared neighbors are starred."""
    lines = []
    for row in rows:
        mark = lambda w: f"*{w}*" if w in row.shared else w  # noqa: E731
        lex = ", ".join(mark(w) for w, _ in row.lexical_neighbors)
        aco = ", ".join(mark(w) for w, _ in row.acoustic_neighbors)
        lines.append(f"{row.word}:")
        lines.append(f"  lexical:  {lex}")
        lines.append(f"  acoustic: {aco}")
    return "\n".join(lines)


def write_lns_csv(report: LnsReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["layer", "K", "mean_lns", "vocab_size"])
        for layer, k, mean, vocab in report.rows():
            writer.writerow([layer, k, f"{mean:.12g}", vocab])
