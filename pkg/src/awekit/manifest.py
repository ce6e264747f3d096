"""Corpus manifest, word alignments, and integrity validation.

A corpus on disk is a manifest (one JSON document), one 3-D audio tensor
per utterance (``[n_layers, n_frames, dim]``), one 2-D lexical tensor per
utterance (``[n_tokens, dim]``, one row per transcript word), optionally a
1-layer Mel tensor, and one alignment file per utterance (JSON lines, one
``{word, start_s, end_s, token_index}`` record per line).

Paths in the manifest are relative to the manifest's directory unless
absolute.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import FormatError
from .tensorfile import read_tensor

SCHEMA_VERSION = 1

DEFAULT_FRAME_STRIDE_S = 0.020
DEFAULT_FRAME_WINDOW_S = 0.025


@dataclass(frozen=True)
class WordAlignment:
    """One word token with its time span and transcript position."""

    word: str
    start_s: float
    end_s: float
    token_index: int


@dataclass
class UtteranceEntry:
    id: str
    audio_tensor_path: str
    lexical_tensor_path: str
    alignment_path: str
    label: str
    transcript: str
    n_frames: int
    mel_tensor_path: str | None = None


@dataclass
class Manifest:
    corpus_name: str
    label_set: list[str]
    utterances: list[UtteranceEntry]
    n_layers: int = 13
    frame_stride_s: float = DEFAULT_FRAME_STRIDE_S
    frame_window_s: float = DEFAULT_FRAME_WINDOW_S
    metadata: dict = field(default_factory=dict)

    def utterance_duration_s(self, n_frames: int) -> float:
        """Time covered by ``n_frames`` analysis windows."""
        return (n_frames - 1) * self.frame_stride_s + self.frame_window_s


@dataclass(frozen=True)
class Problem:
    """One violated invariant, tied to an utterance where applicable."""

    utterance_id: str | None
    message: str

    def __str__(self) -> str:
        scope = self.utterance_id if self.utterance_id is not None else "<corpus>"
        return f"{scope}: {self.message}"


def save_alignments(alignments: list[WordAlignment], path: str | Path) -> None:
    lines = [json.dumps(asdict(a), sort_keys=True) for a in alignments]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_alignments(path: str | Path) -> list[WordAlignment]:
    """Parse an alignment file. Field-level violations raise FormatError."""
    records: list[WordAlignment] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from exc
        try:
            rec = WordAlignment(
                word=str(obj["word"]),
                start_s=float(obj["start_s"]),
                end_s=float(obj["end_s"]),
                token_index=int(obj["token_index"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad alignment record: {exc}") from exc
        if rec.start_s < 0:
            raise FormatError(f"{path}:{lineno}: start_s < 0")
        if rec.end_s <= rec.start_s:
            raise FormatError(f"{path}:{lineno}: end_s <= start_s")
        records.append(rec)
    return records


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **asdict(manifest)}
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_manifest(path: str | Path) -> Manifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: manifest must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported manifest schema version {version!r}")
    try:
        utterances = [UtteranceEntry(**u) for u in doc["utterances"]]
        return Manifest(
            corpus_name=doc["corpus_name"],
            label_set=list(doc["label_set"]),
            utterances=utterances,
            n_layers=int(doc["n_layers"]),
            frame_stride_s=float(doc["frame_stride_s"]),
            frame_window_s=float(doc["frame_window_s"]),
            metadata=dict(doc.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad manifest structure: {exc}") from exc


def resolve_path(root: str | Path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else Path(root) / p


def _check_alignments(
    manifest: Manifest, utt: UtteranceEntry, alignments: list[WordAlignment]
) -> list[Problem]:
    problems = []
    duration = manifest.utterance_duration_s(utt.n_frames)
    prev_end = None
    prev_start = None
    for rec in alignments:
        if rec.word != rec.word.lower():
            problems.append(Problem(utt.id, f"alignment word {rec.word!r} is not lowercase"))
        if prev_start is not None and rec.start_s < prev_start:
            problems.append(Problem(utt.id, "alignments are not sorted by start_s"))
        if prev_end is not None and rec.start_s < prev_end:
            problems.append(
                Problem(utt.id, f"alignment {rec.word!r} overlaps the previous word")
            )
        if rec.end_s > duration + 1e-9:
            problems.append(
                Problem(
                    utt.id,
                    f"alignment {rec.word!r} ends at {rec.end_s}s, past the "
                    f"{duration:.3f}s covered by {utt.n_frames} frames",
                )
            )
        prev_start, prev_end = rec.start_s, rec.end_s
    return problems


def validate_manifest(manifest: Manifest, root: str | Path) -> list[Problem]:
    """Check every manifest invariant; return one Problem per violation.

    Deterministic and independent of utterance order: the result is sorted
    and never raises for data-level issues.
    """
    problems: set[Problem] = set()

    seen: set[str] = set()
    for utt in manifest.utterances:
        if utt.id in seen:
            problems.add(Problem(utt.id, "duplicate utterance id"))
        seen.add(utt.id)

    if len(set(manifest.label_set)) != len(manifest.label_set):
        problems.add(Problem(None, "label_set contains duplicates"))

    for utt in manifest.utterances:
        if utt.label not in manifest.label_set:
            problems.add(Problem(utt.id, f"label {utt.label!r} not in label_set"))
        if utt.n_frames < 1:
            problems.add(Problem(utt.id, f"n_frames must be >= 1, got {utt.n_frames}"))

        audio_path = resolve_path(root, utt.audio_tensor_path)
        try:
            audio = read_tensor(audio_path)
        except (OSError, FormatError) as exc:
            problems.add(Problem(utt.id, f"audio tensor unreadable: {exc}"))
            audio = None
        if audio is not None:
            if audio.ndim != 3:
                problems.add(Problem(utt.id, f"audio tensor rank {audio.ndim}, expected 3"))
            else:
                if audio.shape[0] != manifest.n_layers:
                    problems.add(
                        Problem(
                            utt.id,
                            f"audio tensor has {audio.shape[0]} layers, "
                            f"manifest says {manifest.n_layers}",
                        )
                    )
                if audio.shape[1] != utt.n_frames:
                    problems.add(
                        Problem(
                            utt.id,
                            f"audio tensor has {audio.shape[1]} frames, "
                            f"manifest says {utt.n_frames}",
                        )
                    )

        lex_path = resolve_path(root, utt.lexical_tensor_path)
        try:
            lex = read_tensor(lex_path)
        except (OSError, FormatError) as exc:
            problems.add(Problem(utt.id, f"lexical tensor unreadable: {exc}"))
            lex = None
        if lex is not None:
            if lex.ndim != 2:
                problems.add(Problem(utt.id, f"lexical tensor rank {lex.ndim}, expected 2"))
            else:
                n_tokens = len(utt.transcript.split())
                if lex.shape[0] != n_tokens:
                    problems.add(
                        Problem(
                            utt.id,
                            f"lexical tensor has {lex.shape[0]} rows, transcript "
                            f"has {n_tokens} tokens",
                        )
                    )

        if utt.mel_tensor_path is not None:
            mel_path = resolve_path(root, utt.mel_tensor_path)
            try:
                mel = read_tensor(mel_path)
            except (OSError, FormatError) as exc:
                problems.add(Problem(utt.id, f"mel tensor unreadable: {exc}"))
                mel = None
            if mel is not None:
                if mel.ndim != 3 or mel.shape[0] != 1:
                    problems.add(Problem(utt.id, "mel tensor must be [1, n_frames, n_mels]"))
                elif mel.shape[1] != utt.n_frames:
                    problems.add(
                        Problem(
                            utt.id,
                            f"mel tensor has {mel.shape[1]} frames, "
                            f"manifest says {utt.n_frames}",
                        )
                    )

        ali_path = resolve_path(root, utt.alignment_path)
        try:
            alignments = load_alignments(ali_path)
        except (OSError, FormatError) as exc:
            problems.add(Problem(utt.id, f"alignment file unreadable: {exc}"))
            continue
        problems.update(_check_alignments(manifest, utt, alignments))

    return sorted(problems, key=lambda p: (p.utterance_id or "", p.message))
