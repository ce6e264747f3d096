"""Parser for forced-aligner TextGrid output (Praat long format).

Only interval tiers are read. The word records come from the tier named
"words" (the aligner's convention), falling back to the first interval
tier. Silence and noise markers are dropped; surviving words are
lowercased and indexed in order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

SILENCE_MARKS = {"", "sil", "sp", "spn", "<eps>", "<unk>", "sil.", "noise", "--"}

_ITEM_RE = re.compile(r"^\s*item\s*\[\d+\]\s*:")
_INTERVAL_RE = re.compile(r"^\s*intervals\s*\[(\d+)\]\s*:")
_FIELD_RE = re.compile(r'^\s*(\w+)\s*=\s*(?:"(.*)"|([-+0-9.eE]+))\s*$')


class TextGridError(ValueError):
    """Malformed aligner file; message carries the line number."""


@dataclass(frozen=True)
class ParsedWord:
    word: str
    start_s: float
    end_s: float
    token_index: int
    line: int


@dataclass
class _Tier:
    name: str
    cls: str
    intervals: list[tuple[float, float, str, int]]


def _parse_tiers(path: str | Path) -> list[_Tier]:
    tiers: list[_Tier] = []
    current: _Tier | None = None
    interval: dict | None = None
    lines = Path(path).read_text(encoding="utf-8").splitlines()

    def flush_interval():
        nonlocal interval
        if interval is None or current is None:
            return
        missing = {"xmin", "xmax", "text"} - interval.keys()
        if missing:
            raise TextGridError(
                f"{path}:{interval['line']}: interval missing {sorted(missing)}"
            )
        current.intervals.append(
            (interval["xmin"], interval["xmax"], interval["text"], interval["line"])
        )
        interval = None

    for lineno, line in enumerate(lines, start=1):
        if _ITEM_RE.match(line):
            flush_interval()
            current = _Tier(name="", cls="", intervals=[])
            tiers.append(current)
            continue
        if _INTERVAL_RE.match(line):
            flush_interval()
            interval = {"line": lineno}
            continue
        m = _FIELD_RE.match(line)
        if not m:
            continue
        key, text_value, num_value = m.group(1), m.group(2), m.group(3)
        if interval is not None and key in ("xmin", "xmax", "text"):
            if key == "text":
                interval[key] = text_value if text_value is not None else ""
            else:
                try:
                    interval[key] = float(num_value if num_value is not None else text_value)
                except (TypeError, ValueError):
                    raise TextGridError(f"{path}:{lineno}: bad {key} value") from None
        elif current is not None and key == "name":
            current.name = text_value or ""
        elif current is not None and key == "class":
            current.cls = text_value or ""
    flush_interval()
    return [t for t in tiers if t.cls.lower() == "intervaltier"]


def parse_alignments(path: str | Path, tier_name: str = "words") -> list[ParsedWord]:
    """Word records from an aligner TextGrid, silence dropped.

    Raises :class:`TextGridError` (with a line number) on malformed
    structure, unsorted intervals, or overlapping intervals.
    """
    tiers = _parse_tiers(path)
    if not tiers:
        raise TextGridError(f"{path}:1: no interval tiers found")
    chosen = next((t for t in tiers if t.name.lower() == tier_name.lower()), tiers[0])

    words: list[ParsedWord] = []
    prev_end: float | None = None
    for xmin, xmax, text, line in chosen.intervals:
        if xmax <= xmin:
            raise TextGridError(f"{path}:{line}: interval has xmax <= xmin")
        if prev_end is not None and xmin < prev_end - 1e-9:
            raise TextGridError(f"{path}:{line}: intervals overlap or are unsorted")
        prev_end = xmax
        label = text.strip().lower()
        if label in SILENCE_MARKS:
            continue
        words.append(
            ParsedWord(
                word=label,
                start_s=xmin,
                end_s=xmax,
                token_index=len(words),
                line=line,
            )
        )
    return words
