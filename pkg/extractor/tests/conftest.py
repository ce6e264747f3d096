"""Fixtures: tiny local models, WAV writers, TextGrid writers."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer, HubertConfig, HubertModel

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "hello", "world", "again", "bo", "##ku", "da", "##nce", "sun",
]


@pytest.fixture(scope="session")
def tiny_speech_model(tmp_path_factory) -> str:
    torch.manual_seed(7)
    config = HubertConfig(
        hidden_size=24,
        num_hidden_layers=12,
        num_attention_heads=2,
        intermediate_size=32,
        conv_dim=(16,) * 7,
        conv_stride=(5, 2, 2, 2, 2, 2, 2),
        conv_kernel=(10, 3, 3, 3, 3, 2, 2),
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=2,
    )
    path = tmp_path_factory.mktemp("models") / "tiny_speech"
    HubertModel(config).eval().save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def tiny_text_model(tmp_path_factory) -> str:
    torch.manual_seed(11)
    path = tmp_path_factory.mktemp("models") / "tiny_text"
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    BertModel(config).eval().save_pretrained(path)
    tokenizer = BertTokenizer(vocab={t: i for i, t in enumerate(VOCAB)}, do_lower_case=True)
    tokenizer.save_pretrained(path)
    return str(path)


def write_wav(path: Path, duration_s: float, rate: int = 16000, freq: float = 220.0, seed: int = 0) -> int:
    """Sine plus a little noise, 16-bit mono PCM; returns sample count."""
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    rng = np.random.default_rng(seed)
    signal = 0.4 * np.sin(2 * np.pi * freq * t) + 0.02 * rng.standard_normal(n)
    pcm = np.clip(signal, -0.99, 0.99)
    pcm = (pcm * np.iinfo(np.int16).max).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())
    return n


def write_textgrid(
    path: Path,
    duration: float,
    intervals: list[tuple[float, float, str]],
    extra_phone_tier: bool = False,
) -> None:
    """Praat long-format TextGrid with a words tier."""

    def tier_block(name: str, tier_intervals: list[tuple[float, float, str]]) -> str:
        lines = [
            '        class = "IntervalTier"',
            f'        name = "{name}"',
            "        xmin = 0",
            f"        xmax = {duration}",
            f"        intervals: size = {len(tier_intervals)}",
        ]
        for i, (xmin, xmax, text) in enumerate(tier_intervals, start=1):
            lines += [
                f"        intervals [{i}]:",
                f"            xmin = {xmin}",
                f"            xmax = {xmax}",
                f'            text = "{text}"',
            ]
        return "\n".join(lines)

    tiers = [tier_block("words", intervals)]
    if extra_phone_tier:
        phones = [(xmin, xmax, text[:1] if text else "") for xmin, xmax, text in intervals]
        tiers.insert(0, tier_block("phones", phones))

    blocks = []
    for i, block in enumerate(tiers, start=1):
        blocks.append(f"    item [{i}]:\n{block}")
    content = "\n".join(
        [
            'File type = "ooTextFile"',
            'Object class = "TextGrid"',
            "",
            "xmin = 0",
            f"xmax = {duration}",
            "tiers? <exists>",
            f"size = {len(tiers)}",
            "item []:",
            *blocks,
            "",
        ]
    )
    path.write_text(content, encoding="utf-8")


def tile_words(duration: float, words: list[str], lead_sil: float = 0.05) -> list[tuple[float, float, str]]:
    """Silence, then the words split evenly to the end of the audio."""
    intervals = [(0.0, lead_sil, "")]
    start = lead_sil
    step = (duration - lead_sil) / len(words)
    for i, word in enumerate(words):
        end = duration if i == len(words) - 1 else start + step
        intervals.append((round(start, 4), round(end, 4), word))
        start = end
    return intervals
