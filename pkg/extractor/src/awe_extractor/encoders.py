"""Pretrained-model wrappers: layered speech states and word embeddings.

Models load from a hub id or a local directory. Inference runs on CPU in
eval mode with gradients off, so repeated extraction of the same audio is
bit-identical.
"""

from __future__ import annotations

import logging

import numpy as np
import torch
from transformers import AutoFeatureExtractor, AutoModel, AutoTokenizer

log = logging.getLogger(__name__)

DEFAULT_SPEECH_MODEL = "facebook/hubert-base-ls960"
DEFAULT_TEXT_MODEL = "bert-base-uncased"


class SpeechEncoder:
    """Frame-level hidden states of every encoder layer.

    Output stacks the projected convolutional front-end output (layer 0)
    with each transformer layer, so a 12-layer encoder yields 13 layers.
    """

    def __init__(self, model_id: str = DEFAULT_SPEECH_MODEL):
        self.model_id = model_id
        self.model = AutoModel.from_pretrained(model_id).eval()
        try:
            self.feature_extractor = AutoFeatureExtractor.from_pretrained(model_id)
        except (OSError, ValueError):
            self.feature_extractor = None
            log.info("no feature extractor for %s; feeding raw waveforms", model_id)
        self.n_layers = self.model.config.num_hidden_layers + 1

    @torch.no_grad()
    def extract(self, samples_16k: np.ndarray) -> np.ndarray:
        """[n_layers, n_frames, hidden] float32 for one 16 kHz waveform."""
        if self.feature_extractor is not None:
            inputs = self.feature_extractor(
                samples_16k, sampling_rate=16000, return_tensors="pt"
            ).input_values
        else:
            inputs = torch.as_tensor(samples_16k, dtype=torch.float32)[None, :]
        out = self.model(inputs, output_hidden_states=True)
        stacked = torch.stack([h[0] for h in out.hidden_states])
        return stacked.to(torch.float32).cpu().numpy()


class TextEncoder:
    """Per-word contextual vectors with sub-token averaging."""

    def __init__(self, model_id: str = DEFAULT_TEXT_MODEL, layer: int = -1):
        self.model_id = model_id
        self.layer = layer
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id).eval()

    @torch.no_grad()
    def embed_words(self, words: list[str]) -> tuple[np.ndarray, dict]:
        """One vector per word plus the sub-token grouping map.

        Each word is tokenized on its own so the grouping is exact; the
        word vector is the mean of its sub-token vectors from the
        configured hidden layer (last by default). Special tokens are
        excluded from every group.
        """
        if not words:
            raise ValueError("cannot embed an empty word list")
        tokens: list[str] = []
        groups: list[list[int]] = []
        for word in words:
            pieces = self.tokenizer.tokenize(word) or [self.tokenizer.unk_token]
            start = len(tokens)
            tokens.extend(pieces)
            groups.append(list(range(start, start + len(pieces))))

        ids = (
            [self.tokenizer.cls_token_id]
            + self.tokenizer.convert_tokens_to_ids(tokens)
            + [self.tokenizer.sep_token_id]
        )
        input_ids = torch.tensor([ids], dtype=torch.long)
        out = self.model(input_ids, output_hidden_states=True)
        hidden = out.hidden_states[self.layer][0].to(torch.float32).cpu().numpy()
        body = hidden[1 : 1 + len(tokens)]  # strip [CLS]/[SEP]

        matrix = np.stack([body[g].mean(axis=0) for g in groups])
        token_map = {
            "words": list(words),
            "tokens": tokens,
            "token_groups": groups,
            "hidden_layer": self.layer,
        }
        return matrix, token_map
