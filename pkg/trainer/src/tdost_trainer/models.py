"""Sequence classifiers over windows of trigger features.

Windows vary in length, so batches are zero-padded to the batch maximum
and every model consumes the true lengths. Padded timesteps must never
reach a logit: recurrent layers see packed sequences only, and the conv
front-end re-zeroes padded positions after every layer (a conv bias would
otherwise smear into them).
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence

HIDDEN_UNITS = 64
CONV_CHANNELS = 128
CONV_LAYERS = 3
TOKEN_EMBED_DIM = 64

PAD_ID = 0
UNK_ID = 1


def pad_feature_batch(features: list[np.ndarray]) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack (len_i, dim) float arrays into (batch, max_len, dim) plus lengths."""
    lengths = torch.tensor([f.shape[0] for f in features], dtype=torch.long)
    batch = torch.zeros(
        len(features), int(lengths.max()), features[0].shape[1], dtype=torch.float32
    )
    for i, f in enumerate(features):
        batch[i, : f.shape[0]] = torch.from_numpy(np.ascontiguousarray(f))
    return batch, lengths


def pad_token_batch(token_ids: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    lengths = torch.tensor([len(seq) for seq in token_ids], dtype=torch.long)
    batch = torch.full(
        (len(token_ids), int(lengths.max())), PAD_ID, dtype=torch.long
    )
    for i, seq in enumerate(token_ids):
        batch[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
    return batch, lengths


def build_vocab(token_sequences: list[tuple[str, ...]]) -> dict[str, int]:
    """Event-token vocabulary from training windows; 0 pads, 1 is unknown."""
    vocab: dict[str, int] = {}
    for seq in token_sequences:
        for token in seq:
            if token not in vocab:
                vocab[token] = len(vocab) + 2
    return vocab


def encode_tokens(seq: tuple[str, ...], vocab: dict[str, int]) -> list[int]:
    return [vocab.get(token, UNK_ID) for token in seq]


class _BiLstmHead(nn.Module):
    """Shared trunk: packed Bi-LSTM, final states of both directions, linear."""

    def __init__(self, input_dim: int, n_classes: int, hidden: int = HIDDEN_UNITS):
        super().__init__()
        self.lstm = nn.LSTM(
            input_dim, hidden, batch_first=True, bidirectional=True
        )
        self.head = nn.Linear(2 * hidden, n_classes)

    def forward(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        packed = pack_padded_sequence(
            x, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        _, (h_n, _) = self.lstm(packed)
        # h_n is (2, batch, hidden): forward direction then backward.
        final = torch.cat((h_n[0], h_n[1]), dim=1)
        return self.head(final)


class BiLstmClassifier(nn.Module):
    def __init__(self, input_dim: int, n_classes: int, hidden: int = HIDDEN_UNITS):
        super().__init__()
        self.trunk = _BiLstmHead(input_dim, n_classes, hidden)

    def forward(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        return self.trunk(x, lengths)


class ConvBiLstmClassifier(nn.Module):
    """Three 1-d convolutions feeding the recurrent trunk."""

    def __init__(self, input_dim: int, n_classes: int, hidden: int = HIDDEN_UNITS,
                 channels: int = CONV_CHANNELS):
        super().__init__()
        convs = []
        width = input_dim
        for _ in range(CONV_LAYERS):
            convs.append(nn.Conv1d(width, channels, kernel_size=3, padding=1))
            width = channels
        self.convs = nn.ModuleList(convs)
        self.trunk = _BiLstmHead(channels, n_classes, hidden)

    def forward(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        mask = (
            torch.arange(x.shape[1], device=x.device)[None, :] < lengths[:, None]
        ).unsqueeze(1)
        h = x.transpose(1, 2)
        for conv in self.convs:
            h = torch.relu(conv(h)) * mask
        return self.trunk(h.transpose(1, 2), lengths)


class BaselineIdsClassifier(nn.Module):
    """Raw event tokens through an embedding layer, then the same trunk.

    Tokens unseen at training time collapse to UNK, which is exactly what
    happens when this model meets another home's sensor ids.
    """

    def __init__(self, vocab_size: int, n_classes: int, hidden: int = HIDDEN_UNITS,
                 embed_dim: int = TOKEN_EMBED_DIM):
        super().__init__()
        self.embed = nn.Embedding(vocab_size + 2, embed_dim, padding_idx=PAD_ID)
        self.trunk = _BiLstmHead(embed_dim, n_classes, hidden)

    def forward(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        return self.trunk(self.embed(x), lengths)
