"""CBHG sequence encoder: 1-D conv bank + highway network + bidirectional GRU."""

import torch
from torch import nn
from torch.nn import functional as F


class Highway(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.transform = nn.Linear(dim, dim)
        self.gate = nn.Linear(dim, dim)
        self.gate.bias.data.fill_(-1.0)

    def forward(self, x):
        gate = torch.sigmoid(self.gate(x))
        return gate * F.relu(self.transform(x)) + (1.0 - gate) * x


class CBHG(nn.Module):
    """One CBHG block over [B, C, S] sequences, C channels preserved.

    Conv bank with kernel sizes 1..K, max-pool (stride 1), two projection
    convs with a residual connection, `highway_layers` highway layers, and
    a bidirectional GRU with C/2 hidden units per direction.
    """

    def __init__(self, dim, bank_k=8, highway_layers=4):
        super().__init__()
        if dim % 2:
            raise ValueError("CBHG dim must be even (bidirectional GRU halves it)")
        self.bank = nn.ModuleList(
            nn.Conv1d(dim, dim, kernel_size=k, padding=k // 2) for k in range(1, bank_k + 1)
        )
        self.proj1 = nn.Conv1d(bank_k * dim, dim, kernel_size=3, padding=1)
        self.proj2 = nn.Conv1d(dim, dim, kernel_size=3, padding=1)
        self.highways = nn.ModuleList(Highway(dim) for _ in range(highway_layers))
        self.gru = nn.GRU(dim, dim // 2, batch_first=True, bidirectional=True)

    def forward(self, x):
        length = x.shape[-1]
        # even kernels pad one column long; crop back to the input length
        banked = torch.cat([F.relu(conv(x))[:, :, :length] for conv in self.bank], dim=1)
        pooled = F.max_pool1d(banked, kernel_size=2, stride=1, padding=1)[:, :, :length]
        projected = self.proj2(F.relu(self.proj1(pooled)))
        residual = projected + x
        h = residual.transpose(1, 2)
        for highway in self.highways:
            h = highway(h)
        out, _ = self.gru(h)
        return out.transpose(1, 2)


class SequenceEncoder(nn.Module):
    """Input projection + stacked CBHG blocks + channel expansion by c_in.

    Output is [B, c_in, c_encoder, S]: the trailing linear layer widens the
    channel axis by a factor of c_in and the result is reshaped so the
    cross-correlation can contract over the c_encoder axis per c_in slice.
    """

    def __init__(self, in_dim, c_encoder, c_in, n_layers=2, bank_k=8, highway_layers=4, embedding=False):
        super().__init__()
        if embedding:
            self.input = nn.Embedding(in_dim, c_encoder)
        else:
            self.input = nn.Linear(in_dim, c_encoder)
        self.embedding = embedding
        self.c_encoder = c_encoder
        self.c_in = c_in
        self.blocks = nn.ModuleList(
            CBHG(c_encoder, bank_k=bank_k, highway_layers=highway_layers) for _ in range(n_layers)
        )
        self.expand = nn.Linear(c_encoder, c_in * c_encoder)

    def forward(self, x):
        """x: [B, S] int ids (embedding) or [B, S, in_dim] floats."""
        h = self.input(x)                      # [B, S, C]
        h = h.transpose(1, 2)                  # [B, C, S]
        for block in self.blocks:
            h = block(h)
        h = h.transpose(1, 2)                  # [B, S, C]
        h = self.expand(h)                     # [B, S, c_in*C]
        b, s, _ = h.shape
        h = h.view(b, s, self.c_in, self.c_encoder)
        return h.permute(0, 2, 3, 1)           # [B, c_in, C, S]
