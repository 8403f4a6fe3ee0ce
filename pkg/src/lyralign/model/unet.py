"""UNet alignment predictor with a GRU bottleneck over the time axis."""

import torch
from torch import nn
from torch.nn import functional as F

from lyralign.errors import InputTooShort


class DoubleConv(nn.Module):
    """(conv3x3 -> ReLU) * 2."""

    def __init__(self, in_ch, out_ch):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1)
        self.conv2 = nn.Conv2d(out_ch, out_ch, kernel_size=3, padding=1)

    def forward(self, x):
        return F.relu(self.conv2(F.relu(self.conv1(x))))


class TimeGRU(nn.Module):
    """Bidirectional GRU along T, weights shared across the L rows."""

    def __init__(self, channels):
        super().__init__()
        if channels % 2:
            raise ValueError("bottleneck channels must be even")
        self.gru = nn.GRU(channels, channels // 2, batch_first=True, bidirectional=True)

    def forward(self, x):
        b, c, l, t = x.shape
        h = x.permute(0, 2, 3, 1).reshape(b * l, t, c)
        out, _ = self.gru(h)
        return out.reshape(b, l, t, c).permute(0, 3, 1, 2)


class AlignmentUNet(nn.Module):
    """Maps the fusion tensor [B, c_in, L, T] to logits [B, L, T].

    The first conv emits `channels[0]` (32) maps; each 2x2 pooling doubles
    the channel count per `channels`. Skip connections join the down and up
    paths, and the time-axis GRU sits at the bottleneck. L and T are padded
    up to a multiple of 2^(depth-1) and cropped back, so any L, T >= 1 is
    accepted.
    """

    def __init__(self, c_in, channels=(32, 64, 128, 256)):
        super().__init__()
        self.channels = tuple(channels)
        self.pool_multiple = 2 ** (len(self.channels) - 1)
        self.inc = DoubleConv(c_in, self.channels[0])
        self.down = nn.ModuleList(
            DoubleConv(a, b) for a, b in zip(self.channels, self.channels[1:])
        )
        self.bottleneck_gru = TimeGRU(self.channels[-1])
        self.up = nn.ModuleList()
        self.up_conv = nn.ModuleList()
        for a, b in zip(self.channels[::-1], self.channels[::-1][1:]):
            self.up.append(nn.ConvTranspose2d(a, b, kernel_size=2, stride=2))
            self.up_conv.append(DoubleConv(2 * b, b))
        self.head = nn.Conv2d(self.channels[0], 1, kernel_size=1)

    def _pad(self, x):
        _, _, l, t = x.shape
        if l < 1 or t < 1:
            raise InputTooShort(f"predictor needs L,T >= 1, got L={l}, T={t}")
        m = self.pool_multiple
        pad_l = (m - l % m) % m
        pad_t = (m - t % m) % m
        if pad_l or pad_t:
            # reflect needs pad < size; replicate covers the tiny-input case
            mode = "reflect" if (pad_l < l and pad_t < t) else "replicate"
            x = F.pad(x, (0, pad_t, 0, pad_l), mode=mode)
        return x

    def forward(self, x):
        l, t = x.shape[2], x.shape[3]
        h = self._pad(x)
        h = self.inc(h)
        skips = [h]
        for down in self.down:
            h = down(F.max_pool2d(h, 2))
            skips.append(h)
        h = self.bottleneck_gru(h)
        for up, conv, skip in zip(self.up, self.up_conv, skips[-2::-1]):
            h = up(h)
            h = conv(torch.cat([skip, h], dim=1))
        logits = self.head(h).squeeze(1)
        return logits[:, :l, :t]
