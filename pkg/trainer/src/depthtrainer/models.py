"""Network architectures: U-Net generator and patch discriminator.

All convolutions use 4x4 kernels with stride-2 resampling; LeakyReLU slope is
0.2, decoder dropout rate 0.5, weights start from N(0, 0.02). Patches are
single-channel 64x64 images in [0, 1]; the generator ends in a sigmoid so its
output stays in range.
"""

from __future__ import annotations

import torch
import torch.nn as nn

# encoder filter plan for the full-resolution (256 px, 8-level) network; for a
# 64 px patch only the first 6 levels apply (the innermost pairs are dropped,
# keeping the skip pattern intact)
ENCODER_PLAN = (64, 128, 256, 512, 512, 512, 512, 512)
LEAK = 0.2
DROPOUT = 0.5


def init_weights(module: nn.Module) -> None:
    """Zero-mean Gaussian init, std 0.02 (affine norm layers center at 1)."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.normal_(m.weight, 0.0, 0.02)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.BatchNorm2d):
            nn.init.normal_(m.weight, 1.0, 0.02)
            nn.init.zeros_(m.bias)


def _levels_for(size: int) -> int:
    n = 0
    while size > 1:
        if size % 2:
            raise ValueError("patch size must be a power of two")
        size //= 2
        n += 1
    if n < 3:
        raise ValueError("patch size too small for the encoder")
    return min(n, len(ENCODER_PLAN))


class UNetGenerator(nn.Module):
    """Encoder-decoder with skip connections from each encoder block to its
    opposite decoder block. Downsampling convs use batch-norm except the first
    and the innermost block (the 1x1 bottleneck has nothing to normalize at
    batch size 1)."""

    def __init__(self, patch_size: int = 64, in_channels: int = 1,
                 out_channels: int = 1):
        super().__init__()
        n = _levels_for(patch_size)
        plan = ENCODER_PLAN[:n]
        self.encoders = nn.ModuleList()
        prev = in_channels
        for i, k in enumerate(plan):
            layers = [nn.Conv2d(prev, k, 4, stride=2, padding=1)]
            if 0 < i < n - 1:
                layers.append(nn.BatchNorm2d(k))
            layers.append(nn.LeakyReLU(LEAK, inplace=True))
            self.encoders.append(nn.Sequential(*layers))
            prev = k
        self.decoders = nn.ModuleList()
        for i in range(n - 1):
            k = plan[n - 2 - i]  # filters mirror the opposite encoder block
            self.decoders.append(nn.Sequential(
                nn.ConvTranspose2d(prev, k, 4, stride=2, padding=1),
                nn.BatchNorm2d(k),
                nn.LeakyReLU(LEAK, inplace=True),
                nn.Dropout2d(DROPOUT),
            ))
            prev = 2 * k  # channel concat with the same-width skip
        self.final = nn.Sequential(
            nn.ConvTranspose2d(prev, out_channels, 4, stride=2, padding=1),
            nn.Sigmoid(),
        )
        init_weights(self)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for enc in self.encoders:
            x = enc(x)
            skips.append(x)
        skips.pop()  # bottleneck output feeds the decoder directly
        for dec in self.decoders:
            x = dec(x)
            x = torch.cat([x, skips.pop()], dim=1)
        return self.final(x)


class PatchDiscriminator(nn.Module):
    """Convolutional classifier over a channel-concatenated (condition, image)
    pair, emitting a patch map of real-pair probabilities in (0, 1)."""

    def __init__(self, in_channels: int = 2):
        super().__init__()
        layers = []
        prev = in_channels
        for i, k in enumerate((64, 128, 256, 512)):
            layers.append(nn.Conv2d(prev, k, 4, stride=2, padding=1))
            if i > 0:
                layers.append(nn.BatchNorm2d(k))
            layers.append(nn.LeakyReLU(LEAK, inplace=True))
            prev = k
        layers += [nn.Conv2d(prev, 1, 4, stride=1, padding=1), nn.Sigmoid()]
        self.net = nn.Sequential(*layers)
        init_weights(self)

    def forward(self, condition: torch.Tensor, image: torch.Tensor) -> torch.Tensor:
        return self.net(torch.cat([condition, image], dim=1))
