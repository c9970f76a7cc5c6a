"""depthtrainer: learns the augmented -> clean mapping for depth patches.

Consumes datasets produced by the depthforge engine through its on-disk
interface (JSON manifest + DPZ1 float32 tensors) and trains a U-Net generator
against a patch discriminator; inference writes processed tensors back in the
same format.
"""

__version__ = "0.1.0"
