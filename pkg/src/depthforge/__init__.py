"""depthforge: deterministic synthetic depth-patch generation for recognition training.

Renders noiseless 64x64 depth patches of CAD meshes from icosphere viewpoints,
applies a stochastic augmentation pipeline (background noise, foreground
distortion, random occlusions) to build (augmented, clean, mask) training
triples, and ships the loss functions and descriptor-retrieval evaluation
used to measure recognition quality.
"""

__version__ = "0.1.0"
