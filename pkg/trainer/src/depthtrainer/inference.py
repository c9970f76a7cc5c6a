"""Run a trained generator over stored tensors: reads DPZ1 inputs, writes
processed DPZ1 outputs under the same relative names."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from . import dpz
from .models import UNetGenerator


def load_generator(checkpoint: str | Path, device: str = "cpu") -> UNetGenerator:
    state = torch.load(checkpoint, map_location=device, weights_only=True)
    gen = UNetGenerator(int(state.get("patch_size", 64))).to(device)
    gen.load_state_dict(state["generator"])
    gen.eval()  # dropout off: inference is deterministic
    return gen


def process_array(gen: UNetGenerator, arr: np.ndarray,
                  device: str = "cpu") -> np.ndarray:
    if arr.ndim != 2:
        raise ValueError("expected a single-channel (H, W) tensor")
    with torch.no_grad():
        x = torch.from_numpy(np.ascontiguousarray(arr, np.float32))
        out = gen(x.unsqueeze(0).unsqueeze(0).to(device))
    return out.squeeze(0).squeeze(0).cpu().numpy().astype(np.float32)


def _input_files(source: Path) -> list[Path]:
    if source.is_dir():
        files = sorted(source.glob("*.dpz"))
    elif source.suffix == ".json":
        doc = json.loads(source.read_text())
        files = [source.parent / rec["files"]["augmented"]
                 for rec in doc["records"]
                 if not rec.get("error") and "augmented" in rec.get("files", {})]
    else:
        files = [source]
    if not files:
        raise ValueError(f"no input tensors found at {source}")
    return files


def run_inference(checkpoint: str | Path, source: str | Path,
                  out_dir: str | Path, device: str = "cpu") -> list[Path]:
    """Process every input tensor; returns the written paths."""
    gen = load_generator(checkpoint, device)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in _input_files(Path(source)):
        processed = process_array(gen, dpz.read_file(path), device)
        dest = out_dir / path.name
        dpz.write_file(dest, processed)
        written.append(dest)
    return written
