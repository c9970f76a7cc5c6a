"""Streaming access to engine datasets: manifest parsing and pair loading."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import dpz


@dataclass(frozen=True)
class PairRecord:
    record_id: int
    class_id: int
    clean: Path
    augmented: Path
    mask: Path


def load_pair_records(manifest_path: str | Path) -> list[PairRecord]:
    """Usable (clean, augmented, mask) records from an engine manifest."""
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text())
    root = manifest_path.parent
    records = []
    for rec in doc["records"]:
        files = rec.get("files", {})
        if rec.get("error") or not {"clean", "augmented", "mask"} <= set(files):
            continue
        records.append(PairRecord(
            record_id=int(rec["id"]),
            class_id=int(rec["class_id"]),
            clean=root / files["clean"],
            augmented=root / files["augmented"],
            mask=root / files["mask"],
        ))
    if not records:
        raise ValueError(f"no complete training pairs in {manifest_path}")
    return records


def _to_tensor(arr: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(arr, dtype=np.float32)).unsqueeze(0)


def load_pair(rec: PairRecord) -> dict[str, torch.Tensor]:
    """Load one training triple as (1, H, W) float tensors."""
    return {
        "clean": _to_tensor(dpz.read_file(rec.clean)),
        "augmented": _to_tensor(dpz.read_file(rec.augmented)),
        "mask": _to_tensor(dpz.read_file(rec.mask)),
    }


class PairStream:
    """Iterates training pairs in a deterministic shuffled order, forever."""

    def __init__(self, records: list[PairRecord], seed: int = 0):
        self.records = list(records)
        self._rng = np.random.default_rng(seed)
        self._order: list[int] = []

    def __next__(self) -> dict[str, torch.Tensor]:
        if not self._order:
            self._order = list(self._rng.permutation(len(self.records)))
        return load_pair(self.records[self._order.pop()])
