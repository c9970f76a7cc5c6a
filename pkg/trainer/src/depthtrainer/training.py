"""Adversarial training of the augmented -> clean generator.

Each iteration alternates a discriminator update on (augmented, clean) vs
(augmented, generated) pairs with a generator update on the combined loss:
adversarial (weight 1), whole-image L1 (100), foreground-masked L1 (200), and
an optional task-feature distance (10) against a frozen task network.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import PairStream, load_pair_records
from .models import PatchDiscriminator, UNetGenerator

_EPS = 1e-7


@dataclass
class TrainConfig:
    manifest: str
    out_dir: str
    iterations: int = 2000
    weights: tuple[float, float, float, float] = (1.0, 100.0, 200.0, 10.0)
    learning_rate: float = 0.0002
    beta1: float = 0.5
    patch_size: int = 64
    checkpoint_every: int = 500
    seed: int = 0
    task_net: str | None = None  # TorchScript module used for the task loss

    def __post_init__(self):
        self.weights = tuple(float(w) for w in self.weights)
        if len(self.weights) != 4 or min(self.weights) < 0:
            raise ValueError("weights must be 4 non-negative numbers")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")


def l1(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    return (a - b).abs().mean()


def foreground_l1(a: torch.Tensor, b: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    total = ((a - b).abs() * mask).sum()
    return total / mask.sum().clamp(min=1.0)


def _bce(pred: torch.Tensor, target_real: bool) -> torch.Tensor:
    pred = pred.clamp(_EPS, 1.0 - _EPS)
    return -(pred.log().mean() if target_real else (1.0 - pred).log().mean())


class Trainer:
    def __init__(self, cfg: TrainConfig, device: str | None = None):
        self.cfg = cfg
        self.device = torch.device(
            device or ("cuda" if torch.cuda.is_available() else "cpu"))
        torch.manual_seed(cfg.seed)
        self.generator = UNetGenerator(cfg.patch_size).to(self.device)
        self.discriminator = PatchDiscriminator().to(self.device)
        self.opt_g = torch.optim.Adam(self.generator.parameters(),
                                      lr=cfg.learning_rate, betas=(cfg.beta1, 0.999))
        self.opt_d = torch.optim.Adam(self.discriminator.parameters(),
                                      lr=cfg.learning_rate, betas=(cfg.beta1, 0.999))
        self.task_net = None
        if cfg.task_net:
            self.task_net = torch.jit.load(cfg.task_net, map_location=self.device)
            self.task_net.eval()
            for p in self.task_net.parameters():
                p.requires_grad_(False)
        self.iteration = 0

    def train_step(self, pair: dict[str, torch.Tensor]) -> dict[str, float]:
        """One discriminator update then one generator update on a single pair."""
        w_d, w_g, w_f, w_t = self.cfg.weights
        augmented = pair["augmented"].unsqueeze(0).to(self.device)
        clean = pair["clean"].unsqueeze(0).to(self.device)
        mask = pair["mask"].unsqueeze(0).to(self.device)

        self.generator.train()
        self.discriminator.train()

        fake = self.generator(augmented)

        # (1) discriminator on (augmented, clean) vs (augmented, fake)
        self.opt_d.zero_grad(set_to_none=True)
        d_real = self.discriminator(augmented, clean)
        d_fake = self.discriminator(augmented, fake.detach())
        loss_d = _bce(d_real, True) + _bce(d_fake, False)
        loss_d.backward()
        self.opt_d.step()

        # (2) generator on the combined objective (non-saturating adversarial)
        self.opt_g.zero_grad(set_to_none=True)
        loss_adv = _bce(self.discriminator(augmented, fake), True)
        loss_l1 = l1(clean, fake)
        loss_fg = foreground_l1(clean, fake, mask)
        loss_task = torch.zeros((), device=self.device)
        if self.task_net is not None:
            feat_ref = self.task_net(clean)
            feat_gen = self.task_net(fake)
            loss_task = (feat_ref - feat_gen).flatten(1).norm(dim=1).mean()
        loss_g = w_d * loss_adv + w_g * loss_l1 + w_f * loss_fg + w_t * loss_task
        loss_g.backward()
        self.opt_g.step()

        self.iteration += 1
        record = {
            "iteration": self.iteration,
            "loss_d": loss_d.item(),
            "loss_g_adv": loss_adv.item(),
            "loss_l1": loss_l1.item(),
            "loss_fg": loss_fg.item(),
            "loss_task": loss_task.item(),
            "loss_g_total": loss_g.item(),
        }
        if not all(math.isfinite(v) for v in record.values()):
            path = self.save_checkpoint(Path(self.cfg.out_dir) / "diagnostic.pt")
            raise RuntimeError(
                f"non-finite loss at iteration {self.iteration}: {record} "
                f"(diagnostic checkpoint at {path})")
        return record

    def save_checkpoint(self, path: str | Path) -> Path:
        """Atomic write: serialize to a sibling temp file, then rename."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        state = {
            "iteration": self.iteration,
            "patch_size": self.cfg.patch_size,
            "generator": self.generator.state_dict(),
            "discriminator": self.discriminator.state_dict(),
            "opt_g": self.opt_g.state_dict(),
            "opt_d": self.opt_d.state_dict(),
        }
        tmp = path.with_suffix(path.suffix + ".tmp")
        torch.save(state, tmp)
        os.replace(tmp, path)
        return path

    def load_checkpoint(self, path: str | Path) -> None:
        state = torch.load(path, map_location=self.device, weights_only=True)
        self.generator.load_state_dict(state["generator"])
        self.discriminator.load_state_dict(state["discriminator"])
        self.opt_g.load_state_dict(state["opt_g"])
        self.opt_d.load_state_dict(state["opt_d"])
        self.iteration = state["iteration"]

    def run(self, log_every: int = 100) -> Path:
        """Full training loop: stream pairs, log a CSV row per iteration,
        checkpoint on cadence, and write the final checkpoint."""
        out = Path(self.cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        records = load_pair_records(self.cfg.manifest)
        stream = PairStream(records, seed=self.cfg.seed)
        csv_path = out / "losses.csv"
        fields = ["iteration", "loss_d", "loss_g_adv", "loss_l1", "loss_fg",
                  "loss_task", "loss_g_total"]
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for _ in range(self.cfg.iterations):
                row = self.train_step(next(stream))
                writer.writerow(row)
                if row["iteration"] % log_every == 0:
                    print(f"iter {row['iteration']}: D={row['loss_d']:.3f} "
                          f"L1={row['loss_l1']:.4f} fg={row['loss_fg']:.4f}")
                if row["iteration"] % self.cfg.checkpoint_every == 0:
                    self.save_checkpoint(out / f"checkpoint_{row['iteration']:07d}.pt")
        return self.save_checkpoint(out / "checkpoint_final.pt")
