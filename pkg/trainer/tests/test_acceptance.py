"""Trainer acceptance: shape/gradient checks, a single-pair overfit bound, and
a small-scale train/eval experiment on engine-generated data.

The experiment consumes the engine exclusively through its public surfaces:
the `depthforge` CLI and the DPZ1/manifest file formats. Expect roughly half
an hour of CPU time for the full module.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import torch

from depthtrainer import dpz
from depthtrainer.inference import run_inference
from depthtrainer.models import PatchDiscriminator, UNetGenerator
from depthtrainer.training import TrainConfig, Trainer, foreground_l1, l1

REPO_ROOT = Path(__file__).resolve().parents[2]


def ok(name):
    print(f"\nACCEPTANCE PASS: {name}")


def test_network_shapes_and_finite_gradients():
    torch.manual_seed(0)
    gen = UNetGenerator(64)
    disc = PatchDiscriminator()
    x = torch.rand(1, 1, 64, 64)
    y = gen(x)
    assert y.shape == (1, 1, 64, 64)
    assert y.min() >= 0.0 and y.max() <= 1.0
    d = disc(x, y)
    assert (d > 0).all() and (d < 1).all()

    conv_weights = torch.cat([
        m.weight.detach().flatten() for m in gen.modules()
        if isinstance(m, (torch.nn.Conv2d, torch.nn.ConvTranspose2d))])
    assert conv_weights.numel() >= 10 ** 4
    assert 0.01 <= float(conv_weights.std()) <= 0.03

    opt = torch.optim.Adam(list(gen.parameters()) + list(disc.parameters()), lr=2e-4)
    for _ in range(3):
        x = torch.rand(1, 1, 64, 64)
        out = gen(x)
        score = disc(x, out).clamp(1e-7, 1 - 1e-7)
        loss = -(score.log().mean()) + (out - x).abs().mean()
        opt.zero_grad()
        loss.backward()
        grads = [p.grad for p in gen.parameters() if p.grad is not None]
        assert grads and all(torch.isfinite(g).all() for g in grads)
        opt.step()
    ok("generator/discriminator shapes, value ranges, init std, finite gradients")


def test_single_pair_overfit(tmp_path):
    rng = np.random.default_rng(0)
    clean = np.zeros((64, 64), np.float32)
    clean[16:48, 16:48] = 0.6
    augmented = rng.random((64, 64)).astype(np.float32)
    augmented[16:48, 16:48] = 0.6
    pair = {"clean": torch.from_numpy(clean).unsqueeze(0),
            "augmented": torch.from_numpy(augmented).unsqueeze(0),
            "mask": torch.from_numpy((clean != 0).astype(np.float32)).unsqueeze(0)}
    cfg = TrainConfig(manifest="unused", out_dir=str(tmp_path), iterations=500, seed=0)
    trainer = Trainer(cfg, device="cpu")
    reached = None
    for i in range(500):
        rec = trainer.train_step(pair)
        if rec["loss_l1"] < 0.02:
            reached = i + 1
            break
    assert reached is not None, "L1 never dropped below 0.02 within 500 iterations"
    ok(f"single-pair overfit: L_g < 0.02 at iteration {reached}")


@pytest.fixture(scope="module")
def engine_dataset(tmp_path_factory):
    """One synthetic object, 267 views (89 upper vertices x 3 rolls) rendered
    and augmented by the engine CLI; first 200 train, the rest are held out."""
    root = tmp_path_factory.mktemp("engine")
    obj = root / "object.obj"
    subprocess.run(
        [sys.executable, str(REPO_ROOT / "scripts" / "make_demo_object.py"),
         "--out", str(obj), "--subdivisions", "3", "--seed", "11"],
        check=True, capture_output=True)
    config = root / "config.json"
    config.write_text(json.dumps({
        "dataset_name": "sanity",
        "master_seed": 2718,
        "output_dir": str(root / "data"),
        "meshes": [{"path": str(obj), "class_id": 0}],
        "viewsphere": {"subdivisions": 2, "in_plane_degrees": [-15.0, 0.0, 15.0]},
        "workers": 2,
    }))
    subprocess.run([sys.executable, "-m", "depthforge.cli", "pairs",
                    "--config", str(config)], check=True, capture_output=True)
    manifest_path = root / "data" / "manifest.json"
    doc = json.loads(manifest_path.read_text())
    assert len(doc["records"]) == 267

    train_doc = dict(doc, records=doc["records"][:200])
    train_manifest = root / "data" / "manifest_train.json"
    train_manifest.write_text(json.dumps(train_doc))
    held_out = doc["records"][200:]
    return root / "data", train_manifest, held_out


def test_small_scale_reconstruction(engine_dataset, tmp_path):
    data_root, train_manifest, held_out = engine_dataset
    t0 = time.perf_counter()
    cfg = TrainConfig(manifest=str(train_manifest), out_dir=str(tmp_path / "run"),
                      iterations=2000, checkpoint_every=1000, seed=1)
    trainer = Trainer(cfg, device="cpu")
    final = trainer.run(log_every=500)
    train_time = time.perf_counter() - t0
    assert train_time < 3 * 3600

    gen = trainer.generator
    gen.eval()
    identity_l1, model_l1, fg_pairs = [], [], []
    def load(rel):
        return torch.from_numpy(dpz.read_file(data_root / rel))

    with torch.no_grad():
        for rec in held_out:
            clean = load(rec["files"]["clean"])
            augd = load(rec["files"]["augmented"])
            mask = load(rec["files"]["mask"])
            out = gen(augd.unsqueeze(0).unsqueeze(0)).squeeze(0).squeeze(0)
            identity_l1.append(l1(augd, clean).item())
            model_l1.append(l1(out, clean).item())
            fg_pairs.append((foreground_l1(augd, clean, mask).item(),
                             foreground_l1(out, clean, mask).item()))
    mean_identity = float(np.mean(identity_l1))
    mean_model = float(np.mean(model_l1))
    ratio = mean_identity / mean_model
    assert ratio >= 5.0, (
        f"held-out reconstruction L1 {mean_model:.4f} vs identity "
        f"{mean_identity:.4f}: only {ratio:.1f}x better")
    # regression fixture: on the most foreground-tampered held-out view the
    # trained checkpoint must recover a better foreground than the input
    fg_before, fg_after = max(fg_pairs)
    assert fg_after < fg_before, (
        f"foreground not recovered on the worst view: {fg_after:.4f} vs "
        f"{fg_before:.4f}")

    # the same checkpoint drives `infer`, whose outputs match direct eval
    out_dir = tmp_path / "processed"
    written = run_inference(final, data_root / "aug", out_dir)
    assert len(written) == 267
    ok(f"small-scale experiment: 200 train views, 2000 iterations in "
       f"{train_time / 60:.1f} min; held-out L1 {mean_model:.4f} vs identity "
       f"{mean_identity:.4f} ({ratio:.1f}x better)")
