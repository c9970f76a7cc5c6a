import pytest
import torch

from depthtrainer.models import PatchDiscriminator, UNetGenerator


@pytest.fixture(autouse=True)
def _seed():
    torch.manual_seed(0)


class TestGenerator:
    def test_shape_contract(self):
        gen = UNetGenerator(64)
        out = gen(torch.rand(1, 1, 64, 64))
        assert out.shape == (1, 1, 64, 64)

    def test_output_in_unit_range(self):
        gen = UNetGenerator(64)
        out = gen(torch.zeros(1, 1, 64, 64))
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_larger_patch_uses_more_levels(self):
        gen = UNetGenerator(256)
        assert len(gen.encoders) == 8
        out = gen(torch.rand(1, 1, 256, 256))
        assert out.shape == (1, 1, 256, 256)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            UNetGenerator(60)
        with pytest.raises(ValueError):
            UNetGenerator(4)

    def test_eval_mode_deterministic(self):
        gen = UNetGenerator(64)
        gen.eval()
        x = torch.rand(1, 1, 64, 64)
        with torch.no_grad():
            a, b = gen(x), gen(x)
        assert torch.equal(a, b)

    def test_init_std_near_002(self):
        gen = UNetGenerator(64)
        weights = torch.cat([
            m.weight.flatten() for m in gen.modules()
            if isinstance(m, (torch.nn.Conv2d, torch.nn.ConvTranspose2d))])
        assert weights.numel() >= 10 ** 4
        assert 0.01 <= float(weights.std()) <= 0.03
        assert abs(float(weights.mean())) < 0.001


class TestDiscriminator:
    def test_probability_map(self):
        disc = PatchDiscriminator()
        out = disc(torch.rand(1, 1, 64, 64), torch.rand(1, 1, 64, 64))
        assert out.dim() == 4 and out.shape[1] == 1
        assert (out > 0).all() and (out < 1).all()

    def test_pair_conditioning_matters(self):
        disc = PatchDiscriminator()
        cond = torch.rand(1, 1, 64, 64)
        a = disc(cond, torch.zeros(1, 1, 64, 64))
        b = disc(cond, torch.ones(1, 1, 64, 64))
        assert not torch.equal(a, b)


class TestGradients:
    def test_finite_gradients_over_steps(self):
        gen = UNetGenerator(64)
        disc = PatchDiscriminator()
        opt = torch.optim.Adam(list(gen.parameters()) + list(disc.parameters()), lr=2e-4)
        for _ in range(5):
            x = torch.rand(1, 1, 64, 64)
            y = gen(x)
            score = disc(x, y).clamp(1e-7, 1 - 1e-7)
            loss = -(score.log().mean()) + (y - x).abs().mean()
            opt.zero_grad()
            loss.backward()
            for p in gen.parameters():
                assert p.grad is None or torch.isfinite(p.grad).all()
            opt.step()
