"""Tests for the perceptual, distillation and temporal losses."""

import math

import numpy as np
import pytest
import torch
from pydantic import ValidationError

from src.core.losses import (
    LossParts,
    LossWeights,
    PerceptualExtractor,
    occlusion_weight,
    perceptual_loss,
    relational_distillation_loss,
    semantic_perceptual_loss,
    similarity_matrix,
    stage0_size,
    temporal_consistency_loss,
    total_loss,
    warp,
)
from src.utils.exceptions import InvalidArgumentError


@pytest.fixture(scope="module")
def extractor() -> PerceptualExtractor:
    return PerceptualExtractor(seed=0)


def _reference_distillation(f_s: np.ndarray, f_t: np.ndarray) -> float:
    def gram(f: np.ndarray) -> np.ndarray:
        v = f.reshape(f.shape[0], -1)
        v = v / np.maximum(np.linalg.norm(v, axis=0, keepdims=True), 1e-12)
        return v.T @ v

    return float(np.abs(gram(f_s) - gram(f_t)).mean())


class TestPerceptual:
    def test_stage0_size_rounds_up(self):
        assert stage0_size(32, 32) == (16, 16)
        assert stage0_size(5, 7) == (3, 4)

    def test_extractor_is_frozen(self, extractor):
        assert not any(p.requires_grad for p in extractor.parameters())
        assert not extractor.train().training
        feats = extractor(torch.rand(1, 1, 32, 32))
        assert [tuple(f.shape[1:]) for f in feats] == [(8, 16, 16), (16, 8, 8), (32, 4, 4)]

    def test_identical_images_have_zero_loss(self, extractor):
        image = torch.rand(2, 1, 32, 32)
        assert perceptual_loss(image, image, extractor).item() == 0.0

    def test_loss_is_positive_for_different_images(self, extractor):
        assert perceptual_loss(torch.rand(1, 1, 32, 32), torch.rand(1, 1, 32, 32), extractor).item() > 0.0

    def test_full_masks_match_unmasked_loss(self, extractor):
        rec, gt = torch.rand(1, 1, 32, 32), torch.rand(1, 1, 32, 32)
        masks = torch.ones(1, 3, 16, 16)
        torch.testing.assert_close(
            semantic_perceptual_loss(rec, gt, masks, extractor), perceptual_loss(rec, gt, extractor)
        )

    def test_empty_masks_drop_the_first_stage(self, extractor):
        rec, gt = torch.rand(1, 1, 32, 32), torch.rand(1, 1, 32, 32)
        feats_rec, feats_gt = extractor(rec), extractor(gt)
        expected = sum(((a - b) ** 2).sum(dim=1).mean() for a, b in zip(feats_rec[1:], feats_gt[1:], strict=True))
        masked = semantic_perceptual_loss(rec, gt, torch.zeros(3, 16, 16), extractor)
        torch.testing.assert_close(masked, expected)

    def test_no_masks_falls_back(self, extractor):
        rec, gt = torch.rand(32, 32), torch.rand(32, 32)
        torch.testing.assert_close(semantic_perceptual_loss(rec, gt, None, extractor), perceptual_loss(rec, gt, extractor))

    def test_mask_size_must_match_first_stage(self, extractor):
        with pytest.raises(InvalidArgumentError):
            semantic_perceptual_loss(torch.rand(1, 1, 32, 32), torch.rand(1, 1, 32, 32), torch.ones(1, 2, 8, 8), extractor)

    def test_image_shapes_must_match(self, extractor):
        with pytest.raises(InvalidArgumentError):
            perceptual_loss(torch.rand(1, 1, 32, 32), torch.rand(1, 1, 16, 16), extractor)

    def test_explicit_weights(self):
        weight = torch.zeros(1, 1, 3, 3)
        weight[0, 0, 1, 1] = 1.0
        extractor = PerceptualExtractor.from_weights([weight])
        image = torch.rand(1, 1, 4, 4)
        torch.testing.assert_close(extractor(image)[0], image[:, :, ::2, ::2])

    def test_two_stage_hand_computation(self):
        """Masked squared stage-0 differences averaged over 2x2, plus the unmasked 1x1 stage."""
        centre = torch.zeros(1, 1, 3, 3)
        centre[0, 0, 1, 1] = 1.0
        extractor = PerceptualExtractor.from_weights([centre, centre.clone()])
        rec, gt = torch.rand(1, 1, 4, 4), torch.rand(1, 1, 4, 4)
        rec[0, 0, ::2, ::2] = torch.tensor([[0.5, 0.2], [0.1, 0.9]])
        gt[0, 0, ::2, ::2] = torch.tensor([[0.1, 0.2], [0.4, 0.3]])
        masks = torch.tensor([[[1.0, 0.0], [0.0, 1.0]]])
        # stage 0: (0.4^2 + 0.6^2) / 4 = 0.13; stage 1 keeps the top-left pixel: 0.4^2 = 0.16
        assert semantic_perceptual_loss(rec, gt, masks, extractor).item() == pytest.approx(0.29)

    def test_full_mask_bounds_every_sub_mask(self, extractor):
        generator = torch.Generator().manual_seed(0)
        rec, gt = torch.rand(1, 1, 32, 32, generator=generator), torch.rand(1, 1, 32, 32, generator=generator)
        full = semantic_perceptual_loss(rec, gt, torch.ones(1, 1, 16, 16), extractor)
        for _ in range(20):
            sub = (torch.rand(1, 2, 16, 16, generator=generator) > 0.7).float()
            assert semantic_perceptual_loss(rec, gt, sub, extractor) <= full

    def test_semantic_loss_gradcheck(self):
        extractor = PerceptualExtractor(widths=(4, 4), seed=1, normalize=False).double()
        gt = torch.rand(1, 1, 8, 8, dtype=torch.float64)
        masks = (torch.rand(1, 2, 4, 4) > 0.5).double()
        rec = torch.rand(1, 1, 8, 8, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(lambda x: semantic_perceptual_loss(x, gt, masks, extractor), (rec,))


class TestDistillation:
    def test_identical_features_have_zero_loss(self):
        f = torch.randn(2, 8, 4, 4)
        assert relational_distillation_loss(f, f.clone()).item() == pytest.approx(0.0, abs=1e-7)

    def test_similarity_matrix_has_unit_diagonal(self):
        s = similarity_matrix(torch.randn(1, 4, 3, 3, dtype=torch.float64))
        assert s.shape == (1, 9, 9)
        torch.testing.assert_close(torch.diagonal(s[0]), torch.ones(9, dtype=torch.float64))

    def test_matches_reference_implementation(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            c, h, w = rng.integers(1, 6, size=3)
            f_s = rng.standard_normal((c, h, w))
            f_t = rng.standard_normal((c, h, w))
            loss = relational_distillation_loss(torch.from_numpy(f_s), torch.from_numpy(f_t)).item()
            assert abs(loss - _reference_distillation(f_s, f_t)) <= 1e-9

    def test_invariant_to_per_position_scaling(self):
        f_s = torch.randn(1, 4, 3, 3, dtype=torch.float64)
        f_t = torch.randn(1, 4, 3, 3, dtype=torch.float64)
        scale = torch.rand(1, 1, 3, 3, dtype=torch.float64) + 0.5
        torch.testing.assert_close(
            relational_distillation_loss(f_s, f_t), relational_distillation_loss(f_s * scale, f_t)
        )

    def test_gradcheck(self):
        f_s = torch.randn(1, 3, 2, 3, dtype=torch.float64, requires_grad=True)
        f_t = torch.randn(1, 3, 2, 3, dtype=torch.float64)
        assert torch.autograd.gradcheck(lambda x: relational_distillation_loss(x, f_t), (f_s,))

    def test_shared_spatial_permutation_leaves_loss_unchanged(self):
        f_s = torch.randn(1, 4, 3, 3, dtype=torch.float64)
        f_t = torch.randn(1, 4, 3, 3, dtype=torch.float64)
        perm = torch.randperm(9, generator=torch.Generator().manual_seed(0))

        def shuffle(f: torch.Tensor) -> torch.Tensor:
            return f.flatten(2)[..., perm].reshape(f.shape)

        torch.testing.assert_close(
            relational_distillation_loss(shuffle(f_s), shuffle(f_t)), relational_distillation_loss(f_s, f_t)
        )
        assert relational_distillation_loss(shuffle(f_s), f_s).item() > 0.0

    def test_teacher_receives_no_gradient(self):
        f_s = torch.randn(1, 4, 3, 3, requires_grad=True)
        f_t = torch.randn(1, 4, 3, 3, requires_grad=True)
        relational_distillation_loss(f_s, f_t).backward()
        assert f_t.grad is None
        assert f_s.grad is not None and f_s.grad.abs().sum() > 0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            relational_distillation_loss(torch.randn(4, 2, 2), torch.randn(4, 2, 3))


class TestTemporal:
    def test_zero_flow_warp_is_identity(self):
        image = torch.rand(1, 1, 5, 6)
        torch.testing.assert_close(warp(image, torch.zeros(1, 2, 5, 6)), image)

    def test_integer_flow_shifts(self):
        image = torch.arange(12, dtype=torch.float32).reshape(3, 4)
        flow = torch.zeros(2, 3, 4)
        flow[0] = 1.0
        warped = warp(image, flow)
        torch.testing.assert_close(warped[:, :3], image[:, 1:])
        torch.testing.assert_close(warped[:, 3], image[:, 3])

    def test_warp_gradcheck(self):
        generator = torch.Generator().manual_seed(0)
        image = torch.rand(1, 1, 4, 5, dtype=torch.float64, generator=generator, requires_grad=True)
        magnitude = torch.rand(1, 2, 4, 5, dtype=torch.float64, generator=generator) * 0.3 + 0.1
        sign = torch.where(torch.rand(1, 2, 4, 5, generator=generator) > 0.5, 1.0, -1.0).double()
        flow = (magnitude * sign).requires_grad_()
        assert torch.autograd.gradcheck(warp, (image, flow))

    def test_occlusion_weight_spot_value(self):
        """A brightness error of 0.2 with alpha 50 gives exp(-2)."""
        gt_k = torch.full((1, 1, 3, 3), 0.7)
        gt_km1 = torch.full((1, 1, 3, 3), 0.5)
        weight = occlusion_weight(gt_k, gt_km1, torch.zeros(1, 2, 3, 3), alpha=50.0)
        torch.testing.assert_close(weight, torch.full((1, 1, 3, 3), math.exp(-2.0)))
        assert not weight.requires_grad

    def test_consistent_frames_have_unit_weight(self):
        rec_k = torch.full((1, 1, 4, 4), 0.3)
        rec_km1 = torch.full((1, 1, 4, 4), 0.1)
        gt = torch.rand(1, 1, 4, 4)
        loss = temporal_consistency_loss(rec_k, rec_km1, gt, gt, torch.zeros(1, 2, 4, 4))
        assert loss.item() == pytest.approx(0.2)

    def test_static_reconstruction_has_zero_loss(self):
        rec = torch.rand(1, 1, 4, 4)
        loss = temporal_consistency_loss(rec, rec, torch.rand(1, 1, 4, 4), torch.rand(1, 1, 4, 4), torch.zeros(2, 4, 4))
        assert loss.item() == pytest.approx(0.0, abs=1e-6)

    def test_sharp_occlusion_silences_the_loss(self):
        rec_k, rec_km1 = torch.rand(1, 1, 4, 4), torch.rand(1, 1, 4, 4)
        gt_k = torch.full((1, 1, 4, 4), 0.6)
        gt_km1 = torch.full((1, 1, 4, 4), 0.4)
        flow = torch.zeros(1, 2, 4, 4)
        assert temporal_consistency_loss(rec_k, rec_km1, gt_k, gt_km1, flow, alpha=50.0).item() > 0.0
        assert temporal_consistency_loss(rec_k, rec_km1, gt_k, gt_km1, flow, alpha=1e4).item() < 1e-12

    def test_gradcheck(self):
        flow = torch.rand(1, 2, 4, 4, dtype=torch.float64) - 0.5
        gt_k = torch.rand(1, 1, 4, 4, dtype=torch.float64)
        gt_km1 = torch.rand(1, 1, 4, 4, dtype=torch.float64)
        rec_k = torch.rand(1, 1, 4, 4, dtype=torch.float64, requires_grad=True)
        rec_km1 = torch.rand(1, 1, 4, 4, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(
            lambda a, b: temporal_consistency_loss(a, b, gt_k, gt_km1, flow), (rec_k, rec_km1)
        )


class TestObjective:
    def test_defaults(self):
        weights = LossWeights()
        assert weights.lambda_distill == 1.8
        assert weights.alpha == 50.0

    def test_rejects_non_positive_alpha(self):
        with pytest.raises(ValidationError):
            LossWeights(alpha=0.0)

    def test_total_combines_terms(self):
        parts = LossParts(semantic=torch.tensor(1.0), distill=torch.tensor(0.5), temporal=torch.tensor(0.25))
        assert total_loss(parts, LossWeights()).item() == pytest.approx(1.0 + 0.9 + 0.25)

    def test_first_step_has_no_temporal_term(self):
        parts = LossParts(semantic=torch.tensor(1.0), distill=torch.tensor(0.5))
        assert total_loss(parts, LossWeights(lambda_distill=0.0)).item() == 1.0
        assert parts.as_floats() == {"semantic": 1.0, "temporal": 0.0, "distill": 0.5}
