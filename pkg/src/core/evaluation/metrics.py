"""Full-reference image metrics."""

import numpy as np
import torch
from skimage.metrics import structural_similarity

from src.core.losses.perceptual import PerceptualExtractor
from src.utils.exceptions import ErrorCode, InvalidArgumentError

__all__ = ["PROXY_LPIPS", "mse", "perceptual_distance", "ssim"]

PROXY_LPIPS = "proxy_lpips"
SSIM_SIGMA = 1.5


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"Image shapes differ: {a.shape} vs {b.shape}",
            error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
            argument="gt",
        )
    return a, b


def mse(rec: np.ndarray, gt: np.ndarray) -> float:
    rec, gt = _pair(rec, gt)
    return float(np.mean((rec - gt) ** 2))


def ssim(rec: np.ndarray, gt: np.ndarray, window: int = 11, k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean local SSIM with a ``window``-tap Gaussian window (sigma 1.5) on ``[0, 1]`` images.

    Raises:
        InvalidArgumentError: On a shape mismatch, an even or too small window,
            or an image smaller than the window.
    """
    rec, gt = _pair(rec, gt)
    if window < 3 or window % 2 == 0:
        raise InvalidArgumentError(f"SSIM window must be odd and at least 3, got {window}", argument="window")
    if min(rec.shape) < window:
        raise InvalidArgumentError(
            f"Image {rec.shape} is smaller than the {window}x{window} SSIM window", argument="window"
        )
    return float(
        structural_similarity(
            rec,
            gt,
            data_range=1.0,
            win_size=window,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            # kernel radius (window - 1) / 2
            truncate=(window - 1) / 2 / SSIM_SIGMA,
            use_sample_covariance=False,
            K1=k1,
            K2=k2,
        )
    )


@torch.no_grad()
def perceptual_distance(rec: np.ndarray, gt: np.ndarray, extractor: PerceptualExtractor) -> float:
    """Sum over stages of the RMS distance between channel-normalised features.

    Reported as ``proxy_lpips``; it shares the frozen extractor of the training
    loss and is not comparable to LPIPS values.
    """
    rec, gt = _pair(rec, gt)
    dtype = next(extractor.parameters()).dtype
    feats_a = extractor(torch.from_numpy(rec).to(dtype)[None, None])
    feats_b = extractor(torch.from_numpy(gt).to(dtype)[None, None])
    total = 0.0
    for a, b in zip(feats_a, feats_b, strict=True):
        diff = a - b
        total += float(torch.sqrt((diff * diff).sum(dim=1).mean()))
    return total
