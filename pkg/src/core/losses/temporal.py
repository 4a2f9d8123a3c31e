"""Flow warping and the occlusion-aware temporal consistency loss."""

import torch
import torch.nn.functional as F

__all__ = ["occlusion_weight", "temporal_consistency_loss", "warp"]


def _batched(x: torch.Tensor) -> torch.Tensor:
    if x.ndim == 2:
        return x[None, None]
    if x.ndim == 3:
        return x[None]
    return x


def warp(image: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
    """Sample ``image`` at ``x + flow(x)`` with bilinear interpolation and border clamping.

    Args:
        image: ``(N, C, H, W)`` (or unbatched) image.
        flow: ``(N, 2, H, W)`` (or ``(2, H, W)``) backward flow as ``(dx, dy)`` pixels.
    """
    ndim = image.ndim
    image = _batched(image)
    flow = _batched(flow).to(image.dtype)
    n, _, h, w = image.shape
    ys, xs = torch.meshgrid(
        torch.arange(h, dtype=image.dtype, device=image.device),
        torch.arange(w, dtype=image.dtype, device=image.device),
        indexing="ij",
    )
    sx = xs + flow[:, 0]
    sy = ys + flow[:, 1]
    grid = torch.stack([2.0 * sx / max(w - 1, 1) - 1.0, 2.0 * sy / max(h - 1, 1) - 1.0], dim=-1)
    out = F.grid_sample(image, grid.expand(n, h, w, 2), mode="bilinear", padding_mode="border", align_corners=True)
    if ndim == 2:
        return out[0, 0]
    return out[0] if ndim == 3 else out


def occlusion_weight(
    gt_k: torch.Tensor, gt_km1: torch.Tensor, flow: torch.Tensor, alpha: float
) -> torch.Tensor:
    """``exp(-alpha * ||gt_k - warp(gt_km1)||^2)`` per pixel, ``(N, 1, H, W)``, no gradient."""
    gt_k, gt_km1 = _batched(gt_k), _batched(gt_km1)
    error = gt_k - warp(gt_km1, flow)
    return torch.exp(-alpha * (error * error).sum(dim=1, keepdim=True)).detach()


def temporal_consistency_loss(
    rec_k: torch.Tensor,
    rec_km1: torch.Tensor,
    gt_k: torch.Tensor,
    gt_km1: torch.Tensor,
    flow: torch.Tensor,
    alpha: float = 50.0,
) -> torch.Tensor:
    """Occlusion-weighted L1 between the reconstruction and its warped predecessor."""
    rec_k, rec_km1 = _batched(rec_k), _batched(rec_km1)
    weight = occlusion_weight(gt_k, gt_km1, flow, alpha).to(rec_k.dtype)
    return (weight * (rec_k - warp(rec_km1, flow)).abs()).mean()
