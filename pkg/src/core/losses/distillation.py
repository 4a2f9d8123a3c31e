"""Relational (spatial similarity) distillation."""

import torch
import torch.nn.functional as F

from src.utils.exceptions import ErrorCode, InvalidArgumentError

__all__ = ["relational_distillation_loss", "similarity_matrix"]


def similarity_matrix(f: torch.Tensor) -> torch.Tensor:
    """``(N, HW, HW)`` Gram matrix of unit-normalised per-position channel vectors."""
    v = F.normalize(f.flatten(2), p=2, dim=1, eps=1e-12).transpose(1, 2)
    return v @ v.transpose(1, 2)


def relational_distillation_loss(f_student: torch.Tensor, f_teacher: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference between student and teacher similarity matrices.

    Accepts ``(C, H, W)`` or ``(N, C, H, W)`` inputs of equal shape.

    Raises:
        InvalidArgumentError: If the shapes differ.
    """
    if f_student.shape != f_teacher.shape:
        raise InvalidArgumentError(
            f"Feature shapes differ: {tuple(f_student.shape)} vs {tuple(f_teacher.shape)}",
            error_code=ErrorCode.ARGUMENT_SHAPE_MISMATCH,
            argument="f_teacher",
        )
    if f_student.ndim == 3:
        f_student, f_teacher = f_student[None], f_teacher[None]
    # the teacher is a fixed target
    f_teacher = f_teacher.detach().to(f_student.dtype)
    return (similarity_matrix(f_student) - similarity_matrix(f_teacher)).abs().mean()
