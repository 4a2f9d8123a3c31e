"""Teacher providers and the on-disk teacher cache."""

import logging
from typing import Any

from src.utils.exceptions import InvalidArgumentError

from .base import TeacherBundle, TeacherProvider
from .cache import CacheReport, TeacherCache, decode_bundle, encode_bundle, precompute_teacher
from .oracle import OracleTeacher

logger = logging.getLogger(__name__)

_TEACHER_REGISTRY: dict[str, type[TeacherProvider]] = {
    OracleTeacher.name: OracleTeacher,
}


def get_teacher(name: str, **kwargs: Any) -> TeacherProvider:
    """Instantiate a registered teacher provider.

    Raises:
        InvalidArgumentError: If no provider is registered under ``name``.
    """
    key = name.lower()
    if key not in _TEACHER_REGISTRY:
        raise InvalidArgumentError(
            f"Unknown teacher '{name}'. Available: {sorted(_TEACHER_REGISTRY)}", argument="teacher"
        )
    logger.debug(f"Creating teacher provider: {key}")
    return _TEACHER_REGISTRY[key](**kwargs)


__all__ = [
    "CacheReport",
    "OracleTeacher",
    "TeacherBundle",
    "TeacherCache",
    "TeacherProvider",
    "decode_bundle",
    "encode_bundle",
    "get_teacher",
    "precompute_teacher",
]
