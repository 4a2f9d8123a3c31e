"""Per-frame teacher cache.

Layout: ``<root>/<sequence>/%06d.tch1`` plus a ``.complete`` flag once every
frame of the sequence is cached. A ``TCH1`` file is::

    b"TCH1" | <6H: C, h, w, N, hm, wm> | f32[C*h*w] feature
          | packbits(N*hm*wm) masks | i32[N] category ids | <I crc32 of all previous bytes>
"""

import logging
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from tqdm import tqdm

from src.core.semantics.teacher.base import TeacherBundle, TeacherProvider
from src.core.synth.dataset import list_sequences, load_sequence
from src.utils.exceptions import DatasetError, ErrorCode, TeacherCacheError

logger = logging.getLogger(__name__)

TCH1_MAGIC = b"TCH1"
_HEADER = struct.Struct("<6H")
_CRC = struct.Struct("<I")
COMPLETE_FLAG = ".complete"


def encode_bundle(bundle: TeacherBundle) -> bytes:
    c, h, w = bundle.feature.shape
    n, hm, wm = bundle.masks.shape
    body = b"".join(
        [
            TCH1_MAGIC,
            _HEADER.pack(c, h, w, n, hm, wm),
            np.ascontiguousarray(bundle.feature, dtype="<f4").tobytes(),
            np.packbits(bundle.masks.reshape(-1).astype(bool)).tobytes(),
            np.ascontiguousarray(bundle.category_ids, dtype="<i4").tobytes(),
        ]
    )
    return body + _CRC.pack(zlib.crc32(body))


def decode_bundle(payload: bytes, sequence: str | None = None, frame: int | None = None) -> TeacherBundle:
    """Parse a ``TCH1`` payload.

    Raises:
        TeacherCacheError: On a bad tag, a size mismatch or a checksum failure.
    """

    def corrupt(reason: str) -> TeacherCacheError:
        return TeacherCacheError(f"Corrupt teacher cache entry: {reason}", sequence=sequence, frame=frame)

    head = len(TCH1_MAGIC) + _HEADER.size
    if len(payload) < head + _CRC.size or payload[: len(TCH1_MAGIC)] != TCH1_MAGIC:
        raise corrupt("bad tag")
    body, (crc,) = payload[: -_CRC.size], _CRC.unpack(payload[-_CRC.size :])
    if zlib.crc32(body) != crc:
        raise corrupt("checksum mismatch")

    c, h, w, n, hm, wm = _HEADER.unpack_from(body, len(TCH1_MAGIC))
    feat_bytes = 4 * c * h * w
    mask_bytes = (n * hm * wm + 7) // 8
    if len(body) != head + feat_bytes + mask_bytes + 4 * n:
        raise corrupt("size mismatch")

    offset = head
    feature = np.frombuffer(body, dtype="<f4", count=c * h * w, offset=offset).reshape(c, h, w)
    offset += feat_bytes
    bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8, count=mask_bytes, offset=offset))
    masks = bits[: n * hm * wm].astype(bool).reshape(n, hm, wm)
    offset += mask_bytes
    ids = np.frombuffer(body, dtype="<i4", count=n, offset=offset)
    return TeacherBundle(feature=feature.astype(np.float32), masks=masks, category_ids=ids.astype(np.int32))


@dataclass
class SequenceCacheReport:
    """Outcome of caching one sequence."""

    sequence: str
    computed: int = 0
    reused: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class CacheReport:
    sequences: list[SequenceCacheReport] = field(default_factory=list)

    @property
    def failed(self) -> list[SequenceCacheReport]:
        return [s for s in self.sequences if not s.ok]

    @property
    def computed(self) -> int:
        return sum(s.computed for s in self.sequences)

    @property
    def reused(self) -> int:
        return sum(s.reused for s in self.sequences)


class TeacherCache:
    """Read and write access to a teacher cache root."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._stats = {"hits": 0, "misses": 0}

    def entry_path(self, sequence: str, frame: int) -> Path:
        return self.root / sequence / f"{frame:06d}.tch1"

    def is_complete(self, sequence: str) -> bool:
        return (self.root / sequence / COMPLETE_FLAG).is_file()

    def mark_complete(self, sequence: str, num_frames: int) -> None:
        (self.root / sequence / COMPLETE_FLAG).write_text(f"{num_frames}\n", encoding="utf-8")

    def write(self, sequence: str, frame: int, bundle: TeacherBundle) -> None:
        path = self.entry_path(sequence, frame)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(encode_bundle(bundle))
        os.replace(tmp, path)

    def read(self, sequence: str, frame: int) -> TeacherBundle:
        """Load one entry.

        Raises:
            TeacherCacheError: If the entry is missing or corrupt.
        """
        path = self.entry_path(sequence, frame)
        try:
            payload = path.read_bytes()
        except FileNotFoundError as e:
            self._stats["misses"] += 1
            raise TeacherCacheError(
                "Missing teacher cache entry",
                error_code=ErrorCode.TEACHER_CACHE_MISSING,
                sequence=sequence,
                frame=frame,
            ) from e
        self._stats["hits"] += 1
        return decode_bundle(payload, sequence=sequence, frame=frame)

    def load_sequence(
        self,
        sequence: str,
        num_frames: int,
        num_masks: int | None = None,
        feature_shape: tuple[int, int, int] | None = None,
    ) -> list[TeacherBundle]:
        """Load every frame's bundle, truncated to ``num_masks``.

        Raises:
            TeacherCacheError: If the sequence is incomplete, an entry is
                corrupt or the stored feature shape differs from ``feature_shape``.
        """
        if not self.is_complete(sequence):
            raise TeacherCacheError(
                "Teacher cache is incomplete", error_code=ErrorCode.TEACHER_CACHE_MISSING, sequence=sequence
            )
        bundles = []
        for k in range(num_frames):
            bundle = self.read(sequence, k)
            if feature_shape is not None and tuple(bundle.feature.shape) != tuple(feature_shape):
                raise TeacherCacheError(
                    f"Cached feature shape {bundle.feature.shape} does not match {tuple(feature_shape)}",
                    sequence=sequence,
                    frame=k,
                )
            bundles.append(bundle.truncate(num_masks) if num_masks is not None else bundle)
        return bundles

    def get_stats(self) -> dict[str, int]:
        return dict(self._stats)


def _cache_sequence(
    cache: TeacherCache, seq_dir: Path, provider: TeacherProvider, jobs: int
) -> SequenceCacheReport:
    name = seq_dir.name
    report = SequenceCacheReport(sequence=name)
    try:
        sequence = load_sequence(seq_dir)
    except DatasetError as e:
        report.error = e.message
        logger.warning(f"Skipping teacher cache for {name}: {e.message}")
        return report

    def _frame(k: int) -> bool:
        path = cache.entry_path(name, k)
        if path.is_file():
            try:
                decode_bundle(path.read_bytes(), sequence=name, frame=k)
                return False
            except TeacherCacheError:
                logger.info(f"Recomputing corrupt teacher entry {name}/{k:06d}")
        cache.write(name, k, provider.extract(sequence.frames[k], sequence.masks[k]))
        return True

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        computed = list(pool.map(_frame, range(sequence.num_frames)))
    report.computed = sum(computed)
    report.reused = len(computed) - report.computed
    cache.mark_complete(name, sequence.num_frames)
    return report


def precompute_teacher(
    dataset_dir: Path,
    provider: TeacherProvider,
    cache_root: Path,
    jobs: int = 1,
) -> CacheReport:
    """Cache one bundle per frame of every sequence in ``dataset_dir``.

    Valid existing entries are reused, so an interrupted run resumes where
    it stopped. Sequences that cannot be read are reported and skipped.
    """
    cache = TeacherCache(cache_root)
    report = CacheReport()
    for seq_dir in tqdm(list_sequences(dataset_dir), desc="teacher", unit="seq"):
        report.sequences.append(_cache_sequence(cache, seq_dir, provider, jobs))
    logger.info(
        f"Teacher cache at {cache_root}: {report.computed} computed, {report.reused} reused, "
        f"{len(report.failed)} sequence(s) failed"
    )
    return report
