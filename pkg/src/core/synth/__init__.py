"""Synthetic scenes, rendering and event simulation."""

from .dataset import list_sequences, load_sequence, read_meta, write_sequence
from .generator import generate_dataset, generate_sequence, random_scene_spec, sequence_seeds
from .models import SceneConfig, SceneSequence, SceneSpec, SequenceMeta, Sprite
from .renderer import render_sequence
from .simulator import reconstruct_log_intensity_oracle, simulate_events

__all__ = [
    "SceneConfig",
    "SceneSequence",
    "SceneSpec",
    "SequenceMeta",
    "Sprite",
    "generate_dataset",
    "generate_sequence",
    "list_sequences",
    "load_sequence",
    "random_scene_spec",
    "read_meta",
    "reconstruct_log_intensity_oracle",
    "render_sequence",
    "sequence_seeds",
    "simulate_events",
    "write_sequence",
]
