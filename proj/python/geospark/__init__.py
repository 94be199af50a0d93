"""Point cloud semantic segmentation via geometric partitions."""

from ._geospark import (
    config_preset,
    evaluate,
    fps,
    generate_scene,
    geometric_features,
    num_scene_classes,
    partition,
)

__all__ = [
    "config_preset",
    "evaluate",
    "fps",
    "generate_scene",
    "geometric_features",
    "num_scene_classes",
    "partition",
]
