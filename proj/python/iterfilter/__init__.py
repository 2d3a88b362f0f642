"""Iterative point cloud filtering.

Point arrays are float64 with shape (n, 3). Meshes are (vertices, faces)
pairs with integer faces of shape (f, 3).
"""

import json as _json

from ._iterfilter import (
    ConfigError,
    CoverError,
    InvalidInput,
    IoError,
    Model,
    NumericError,
    ShapeError,
    add_noise,
    chamfer_distance,
    farthest_point_sample,
    knn,
    make_cylinder,
    make_icosphere,
    make_rounded_box,
    make_torus,
    noise_schedule,
    normalize_to_unit_sphere,
    point_to_mesh,
    read_xyz,
    sample_mesh,
    stitch_weights,
    train,
    write_xyz,
)
from ._iterfilter import run_command as _run_command


def run_command(name, config, threads=1):
    """Run a CLI command (prepare, train, filter, eval, ablate) with a config dict."""
    return _json.loads(_run_command(name, _json.dumps(config), threads))


__all__ = [
    "ConfigError",
    "CoverError",
    "InvalidInput",
    "IoError",
    "Model",
    "NumericError",
    "ShapeError",
    "add_noise",
    "chamfer_distance",
    "farthest_point_sample",
    "knn",
    "make_cylinder",
    "make_icosphere",
    "make_rounded_box",
    "make_torus",
    "noise_schedule",
    "normalize_to_unit_sphere",
    "point_to_mesh",
    "read_xyz",
    "run_command",
    "sample_mesh",
    "stitch_weights",
    "train",
    "write_xyz",
]
