from .geometry import minimum_image_displacement, rotate_about_axis, wrap_positions
from .rng import Purpose, RngStream, derive_seed, stream_key
from .types import Action, Colloid, SimParams

__all__ = [
    "Action",
    "Colloid",
    "Purpose",
    "RngStream",
    "SimParams",
    "derive_seed",
    "minimum_image_displacement",
    "rotate_about_axis",
    "stream_key",
    "wrap_positions",
]
