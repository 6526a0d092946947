"""Deterministic subitizing engine and synthetic numerosity stimuli.

Thin wrapper over the compiled ``_subit`` extension: binary images are
numpy uint8 arrays (rows = y), foreground nonzero.
"""

try:
    from ._subit import *  # noqa: F401,F403  (installed wheel layout)
    from ._subit import KernelBank, ShrinkTrace  # noqa: F401
except ImportError:  # build-tree layout: _subit sits on sys.path directly
    from _subit import *  # noqa: F401,F403
    from _subit import KernelBank, ShrinkTrace  # noqa: F401

__all__ = [
    "KernelBank",
    "ShrinkTrace",
    "count_components",
    "count_holes",
    "label_components",
    "subitize",
    "shrink",
    "prune_cycle",
    "to_boundary",
    "erode_one_layer",
    "polarity_normalize",
    "sample_scene",
    "rasterize_scene",
    "verify_bank",
]
