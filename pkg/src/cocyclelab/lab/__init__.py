"""Worked examples, configuration, serialisation, plots and the ``lab`` command line."""

from .cli import run_cli
from .config import ConfigError, GalleryConfig, LabConfig
from .gallery import GALLERY_IDS, Check, GalleryEntry, build, gallery_2_6, gallery_7_1, gallery_7_3, run_checks

__all__ = [
    "run_cli",
    "ConfigError",
    "GalleryConfig",
    "LabConfig",
    "GALLERY_IDS",
    "Check",
    "GalleryEntry",
    "build",
    "gallery_2_6",
    "gallery_7_1",
    "gallery_7_3",
    "run_checks",
]
