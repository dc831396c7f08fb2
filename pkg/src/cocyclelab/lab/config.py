"""Lab configuration with a TOML round trip."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from ..cocycle import Tolerances
from ..torus import LatticeAutomorphism, TorusError

CAT_MAP = ((5, 2), (2, 1))


class ConfigError(ValueError):
    pass


@dataclass
class GalleryConfig:
    eps: float = 0.1  # bump-pair entry: distance of the generators from the identity
    beta: float = 1.0  # off-diagonal constant of the series example
    a: float = 0.4  # alpha = 1 - a (sin^2 pi x1 + sin^2 pi x2), min alpha = 1 - 2a
    lemma_center: list = field(default_factory=lambda: [0.3, 0.7])
    lemma_radius: float = 0.05
    lemma_cap: int = 9
    series_terms: int = 4000


@dataclass
class LabConfig:
    F: list = field(default_factory=lambda: [list(r) for r in CAT_MAP])
    cover: list = field(default_factory=lambda: [1, 1])
    grid: int = 128
    n_max: int = 6
    iterations: int = 2000
    tol_eig: float = 1e-8  # one-exponent gap and tr/det agreement
    tol_disc: float = 1e-9  # relative discriminant threshold
    tol_nil: float = 1e-6  # nilpotent part of near-scalar products
    obstruction_tol: float = 1e-8
    solve_tol: float = 1e-6
    period_cap: int = 14
    output_dir: str = "lab-out"
    workers: int = 1
    gallery: GalleryConfig = field(default_factory=GalleryConfig)

    def __post_init__(self):
        if isinstance(self.gallery, dict):
            self.gallery = _build(GalleryConfig, self.gallery, "gallery")
        self.validate()

    def validate(self):
        if len(self.F) != 2 or any(len(r) != 2 for r in self.F):
            raise ConfigError("F must be a 2x2 integer matrix")
        if any(not isinstance(v, int) for r in self.F for v in r):
            raise ConfigError("F entries must be integers")
        if len(self.cover) != 2 or any(not isinstance(q, int) or q < 1 for q in self.cover):
            raise ConfigError("cover must be two positive integers")
        try:
            LatticeAutomorphism(tuple(map(tuple, self.F)), tuple(self.cover))
        except TorusError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("grid", "n_max", "iterations", "period_cap", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("tol_eig", "tol_disc", "tol_nil", "obstruction_tol", "solve_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_max > self.period_cap:
            raise ConfigError(f"n_max {self.n_max} exceeds period_cap {self.period_cap}")
        g = self.gallery
        if not 0 < g.a < 0.5:
            raise ConfigError("gallery.a must lie in (0, 0.5) so that alpha stays positive")
        if not g.eps > 0 or not 0 < g.lemma_radius < 0.5:
            raise ConfigError("gallery.eps and gallery.lemma_radius out of range")

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(disc_rel=self.tol_disc, nil=self.tol_nil, data=self.tol_eig)

    def base(self, cover=None) -> LatticeAutomorphism:
        return LatticeAutomorphism(tuple(map(tuple, self.F)), tuple(cover or self.cover), period_cap=self.period_cap)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def from_dict(cls, d: dict) -> "LabConfig":
        return _build(cls, d, "config")

    @classmethod
    def loads(cls, text: str) -> "LabConfig":
        try:
            return cls.from_dict(tomli.loads(text))
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from None

    @classmethod
    def load(cls, path) -> "LabConfig":
        return cls.loads(Path(path).read_text())


def _build(cls, d: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
