"""Synthetic labeled data pool and per-provider sampling.

The pool is a mixture of isotropic Gaussian clusters, one per category.
Labels follow a shared linear rule with a per-category offset::

    label = 1  iff  w . x + b[c] > 0

where ``w`` is a unit vector and ``b[c]`` is normal with standard deviation
``offset_scale * feature_noise``.  Provider datasets are drawn from the pool
with their own category mixture and their own label-flip rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _jsonio, _seeding
from .errors import ConfigError, DimensionError


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PoolConfig:
    dim: int = 768
    num_categories: int = 21
    category_separation: float = 1.0
    feature_noise: float = 1.0
    seed: int = 0
    offset_scale: float = 0.3

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ConfigError("dim", f"must be a positive integer, got {self.dim!r}")
        if not isinstance(self.num_categories, (int, np.integer)) or self.num_categories < 1:
            raise ConfigError("num_categories", f"must be a positive integer, got {self.num_categories!r}")
        if not np.isfinite(self.category_separation) or self.category_separation < 0:
            raise ConfigError("category_separation", "must be finite and nonnegative")
        if not np.isfinite(self.feature_noise) or self.feature_noise <= 0:
            raise ConfigError("feature_noise", "must be finite and positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")
        if not np.isfinite(self.offset_scale) or self.offset_scale < 0:
            raise ConfigError("offset_scale", "must be finite and nonnegative")

    def to_dict(self):
        return {
            "dim": int(self.dim),
            "num_categories": int(self.num_categories),
            "category_separation": float(self.category_separation),
            "feature_noise": float(self.feature_noise),
            "seed": int(self.seed),
            "offset_scale": float(self.offset_scale),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class ProviderSpec:
    category_weights: tuple
    size: int
    label_flip_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.category_weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ConfigError("category_weights", "must be a nonempty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigError("category_weights", "entries must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError("category_weights", f"must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "category_weights", tuple(float(v) for v in w))
        if int(self.size) < 1:
            raise ConfigError("size", "must be at least 1")
        if not 0.0 <= self.label_flip_rate <= 0.5:
            raise ConfigError("label_flip_rate", "must lie in [0, 0.5]")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")

    def to_dict(self):
        return {
            "category_weights": list(self.category_weights),
            "size": int(self.size),
            "label_flip_rate": float(self.label_flip_rate),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["category_weights"]), d["size"], d["label_flip_rate"], d["seed"])


@dataclass(frozen=True)
class DataPoint:
    features: np.ndarray
    label: int
    category: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """A batch of data points held as read-only column arrays.

    ``X`` has shape (n, dim), ``y`` holds 0/1 labels and ``category`` the
    pool category of each row.
    """

    X: np.ndarray
    y: np.ndarray
    category: np.ndarray

    def __post_init__(self):
        X = _frozen(self.X, np.float64)
        if X.ndim != 2:
            raise DimensionError(f"features must be a 2-d array, got shape {X.shape}")
        y = _frozen(self.y, np.int64).reshape(-1)
        cat = _frozen(self.category, np.int64).reshape(-1)
        if y.shape[0] != X.shape[0] or cat.shape[0] != X.shape[0]:
            raise DimensionError("features, labels and categories differ in length")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "category", cat)

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @classmethod
    def concat(cls, parts: Sequence["Dataset"], dim=None):
        parts = list(parts)
        if not parts:
            if dim is None:
                raise ValueError("dim is required to concatenate zero datasets")
            return cls.empty(dim)
        return cls(
            np.concatenate([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.category for p in parts]),
        )

    @property
    def dim(self):
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i) -> DataPoint:
        return DataPoint(self.X[i], int(self.y[i]), int(self.category[i]))

    def __iter__(self) -> Iterator[DataPoint]:
        for i in range(len(self)):
            yield self[i]

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.category[idx])

    def identical(self, other):
        return (
            self.X.shape == other.X.shape
            and self.X.tobytes() == other.X.tobytes()
            and self.y.tobytes() == other.y.tobytes()
            and self.category.tobytes() == other.category.tobytes()
        )

    def to_dict(self):
        return {
            "dim": int(self.dim),
            "features": _jsonio.floats(self.X),
            "labels": self.y.tolist(),
            "categories": self.category.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        dim = int(d["dim"])
        X = np.array(d["features"], dtype=np.float64).reshape(-1, dim)
        return cls(X, np.array(d["labels"], dtype=np.int64), np.array(d["categories"], dtype=np.int64))


@dataclass(frozen=True, eq=False)
class DataPool:
    config: PoolConfig
    centers: np.ndarray
    direction: np.ndarray
    offsets: np.ndarray
    generator: dict = field(default_factory=lambda: dict(_seeding.GENERATOR))

    @property
    def dim(self):
        return self.config.dim

    @property
    def num_categories(self):
        return self.config.num_categories

    def true_labels(self, X, category):
        """Apply the ground-truth rule to features and categories."""
        z = np.asarray(X) @ self.direction + self.offsets[np.asarray(category)]
        return (z > 0).astype(np.int64)

    def identical(self, other):
        return (
            self.config == other.config
            and self.centers.tobytes() == other.centers.tobytes()
            and self.direction.tobytes() == other.direction.tobytes()
            and self.offsets.tobytes() == other.offsets.tobytes()
        )

    def to_dict(self):
        return {
            "format_version": _jsonio.FORMAT_VERSION,
            "generator": dict(self.generator),
            "config": self.config.to_dict(),
            "centers": _jsonio.floats(self.centers),
            "direction": _jsonio.floats(self.direction),
            "offsets": _jsonio.floats(self.offsets),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            PoolConfig.from_dict(d["config"]),
            _frozen(d["centers"], np.float64),
            _frozen(d["direction"], np.float64),
            _frozen(d["offsets"], np.float64),
            dict(d["generator"]),
        )


def gen_pool(config: PoolConfig) -> DataPool:
    """Draw cluster centers, the labeling direction and per-category offsets."""
    if not isinstance(config, PoolConfig):
        raise ConfigError("config", "expected a PoolConfig")
    g = _seeding.rng(config.seed, _seeding.POOL)
    s = config.category_separation
    centers = g.uniform(-s, s, size=(config.num_categories, config.dim))
    direction = g.standard_normal(config.dim)
    direction /= np.linalg.norm(direction)
    offsets = config.offset_scale * config.feature_noise * g.standard_normal(config.num_categories)
    return DataPool(
        config,
        _frozen(centers, np.float64),
        _frozen(direction, np.float64),
        _frozen(offsets, np.float64),
    )


def sample_provider_dataset(pool: DataPool, spec: ProviderSpec) -> Dataset:
    """Sample ``spec.size`` points with the spec's category mixture and label noise."""
    weights = np.asarray(spec.category_weights)
    if weights.shape[0] != pool.num_categories:
        raise DimensionError(
            f"category_weights has length {weights.shape[0]}, pool has {pool.num_categories} categories"
        )
    g = _seeding.rng(pool.config.seed, spec.seed, _seeding.PROVIDER)
    n = int(spec.size)
    # rng.choice renormalizes internally; the 1e-9 check above keeps this exact enough
    category = g.choice(pool.num_categories, size=n, p=weights / weights.sum())
    X = pool.centers[category] + pool.config.feature_noise * g.standard_normal((n, pool.dim))
    y = pool.true_labels(X, category)
    flips = g.random(n) < spec.label_flip_rate
    y = np.where(flips, 1 - y, y)
    return Dataset(X, y, category)


def sample_acquirer_set(pool: DataPool, spec: ProviderSpec) -> Dataset:
    """Sample the acquirer's evaluation set; normally ``label_flip_rate`` is 0."""
    return sample_provider_dataset(pool, spec)


def uniform_weights(num_categories):
    return tuple([1.0 / num_categories] * num_categories)
