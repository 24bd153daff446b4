"""Planted-subspace synthetic datasets with ground-truth labels and masks.

Each cluster owns a set of feature indices (its subspace).  Inside that
set its rows carry signal; everywhere else they carry shared noise.  Draws
are made row-major, feature-minor from a single seeded generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import CATEGORICAL, NUMERIC, Column, Dataset, Schema
from .errors import SpecInvalid


@dataclass
class SubspaceSpec:
    """Layout of a planted-subspace dataset.

    ``features`` holds one list of 0-based feature indices per cluster.
    Categorical specs use ``signal_p`` (per cluster, or one value for all) as
    the Bernoulli probability of a 1 on planted features and ``noise_p``
    elsewhere.  Numeric specs draw planted features from
    ``Normal(signal_means[k], signal_sd)`` and the rest from
    ``Normal(noise_mean, noise_sd)``.
    """

    sizes: Sequence[int]
    features: Sequence[Sequence[int]]
    D: int
    kind: str = CATEGORICAL
    signal_p: object = 0.9
    noise_p: float = 0.1
    signal_means: Sequence[float] = ()
    signal_sd: float = 1.0
    noise_mean: float = 0.0
    noise_sd: float = 3.0
    seed: int = 0
    name: str = "synthetic"

    def validate(self):
        if len(self.sizes) != len(self.features) or not self.sizes:
            raise SpecInvalid("need one feature set per cluster")
        if any(int(s) < 1 for s in self.sizes):
            raise SpecInvalid("every cluster needs at least one row")
        if self.D < 1:
            raise SpecInvalid("D must be positive")
        for fs in self.features:
            if any(not 0 <= int(f) < self.D for f in fs):
                raise SpecInvalid(f"feature index outside [0, {self.D})")
        if self.kind == CATEGORICAL:
            for p in np.atleast_1d(self.signal_p):
                if not 0 <= p <= 1:
                    raise SpecInvalid("signal_p must be a probability")
            if np.ndim(self.signal_p) and len(self.signal_p) != len(self.sizes):
                raise SpecInvalid("signal_p needs one value per cluster")
            if not 0 <= self.noise_p <= 1:
                raise SpecInvalid("noise_p must be a probability")
        elif self.kind == NUMERIC:
            if len(self.signal_means) != len(self.sizes):
                raise SpecInvalid("signal_means needs one value per cluster")
            if self.signal_sd < 0 or self.noise_sd < 0:
                raise SpecInvalid("standard deviations must be nonnegative")
        else:
            raise SpecInvalid(f"unknown kind {self.kind!r}")

    def planted_masks(self) -> np.ndarray:
        masks = np.zeros((len(self.sizes), self.D), dtype=bool)
        for k, fs in enumerate(self.features):
            masks[k, list(fs)] = True
        return masks

    @classmethod
    def from_dict(cls, obj: dict) -> "SubspaceSpec":
        try:
            return cls(**obj)
        except TypeError as exc:
            raise SpecInvalid(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "SubspaceSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _labels(sizes):
    return np.repeat(np.arange(len(sizes)), [int(s) for s in sizes])


def _schema(spec: SubspaceSpec) -> Schema:
    width = len(str(spec.D))
    if spec.kind == CATEGORICAL:
        cols = [Column(f"f{d:0{width}d}", CATEGORICAL, ("0", "1")) for d in range(spec.D)]
    else:
        cols = [Column(f"f{d:0{width}d}", NUMERIC) for d in range(spec.D)]
    return Schema(tuple(cols), label_column="cluster")


def generate(spec: SubspaceSpec):
    """Dispatch on ``spec.kind``; returns ``(dataset, labels, planted_masks)``."""
    if spec.kind == CATEGORICAL:
        return gen_categorical(spec)
    return gen_numeric(spec)


def gen_categorical(spec: SubspaceSpec):
    spec.validate()
    if spec.kind != CATEGORICAL:
        raise SpecInvalid("gen_categorical needs a categorical spec")
    masks = spec.planted_masks()
    labels = _labels(spec.sizes)
    signal = np.broadcast_to(np.asarray(spec.signal_p, dtype=float), (len(spec.sizes),))
    p = np.where(masks[labels], signal[labels][:, None], spec.noise_p)
    rng = np.random.default_rng(spec.seed)
    x = (rng.random(p.shape) < p).astype(np.int64)
    names = tuple(str(k) for k in range(len(spec.sizes)))
    data = Dataset(_schema(spec), x, np.zeros((x.shape[0], 0)), labels, names)
    return data, labels, masks


def gen_numeric(spec: SubspaceSpec):
    spec.validate()
    if spec.kind != NUMERIC:
        raise SpecInvalid("gen_numeric needs a numeric spec")
    masks = spec.planted_masks()
    labels = _labels(spec.sizes)
    planted = masks[labels]
    means = np.asarray(spec.signal_means, dtype=float)[labels][:, None]
    loc = np.where(planted, means, spec.noise_mean)
    scale = np.where(planted, spec.signal_sd, spec.noise_sd)
    rng = np.random.default_rng(spec.seed)
    x = loc + scale * rng.standard_normal(planted.shape)
    names = tuple(str(k) for k in range(len(spec.sizes)))
    data = Dataset(_schema(spec), np.zeros((x.shape[0], 0), np.int64), x, labels, names)
    return data, labels, masks


def _span(first: int, last: int) -> list:
    """1-based inclusive feature range to 0-based indices."""
    return list(range(first - 1, last))


def categorical_disjoint(seed: int = 0) -> SubspaceSpec:
    """300 rows x 24 binary features, three disjoint 8-feature subspaces."""
    return SubspaceSpec(
        sizes=[100, 100, 100],
        features=[_span(1, 8), _span(9, 16), _span(17, 24)],
        D=24,
        kind=CATEGORICAL,
        signal_p=0.9,
        noise_p=0.1,
        seed=seed,
        name="categorical_disjoint",
    )


def numeric_overlap(seed: int = 0) -> SubspaceSpec:
    """300 rows x 36 Gaussian features; subspaces 1-12, 13-24 and 22-34."""
    return SubspaceSpec(
        sizes=[100, 100, 100],
        features=[_span(1, 12), _span(13, 24), _span(22, 34)],
        D=36,
        kind=NUMERIC,
        signal_means=[1.0, 5.0, 10.0],
        signal_sd=1.0,
        noise_mean=0.0,
        noise_sd=3.0,
        seed=seed,
        name="numeric_overlap",
    )


def categorical_subspace3(seed: int = 0) -> SubspaceSpec:
    """300 rows x 24 binary features with uneven, overlapping subspaces.

    Cluster 1 owns features 1-9 and cluster 2 features 9-24.  Cluster 3's
    eight features come in two halves of four: 5-8 inside cluster 1's block
    and 13-16 inside cluster 2's.  Planted features are pure (always 1).
    """
    return SubspaceSpec(
        sizes=[100, 100, 100],
        features=[_span(1, 9), _span(9, 24), _span(5, 8) + _span(13, 16)],
        D=24,
        kind=CATEGORICAL,
        signal_p=1.0,
        noise_p=0.1,
        seed=seed,
        name="categorical_subspace3",
    )


def numeric_subspace3(seed: int = 0) -> SubspaceSpec:
    """Numeric counterpart of :func:`categorical_subspace3` on 36 features.

    Cluster 1 owns 1-13, cluster 2 owns 13-36, and cluster 3 has two halves
    of six, 7-12 and 19-24.  Means 1/5/10, unit signal sd, noise N(0, 9).
    """
    return SubspaceSpec(
        sizes=[100, 100, 100],
        features=[_span(1, 13), _span(13, 36), _span(7, 12) + _span(19, 24)],
        D=36,
        kind=NUMERIC,
        signal_means=[1.0, 5.0, 10.0],
        signal_sd=1.0,
        noise_mean=0.0,
        noise_sd=3.0,
        seed=seed,
        name="numeric_subspace3",
    )


PRESETS = {
    "categorical_disjoint": categorical_disjoint,
    "numeric_overlap": numeric_overlap,
    "categorical_subspace3": categorical_subspace3,
    "numeric_subspace3": numeric_subspace3,
}


def preset(name: str, seed: int = 0) -> SubspaceSpec:
    try:
        return PRESETS[name](seed)
    except KeyError:
        raise SpecInvalid(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
