"""Farthest-first traversal for turning a target cluster count into a lambda."""

from __future__ import annotations

import math

import numpy as np

from .data import DEFAULT_SMOOTHING, Dataset
from .errors import HyperparamError, KTooLarge, NonBinaryFeature, NonNumericData

MEAN = "mean"


class CostProbe:
    """Cost of every row against one reference, either a row index or ``"mean"``.

    Subclasses implement :meth:`__call__` returning an ``(N,)`` array.
    """

    def __call__(self, data: Dataset, reference) -> np.ndarray:
        raise NotImplementedError


class SquaredEuclidean(CostProbe):
    """K-means cost; expects all-numeric (e.g. one-hot encoded) data."""

    def __call__(self, data, reference):
        if data.n_cat:
            raise NonNumericData(data.cat_names)
        center = data.num.mean(axis=0) if reference == MEAN else data.num[reference]
        return np.sum((data.num - center) ** 2, axis=1)


class CraftSingletonCost(CostProbe):
    """CRAFT cost of a row against a one-point cluster with unit spread.

    Each categorical feature costs its cross-entropy under the smoothed
    one-hot distribution of the reference, each numeric one
    ``(x - ref)^2 / 2``.  ``mask_share`` is the fraction of features treated
    as selected: with the default 1.0 every feature is selected; a value
    ``m < 1`` gives the expected cost under a random mask that selects each
    feature with probability ``m``, where an unselected categorical feature
    falls back to the global distribution and an unselected numeric feature
    costs nothing.

    With ``reference="mean"`` the global smoothed frequencies and means
    stand in for the reference row.
    """

    def __init__(self, smoothing: float = DEFAULT_SMOOTHING, mask_share: float = 1.0):
        if not 0 < mask_share <= 1:
            raise HyperparamError(f"mask_share must lie in (0, 1], got {mask_share}")
        self.smoothing = smoothing
        self.mask_share = mask_share

    def __call__(self, data, reference):
        s, w = self.smoothing, self.mask_share
        out = np.zeros(data.N)
        if data.n_num:
            center = data.num.mean(axis=0) if reference == MEAN else data.num[reference]
            out += w * np.sum((data.num - center) ** 2, axis=1) / 2.0
        for j, t in enumerate(data.n_categories):
            codes = data.cat[:, j]
            eta0 = (np.bincount(codes, minlength=t) + s) / (data.N + s * t)
            if reference == MEAN:
                eta = eta0
            else:
                eta = np.full(int(t), s)
                eta[data.cat[reference, j]] += 1.0
                eta /= 1.0 + s * t
            out += w * -np.log(eta)[codes]
            if w < 1:
                out += (1 - w) * -np.log(eta0)[codes]
        return out


class BinaryEntropyCost(CostProbe):
    """Binary-entropy discrepancy of each row against a reference treated as
    a cluster mean (clamped to ``[smoothing, 1 - smoothing]``)."""

    def __init__(self, smoothing: float = DEFAULT_SMOOTHING):
        self.smoothing = smoothing

    def __call__(self, data, reference):
        if data.n_num or any(t != 2 for t in data.n_categories):
            raise NonBinaryFeature("binary-entropy probe needs two-category columns only")
        x = data.cat.astype(np.float64)
        mu = x.mean(axis=0) if reference == MEAN else x[reference]
        mu = np.clip(mu, self.smoothing, 1 - self.smoothing)
        h = -(mu * np.log(mu) + (1 - mu) * np.log1p(-mu))
        logit = np.log(mu) - np.log1p(-mu)
        return np.sum(h + (mu - x) * logit, axis=1)


def farthest_first_lambda(
    data: Dataset,
    k: int,
    probe: CostProbe,
    init="random",
    seed: int = 0,
) -> float:
    """Grow a set ``T`` by repeatedly adding the row farthest (under ``probe``)
    from its nearest member; after ``k - 1`` additions return the distance at
    which the last row was added.

    ``init`` is ``"random"`` (a seeded random row), ``"mean"`` (the global
    centre) or an explicit row index.  Ties go to the lowest row index.
    """
    if k < 2:
        raise KTooLarge(f"target k must be at least 2, got {k}")
    if k > data.N:
        raise KTooLarge(f"target k={k} exceeds the number of rows N={data.N}")
    if init == "random":
        start = int(np.random.default_rng(seed).integers(data.N))
    elif init == MEAN:
        start = MEAN
    else:
        start = int(init)
    nearest = np.asarray(probe(data, start), dtype=np.float64)
    lam = math.inf
    for _ in range(k - 1):
        far = int(np.argmax(nearest))
        lam = float(nearest[far])
        nearest = np.minimum(nearest, probe(data, far))
    return max(lam, 0.0)
