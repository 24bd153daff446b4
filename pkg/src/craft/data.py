"""Typed tabular data, hyperparameters and the per-fit cluster state.

Features are kept in schema column order; ``D`` counts every non-label
column.  Categorical values are stored as integer codes into the column's
category list, numeric values as float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    EmptyCluster,
    EmptyDataset,
    HyperparamError,
    IngestError,
    NonFiniteNumeric,
    RhoOutOfRange,
    RowArityError,
    SchemaError,
    UnknownCategory,
)

CATEGORICAL = "categorical"
NUMERIC = "numeric"

DEFAULT_SMOOTHING = 1e-6
DEFAULT_SIGMA_MIN = 1e-6
DEFAULT_MAX_ITERS = 100


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    categories: tuple = ()

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL


@dataclass(frozen=True)
class Schema:
    columns: tuple
    label_column: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise SchemaError("schema needs at least one feature column")
        seen = set()
        for col in self.columns:
            if col.name in seen:
                raise SchemaError(f"duplicate column name {col.name!r}")
            seen.add(col.name)
            if col.kind == CATEGORICAL:
                cats = tuple(str(c) for c in col.categories)
                if len(set(cats)) != len(cats):
                    raise SchemaError(f"column {col.name!r} repeats a category")
                if len(cats) < 2:
                    raise SchemaError(f"column {col.name!r} needs at least 2 categories")
                object.__setattr__(col, "categories", cats)
            elif col.kind != NUMERIC:
                raise SchemaError(f"column {col.name!r} has unknown kind {col.kind!r}")
        if self.label_column is not None and self.label_column in seen:
            raise SchemaError(
                f"label column {self.label_column!r} must not also be a feature column"
            )

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def n_features(self) -> int:
        return len(self.columns)

    @classmethod
    def from_dict(cls, obj: dict) -> "Schema":
        try:
            raw_cols = obj["columns"]
        except (KeyError, TypeError):
            raise SchemaError("schema object must have a 'columns' list") from None
        cols = []
        for i, c in enumerate(raw_cols):
            if not isinstance(c, dict) or "name" not in c or "kind" not in c:
                raise SchemaError(f"column entry {i} needs 'name' and 'kind'")
            cols.append(Column(str(c["name"]), c["kind"], tuple(c.get("categories", ()))))
        return cls(tuple(cols), obj.get("label_column"))

    def to_dict(self) -> dict:
        cols = []
        for c in self.columns:
            if c.is_categorical:
                cols.append({"name": c.name, "kind": CATEGORICAL, "categories": list(c.categories)})
            else:
                cols.append({"name": c.name, "kind": NUMERIC})
        out = {"columns": cols}
        if self.label_column is not None:
            out["label_column"] = self.label_column
        return out


class Dataset:
    """Immutable column store for one ingested table.

    Attributes
    ----------
    cat : (N, |Cat|) int64 array of category codes
    num : (N, |Num|) float64 array
    cat_features, num_features : positions of each group inside the
        ``D`` schema columns, so that masks can be laid out in schema order
    labels : optional (N,) int64 array of true-label codes
    """

    def __init__(self, schema: Schema, cat, num, labels=None, label_names=()):
        self.schema = schema
        self.cat_features = np.array(
            [i for i, c in enumerate(schema.columns) if c.is_categorical], dtype=np.int64
        )
        self.num_features = np.array(
            [i for i, c in enumerate(schema.columns) if not c.is_categorical], dtype=np.int64
        )
        self.n_categories = np.array(
            [len(schema.columns[i].categories) for i in self.cat_features], dtype=np.int64
        )
        cat = np.asarray(cat, dtype=np.int64)
        num = np.asarray(num, dtype=np.float64)
        n = cat.shape[0] if cat.ndim == 2 and cat.shape[1] else num.shape[0]
        self.cat = cat.reshape(n, len(self.cat_features))
        self.num = num.reshape(n, len(self.num_features))
        if self.cat.size:
            if (self.cat < 0).any() or (self.cat >= self.n_categories).any():
                raise IngestError("categorical code outside its category list")
        if self.num.size and not np.isfinite(self.num).all():
            r, c = np.argwhere(~np.isfinite(self.num))[0]
            raise NonFiniteNumeric(
                "non-finite numeric value", row=int(r), column=self.num_names[c]
            )
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        if self.labels is not None and self.labels.shape != (n,):
            raise IngestError("label vector length does not match row count")
        self.label_names = tuple(label_names)
        for arr in (self.cat, self.num):
            arr.setflags(write=False)
        if self.labels is not None:
            self.labels.setflags(write=False)

    @property
    def N(self) -> int:
        return self.cat.shape[0]

    @property
    def D(self) -> int:
        return self.schema.n_features

    @property
    def n_cat(self) -> int:
        return len(self.cat_features)

    @property
    def n_num(self) -> int:
        return len(self.num_features)

    @property
    def cat_names(self) -> list[str]:
        return [self.schema.columns[i].name for i in self.cat_features]

    @property
    def num_names(self) -> list[str]:
        return [self.schema.columns[i].name for i in self.num_features]

    def row(self, n: int):
        """Return ``(cat_codes, num_values)`` for row ``n``."""
        return self.cat[n], self.num[n]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.schema, self.cat[idx], self.num[idx], labels, self.label_names)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None
            and other.labels is not None
            and np.array_equal(self.labels, other.labels)
        )
        return (
            self.schema == other.schema
            and np.array_equal(self.cat, other.cat)
            and np.array_equal(self.num, other.num)
            and same_labels
            and self.label_names == other.label_names
        )

    __hash__ = None

    def __repr__(self):
        return f"Dataset(N={self.N}, cat={self.n_cat}, num={self.n_num})"


def ingest(schema: Schema, rows: Iterable[Sequence], header: Optional[Sequence[str]] = None) -> Dataset:
    """Validate raw records and convert them to a :class:`Dataset`.

    Without ``header`` each row lists the feature columns in schema order,
    followed by the label (if the schema names one).  With ``header`` the
    fields are matched by name and extra columns are ignored.
    """
    names = schema.names
    expected = names + ([schema.label_column] if schema.label_column else [])
    if header is None:
        positions = list(range(len(expected)))
        width = len(expected)
    else:
        header = list(header)
        missing = [c for c in expected if c not in header]
        if missing:
            raise SchemaError("data header lacks columns: " + ", ".join(missing))
        positions = [header.index(c) for c in expected]
        width = len(header)

    lookup = [
        {cat: code for code, cat in enumerate(col.categories)} if col.is_categorical else None
        for col in schema.columns
    ]
    cat_rows, num_rows, raw_labels = [], [], []
    for r, row in enumerate(rows):
        row = list(row)
        if len(row) != width:
            raise RowArityError(f"expected {width} fields, got {len(row)}", row=r)
        crow, nrow = [], []
        for j, col in enumerate(schema.columns):
            value = row[positions[j]]
            if col.is_categorical:
                code = lookup[j].get(str(value))
                if code is None:
                    raise UnknownCategory(f"unknown category {value!r}", row=r, column=col.name)
                crow.append(code)
            else:
                try:
                    x = float(value)
                except (TypeError, ValueError):
                    raise IngestError(f"not a number: {value!r}", row=r, column=col.name) from None
                if not math.isfinite(x):
                    raise NonFiniteNumeric(f"non-finite value {value!r}", row=r, column=col.name)
                nrow.append(x)
        cat_rows.append(crow)
        num_rows.append(nrow)
        if schema.label_column:
            raw_labels.append(str(row[positions[-1]]))

    n = len(cat_rows)
    cat = np.array(cat_rows, dtype=np.int64).reshape(n, -1) if n else np.zeros((0, 0), np.int64)
    num = np.array(num_rows, dtype=np.float64).reshape(n, -1) if n else np.zeros((0, 0))
    n_cat = sum(c.is_categorical for c in schema.columns)
    cat = cat.reshape(n, n_cat)
    num = num.reshape(n, schema.n_features - n_cat)
    labels, label_names = None, ()
    if schema.label_column:
        # codes follow first appearance so emit -> ingest reproduces them
        label_names = tuple(dict.fromkeys(raw_labels))
        index = {name: i for i, name in enumerate(label_names)}
        labels = np.array([index[v] for v in raw_labels], dtype=np.int64)
    return Dataset(schema, cat, num, labels, label_names)


@dataclass(frozen=True)
class Hyperparams:
    """Fit settings.  ``rho="auto"`` resolves to ``max(0.01, m(1-m) - 0.01)``."""

    lam: float
    m: float
    rho: object = "auto"
    mode: str = "fixed"
    eps_c: Optional[float] = None
    eps_v: Optional[float] = None
    smoothing: float = DEFAULT_SMOOTHING
    sigma_min: float = DEFAULT_SIGMA_MIN
    max_iters: int = DEFAULT_MAX_ITERS
    seed: int = 0

    def __post_init__(self):
        if not self.lam >= 0:
            raise HyperparamError(f"lambda must be nonnegative, got {self.lam}")
        if not 0 < self.m < 1:
            raise HyperparamError(f"m must lie in (0, 1), got {self.m}")
        if self.rho != "auto" and isinstance(self.rho, str):
            raise HyperparamError(f"rho must be a number or 'auto', got {self.rho!r}")
        check_rho(self.m, self.resolved_rho)
        if self.mode not in ("fixed", "approx"):
            raise HyperparamError(f"mode must be 'fixed' or 'approx', got {self.mode!r}")
        if self.eps_c is not None and not 0 < self.eps_c < 1:
            raise HyperparamError(f"eps_c must lie in (0, 1), got {self.eps_c}")
        if self.eps_v is not None and not self.eps_v > 0:
            raise HyperparamError(f"eps_v must be positive, got {self.eps_v}")
        if self.mode == "approx" and self.eps_c is None and self.eps_v is None:
            raise HyperparamError("approx mode needs eps_c and/or eps_v")
        if not self.smoothing > 0:
            raise HyperparamError("smoothing must be positive")
        if not self.sigma_min > 0:
            raise HyperparamError("sigma_min must be positive")
        if int(self.max_iters) < 1:
            raise HyperparamError("max_iters must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise HyperparamError("seed must fit in 64 unsigned bits")

    def check_thresholds(self, data) -> None:
        """Approx mode needs ``eps_c`` when ``data`` has categorical columns
        and ``eps_v`` when it has numeric ones."""
        if self.mode != "approx":
            return
        if data.n_cat and self.eps_c is None:
            raise HyperparamError("approx mode on categorical columns needs eps_c")
        if data.n_num and self.eps_v is None:
            raise HyperparamError("approx mode on numeric columns needs eps_v")

    @property
    def resolved_rho(self) -> float:
        if self.rho == "auto":
            return auto_rho(self.m)
        return float(self.rho)


def auto_rho(m: float) -> float:
    return max(0.01, m * (1 - m) - 0.01)


def check_rho(m: float, rho: float) -> None:
    if not 0 < rho < m * (1 - m):
        raise RhoOutOfRange(f"rho={rho} outside (0, m(1-m)) = (0, {m * (1 - m)}) for m={m}")


@dataclass
class ClusterState:
    """Mutable per-fit state; cluster ``k`` is row ``k`` of every array.

    ``eta`` holds one ``(K, |T_d|)`` array per categorical feature and ``eta0``
    the matching global distributions.  Spreads are stored as variances so
    that forcing a variance (e.g. 0.5) is exact; ``sigma`` derives from them.
    ``masks`` is ``(K, D)`` bool in schema column order.
    """

    z: np.ndarray
    eta: list
    zeta: np.ndarray
    var: np.ndarray
    masks: np.ndarray
    eta0: list = field(default_factory=list)

    @property
    def K_plus(self) -> int:
        return self.masks.shape[0]

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.var)

    def copy(self) -> "ClusterState":
        return ClusterState(
            self.z.copy(),
            [e.copy() for e in self.eta],
            self.zeta.copy(),
            self.var.copy(),
            self.masks.copy(),
            [e.copy() for e in self.eta0],
        )


def smoothed_frequencies(codes, n_values: int, smoothing: float) -> np.ndarray:
    counts = np.bincount(codes, minlength=n_values).astype(np.float64)
    return (counts + smoothing) / (len(codes) + smoothing * n_values)


def global_categorical_means(data: Dataset, smoothing: float = DEFAULT_SMOOTHING) -> list:
    if data.N < 1:
        raise EmptyDataset("global means need at least one row")
    return [
        smoothed_frequencies(data.cat[:, j], int(t), smoothing)
        for j, t in enumerate(data.n_categories)
    ]


def _stats_for_rows(data: Dataset, idx, smoothing, sigma_min):
    eta = [
        smoothed_frequencies(data.cat[idx, j], int(t), smoothing)
        for j, t in enumerate(data.n_categories)
    ]
    x = data.num[idx]
    n_k = len(idx)
    zeta = x.sum(axis=0) / n_k
    if n_k == 1:
        var = np.ones(data.n_num)
    else:
        var = np.maximum(((x - zeta) ** 2).sum(axis=0) / n_k, sigma_min**2)
    return eta, zeta, var


def cluster_stats(
    data: Dataset,
    z,
    k: int,
    smoothing: float = DEFAULT_SMOOTHING,
    sigma_min: float = DEFAULT_SIGMA_MIN,
):
    """Smoothed categorical distributions, means and population spreads of cluster ``k``.

    Returns ``(eta_k, zeta_k, sigma_k)``; singletons get unit spread.
    """
    idx = np.flatnonzero(np.asarray(z) == k)
    if idx.size == 0:
        raise EmptyCluster(f"cluster {k} has no members")
    eta, zeta, var = _stats_for_rows(data, idx, smoothing, sigma_min)
    return eta, zeta, np.maximum(np.sqrt(var), sigma_min)


def members(z, K: int) -> list:
    """Row indices of each cluster, ascending, via one stable sort."""
    z = np.asarray(z)
    order = np.argsort(z, kind="stable")
    bounds = np.searchsorted(z[order], np.arange(K + 1))
    return [order[bounds[k] : bounds[k + 1]] for k in range(K)]


def all_cluster_stats(data: Dataset, z, K: int, smoothing, sigma_min):
    """Stats for clusters ``0..K-1`` as state-shaped arrays."""
    groups = members(z, K)
    etas, zetas, vars_ = [], [], []
    for k, idx in enumerate(groups):
        if idx.size == 0:
            raise EmptyCluster(f"cluster {k} has no members")
        eta, zeta, var = _stats_for_rows(data, idx, smoothing, sigma_min)
        etas.append(eta)
        zetas.append(zeta)
        vars_.append(var)
    eta = [np.array([e[j] for e in etas]) for j in range(data.n_cat)]
    zeta = np.array(zetas).reshape(K, data.n_num)
    var = np.array(vars_).reshape(K, data.n_num)
    return eta, zeta, var


def one_hot_row_eta(data: Dataset, n: int, smoothing: float) -> list:
    """Smoothed one-hot categorical distributions centred on row ``n``."""
    out = []
    for j, t in enumerate(data.n_categories):
        e = np.full(int(t), smoothing)
        e[data.cat[n, j]] += 1.0
        out.append(e / (1.0 + smoothing * t))
    return out


def compact(z, K: int):
    """Drop empty clusters, renumbering survivors in their original order.

    Returns ``(new_z, kept)`` where ``kept`` lists the surviving old ids.
    """
    z = np.asarray(z)
    counts = np.bincount(z, minlength=K)
    kept = np.flatnonzero(counts)
    remap = np.full(K, -1, dtype=np.int64)
    remap[kept] = np.arange(kept.size)
    return remap[z], kept
