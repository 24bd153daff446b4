"""Comparison algorithms: DP-means, DP-means(R), DP-RF and binary-entropy
clustering.

All four share the sequential sweep used by CRAFT: visit rows in order,
open a cluster at the current row when every existing cluster costs more
than the threshold, and refresh cluster parameters once per pass.
"""

from __future__ import annotations

import numpy as np

from .data import (
    NUMERIC,
    ClusterState,
    Column,
    Dataset,
    Schema,
    all_cluster_stats,
    auto_rho,
    compact,
)
from .engine import ClusteringResult, budget, compute_f_constants, new_cluster_feature_prob
from .errors import EmptyDataset, HyperparamError, NonBinaryFeature, NonNumericData

DEFAULT_MAX_ITERS = 100


def one_hot(data: Dataset) -> Dataset:
    """Expand every categorical column into 0/1 numeric indicator columns.

    Columns keep schema order; an expanded column ``c`` with category ``t``
    becomes ``"c=t"``.  Two rows that differ in ``c`` categorical features
    end up at squared distance ``2c``.
    """
    cols, blocks = [], []
    cat_pos = {int(d): j for j, d in enumerate(data.cat_features)}
    num_pos = {int(d): j for j, d in enumerate(data.num_features)}
    for d, col in enumerate(data.schema.columns):
        if d in cat_pos:
            j = cat_pos[d]
            codes = data.cat[:, j]
            for t, name in enumerate(col.categories):
                cols.append(Column(f"{col.name}={name}", NUMERIC))
                blocks.append((codes == t).astype(np.float64))
        else:
            cols.append(Column(col.name, NUMERIC))
            blocks.append(np.asarray(data.num[:, num_pos[d]], dtype=np.float64))
    num = np.column_stack(blocks) if blocks else np.zeros((data.N, 0))
    schema = Schema(tuple(cols), data.schema.label_column)
    return Dataset(schema, np.zeros((data.N, 0), np.int64), num, data.labels, data.label_names)


def _require_numeric(data: Dataset):
    if data.n_cat:
        raise NonNumericData(data.cat_names)
    if data.N < 1:
        raise EmptyDataset("cannot cluster an empty dataset")


def _sweep(N, params, column, spawn, refresh, threshold, max_iters, record):
    """Generic DP-means style loop.

    ``params`` holds one entry per cluster; ``column(p)`` gives the ``(N,)``
    cost of every row under cluster ``p``; ``spawn(n, params)`` builds a new
    cluster at row ``n``; ``refresh(z, K, kept_params)`` recomputes cluster
    parameters after a pass.  Returns ``(z, params, iterations, converged,
    history, trace)``: ``history`` lists per-pass assignment vectors (before
    compaction) if ``record`` is set, and ``trace`` the compacted
    ``(z, params)`` after every pass.
    """
    z_prev = np.full(N, -1, dtype=np.int64)
    history = [] if record else None
    converged = False
    iterations = 0
    trace = []
    for iterations in range(1, int(max_iters) + 1):
        params = list(params)
        cols = [column(p) for p in params]
        z = np.empty(N, dtype=np.int64)
        for n in range(N):
            costs = np.array([c[n] for c in cols])
            k = int(np.argmin(costs))
            if costs[k] > threshold:
                p = spawn(n, params)
                params.append(p)
                cols.append(column(p))
                k = len(params) - 1
            z[n] = k
        changed = not np.array_equal(z, z_prev)
        if record:
            history.append(z.copy())
        z, kept = compact(z, len(params))
        params = refresh(z, kept.size, [params[i] for i in kept])
        trace.append((z.copy(), list(params)))
        z_prev = z
        if not changed:
            converged = True
            break
    return z, params, iterations, converged, history, trace


# -- DP-means ----------------------------------------------------------------


def dpmeans_objective(data: Dataset, z, lam: float) -> float:
    """Sum of squared distances to cluster means plus ``lam`` per cluster."""
    z = np.asarray(z)
    K = int(z.max()) + 1
    _, zeta, _ = all_cluster_stats(data, z, K, 1.0, 1.0)
    return float(np.sum((data.num - zeta[z]) ** 2)) + lam * K


def dpmeans_fit(
    data: Dataset,
    lam: float,
    init: str = "mean",
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
    record_assignments: bool = False,
) -> ClusteringResult:
    """DP-means on all-numeric data.

    ``init="mean"`` starts from the global mean; ``init="random"`` (the
    DP-means(R) variant) starts from a seeded random row, drawn exactly as
    :func:`craft.engine.craft_fit` draws its first centre.
    """
    _require_numeric(data)
    if not lam >= 0:
        raise HyperparamError(f"lambda must be nonnegative, got {lam}")
    rng = np.random.default_rng(seed)
    if init == "mean":
        first = data.num.sum(axis=0) / data.N
    elif init == "random":
        first = data.num[int(rng.integers(data.N))].copy()
    else:
        raise HyperparamError(f"init must be 'mean' or 'random', got {init!r}")

    def column(c):
        return np.sum((data.num - c) ** 2, axis=1)

    def spawn(n, params):
        return data.num[n].copy()

    def refresh(z, K, kept):
        _, zeta, _ = all_cluster_stats(data, z, K, 1.0, 1.0)
        return list(zeta)

    z, params, iters, conv, hist, trace = _sweep(
        data.N, [first], column, spawn, refresh, lam, max_iters, record_assignments
    )
    objectives = [_centre_objective(data, zz, pp, lam) for zz, pp in trace]
    K = len(params)
    zeta = np.array(params).reshape(K, data.n_num)
    state = ClusterState(
        z=z,
        eta=[],
        zeta=zeta,
        var=np.full((K, data.n_num), 0.5),
        masks=np.ones((K, data.D), dtype=bool),
        eta0=[],
    )
    return ClusteringResult(
        state=state,
        objective=objectives[-1],
        iterations=iters,
        converged=conv,
        objective_trace=objectives,
        lam=float(lam),
        algorithm="dpmeans" if init == "mean" else "dpmeans-r",
        seed=int(seed),
        assignment_trace=hist,
    )


def _centre_objective(data, z, centres, lam):
    zeta = np.array(centres).reshape(len(centres), data.n_num)
    return float(np.sum((data.num - zeta[z]) ** 2)) + lam * len(centres)


# -- DP-RF -------------------------------------------------------------------


def dprf_fit(
    data: Dataset,
    lam: float,
    m: float,
    rho="auto",
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
    sigma_min: float = 1e-6,
    record_assignments: bool = False,
) -> ClusteringResult:
    """DP-means(R) with CRAFT's feature-selection term.

    Cost of row ``n`` in cluster ``k`` is ``sum_d v_kd (x_nd - zeta_kd)^2 +
    |v_k| F_delta``; a cluster opens above ``lam + D F0``.  After each pass
    every cluster keeps the ``round(m D)`` features with the lowest
    within-cluster variance.  ``m = 1`` means all features, with both
    constants taken as zero, which reproduces DP-means(R).
    """
    _require_numeric(data)
    if not lam >= 0:
        raise HyperparamError(f"lambda must be nonnegative, got {lam}")
    if not 0 < m <= 1:
        raise HyperparamError(f"m must lie in (0, 1], got {m}")
    D = data.D
    full = m == 1
    if full:
        F0 = F_delta = 0.0
        fc = None
    else:
        fc = compute_f_constants(m, auto_rho(m) if rho == "auto" else float(rho))
        F0, F_delta = fc.F0, fc.F_delta
    rng = np.random.default_rng(seed)
    centre = int(rng.integers(data.N))
    mask = np.ones(D, dtype=bool) if full else rng.random(D) < m
    first = (data.num[centre].copy(), mask)

    def column(p):
        c, v = p
        return np.sum((data.num - c) ** 2 * v, axis=1) + int(v.sum()) * F_delta

    def spawn(n, params):
        if full:
            v = np.ones(D, dtype=bool)
        else:
            v = rng.random(D) < new_cluster_feature_prob(np.array([p[1] for p in params]), fc)
        return (data.num[n].copy(), v)

    def refresh(z, K, kept):
        _, zeta, var = all_cluster_stats(data, z, K, 1.0, sigma_min)
        out = []
        for k in range(K):
            v = np.zeros(D, dtype=bool)
            v[np.argsort(var[k], kind="stable")[: budget(m, D)]] = True
            out.append((zeta[k], v))
        return out

    z, params, iters, conv, hist, trace = _sweep(
        data.N, [first], column, spawn, refresh, lam + D * F0, max_iters, record_assignments
    )

    def objective(zz, pp):
        cs = np.array([p[0] for p in pp]).reshape(len(pp), D)
        vs = np.array([p[1] for p in pp]).reshape(len(pp), D)
        fit = float(np.sum((data.num - cs[zz]) ** 2 * vs[zz]))
        return fit + (lam + D * F0) * len(pp) + float(vs.sum()) * F_delta

    objectives = [objective(zz, pp) for zz, pp in trace]
    K = len(params)
    _, _, var = all_cluster_stats(data, z, K, 1.0, sigma_min)
    state = ClusterState(
        z=z,
        eta=[],
        zeta=np.array([p[0] for p in params]).reshape(K, D),
        var=var,
        masks=np.array([p[1] for p in params]).reshape(K, D),
        eta0=[],
    )
    return ClusteringResult(
        state=state,
        objective=objectives[-1],
        iterations=iters,
        converged=conv,
        objective_trace=objectives,
        lam=float(lam),
        algorithm="dprf",
        seed=int(seed),
        assignment_trace=hist,
    )


# -- binary entropy ----------------------------------------------------------


def binary_entropy(p):
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log(p) + (1 - p) * np.log1p(-p))
    return np.where((p <= 0) | (p >= 1), 0.0, h)


def binary_discrepancy(x, mu):
    """``H(mu) + (mu - x) log(mu / (1 - mu))`` for binary ``x`` and ``mu`` in (0, 1).

    Summed over a cluster at its own mean this equals ``N_k H(mu)``.
    """
    x = np.asarray(x, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    out = binary_entropy(mu) + (mu - x) * (np.log(mu) - np.log1p(-mu))
    return out if out.ndim else float(out)


def _binary_matrix(data: Dataset) -> np.ndarray:
    if data.N < 1:
        raise EmptyDataset("cannot cluster an empty dataset")
    if data.n_num:
        raise NonBinaryFeature(f"numeric columns present: {data.num_names}")
    wide = [name for name, t in zip(data.cat_names, data.n_categories) if t != 2]
    if wide:
        raise NonBinaryFeature(f"columns with more than two categories: {wide}")
    return data.cat.astype(np.float64)


def binary_entropy_fit(
    data: Dataset,
    lam: float,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
    smoothing: float = 1e-6,
    record_assignments: bool = False,
) -> ClusteringResult:
    """Hard clustering of binary data by total within-cluster entropy.

    A feature's value is its category code (0 or 1).  Cluster means are
    clamped to ``[smoothing, 1 - smoothing]`` so the log-odds stay finite;
    the reported objective is the summed discrepancy plus ``lam K``, which
    equals ``sum_k N_k sum_d H(mu_kd) + lam K`` up to that clamp.
    """
    X = _binary_matrix(data)
    if not lam >= 0:
        raise HyperparamError(f"lambda must be nonnegative, got {lam}")
    if not 0 < smoothing < 0.5:
        raise HyperparamError("smoothing must lie in (0, 0.5)")
    rng = np.random.default_rng(seed)

    def clamp(mu):
        return np.clip(mu, smoothing, 1 - smoothing)

    first = clamp(X[int(rng.integers(data.N))])

    def column(mu):
        return binary_discrepancy(X, mu[None, :]).sum(axis=1)

    def spawn(n, params):
        return clamp(X[n].copy())

    def refresh(z, K, kept):
        counts = np.bincount(z, minlength=K).astype(np.float64)
        sums = np.zeros((K, X.shape[1]))
        np.add.at(sums, z, X)
        return list(clamp(sums / counts[:, None]))

    z, params, iters, conv, hist, trace = _sweep(
        data.N, [first], column, spawn, refresh, lam, max_iters, record_assignments
    )

    def objective(zz, pp):
        mu = np.array(pp).reshape(len(pp), X.shape[1])
        return float(binary_discrepancy(X, mu[zz]).sum()) + lam * len(pp)

    objectives = [objective(zz, pp) for zz, pp in trace]
    K = len(params)
    mu = np.array(params).reshape(K, X.shape[1])
    state = ClusterState(
        z=z,
        eta=[np.column_stack([1 - mu[:, d], mu[:, d]]) for d in range(X.shape[1])],
        zeta=np.zeros((K, 0)),
        var=np.zeros((K, 0)),
        masks=np.ones((K, data.D), dtype=bool),
        eta0=[],
    )
    return ClusteringResult(
        state=state,
        objective=objectives[-1],
        iterations=iters,
        converged=conv,
        objective_trace=objectives,
        lam=float(lam),
        algorithm="binary-entropy",
        seed=int(seed),
        assignment_trace=hist,
    )


def entropy_objective(data: Dataset, z, lam: float) -> float:
    """``sum_k N_k sum_d H(mu*_kd) + lam K`` with unclamped cluster means."""
    X = _binary_matrix(data)
    z = np.asarray(z)
    K = int(z.max()) + 1
    total = 0.0
    for k in range(K):
        rows = X[z == k]
        if len(rows):
            total += len(rows) * float(binary_entropy(rows.mean(axis=0)).sum())
    return total + lam * K
