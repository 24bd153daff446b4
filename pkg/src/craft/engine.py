"""CRAFT: clustering with cluster-specific feature selection on mixed data.

The objective summed over clusters ``k`` and their members ``n`` is::

    sum_{d in Num} v_kd (x_nd - zeta_kd)^2 / (2 sigma_kd^2)
  + sum_{d in Cat} [ v_kd  * -log eta_kd(x_nd)
                   + (1 - v_kd) * -log eta0_d(x_nd) ]
  + (lam + D F0) K  +  (sum_kd v_kd) F_delta

where ``F0`` and ``F_delta`` come from the Beta prior on feature-selection
probabilities (mean ``m``, variance ``rho``).  :func:`craft_fit` minimises
it with a DP-means style sweep: assign or open clusters point by point,
then refresh statistics and feature masks once per pass.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .data import (
    DEFAULT_SIGMA_MIN,
    DEFAULT_SMOOTHING,
    ClusterState,
    Dataset,
    Hyperparams,
    all_cluster_stats,
    check_rho,
    compact,
    global_categorical_means,
    members,
    one_hot_row_eta,
)
from .errors import EmptyCluster, EmptyDataset, HyperparamError, RhoOutOfRange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FConstants:
    a0: float
    b0: float
    a1: float
    b1: float
    F0: float
    F1: float
    F_delta: float


def _xlogx(x):
    return x * math.log(x)


def _beta_entropy_term(a, b):
    # (a+b) log(a+b) - a log a - b log b, grouped so swapping a and b is exact
    return _xlogx(a + b) - (_xlogx(a) + _xlogx(b))


def compute_f_constants(m: float, rho: float) -> FConstants:
    """Selection-prior constants; they depend on ``(m, rho)`` only."""
    if not 0 < m < 1:
        raise RhoOutOfRange(f"m={m} must lie in (0, 1)")
    check_rho(m, rho)
    # a0 = m^2(1-m)/rho - m and b0 = m(1-m)^2/rho + m, written via
    # S = a0 + b0 so that m = 1/2 gives a0 == b1 and a1 == b0 bit for bit
    shrink = m * (1 - m) / rho - 1
    a0 = m * shrink
    b1 = (1 - m) * shrink
    a1 = a0 + 1
    b0 = b1 + 1
    F0 = _beta_entropy_term(a0, b0)
    F1 = _beta_entropy_term(a1, b1)
    return FConstants(a0, b0, a1, b1, F0, F1, F1 - F0)


def nu_point_estimate(m: float, rho: float, v: int) -> float:
    """Posterior-mean selection probability for a feature with indicator ``v``."""
    check_rho(m, rho)
    return m + (v - m) * rho / (m * (1 - m))


def new_cluster_feature_prob(masks, fc: FConstants) -> np.ndarray:
    """Per-feature probability of selection in a freshly opened cluster.

    ``masks`` is the ``(K, D)`` indicator matrix of the existing clusters.
    """
    masks = np.atleast_2d(np.asarray(masks, dtype=np.float64))
    K = masks.shape[0]
    return (K * fc.a0 + masks.sum(axis=0)) / (K * (fc.a0 + fc.b0))


# -- costs -------------------------------------------------------------------


def _cat_tables(data: Dataset, eta, masks, eta0):
    """Per categorical feature, a ``(K, |T_d|)`` table of -log probabilities
    under the cluster distribution (selected) or the global one (not)."""
    tables = []
    for j, d in enumerate(data.cat_features):
        sel = masks[:, d][:, None]
        tables.append(np.where(sel, -np.log(eta[j]), -np.log(eta0[j])[None, :]))
    return tables


def _discrepancy(data: Dataset, eta, zeta, var, masks, eta0) -> np.ndarray:
    """``(N, K)`` data-fit cost of every row under every cluster (no F terms)."""
    masks = np.asarray(masks, dtype=bool)
    K = masks.shape[0]
    out = np.zeros((data.N, K))
    if data.n_num:
        w = masks[:, data.num_features] / (2.0 * var)
        for k in range(K):
            out[:, k] = np.sum((data.num - zeta[k]) ** 2 * w[k], axis=1)
    for j, table in enumerate(_cat_tables(data, eta, masks, eta0)):
        out += table[:, data.cat[:, j]].T
    return out


def cost_matrix(data: Dataset, state: ClusterState, fc: FConstants) -> np.ndarray:
    """``d_nk`` for every row and cluster, including the per-point feature term."""
    disc = _discrepancy(data, state.eta, state.zeta, state.var, state.masks, state.eta0)
    return disc + state.masks.sum(axis=1) * fc.F_delta


def point_cost(data: Dataset, n: int, k: int, state: ClusterState, fc: FConstants) -> float:
    mask = state.masks[k]
    total = 0.0
    if data.n_num:
        v = mask[data.num_features]
        diff = data.num[n] - state.zeta[k]
        total += float(np.sum(diff**2 * (v / (2.0 * state.var[k]))))
    for j, d in enumerate(data.cat_features):
        t = data.cat[n, j]
        p = state.eta[j][k, t] if mask[d] else state.eta0[j][t]
        total += -math.log(p)
    return total + int(mask.sum()) * fc.F_delta


def objective_value(data: Dataset, state: ClusterState, lam: float, fc: FConstants) -> float:
    disc = _discrepancy(data, state.eta, state.zeta, state.var, state.masks, state.eta0)
    fit = float(disc[np.arange(data.N), state.z].sum())
    K = state.K_plus
    return fit + (lam + data.D * fc.F0) * K + float(state.masks.sum()) * fc.F_delta


def build_state(data: Dataset, z, masks, smoothing=DEFAULT_SMOOTHING, sigma_min=DEFAULT_SIGMA_MIN) -> ClusterState:
    """State for the given assignments and masks with statistics recomputed."""
    z = np.asarray(z, dtype=np.int64)
    masks = np.atleast_2d(np.asarray(masks, dtype=bool)).copy()
    eta, zeta, var = all_cluster_stats(data, z, masks.shape[0], smoothing, sigma_min)
    return ClusterState(z, eta, zeta, var, masks, global_categorical_means(data, smoothing))


# -- feature selection -------------------------------------------------------


def budget(m: float, size: int) -> int:
    """``m * size`` rounded half-up, clamped to ``[0, size]``."""
    return int(min(size, max(0, math.floor(m * size + 0.5))))


def _gains(data: Dataset, idx, eta_k, eta0):
    """Arrays ``G_d`` and ``G_kd`` over categorical features for rows ``idx``."""
    G = np.empty(data.n_cat)
    Gk = np.empty(data.n_cat)
    for j in range(data.n_cat):
        codes = data.cat[idx, j]
        G[j] = -np.log(eta0[j][codes]).sum()
        Gk[j] = -np.log(eta_k[j][codes]).sum()
    return G, Gk


def g_values(data: Dataset, z, k: int, d: int, state: ClusterState):
    """``(G_d, G_kd)`` for schema feature ``d`` (categorical) over cluster ``k``."""
    idx = np.flatnonzero(np.asarray(z) == k)
    if idx.size == 0:
        raise EmptyCluster(f"cluster {k} has no members")
    j = int(np.flatnonzero(data.cat_features == d)[0])
    codes = data.cat[idx, j]
    return (
        float(-np.log(state.eta0[j][codes]).sum()),
        float(-np.log(state.eta[j][k][codes]).sum()),
    )


def _select_fixed(data, idx, eta_k, var_k, eta0, m) -> np.ndarray:
    mask = np.zeros(data.D, dtype=bool)
    if data.n_num:
        b = budget(m, data.n_num)
        pick = np.argsort(var_k, kind="stable")[:b]
        mask[data.num_features[pick]] = True
    if data.n_cat:
        b = budget(m, data.n_cat)
        G, Gk = _gains(data, idx, eta_k, eta0)
        pick = np.argsort(-(G - Gk), kind="stable")[:b]
        mask[data.cat_features[pick]] = True
    return mask


def _select_approx(data, idx, eta_k, var_k, eta0, eps_c, eps_v) -> np.ndarray:
    mask = np.zeros(data.D, dtype=bool)
    if data.n_num:
        mask[data.num_features] = var_k < eps_v
    if data.n_cat:
        G, Gk = _gains(data, idx, eta_k, eta0)
        mask[data.cat_features] = (G - Gk) > eps_c * G
    return mask


def _cluster_view(state: ClusterState, k: int):
    return [e[k] for e in state.eta], state.var[k]


def select_features_fixed(state: ClusterState, data: Dataset, k: int, m: float) -> np.ndarray:
    """Keep the ``m`` share of numeric features with the smallest spread and of
    categorical features with the largest gain ``G_d - G_kd``; ties go to the
    lower feature index."""
    idx = np.flatnonzero(state.z == k)
    eta_k, var_k = _cluster_view(state, k)
    return _select_fixed(data, idx, eta_k, var_k, state.eta0, m)


def select_features_approx(
    state: ClusterState, data: Dataset, k: int, eps_c: float, eps_v: float
) -> np.ndarray:
    """Keep categorical features with ``G_d - G_kd > eps_c G_d`` and numeric
    features with variance below ``eps_v``."""
    idx = np.flatnonzero(state.z == k)
    eta_k, var_k = _cluster_view(state, k)
    return _select_approx(data, idx, eta_k, var_k, state.eta0, eps_c, eps_v)


# -- fitting -----------------------------------------------------------------


@dataclass
class ClusteringResult:
    state: ClusterState
    objective: float
    iterations: int
    converged: bool
    objective_trace: list
    lam: float
    algorithm: str = "craft"
    seed: int = 0
    assignment_trace: Optional[list] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.state.K_plus

    @property
    def assignments(self) -> np.ndarray:
        return self.state.z

    @property
    def masks(self) -> np.ndarray:
        return self.state.masks


class _Pass:
    """Accumulates clusters opened during one assignment sweep."""

    def __init__(self, data, state, fc):
        self.data = data
        self.eta = [list(e) for e in state.eta]
        self.zeta = list(state.zeta)
        self.var = list(state.var)
        self.masks = list(state.masks)
        self.eta0 = state.eta0
        self.fc = fc
        costs = cost_matrix(data, state, fc)
        self.cols = [costs[:, k] for k in range(state.K_plus)]

    @property
    def K(self):
        return len(self.masks)

    def open(self, eta, zeta, var, mask):
        for j, e in enumerate(eta):
            self.eta[j].append(e)
        self.zeta.append(zeta)
        self.var.append(var)
        self.masks.append(mask)
        disc = _discrepancy(
            self.data,
            [e[None] for e in eta],
            zeta[None],
            var[None],
            mask[None],
            self.eta0,
        )[:, 0]
        self.cols.append(disc + int(mask.sum()) * self.fc.F_delta)

    def costs_for(self, n):
        return np.array([c[n] for c in self.cols])


def _initial_state(data: Dataset, center: int, mask, eta0, smoothing, var0) -> ClusterState:
    return ClusterState(
        z=np.zeros(data.N, dtype=np.int64),
        eta=[e[None] for e in one_hot_row_eta(data, center, smoothing)],
        zeta=data.num[center][None].copy(),
        var=np.full((1, data.n_num), var0),
        masks=np.asarray(mask, dtype=bool)[None].copy(),
        eta0=eta0,
    )


def craft_fit(
    data: Dataset,
    hp: Hyperparams,
    *,
    full_masks: bool = False,
    fixed_variance: Optional[float] = None,
    record_assignments: bool = False,
) -> ClusteringResult:
    """Fit CRAFT with fixed- or approximate-budget feature selection.

    ``full_masks`` and ``fixed_variance`` pin every mask to all ones and
    every numeric variance to a constant; together (variance 0.5) they give
    the DP-means degenerate case.

    Random draws, in order: the initial centre row, the first cluster's
    mask, then one mask per newly opened cluster.
    """
    if data.N < 1:
        raise EmptyDataset("cannot cluster an empty dataset")
    hp.check_thresholds(data)
    N, D = data.N, data.D
    fc = compute_f_constants(hp.m, hp.resolved_rho)
    threshold = hp.lam + D * fc.F0
    rng = np.random.default_rng(hp.seed)
    var0 = 1.0 if fixed_variance is None else float(fixed_variance)

    eta0 = global_categorical_means(data, hp.smoothing)
    center = int(rng.integers(N))
    mask = rng.random(D) < hp.m
    if full_masks:
        mask[:] = True
    state = _initial_state(data, center, mask, eta0, hp.smoothing, var0)

    z_prev = np.full(N, -1, dtype=np.int64)
    trace, history = [], [] if record_assignments else None
    converged = False
    iterations = 0
    for iterations in range(1, int(hp.max_iters) + 1):
        sweep = _Pass(data, state, fc)
        z = np.empty(N, dtype=np.int64)
        for n in range(N):
            costs = sweep.costs_for(n)
            k = int(np.argmin(costs))
            if costs[k] > threshold:
                probs = new_cluster_feature_prob(np.array(sweep.masks), fc)
                new_mask = rng.random(D) < probs
                if full_masks:
                    new_mask[:] = True
                sweep.open(
                    one_hot_row_eta(data, n, hp.smoothing),
                    data.num[n].copy(),
                    np.full(data.n_num, var0),
                    new_mask,
                )
                k = sweep.K - 1
            z[n] = k
        changed = not np.array_equal(z, z_prev)
        if record_assignments:
            history.append(z.copy())

        z, kept = compact(z, sweep.K)
        state = _refresh(data, z, np.array(sweep.masks)[kept], eta0, hp, var0 if fixed_variance is not None else None, full_masks)
        trace.append(objective_value(data, state, hp.lam, fc))
        logger.debug("pass %d: K=%d objective=%.6f", iterations, state.K_plus, trace[-1])
        z_prev = z
        if not changed:
            converged = True
            break

    return ClusteringResult(
        state=state,
        objective=trace[-1],
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
        lam=hp.lam,
        algorithm="craft",
        seed=int(hp.seed),
        assignment_trace=history,
    )


def restart_seeds(seed: int, n_init: int) -> list:
    """``seed`` itself followed by ``n_init - 1`` seeds spawned from it."""
    if int(n_init) < 1:
        raise HyperparamError(f"n_init must be a positive integer, got {n_init}")
    children = np.random.SeedSequence(int(seed)).spawn(int(n_init) - 1)
    return [int(seed)] + [int(c.generate_state(1, np.uint64)[0]) for c in children]


def craft_fit_best(data: Dataset, hp: Hyperparams, n_init: int = 1, **kwargs) -> ClusteringResult:
    """Run :func:`craft_fit` from ``n_init`` seeds and keep the lowest objective.

    The first run uses ``hp.seed`` unchanged, so ``n_init=1`` is a plain fit.
    Ties keep the earlier run.  The returned result records the seed that won.
    """
    best = None
    for s in restart_seeds(hp.seed, n_init):
        res = craft_fit(data, replace(hp, seed=s), **kwargs)
        if best is None or res.objective < best.objective:
            best = res
    return best


def _refresh(data, z, masks, eta0, hp: Hyperparams, fixed_variance, full_masks) -> ClusterState:
    K = masks.shape[0]
    eta, zeta, var = all_cluster_stats(data, z, K, hp.smoothing, hp.sigma_min)
    if fixed_variance is not None:
        var = np.full_like(var, fixed_variance)
    state = ClusterState(z, eta, zeta, var, masks.copy(), eta0)
    if full_masks:
        state.masks[:] = True
        return state
    groups = members(z, K)
    for k, idx in enumerate(groups):
        eta_k, var_k = _cluster_view(state, k)
        if hp.mode == "fixed":
            state.masks[k] = _select_fixed(data, idx, eta_k, var_k, eta0, hp.m)
        else:
            state.masks[k] = _select_approx(data, idx, eta_k, var_k, eta0, hp.eps_c, hp.eps_v)
    return state
