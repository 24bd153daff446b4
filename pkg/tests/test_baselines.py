import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import categorical_dataset, mixed_dataset, numeric_dataset
from craft.baselines import (
    binary_discrepancy,
    binary_entropy_fit,
    dpmeans_fit,
    dpmeans_objective,
    dprf_fit,
    entropy_objective,
    one_hot,
)
from craft.data import Hyperparams
from craft.engine import compute_f_constants, craft_fit
from craft.errors import NonBinaryFeature, NonNumericData

# -- one-hot -----------------------------------------------------------------


def test_one_hot_layout():
    data = mixed_dataset([[0], [2]], [3], [[1.5], [2.5]], order="nc")
    enc = one_hot(data)
    assert enc.schema.names == ["x0", "c0=0", "c0=1", "c0=2"]
    assert enc.num.tolist() == [[1.5, 1.0, 0.0, 0.0], [2.5, 0.0, 0.0, 1.0]]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_one_hot_squared_distance_is_twice_mismatches(d, seed):
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, 3, size=(2, d))
    enc = one_hot(categorical_dataset(codes, 3))
    c = int((codes[0] != codes[1]).sum())
    assert float(np.sum((enc.num[0] - enc.num[1]) ** 2)) == 2 * c


# -- DP-means ----------------------------------------------------------------


def test_dpmeans_two_groups_from_global_mean():
    data = numeric_dataset([0.0, 0.1, 10.0, 10.1])
    res = dpmeans_fit(data, 4.0, init="mean")
    assert res.k == 2
    assert sorted(res.state.zeta[:, 0]) == pytest.approx([0.05, 10.05])
    assert res.converged


def test_dpmeans_huge_lambda():
    data = numeric_dataset(np.random.default_rng(0).normal(size=(20, 3)))
    res = dpmeans_fit(data, 1e12, init="random", seed=1)
    assert res.k == 1
    assert res.state.zeta[0] == pytest.approx(data.num.mean(axis=0))


def test_dpmeans_single_point():
    res = dpmeans_fit(numeric_dataset([[3.0, 4.0]]), 2.5)
    assert res.k == 1 and res.objective == 2.5


def test_dpmeans_rejects_categorical():
    with pytest.raises(NonNumericData) as err:
        dpmeans_fit(categorical_dataset([0, 1]), 1.0)
    assert err.value.columns == ["c0"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 30), st.sampled_from(["mean", "random"]))
def test_dpmeans_objective_never_increases(seed, lam, init):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(25, 2)) + rng.integers(0, 3, size=(25, 1)) * 3
    res = dpmeans_fit(numeric_dataset(X), lam, init=init, seed=seed)
    trace = res.objective_trace
    assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))
    assert res.objective == pytest.approx(dpmeans_objective(numeric_dataset(X), res.assignments, lam))


@pytest.mark.parametrize("seed", range(10))
def test_craft_degenerates_to_dpmeans_r(seed):
    rng = np.random.default_rng(100 + seed)
    N, D = int(rng.integers(10, 40)), int(rng.integers(1, 4))
    X = rng.normal(size=(N, D)) + rng.integers(0, 3, size=(N, 1)) * 4
    data = numeric_dataset(X)
    hp = Hyperparams(lam=float(rng.uniform(2, 20)), m=0.5, seed=seed)
    craft = craft_fit(data, hp, full_masks=True, fixed_variance=0.5, record_assignments=True)
    fc = compute_f_constants(hp.m, hp.resolved_rho)
    dp = dpmeans_fit(data, hp.lam + D * fc.F0, init="random", seed=seed, record_assignments=True)
    assert len(craft.assignment_trace) == len(dp.assignment_trace)
    for a, b in zip(craft.assignment_trace, dp.assignment_trace):
        assert np.array_equal(a, b)


# -- DP-RF -------------------------------------------------------------------


def test_dprf_full_budget_is_dpmeans_r():
    X = np.random.default_rng(3).normal(size=(30, 3)) * 3
    data = numeric_dataset(X)
    a = dprf_fit(data, 6.0, 1.0, seed=4, record_assignments=True)
    b = dpmeans_fit(data, 6.0, init="random", seed=4, record_assignments=True)
    for x, y in zip(a.assignment_trace, b.assignment_trace):
        assert np.array_equal(x, y)
    assert a.masks.all()


def test_dprf_half_budget_is_masked_euclidean():
    X = np.random.default_rng(5).normal(size=(20, 4))
    data = numeric_dataset(X)
    res = dprf_fit(data, 5.0, 0.5, seed=2)
    assert compute_f_constants(0.5, 0.24).F_delta == 0.0
    v, c = res.masks, res.state.zeta
    fit = sum(float(np.sum((X[n] - c[k]) ** 2 * v[k])) for n, k in enumerate(res.assignments))
    fc = compute_f_constants(0.5, 0.24)
    assert res.objective == pytest.approx(fit + (5.0 + 4 * fc.F0) * res.k, rel=1e-12)


def dprf_toy():
    rng = np.random.default_rng(7)
    n = 40
    informative = np.repeat([[0.0, 0.0], [20.0, 20.0]], n // 2, axis=0) + rng.normal(scale=0.3, size=(n, 2))
    noise = rng.normal(scale=5.0, size=(n, 2))
    return np.column_stack([informative[:, 0], noise[:, 0], informative[:, 1], noise[:, 1]])


def best_masked_pair(rows):
    """Budget-2 mask with the smallest within-cluster masked squared error."""
    def cost(mask):
        sub = rows[:, list(mask)]
        return float(np.sum((sub - sub.mean(axis=0)) ** 2))

    return min(itertools.combinations(range(4), 2), key=cost)


@pytest.mark.parametrize("seed", [0, 2])
def test_dprf_selects_informative_features(seed):
    X = dprf_toy()
    res = dprf_fit(numeric_dataset(X), 400.0, 0.5, seed=seed)
    assert res.k == 2
    assert sorted(np.bincount(res.assignments).tolist()) == [20, 20]
    for k in range(2):
        assert res.masks[k].tolist() == [True, False, True, False]
        assert best_masked_pair(X[res.assignments == k]) == (0, 2)


@pytest.mark.parametrize("seed", range(6))
def test_dprf_masks_minimise_masked_error(seed):
    X = dprf_toy()
    res = dprf_fit(numeric_dataset(X), 400.0, 0.5, seed=seed)
    for k in range(res.k):
        chosen = tuple(np.flatnonzero(res.masks[k]))
        assert chosen == best_masked_pair(X[res.assignments == k])


# -- binary entropy ----------------------------------------------------------


def test_binary_discrepancy_at_half():
    assert binary_discrepancy(0, 0.5) == pytest.approx(math.log(2))
    assert binary_discrepancy(1, 0.5) == pytest.approx(math.log(2))


def test_binary_discrepancy_cluster_total():
    total = sum(binary_discrepancy(x, 1 / 3) for x in (0, 0, 1))
    h = -(1 / 3) * math.log(1 / 3) - (2 / 3) * math.log(2 / 3)
    assert total == pytest.approx(3 * h, abs=1e-12)
    assert round(total, 4) == 1.9095


def test_binary_discrepancy_perfect_fit_limit():
    vals = [binary_discrepancy(1, 1 - 10.0**-e) for e in (2, 4, 8)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_binary_identity_at_cluster_mean(xs):
    mu = sum(xs) / len(xs)
    if mu in (0.0, 1.0):
        return
    total = float(np.sum(binary_discrepancy(np.array(xs), mu)))
    assert abs(total - len(xs) * oracles.binary_entropy(mu)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1), st.floats(1e-6, 1 - 1e-6))
def test_binary_discrepancy_nonnegative(x, mu):
    assert binary_discrepancy(x, mu) >= -1e-15


def test_binary_entropy_huge_lambda():
    X = np.random.default_rng(0).integers(0, 2, size=(30, 4))
    data = categorical_dataset(X)
    lam = 1e9
    res = binary_entropy_fit(data, lam, seed=3)
    assert res.k == 1
    want = 30 * sum(oracles.binary_entropy(p) for p in X.mean(axis=0)) + lam
    assert res.objective == pytest.approx(want, rel=1e-12)


def test_binary_entropy_duplicates():
    data = categorical_dataset(np.tile([1, 0, 1], (6, 1)))
    res = binary_entropy_fit(data, 0.5, seed=0)
    assert res.k == 1
    assert res.objective - 0.5 < 1e-4


def test_binary_entropy_rejects_wide_or_numeric():
    with pytest.raises(NonBinaryFeature):
        binary_entropy_fit(categorical_dataset([0, 2, 1], 3), 1.0)
    with pytest.raises(NonBinaryFeature):
        binary_entropy_fit(numeric_dataset([0.0, 1.0]), 1.0)


def planted_binary(seed):
    """Two noise-free blocks of four rows, shuffled by ``seed``."""
    block = np.array([[1, 1, 0]] * 4 + [[0, 0, 1]] * 4)
    return block[np.random.default_rng(seed).permutation(8)]


def best_two_partition(X, lam):
    best, arg = math.inf, None
    for bits in itertools.product([0, 1], repeat=len(X) - 1):
        z = (0,) + bits
        if len(set(z)) < 2:
            continue
        val = oracles.entropy_partition_objective(X.tolist(), z, lam)
        if val < best - 1e-12:
            best, arg = val, z
    return best, arg


def same_partition(a, b):
    pairs = set(zip(map(int, a), map(int, b)))
    return len(pairs) == len({p[0] for p in pairs}) == len({p[1] for p in pairs})


@pytest.mark.parametrize("seed", range(10))
def test_binary_entropy_matches_exhaustive_two_partition(seed):
    X = planted_binary(seed)
    # one cluster costs 24 ln 2 = 16.6 in entropy, so two beat one for lam < 16.6
    lam = 5.0
    data = categorical_dataset(X)
    res = binary_entropy_fit(data, lam, seed=seed)
    best, arg = best_two_partition(X, lam)
    assert res.k == 2
    assert same_partition(res.assignments, arg)
    assert entropy_objective(data, res.assignments, lam) == pytest.approx(best, abs=1e-9)
    # clamped means leave at most H(smoothing) per entry
    slack = X.size * oracles.binary_entropy(1e-6)
    assert 0 <= res.objective - best <= slack + 1e-12
    tight = binary_entropy_fit(data, lam, seed=seed, smoothing=1e-9)
    assert abs(tight.objective - best) < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_binary_entropy_noisy_result_is_a_fixed_point(seed):
    rng = np.random.default_rng(seed)
    block = np.array([[1, 1, 0]] * 4 + [[0, 0, 1]] * 4)
    X = np.where(rng.random(block.shape) < 0.1, 1 - block, block)
    res = binary_entropy_fit(categorical_dataset(X), 20.0, seed=seed)
    mu = np.column_stack([e[:, 1] for e in res.state.eta])
    costs = np.array([[binary_discrepancy(X[n], mu[k]).sum() for k in range(res.k)] for n in range(8)])
    assert res.converged
    assert np.array_equal(costs.argmin(axis=1), res.assignments)
