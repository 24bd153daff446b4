import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from craft.errors import LengthMismatch
from craft.metrics import contingency, mask_recovery, nmi, purity


def test_purity_identical_partitions():
    assert purity([3, 3, 7, 7], ["a", "a", "b", "b"]) == 1.0


def test_purity_by_hand():
    assert purity([1, 1, 1, 2], ["A", "A", "B", "B"]) == 0.75


@pytest.mark.parametrize("L", [2, 3, 5])
def test_purity_single_cluster_even_labels(L):
    assert purity([0] * (4 * L), [j for j in range(L) for _ in range(4)]) == pytest.approx(1 / L)


def test_nmi_identical():
    assert nmi([1, 1, 2, 2, 3], ["x", "x", "y", "y", "z"]) == pytest.approx(1.0)


def test_nmi_independent():
    assert nmi([1, 1, 2, 2], ["A", "B", "A", "B"]) == pytest.approx(0.0, abs=1e-15)


def test_nmi_two_by_two_against_oracle():
    pred, truth = [1, 1, 2, 2], ["A", "A", "A", "B"]
    assert nmi(pred, truth) == pytest.approx(oracles.nmi(pred, truth), abs=1e-12)


def test_nmi_zero_entropy_conventions():
    assert nmi([0, 0, 0], [5, 5, 5]) == 1.0
    assert nmi([0, 0, 0], [1, 2, 1]) == 0.0
    assert nmi([0, 1, 2], [4, 4, 4]) == 0.0


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        purity([0, 1], [0])
    with pytest.raises(LengthMismatch):
        nmi([], [])


def test_contingency_layout():
    assert contingency(["b", "a", "b"], [2, 2, 1]).tolist() == [[0, 1], [1, 1]]


def test_mask_recovery_by_hand():
    planted = [[1, 1, 0, 0], [0, 0, 1, 1]]
    recovered = [[1, 1, 1, 0], [0, 0, 1, 1]]
    assert mask_recovery(planted, recovered) == pytest.approx((2 / 3 + 1) / 2)


def test_mask_recovery_permutation():
    planted = np.array([[1, 1, 0, 0, 0], [0, 0, 1, 1, 0], [0, 0, 0, 0, 1]], bool)
    assert mask_recovery(planted, planted[[2, 0, 1]]) == 1.0


def test_mask_recovery_complement():
    planted = np.array([[1, 1, 0, 0, 0, 0]] * 2, bool)
    assert mask_recovery(planted, ~planted) == 0.0
    assert mask_recovery(planted[:1], ~planted[:1]) == 0.0


def test_mask_recovery_unmatched_score_zero():
    planted = [[1, 0], [0, 1]]
    assert mask_recovery(planted, [[1, 0]]) == 0.5


def test_mask_recovery_width_mismatch():
    with pytest.raises(LengthMismatch):
        mask_recovery([[1, 0]], [[1, 0, 0]])


def random_pair(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    pred = rng.integers(0, int(rng.integers(1, 6)), n)
    truth = rng.integers(0, int(rng.integers(1, 6)), n)
    return rng, pred, truth


def test_randomised_bounds_symmetry_and_relabelling():
    for seed in range(1000):
        rng, pred, truth = random_pair(seed)
        p, q = purity(pred, truth), nmi(pred, truth)
        assert 0 <= p <= 1 and 0 <= q <= 1
        assert nmi(truth, pred) == pytest.approx(q, abs=1e-12)
        relabel_pred = rng.permutation(10)[pred]
        relabel_truth = np.array(["l%d" % v for v in rng.permutation(10)])[truth]
        assert purity(relabel_pred, relabel_truth) == p
        assert nmi(relabel_pred, relabel_truth) == pytest.approx(q, abs=1e-12)
        if len(set(pred)) > 1 and len(set(truth)) > 1:
            assert q == pytest.approx(oracles.nmi(pred.tolist(), truth.tolist()), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_purity_non_decreasing_under_split(seed):
    rng, pred, truth = random_pair(seed)
    target = int(rng.choice(pred))
    split = pred.copy()
    members = np.flatnonzero(pred == target)
    moved = members[rng.random(members.size) < 0.5]
    split[moved] = pred.max() + 1
    assert purity(split, truth) >= purity(pred, truth)
