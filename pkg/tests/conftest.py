import numpy as np
import pytest
from hypothesis import strategies as st

from craft.data import CATEGORICAL, NUMERIC, Column, Dataset, Schema


def numeric_dataset(X, labels=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    cols = tuple(Column(f"x{d}", NUMERIC) for d in range(X.shape[1]))
    schema = Schema(cols, "label" if labels is not None else None)
    names = tuple(str(v) for v in sorted(set(labels))) if labels is not None else ()
    return Dataset(schema, np.zeros((X.shape[0], 0), np.int64), X, labels, names)


def categorical_dataset(codes, n_values=2):
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim == 1:
        codes = codes[:, None]
    if np.ndim(n_values) == 0:
        n_values = [n_values] * codes.shape[1]
    cols = tuple(
        Column(f"c{d}", CATEGORICAL, tuple(str(t) for t in range(n)))
        for d, n in enumerate(n_values)
    )
    return Dataset(Schema(cols), codes, np.zeros((codes.shape[0], 0)))


def mixed_dataset(codes, n_values, X, order=None):
    """Categorical then numeric columns, or interleaved per ``order`` (a
    string of 'c'/'n')."""
    codes = np.asarray(codes, dtype=np.int64).reshape(len(X), -1)
    X = np.asarray(X, dtype=np.float64).reshape(codes.shape[0], -1)
    order = order or "c" * codes.shape[1] + "n" * X.shape[1]
    cols, ci, ni = [], 0, 0
    for kind in order:
        if kind == "c":
            n = n_values[ci]
            cols.append(Column(f"c{ci}", CATEGORICAL, tuple(str(t) for t in range(n))))
            ci += 1
        else:
            cols.append(Column(f"x{ni}", NUMERIC))
            ni += 1
    return Dataset(Schema(tuple(cols)), codes, X)


@st.composite
def tiny_mixed(draw, max_n=8, max_d=5, max_k=3):
    """A small mixed dataset together with an assignment vector and masks."""
    n = draw(st.integers(2, max_n))
    d = draw(st.integers(1, max_d))
    order = "".join(draw(st.lists(st.sampled_from("cn"), min_size=d, max_size=d)))
    n_cat = order.count("c")
    n_num = d - n_cat
    n_values = [draw(st.integers(2, 3)) for _ in range(n_cat)]
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    codes = np.column_stack([rng.integers(0, t, n) for t in n_values]) if n_cat else np.zeros((n, 0))
    X = np.round(rng.normal(scale=2.0, size=(n, n_num)), 3)
    data = mixed_dataset(codes, n_values, X, order)
    K = draw(st.integers(1, min(max_k, n)))
    z = np.concatenate([np.arange(K), rng.integers(0, K, n - K)])
    rng.shuffle(z)
    masks = rng.random((K, d)) < 0.5
    return data, z.astype(np.int64), masks


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
