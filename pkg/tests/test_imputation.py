from __future__ import annotations

import numpy as np
import pytest

from dqo import (
    DatasetTable,
    FeatureSpec,
    ImputerConfig,
    KnnImputer,
    estimate_features,
    estimate_measurement_error,
)

from oracles import brute_estimate


def make_config(x_train, k):
    return ImputerConfig(k=k, means=x_train.mean(axis=0), sds=x_train.std(axis=0))


def test_all_known_copies_input_exactly():
    x_train = np.arange(12.0).reshape(4, 3)
    x = np.array([7.0, -1.0, 2.5])
    config = make_config(x_train, 2)
    z = estimate_features(x_train, x, {1, 2, 3}, config, np.zeros(3, dtype=bool))
    assert np.array_equal(z, x)


def test_k1_copies_unknowns_from_matching_row():
    rng = np.random.default_rng(0)
    x_train = rng.normal(size=(8, 3))
    query = np.array([x_train[4, 0], 0.0, 0.0])  # matches row 5 (index 4) on dim 1
    config = make_config(x_train, 1)
    z = estimate_features(x_train, query, {1}, config, np.zeros(3, dtype=bool))
    assert np.array_equal(z[1:], x_train[4, 1:])


def test_four_row_toy_matches_hand_enumeration():
    # Known dim values 0,1,3,6 vs query 1.2: nearest two rows are index 1 then 0,
    # so the unknown feature averages 20 and 10.
    x_train = np.array([[0.0, 10.0], [1.0, 20.0], [3.0, 30.0], [6.0, 40.0]])
    config = make_config(x_train, 2)
    z = estimate_features(x_train, np.array([1.2, 0.0]), {1}, config, np.zeros(2, dtype=bool))
    assert z[0] == 1.2
    assert z[1] == 15.0


@pytest.mark.parametrize("k", [1, 2, 5])
def test_matches_brute_force_scan_exactly(k):
    rng = np.random.default_rng(31)
    x_train = np.column_stack(
        [
            rng.normal(size=20),
            rng.integers(0, 4, size=20).astype(float),
            rng.normal(size=20),
            rng.integers(0, 3, size=20).astype(float),
        ]
    )
    discrete = np.array([False, True, False, True])
    config = make_config(x_train, k)
    for known in ({1}, {1, 2}, {2, 3}, {1, 3, 4}):
        x = np.zeros(4)
        for f in known:
            x[f - 1] = x_train[7, f - 1] + 0.1
        got = estimate_features(x_train, x, known, config, discrete)
        want = brute_estimate(x_train, x, known, k, config, discrete)
        assert np.array_equal(got, want)


def test_tied_neighbors_resolve_to_lowest_row_index():
    x_train = np.array([[1.0, 5.0], [1.0, 9.0], [2.0, 7.0]])  # rows 0 and 1 tie on dim 1
    config = make_config(x_train, 1)
    z = estimate_features(x_train, np.array([1.0, 0.0]), {1}, config, np.zeros(2, dtype=bool))
    assert z[1] == 5.0


def test_discrete_mode_ties_resolve_to_lowest_value():
    x_train = np.array([[0.0, 2.0], [0.1, 1.0], [0.2, 1.0], [0.3, 2.0], [5.0, 3.0]])
    config = make_config(x_train, 4)
    z = estimate_features(
        x_train, np.array([0.15, 0.0]), {1}, config, np.array([False, True])
    )
    assert z[1] == 1.0  # values 1 and 2 tie with two neighbors each


def test_cold_start_uses_training_marginals():
    x_train = np.array([[1.0, 3.0], [2.0, 3.0], [3.0, 4.0], [6.0, 3.0]])
    config = make_config(x_train, 2)
    z = estimate_features(x_train, np.zeros(2), set(), config, np.array([False, True]))
    assert z[0] == 3.0  # column mean
    assert z[1] == 3.0  # column mode


def test_discrete_estimates_stay_in_observed_range():
    rng = np.random.default_rng(33)
    x_train = np.column_stack(
        [rng.normal(size=50), rng.integers(2, 7, size=50).astype(float)]
    )
    config = make_config(x_train, 5)
    observed = set(np.unique(x_train[:, 1]))
    for _ in range(25):
        x = np.array([rng.normal(), 0.0])
        z = estimate_features(x_train, x, {1}, config, np.array([False, True]))
        assert z[1] in observed


def test_row_permutation_invariance_without_ties():
    rng = np.random.default_rng(34)
    x_train = rng.normal(size=(30, 3))  # continuous: distances almost surely distinct
    config = make_config(x_train, 4)
    x = np.array([0.2, -0.4, 0.0])
    z1 = estimate_features(x_train, x, {1, 2}, config, np.zeros(3, dtype=bool))
    perm = rng.permutation(30)
    shuffled = x_train[perm]
    config2 = make_config(shuffled, 4)
    z2 = estimate_features(shuffled, x, {1, 2}, config2, np.zeros(3, dtype=bool))
    assert np.allclose(z1, z2, atol=1e-12)


def test_config_rejects_k_larger_than_training_set():
    table_x = np.random.default_rng(1).normal(size=(5, 2))
    specs = (
        FeatureSpec(1, "a", "continuous", 0.0, "free"),
        FeatureSpec(2, "b", "continuous", 1.0, "low"),
    )
    table = DatasetTable(x=table_x, y=np.zeros(5), features=specs)
    with pytest.raises(ValueError, match="exceeds"):
        ImputerConfig.from_table(table, 6)


# --- measurement error --------------------------------------------------------


def _table(x, kinds):
    specs = tuple(
        FeatureSpec(i + 1, f"f{i + 1}", kind, 0.0 if i == 0 else 1.0, "free" if i == 0 else "low")
        for i, kind in enumerate(kinds)
    )
    return DatasetTable(x=x, y=np.zeros(x.shape[0]), features=specs)


def test_constant_column_has_zero_error():
    rng = np.random.default_rng(40)
    x = np.column_stack([rng.normal(size=10), np.full(10, 7.0)])
    table = _table(x, ["continuous", "continuous"])
    delta = estimate_measurement_error(table, make_config(x, 3), {1})
    assert delta[0] == 0.0  # profile feature
    assert delta[1] == 0.0  # constant column is perfectly predictable


def test_duplicate_of_profile_feature_has_zero_error_with_k1():
    base = np.array([1.0, 1.0, 2.0, 2.0, 3.0, 3.0])  # every value appears twice
    x = np.column_stack([base, base.copy()])
    table = _table(x, ["continuous", "continuous"])
    delta = estimate_measurement_error(table, make_config(x, 1), {1})
    assert delta[1] == 0.0


def test_uninformative_profile_gives_error_near_marginal_sd():
    rng = np.random.default_rng(41)
    x = np.column_stack([rng.normal(size=1000), rng.uniform(0.0, 1.0, size=1000)])
    table = _table(x, ["continuous", "continuous"])
    delta = estimate_measurement_error(table, make_config(x, 100), {1})
    sd = x[:, 1].std()
    assert abs(delta[1] - sd) <= 0.15 * sd


def test_self_exclusion_keeps_noisy_feature_error_positive():
    rng = np.random.default_rng(42)
    x = np.column_stack([rng.normal(size=30), rng.normal(size=30)])
    table = _table(x, ["continuous", "continuous"])
    delta = estimate_measurement_error(table, make_config(x, 1), {1})
    assert delta[1] > 0.0  # with self-matching this would collapse to 0


def test_discrete_error_uses_mode_prediction():
    # Feature 2 is a deterministic function of feature 1's sign: predictable.
    f1 = np.array([-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0])
    f2 = (f1 > 0).astype(float)
    x = np.column_stack([f1, f2])
    table = _table(x, ["continuous", "discrete"])
    delta = estimate_measurement_error(table, make_config(x, 3), {1})
    assert delta[1] == 0.0


def test_knn_imputer_wrapper_matches_free_function(bench):
    train, _ = bench
    imputer = KnnImputer.from_table(train, 10)
    x = train.x[3].copy()
    known = {1, 2}
    direct = estimate_features(
        train.x, x, known, imputer.config, imputer.discrete_mask
    )
    assert np.array_equal(imputer.estimate(x, known), direct)
