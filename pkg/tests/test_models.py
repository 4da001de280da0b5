import json

import numpy as np
import pytest

from houseprice.errors import DatasetError, LoadError, ModelLoadError, ParameterError
from houseprice.models.base_types import ForestParams, GbtParams, ModelFamily, TreeParams, parse_params
from houseprice.models.factory import fit_model, predict
from houseprice.models.forest import RandomForest, fit_forest
from houseprice.models.gbt import BoostedTrees, fit_gbt
from houseprice.models.linear import LinearModel, fit_linear
from houseprice.models.persistence import load_model, save_model
from houseprice.models.svr import dual_objective, fit_svr, kernel_matrix, solve_svr_dual
from houseprice.models.tree import TreeStructure, fit_tree
from houseprice.types.types import Dataset
from tests.conftest import small_dataset


def _data(X, y, names=None) -> Dataset:
    X = np.asarray(X, dtype=float).reshape(len(y), -1)
    names = names or [f"x{j}" for j in range(X.shape[1])]
    return Dataset(feature_names=names, rows=X, target=np.asarray(y, dtype=float))


FAST_PARAMS = {
    ModelFamily.LINEAR: {},
    ModelFamily.SVR: {"C": 50_000, "epsilon": 5_000},
    ModelFamily.TREE: {},
    ModelFamily.FOREST: {"n_trees": 5},
    ModelFamily.GBT: {"n_rounds": 20},
}


# linear


def test_linear_exact_line():
    model = fit_linear(_data([[0], [1], [2]], [1, 3, 5]))
    assert model.coefficients.tolist() == pytest.approx([2.0])
    assert model.intercept == pytest.approx(1.0)
    assert np.allclose(model.predict_batch(np.array([[0.0], [1.0], [2.0]])), [1, 3, 5])


def test_linear_constant_target():
    model = fit_linear(_data([[1, 4], [2, 1], [5, 3], [7, 7]], [5, 5, 5, 5]))
    assert np.allclose(model.coefficients, 0.0, atol=1e-12)
    assert model.intercept == pytest.approx(5.0)


def test_linear_matches_normal_equations():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(6, 2))
    y = rng.normal(size=6)
    model = fit_linear(_data(X, y))

    A = np.column_stack([X, np.ones(6)])
    solution = np.linalg.solve(A.T @ A, A.T @ y)
    assert np.allclose(model.coefficients, solution[:2], rtol=1e-8)
    assert model.intercept == pytest.approx(solution[2], rel=1e-8)


def test_linear_residuals_are_orthogonal(dataset):
    model = fit_linear(dataset)
    residuals = dataset.target - model.predict_batch(dataset.rows)
    scale = np.abs(dataset.target).sum()
    assert abs(residuals.sum()) <= 1e-6 * scale
    for j in range(dataset.n_features):
        assert abs(residuals @ dataset.rows[:, j]) <= 1e-6 * scale * np.abs(dataset.rows[:, j]).max()


def test_linear_predict_example():
    assert predict(LinearModel(np.array([2.0]), 1.0), [3]) == 7.0


def test_fit_on_empty_dataset():
    empty = Dataset(feature_names=["a"], rows=np.zeros((0, 1)), target=np.zeros(0))
    for family in ModelFamily:
        with pytest.raises(DatasetError):
            fit_model(family, empty)


# svr


def _pg_reference(K, y, C, epsilon, iterations=8000):
    """Accelerated projected gradient on the split-variable form of the dual."""
    n = len(y)
    c = np.concatenate([np.ones(n), -np.ones(n)])
    H = np.block([[K, -K], [-K, K]])
    q = np.concatenate([-y + epsilon, y + epsilon])

    def project(v):
        lo, hi = -C - np.abs(v).max(), C + np.abs(v).max()
        for _ in range(60):
            mu = 0.5 * (lo + hi)
            if c @ np.clip(v - mu * c, 0.0, C) > 0:
                lo = mu
            else:
                hi = mu
        return np.clip(v - 0.5 * (lo + hi) * c, 0.0, C)

    step = 1.0 / np.linalg.norm(H, 2)
    z = np.zeros(2 * n)
    w, t = z.copy(), 1.0
    for _ in range(iterations):
        z_next = project(w - step * (H @ w + q))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        w = z_next + (t - 1.0) / t_next * (z_next - z)
        z, t = z_next, t_next
    return 0.5 * z @ H @ z + q @ z


def test_svr_dual_matches_reference_solver():
    x = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0.0, 1.5, 1.8, 4.0])
    K = kernel_matrix(x, x, "linear", gamma=1.0)
    solution = solve_svr_dual(K, y, C=2.0, epsilon=0.2, tol=1e-10)

    assert solution.converged
    assert abs(solution.beta.sum()) < 1e-12
    assert solution.objective == pytest.approx(dual_objective(K, y, solution.beta, 0.2))
    assert abs(solution.objective - _pg_reference(K, y, 2.0, 0.2)) < 1e-4


@pytest.mark.parametrize("seed", range(7))
@pytest.mark.parametrize("kernel", ["linear", "rbf", "polynomial"])
def test_svr_dual_matches_reference_on_random_instances(kernel, seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(3, 13)), int(rng.integers(1, 4))
    X = rng.normal(size=(n, d))
    y = np.sin(X.sum(axis=1)) + 0.1 * rng.normal(size=n)
    C, epsilon = float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.01, 0.3))
    K = kernel_matrix(X, X, kernel, gamma=0.5, degree=2)

    solution = solve_svr_dual(K, y, C=C, epsilon=epsilon, tol=1e-10, max_iter=100_000)

    assert solution.converged
    assert abs(solution.beta.sum()) < 1e-9
    assert np.all(np.abs(solution.beta) <= C)
    assert abs(solution.objective - _pg_reference(K, y, C, epsilon)) < 1e-4


def test_svr_flat_targets():
    model = fit_svr(_data([[1], [2], [3], [4]], [7, 7, 7, 7]), {"epsilon": 0.1, "C": 10})
    assert model.dual_coefficients.shape[0] == 0
    assert model.intercept == pytest.approx(7.0)
    assert np.allclose(model.predict_batch(np.array([[0.0], [2.5], [10.0]])), 7.0)


def test_svr_wide_tube_has_no_support_rows(dataset):
    spread = float(np.ptp(dataset.target))
    model = fit_svr(dataset, {"epsilon": 10 * spread, "C": 1_000})
    assert model.support_rows.shape == (0, dataset.n_features)


def test_svr_duals_stay_in_box(dataset):
    C = 5_000.0
    model = fit_svr(dataset, {"C": C, "epsilon": 1_000, "kernel": "rbf"})
    assert model.dual_coefficients.shape[0] > 0
    assert np.all(np.abs(model.dual_coefficients) <= C * (1 + 1e-9))
    assert np.all(np.isfinite(model.predict_batch(dataset.rows)))


def test_svr_rejects_non_positive_c(dataset):
    with pytest.raises(ParameterError):
        fit_svr(dataset, {"C": 0})


def test_svr_iteration_cap_is_not_an_error(dataset):
    model = fit_svr(dataset, {"C": 1e6, "epsilon": 0, "max_passes": 1, "tol": 1e-12})
    assert model.converged is False
    assert np.all(np.isfinite(model.predict_batch(dataset.rows)))


# tree


def test_tree_constant_target_is_one_leaf():
    model = fit_tree(_data([[1], [2], [3], [4], [5], [6]], [4] * 6), {"min_samples_leaf": 1})
    assert model.structure.n_nodes == 1
    assert model.predict([100]) == 4.0


def test_tree_root_split():
    model = fit_tree(_data([[1], [2], [3], [4]], [1, 1, 9, 9]), {"min_samples_leaf": 1, "cv_threshold": 0})
    tree = model.structure.to_dict()
    assert tree == {"feature": 0, "threshold": 2.5, "left": {"leaf": 1.0}, "right": {"leaf": 9.0}}


def test_tree_memorizes_when_unconstrained():
    rng = np.random.default_rng(5)
    X = rng.permutation(30).astype(float).reshape(-1, 1)
    y = rng.normal(300_000, 50_000, size=30)
    model = fit_tree(_data(X, y), {"cv_threshold": 0, "max_depth": None, "min_samples_leaf": 1})
    assert np.array_equal(model.predict_batch(X), y)


def _sse(v):
    return float(np.sum((v - v.mean()) ** 2))


def _exhaustive_split(X, y):
    """Largest SSE drop over every feature and every midpoint, or None."""
    best = None
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values, values[1:]):
            threshold = (lo + hi) / 2.0
            left = X[:, f] <= threshold
            gain = _sse(y) - _sse(y[left]) - _sse(y[~left])
            if best is None or gain > best[2]:
                best = (f, threshold, gain)
    return best


@pytest.mark.parametrize("seed", range(50))
def test_tree_splits_are_exhaustively_optimal(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(20, 201)), int(rng.integers(1, 6))
    X = rng.integers(0, 12, size=(n, m)).astype(float)
    y = X @ rng.normal(size=m) * 1_000 + rng.normal(size=n) * 500 + 200_000
    max_depth = 4
    tree = fit_tree(_data(X, y), {"max_depth": max_depth, "min_samples_leaf": 1, "cv_threshold": 0}).structure

    stack = [(0, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        best = _exhaustive_split(X[rows], y[rows])
        if tree.feature[node] == -1:
            # a leaf above the depth limit means no split reduces the error
            if depth < max_depth and best is not None:
                assert best[2] <= 1e-9 * max(1.0, _sse(y[rows]))
            continue
        f, threshold = int(tree.feature[node]), float(tree.threshold[node])
        left = X[rows, f] <= threshold
        gain = _sse(y[rows]) - _sse(y[rows][left]) - _sse(y[rows][~left])
        assert gain >= best[2] - 1e-9 * max(1.0, _sse(y[rows]))
        assert threshold in {(lo + hi) / 2.0 for lo, hi in zip(np.unique(X[rows, f]), np.unique(X[rows, f])[1:])}
        stack.append((int(tree.left[node]), rows[left], depth + 1))
        stack.append((int(tree.right[node]), rows[~left], depth + 1))


def test_tree_respects_depth_and_leaf_size(dataset):
    model = fit_tree(dataset, {"max_depth": 2, "min_samples_leaf": 5, "cv_threshold": 0})
    assert model.structure.depth() <= 2
    _, counts = np.unique(model.structure.apply(dataset.rows), return_counts=True)
    assert counts.min() >= 5


# forest


def test_forest_of_one_full_tree_equals_tree(dataset):
    params = {"n_trees": 1, "bootstrap": False, "features_per_split": dataset.n_features}
    forest = fit_forest(dataset, params, seed=3)
    tree = fit_tree(dataset, TreeParams())
    assert np.array_equal(forest.predict_batch(dataset.rows), tree.predict_batch(dataset.rows))


def test_forest_is_mean_of_trees(dataset):
    forest = fit_forest(dataset, {"n_trees": 7}, seed=1)
    expected = np.mean([tree.predict(dataset.rows) for tree in forest.trees], axis=0)
    assert np.array_equal(forest.predict_batch(dataset.rows), expected)


def test_forest_mean_example():
    trees = [TreeStructure.from_dict({"leaf": 100.0}), TreeStructure.from_dict({"leaf": 200.0})]
    forest = RandomForest(trees, ForestParams(n_trees=2), n_features=1, features_per_split=1, seed=0, tree_seeds=[1, 2])
    assert forest.predict([0.0]) == 150.0


def test_forest_same_seed_same_file(tmp_path, dataset):
    a = save_model(fit_forest(dataset, {"n_trees": 6}, seed=11), tmp_path / "a.json")
    b = save_model(fit_forest(dataset, {"n_trees": 6}, seed=11), tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_forest_parallel_matches_serial(dataset):
    serial = fit_forest(dataset, {"n_trees": 4, "n_jobs": 1}, seed=2)
    parallel = fit_forest(dataset, {"n_trees": 4, "n_jobs": 2}, seed=2)
    assert np.array_equal(serial.predict_batch(dataset.rows), parallel.predict_batch(dataset.rows))


@pytest.mark.parametrize("seed", [0, 99])
def test_forest_constant_target(seed):
    forest = fit_forest(_data(np.arange(12).reshape(-1, 1), [250_000] * 12), {"n_trees": 3}, seed=seed)
    assert np.all(forest.predict_batch(np.array([[0.0], [5.0], [40.0]])) == 250_000)


def test_forest_rejects_too_many_split_features(dataset):
    with pytest.raises(ParameterError):
        fit_forest(dataset, {"features_per_split": dataset.n_features + 1})


# boosting


def test_gbt_zero_rounds_predicts_mean(dataset):
    model = fit_gbt(dataset, {"n_rounds": 0})
    assert np.allclose(model.predict_batch(dataset.rows), dataset.target.mean())


def test_gbt_single_round_fits_residuals():
    X = np.arange(10, dtype=float).reshape(-1, 1)
    y = np.array([3.0, 9.0, 1.0, 4.0, 7.0, 2.0, 8.0, 6.0, 5.0, 0.0]) * 10_000
    params = {"n_rounds": 1, "learning_rate": 1.0, "reg_lambda": 0, "gamma": 0, "max_depth": None}
    model = fit_gbt(_data(X, y), params)
    assert np.allclose(model.predict_batch(X), y, rtol=1e-12)


def test_gbt_huge_gamma_takes_no_splits(dataset):
    model = fit_gbt(dataset, {"n_rounds": 5, "gamma": 1e30})
    assert all(tree.n_nodes == 1 for tree in model.trees)
    assert np.allclose(model.predict_batch(dataset.rows), dataset.target.mean())


def test_gbt_update_example():
    model = BoostedTrees([TreeStructure.from_dict({"leaf": 4.0})], GbtParams(learning_rate=0.5), 1, 10.0)
    assert model.predict([1.0]) == 12.0


def test_gbt_training_rmse_never_increases(dataset):
    model = fit_gbt(dataset, {"n_rounds": 40, "reg_lambda": 0, "gamma": 0, "learning_rate": 0.3, "max_depth": 3})
    errors = [np.sqrt(np.mean((stage - dataset.target) ** 2)) for stage in model.staged_predict(dataset.rows)]
    assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(errors, errors[1:]))


def test_gbt_subsample_depends_on_seed(dataset):
    params = {"n_rounds": 10, "subsample": 0.5}
    a, b = fit_gbt(dataset, params, seed=1), fit_gbt(dataset, params, seed=1)
    c = fit_gbt(dataset, params, seed=2)
    assert np.array_equal(a.predict_batch(dataset.rows), b.predict_batch(dataset.rows))
    assert not np.array_equal(a.predict_batch(dataset.rows), c.predict_batch(dataset.rows))


def test_gbt_rejects_invalid_params(dataset):
    with pytest.raises(ParameterError):
        fit_gbt(dataset, {"learning_rate": 0})
    with pytest.raises(ParameterError):
        fit_gbt(dataset, {"depth": 3})


# shared contract


@pytest.mark.parametrize("family", list(ModelFamily))
def test_fits_are_deterministic(family, dataset):
    a = fit_model(family, dataset, FAST_PARAMS[family], seed=4)
    b = fit_model(family, dataset, FAST_PARAMS[family], seed=4)
    assert np.array_equal(a.predict_batch(dataset.rows), b.predict_batch(dataset.rows))


@pytest.mark.parametrize("family", list(ModelFamily))
def test_predict_rejects_wrong_width(family, dataset):
    model = fit_model(family, dataset, FAST_PARAMS[family])
    with pytest.raises(DatasetError):
        model.predict([1.0, 2.0])
    with pytest.raises(DatasetError):
        model.predict_batch(np.zeros((3, dataset.n_features + 1)))


def test_unknown_family():
    with pytest.raises(ParameterError, match="valid names"):
        ModelFamily.parse("knn")
    with pytest.raises(ParameterError):
        parse_params("tree", {"cv_threshold": -1})


# persistence


@pytest.mark.parametrize("family", list(ModelFamily))
def test_save_load_predictions_identical(family, tmp_path, dataset):
    model = fit_model(family, dataset, FAST_PARAMS[family], seed=8)
    loaded = load_model(save_model(model, tmp_path / f"{family.value}.json"))

    rows = np.random.default_rng(0).uniform(0, 3_000, size=(100, dataset.n_features))
    assert type(loaded) is type(model)
    assert np.array_equal(loaded.predict_batch(rows), model.predict_batch(rows))


def test_saved_tree_is_nested_json(tmp_path):
    model = fit_tree(_data([[1], [2], [3], [4]], [1, 1, 9, 9]), {"min_samples_leaf": 1})
    document = json.loads(save_model(model, tmp_path / "tree.json").read_text())
    assert document["schema_version"] == 1
    assert document["model_kind"] == "tree"
    assert document["payload"]["tree"]["left"] == {"leaf": 1.0}


def test_load_truncated_file(tmp_path, dataset):
    path = save_model(fit_linear(dataset), tmp_path / "model.json")
    path.write_text(path.read_text()[:40])
    with pytest.raises(ModelLoadError, match="truncated"):
        load_model(path)


def test_load_unknown_kind(tmp_path, dataset):
    path = save_model(fit_linear(dataset), tmp_path / "model.json")
    document = json.loads(path.read_text())
    document["model_kind"] = "neural_net"
    path.write_text(json.dumps(document))
    with pytest.raises(ModelLoadError, match="neural_net"):
        load_model(path)


def test_load_schema_version_mismatch(tmp_path, dataset):
    path = save_model(fit_linear(dataset), tmp_path / "model.json")
    document = json.loads(path.read_text())
    document["schema_version"] = 2
    path.write_text(json.dumps(document))
    with pytest.raises(ModelLoadError, match="schema_version"):
        load_model(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(LoadError):
        load_model(tmp_path / "absent.json")


def test_small_dataset_fixture_is_stable():
    assert np.array_equal(small_dataset().rows, small_dataset().rows)
