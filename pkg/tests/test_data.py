import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from mpwtsvm.data import (
    DataError, MultiViewDataset, ScalingParams, load_class_labels, load_multiview_csv, minmax_scale,
    one_vs_one_pairs, stratified_kfold, write_matrix,
)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def _files(tmp_path, rows_a=3, rows_b=3, labels="+1\n-1\n1\n"):
    a = _write(tmp_path, "a.csv", "".join(f"{i},{i + 0.5}\n" for i in range(rows_a)))
    b = _write(tmp_path, "b.csv", "".join(f"{-i}\n" for i in range(rows_b)))
    y = _write(tmp_path, "y.txt", labels)
    return a, b, y


def test_load_three_rows(tmp_path):
    ds = load_multiview_csv(*_files(tmp_path))
    assert len(ds) == 3
    assert ds.view_a.shape == (3, 2) and ds.view_b.shape == (3, 1)
    assert ds.labels.tolist() == [1, -1, 1]
    assert ds.view_a[2, 1] == 2.5


def test_load_rejects_label_two(tmp_path):
    with pytest.raises(DataError, match="invalid label"):
        load_multiview_csv(*_files(tmp_path, labels="+1\n2\n-1\n"))


def test_load_rejects_zero_label(tmp_path):
    with pytest.raises(DataError, match="invalid label"):
        load_multiview_csv(*_files(tmp_path, labels="+1\n0\n-1\n"))


def test_load_row_count_mismatch(tmp_path):
    with pytest.raises(DataError, match="row-count mismatch"):
        load_multiview_csv(*_files(tmp_path, rows_a=4))


def test_load_non_numeric(tmp_path):
    a, b, y = _files(tmp_path)
    a.write_text("1,2\n3,x\n5,6\n")
    with pytest.raises(DataError, match="non-numeric cell"):
        load_multiview_csv(a, b, y)


def test_load_missing_file_names_path(tmp_path):
    a, b, y = _files(tmp_path)
    with pytest.raises(FileNotFoundError, match="nothere.csv"):
        load_multiview_csv(tmp_path / "nothere.csv", b, y)


def test_load_scientific_notation(tmp_path):
    a, b, y = _files(tmp_path)
    a.write_text("1e-3,2E2\n-3.5e+1,0\n0,0\n")
    ds = load_multiview_csv(a, b, y)
    assert ds.view_a[0].tolist() == [1e-3, 200.0]


def test_write_matrix_round_trip(tmp_path):
    x = np.random.default_rng(0).standard_normal((4, 3))
    p = tmp_path / "m.csv"
    write_matrix(p, x)
    y = _write(tmp_path, "y.txt", "1\n-1\n1\n-1\n")
    ds = load_multiview_csv(p, p, y)
    assert np.array_equal(ds.view_a, x)


def test_dataset_is_immutable():
    ds = MultiViewDataset([[1.0], [2.0]], [[0.0], [1.0]], [1, -1])
    with pytest.raises(ValueError):
        ds.view_a[0, 0] = 5.0


def test_dataset_rejects_non_finite():
    with pytest.raises(DataError):
        MultiViewDataset([[np.nan]], [[0.0]], [1])


def test_dataset_rejects_fractional_label():
    with pytest.raises(DataError, match="invalid label"):
        MultiViewDataset([[0.0]], [[0.0]], [1.5])


def test_require_both_classes():
    ds = MultiViewDataset([[0.0], [1.0]], [[0.0], [1.0]], [1, 1])
    with pytest.raises(DataError):
        ds.require_both_classes()


def _col(values):
    x = np.asarray(values, dtype=float)[:, None]
    return MultiViewDataset(x, x, np.ones(len(values)))


@pytest.mark.parametrize(
    "column, expected",
    [((2, 4, 6), (0, 0.5, 1)), ((5, 5, 5), (0, 0, 0)), ((-1, 1), (0, 1))],
)
def test_minmax_examples(column, expected):
    scaled, params = minmax_scale(_col(column))
    assert scaled.view_a[:, 0].tolist() == list(expected)
    assert params.min_a.tolist() == [min(column)] and params.max_a.tolist() == [max(column)]


def test_scaling_does_not_clip_test_values():
    _, params = minmax_scale(_col((0, 10)))
    assert params.transform_view(np.array([[-5.0], [20.0]]), "A")[:, 0].tolist() == [-0.5, 2.0]


def test_scaling_params_dict_round_trip():
    _, params = minmax_scale(MultiViewDataset([[1.0, 2.0], [3.0, 2.0]], [[0.0], [4.0]], [1, -1]))
    again = ScalingParams.from_dict(params.to_dict())
    for k in ("min_a", "max_a", "min_b", "max_b"):
        assert np.array_equal(getattr(again, k), getattr(params, k))


def test_scaling_wrong_width():
    _, params = minmax_scale(_col((0, 1)))
    with pytest.raises(DataError):
        params.transform_view(np.zeros((2, 3)), "A")


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(hnp.arrays(float, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8), elements=finite))
def test_scaled_fit_data_in_unit_interval_and_idempotent(x):
    ds = MultiViewDataset(x, x, np.ones(x.shape[0]))
    scaled, _ = minmax_scale(ds)
    assert scaled.view_a.min() >= 0.0 and scaled.view_a.max() <= 1.0
    twice, params = minmax_scale(scaled)
    assert np.max(np.abs(twice.view_a - scaled.view_a)) <= 1e-12
    # constant columns collapse to 0, others already span [0, 1]
    span = params.max_a - params.min_a
    assert np.all((span == 0) | (np.abs(span - 1) <= 1e-12))


def test_kfold_balanced_ten():
    labels = np.array([1] * 5 + [-1] * 5)
    folds = stratified_kfold(labels, 5, seed=3)
    assert len(folds) == 5
    for train, test in folds:
        assert test.size == 2
        assert sorted(labels[test].tolist()) == [-1, 1]
        assert np.intersect1d(train, test).size == 0


def test_kfold_deterministic():
    labels = np.array([1] * 7 + [-1] * 9)
    a = stratified_kfold(labels, 4, seed=11)
    b = stratified_kfold(labels, 4, seed=11)
    assert all(np.array_equal(x[1], y[1]) for x, y in zip(a, b))


def test_kfold_class_too_small():
    labels = np.array([1] * 5 + [-1] * 10)
    with pytest.raises(DataError):
        stratified_kfold(labels, 6, seed=0)


def test_kfold_accepts_dataset():
    ds = MultiViewDataset(np.zeros((6, 1)), np.zeros((6, 1)), [1, 1, 1, -1, -1, -1])
    assert len(stratified_kfold(ds, 3, 0)) == 3


@given(
    st.integers(2, 6).flatmap(
        lambda f: st.tuples(st.just(f), st.integers(f, 40), st.integers(f, 40), st.integers(0, 2**31 - 1))
    )
)
def test_kfold_partition_and_stratification(args):
    folds, n_pos, n_neg, seed = args
    labels = np.r_[np.ones(n_pos), -np.ones(n_neg)]
    splits = stratified_kfold(labels, folds, seed)
    tests = [t for _, t in splits]
    assert np.array_equal(np.sort(np.concatenate(tests)), np.arange(labels.size))
    for train, test in splits:
        assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(labels.size))
        for cls, count in ((1, n_pos), (-1, n_neg)):
            share = np.sum(labels[test] == cls)
            assert abs(share - count / folds) < 1 + 1e-9


@pytest.mark.parametrize("k", range(2, 13))
def test_one_vs_one_pair_count(k):
    labels = np.repeat(np.arange(k), 3)
    pairs = one_vs_one_pairs(labels)
    assert len(pairs) == k * (k - 1) // 2
    for a, b, idx in pairs:
        assert set(labels[idx].tolist()) == {a, b}
        assert idx.size == 6


def test_one_vs_one_ten_classes_is_45():
    assert len(one_vs_one_pairs(np.arange(10))) == 45


def test_one_vs_one_two_classes():
    assert len(one_vs_one_pairs([0, 1, 1, 0])) == 1


def test_one_vs_one_single_class():
    with pytest.raises(DataError):
        one_vs_one_pairs([3, 3, 3])


def test_load_class_labels(tmp_path):
    p = _write(tmp_path, "c.txt", "0\n2\n1\n2\n")
    assert load_class_labels(p).tolist() == [0, 2, 1, 2]
