import numpy as np
import pytest

from wdspca import io, synth
from wdspca.crossval import (
    FoldPartition,
    emit_report,
    fit_fold,
    partition,
    run_crossval,
    run_fold,
)
from wdspca.errors import RangeError
from wdspca.metrics import mse
from wdspca.pca import DataMatrix, fit


@pytest.mark.parametrize(
    "n, k, sizes",
    [(119, 20, [6] * 19 + [5]), (1005, 20, [51] * 5 + [50] * 15), (7, 7, [1] * 7), (10, 3, [4, 3, 3])],
)
def test_partition_sizes(n, k, sizes):
    for shuffle in (True, False):
        part = partition(n, k, seed=3, shuffle=shuffle)
        assert sorted(part.fold_sizes(), reverse=True) == sizes
        folds = [set(part.validation_indices(f).tolist()) for f in range(k)]
        assert set().union(*folds) == set(range(n))
        assert sum(len(f) for f in folds) == n


def test_partition_contiguous_blocks():
    part = partition(10, 3, shuffle=False)
    assert part.assignments == (0, 0, 0, 0, 1, 1, 1, 2, 2, 2)


def test_partition_reproducible():
    assert partition(119, 20, seed=11).assignments == partition(119, 20, seed=11).assignments
    assert partition(119, 20, seed=11).assignments != partition(119, 20, seed=12).assignments


@pytest.mark.parametrize("n, k", [(4, 5), (10, 1), (10, 0)])
def test_partition_range(n, k):
    with pytest.raises(RangeError):
        partition(n, k)


def test_partition_type_rejects_empty_fold():
    with pytest.raises(RangeError):
        FoldPartition(3, 3, (0, 0, 1))


@pytest.fixture
def wide(rng):
    return DataMatrix(rng.standard_normal((30, 50)))


def test_run_fold_full_rank_and_mean(wide):
    part = partition(wide.n_rows, 5, seed=0)
    train_idx, val_idx = part.training_indices(2), part.validation_indices(2)
    top = len(train_idx) - 1
    train, val = run_fold(wide, part, 2, [0, top])
    model = fit(wide.values[train_idx])
    assert train[1] < 1e-12 * model.variances[0]
    x_tr, x_va = wide.values[train_idx], wide.values[val_idx]
    assert train[0] == pytest.approx(mse(np.tile(x_tr.mean(axis=0), (len(x_tr), 1)), x_tr), rel=1e-12)
    assert val[0] == pytest.approx(mse(np.tile(x_tr.mean(axis=0), (len(x_va), 1)), x_va), rel=1e-12)


def test_run_fold_range(wide):
    part = partition(wide.n_rows, 5, seed=0)
    with pytest.raises(RangeError):
        run_fold(wide, part, 0, [len(part.training_indices(0))])
    with pytest.raises(RangeError):
        run_fold(wide, part, 5, [0])


def test_duplicated_validation_rows_match_training(rng):
    a = rng.standard_normal((8, 20))
    data = DataMatrix(np.vstack([a, a]))
    part = FoldPartition(16, 2, tuple([0] * 8 + [1] * 8))
    train, val = run_fold(data, part, 0, range(8))
    np.testing.assert_allclose(val, train, rtol=1e-12, atol=1e-14)


def test_training_error_non_increasing(wide):
    report = run_crossval(wide, 5, seed=1)
    assert np.all(np.diff(report.train_mse, axis=1) <= 1e-15)


def test_report_averages(wide):
    report = run_crossval(wide, 5, seed=1, m_values=[0, 3, 10])
    np.testing.assert_allclose(report.mean_val_mse, report.val_mse.sum(axis=0) / 5, rtol=1e-12)
    np.testing.assert_allclose(report.mean_train_mse, report.train_mse.sum(axis=0) / 5, rtol=1e-12)


def test_default_m_range(wide):
    report = run_crossval(wide, 5, seed=1)
    assert report.m_values == tuple(range(24))
    with pytest.raises(RangeError):
        run_crossval(wide, 5, seed=1, m_values=[24])


def test_leave_one_out(rng):
    data = DataMatrix(rng.standard_normal((6, 4)))
    report = run_crossval(data, 6, seed=0)
    assert report.k_folds == 6
    assert report.m_values == (0, 1, 2, 3, 4)


def test_parallel_matches_serial(wide):
    a = run_crossval(wide, 5, seed=2, workers=1)
    b = run_crossval(wide, 5, seed=2, workers=4)
    assert a.train_mse.tobytes() == b.train_mse.tobytes()
    assert a.val_mse.tobytes() == b.val_mse.tobytes()


def test_fold_relabeling_invariance(wide):
    part = partition(wide.n_rows, 5, seed=4)
    relabel = [3, 0, 4, 1, 2]
    permuted = FoldPartition(part.n_subjects, 5, tuple(relabel[f] for f in part.assignments))
    ms = [0, 2, 7]
    orig = np.array([run_fold(wide, part, f, ms)[1] for f in range(5)]).mean(axis=0)
    perm = np.array([run_fold(wide, permuted, f, ms)[1] for f in range(5)]).mean(axis=0)
    np.testing.assert_allclose(orig, perm, rtol=1e-12)


def test_no_leakage(rng):
    data = DataMatrix(rng.standard_normal((40, 12)))
    part = partition(40, 5, seed=0)
    for fold in range(5):
        ref = io.model_to_bytes(fit_fold(data, part, fold))
        bumped = data.values.copy()
        bumped[part.validation_indices(fold)[0]] += 100.0
        assert io.model_to_bytes(fit_fold(DataMatrix(bumped), part, fold)) == ref


def test_low_rank_validation_exact():
    data, _ = synth.make(60, 40, 3, noise_std=0.0, seed=0)
    report = run_crossval(data, 5, seed=0)
    var = data.values.var()
    val = report.mean_val_mse
    assert val[3] < 1e-10 * var
    assert np.all(np.abs(val[3:] - val[3]) < 1e-12 * var)


def test_statistical_val_exceeds_train():
    wins = 0
    for seed in range(20):
        data, _ = synth.make(30, 60, 5, spectrum=[5, 4, 3, 2, 1], noise_std=0.3, seed=seed)
        report = run_crossval(data, 5, seed=seed)
        wins += report.mean_val_mse[-1] >= report.mean_train_mse[-1]
    assert wins >= 18


def test_emit_report(tmp_path, wide):
    part = partition(wide.n_rows, 2, seed=0)
    report = run_crossval(wide, 2, seed=0, m_values=[0, 1, 5])
    emit_report(report, tmp_path / "cv.csv")
    lines = (tmp_path / "cv.csv").read_text().splitlines()
    assert lines[0] == "fold,m,train_mse,val_mse"
    assert len(lines) == 1 + 6 + 3
    assert sum(line.startswith("-1,") for line in lines) == 3
    back = io.read_report(tmp_path / "cv.csv")
    assert back.m_values == report.m_values
    assert back.train_mse.tobytes() == report.train_mse.tobytes()
    assert back.val_mse.tobytes() == report.val_mse.tobytes()
    assert part.k_folds == 2


def test_emit_empty_report(tmp_path, wide):
    report = run_crossval(wide, 2, seed=0, m_values=[])
    emit_report(report, tmp_path / "cv.csv")
    assert (tmp_path / "cv.csv").read_text() == "fold,m,train_mse,val_mse\n"
