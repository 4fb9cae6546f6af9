import numpy as np
import pytest

from hsicsel import (
    Dataset,
    EstimatorSpec,
    FoldTooSmallError,
    NonFiniteError,
    PipelineConfig,
    run_psi,
    screen,
    split,
    to_json,
)
from hsicsel._seeds import generator
from hsicsel.pipeline import split_indices


def make_dataset(rng, n=120, p=6, signal=None):
    x = rng.standard_normal((n, p))
    if signal is None:
        y = rng.standard_normal(n)
    else:
        y = x[:, :signal].sum(axis=1) + 0.3 * rng.standard_normal(n)
    return Dataset(x=x, y=y)


class TestSplit:
    def test_quarter_split_sizes(self):
        idx1, idx2 = split_indices(400, 0.25, generator(0, "split"))
        assert idx1.size == 100 and idx2.size == 300

    def test_same_seed_same_split(self):
        a1, a2 = split_indices(50, 0.3, generator(7, "split"))
        b1, b2 = split_indices(50, 0.3, generator(7, "split"))
        assert np.array_equal(a1, b1) and np.array_equal(a2, b2)

    def test_disjoint_and_exhaustive(self):
        idx1, idx2 = split_indices(37, 0.4, generator(1, "split"))
        combined = np.sort(np.concatenate([idx1, idx2]))
        assert np.array_equal(combined, np.arange(37))

    def test_fold_too_small(self):
        with pytest.raises(FoldTooSmallError):
            split_indices(20, 0.05, generator(0, "split"), min_rows=4)

    def test_split_returns_datasets(self):
        rng = np.random.default_rng(2)
        data = make_dataset(rng, n=40)
        f1, f2 = split(data, 0.25, generator(0, "split"))
        assert f1.n == 10 and f2.n == 30
        assert f1.feature_names == data.feature_names


class TestScreen:
    def test_keep_all_orders_by_estimate(self):
        rng = np.random.default_rng(3)
        data = make_dataset(rng, n=80, p=4, signal=1)
        idx, values = screen(data, 4, EstimatorSpec.unbiased())
        assert sorted(idx.tolist()) == [0, 1, 2, 3]
        assert np.all(np.diff(values[idx]) <= 0)
        assert idx[0] == 0  # the signal feature ranks first

    def test_tie_breaks_toward_lower_index(self):
        rng = np.random.default_rng(4)
        col = rng.standard_normal(60)
        x = np.column_stack([rng.standard_normal(60), col, col])
        y = col + 0.1 * rng.standard_normal(60)
        data = Dataset(x=x, y=y)
        idx, values = screen(data, 2, EstimatorSpec.unbiased())
        assert values[1] == values[2]
        assert idx.tolist() == [1, 2]

    def test_signal_feature_ranked_first_monte_carlo(self):
        hits = 0
        trials = 50
        for t in range(trials):
            rng = np.random.default_rng(1000 + t)
            x = rng.standard_normal((200, 8))
            y = x[:, 3].copy()  # response equals one feature exactly
            idx, _ = screen(Dataset(x=x, y=y), 1, EstimatorSpec.unbiased())
            hits += idx[0] == 3
        assert hits >= 0.95 * trials

    def test_count_validated(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            screen(make_dataset(rng, n=40, p=3), 4, EstimatorSpec.unbiased())


class TestRunPsi:
    def _config(self, **kwargs):
        # small test problems leave few reformulated rows, hence 5 CV folds
        base = dict(seed=5, side="one", cv_folds=5,
                    h_estimator=EstimatorSpec.block(5),
                    m_estimator=EstimatorSpec.block(5))
        base.update(kwargs)
        return PipelineConfig(**base)

    def test_all_noise_contract(self):
        rng = np.random.default_rng(6)
        data = make_dataset(rng, n=160, p=5)
        report = run_psi(data, self._config())
        assert len(report.selected) <= 3
        for res in report.results:
            if res.p_value is not None:
                assert 0.0 <= res.p_value <= 1.0

    def test_fixed_lambda_max_empties_selection(self):
        rng = np.random.default_rng(7)
        data = make_dataset(rng, n=160, p=5, signal=2)
        probe = run_psi(data, self._config())
        # anything at or above the largest marginal estimate zeroes the fit
        big = 10.0 * max(abs(b) for b in probe.beta + [1.0])
        report = run_psi(data, self._config(lambda_method="fixed",
                                            fixed_lambda=big))
        assert report.empty_selection
        assert report.selected == []
        assert report.results == []

    def test_reports_reproducible_byte_identical(self):
        rng = np.random.default_rng(8)
        data = make_dataset(rng, n=160, p=5, signal=2)
        cfg = self._config()
        a = to_json(run_psi(data, cfg))
        b = to_json(run_psi(data, cfg))
        assert a == b

    def test_fold_provenance(self):
        rng = np.random.default_rng(9)
        data = make_dataset(rng, n=160, p=5, signal=2)
        cfg = self._config()
        report = run_psi(data, cfg)
        rows1 = np.array(report.fold1_rows)
        rows2 = np.array(report.fold2_rows)
        assert np.intersect1d(rows1, rows2).size == 0
        assert np.array_equal(np.sort(np.concatenate([rows1, rows2])),
                              np.arange(160))
        # fold-1 quantities must not read fold-2 rows: tampering with fold-2
        # rows leaves lambda, weights and the screened order unchanged
        x2 = data.x.copy()
        x2[rows2] = rng.standard_normal(x2[rows2].shape)
        tampered = run_psi(Dataset(x=x2, y=data.y), cfg)
        assert tampered.lam == report.lam
        assert tampered.weights == report.weights
        assert tampered.screened == report.screened
        # and fold-2 quantities must not read fold-1 rows
        x1 = data.x.copy()
        x1[rows1] = rng.standard_normal(x1[rows1].shape)
        y1 = data.y.copy()
        tampered1 = run_psi(Dataset(x=x1, y=y1), cfg)
        assert tampered1.beta != report.beta or tampered1.lam != report.lam

    def test_selected_features_have_result_or_note(self):
        rng = np.random.default_rng(10)
        data = make_dataset(rng, n=200, p=6, signal=3)
        report = run_psi(data, self._config())
        assert set(report.significant) <= set(report.selected)
        covered = {res.feature for res in report.results}
        assert covered == set(report.selected)
        for res in report.results:
            assert (res.p_value is not None) or (res.note is not None)

    def test_screening_restricts_candidates(self):
        rng = np.random.default_rng(11)
        data = make_dataset(rng, n=200, p=8, signal=2)
        report = run_psi(data, self._config(screen_count=3, cv_folds=3))
        assert len(report.screened) == 3
        assert set(report.selected) <= set(report.screened)

    def test_partial_target_runs(self):
        rng = np.random.default_rng(12)
        data = make_dataset(rng, n=200, p=5, signal=2)
        report = run_psi(data, self._config(target="partial"))
        for res in report.results:
            assert res.target == "partial"

    def test_adaptive_weights_and_aic(self):
        rng = np.random.default_rng(13)
        data = make_dataset(rng, n=200, p=5, signal=2)
        report = run_psi(data, self._config(lambda_method="aic",
                                            adaptive_gamma=2.0))
        assert len(set(report.weights)) > 1  # adaptive weights differ

    def test_incomplete_estimator_path(self):
        rng = np.random.default_rng(14)
        data = make_dataset(rng, n=150, p=4, signal=2)
        cfg = self._config(h_estimator=EstimatorSpec.incomplete(2), cv_folds=4)
        a = to_json(run_psi(data, cfg))
        b = to_json(run_psi(data, cfg))
        assert a == b

    def test_categorical_response_uses_delta_kernel(self):
        rng = np.random.default_rng(15)
        x = rng.standard_normal((160, 4))
        labels = (x[:, 0] + 0.5 * rng.standard_normal(160) > 0).astype(int)
        data = Dataset(x=x, y=labels, y_categorical=True)
        report = run_psi(data, self._config(cv_folds=4))
        assert report.n == 160

    def test_condition_full_for_hsic_option(self):
        rng = np.random.default_rng(16)
        data = make_dataset(rng, n=200, p=5, signal=2)
        base = run_psi(data, self._config())
        alt = run_psi(data, self._config(condition_full_for_hsic=True))
        assert base.selected == alt.selected
        # the richer conditioning narrows the truncation window
        pa = {r.feature: r.lower for r in base.results if r.lower is not None}
        pb = {r.feature: r.lower for r in alt.results if r.lower is not None}
        for feat in set(pa) & set(pb):
            assert pb[feat] >= pa[feat] - 1e-10


class TestDataset:
    def test_row_count_mismatch(self):
        with pytest.raises(ValueError):
            Dataset(x=np.zeros((4, 2)), y=np.zeros(3))

    def test_nan_rejected(self):
        x = np.zeros((4, 2))
        x[0, 0] = np.nan
        with pytest.raises(NonFiniteError):
            Dataset(x=x, y=np.zeros(4))

    def test_default_feature_names(self):
        data = Dataset(x=np.zeros((3, 2)), y=np.zeros(3))
        assert data.feature_names == ("x1", "x2")

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PipelineConfig(split_ratio=1.5)
        with pytest.raises(ValueError):
            PipelineConfig(lambda_method="fixed")
        with pytest.raises(ValueError):
            PipelineConfig(target="other")
