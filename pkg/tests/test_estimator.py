from fractions import Fraction

import numpy as np
import pytest

from explodingmoments.ensembles import EnsembleSpec, GaussianLaw, MatrixSample, sample
from explodingmoments.estimator import (
    compare_report,
    rows_to_csv,
    run_experiment,
    trace_powers,
)
from explodingmoments.oracle import exact_trace_mean


class TestTracePowers:
    def test_identity(self):
        m = MatrixSample(kind="iid", size=4, trace_norm=4, matrix=np.eye(4))
        assert np.allclose(trace_powers(m, 5), np.ones(5))

    def test_zero(self):
        m = MatrixSample(kind="iid", size=3, trace_norm=3, matrix=np.zeros((3, 3)))
        assert np.allclose(trace_powers(m, 4), np.zeros(4))

    def test_swap_matrix_by_hand(self):
        mat = np.array([[0.0, 1.0], [1.0, 0.0]]) / np.sqrt(2)
        m = MatrixSample(kind="iid", size=2, trace_norm=2, matrix=mat)
        got = trace_powers(m, 4)
        assert got == pytest.approx([0.0, 1 / 2, 0.0, 1 / 4])

    def test_kmax_guard(self):
        m = MatrixSample(kind="iid", size=2, trace_norm=2, matrix=np.eye(2))
        with pytest.raises(ValueError):
            trace_powers(m, 9)

    @pytest.mark.parametrize("seed", range(25))
    def test_sparse_dense_agree(self, seed, sign_pair_law):
        n = 16 + 2 * seed  # sizes up to 64
        s = sample(EnsembleSpec(kind="elliptic", n=n, law=sign_pair_law, seed=seed))
        dense = MatrixSample(kind="elliptic", size=n, trace_norm=n, matrix=s.dense())
        assert np.allclose(trace_powers(s, 6), trace_powers(dense, 6), rtol=1e-8, atol=1e-12)

    @pytest.mark.parametrize("seed", range(25))
    def test_circulant_paths_agree(self, seed, sign_law):
        n = 16 + 2 * seed
        s = sample(EnsembleSpec(kind="circulant", n=n, law=sign_law, seed=seed))
        dense = MatrixSample(kind="circulant", size=n, trace_norm=n, matrix=s.dense())
        assert np.allclose(trace_powers(s, 6), trace_powers(dense, 6), rtol=1e-8, atol=1e-12)


class TestRunExperiment:
    def test_deterministic(self, sign_law):
        spec = EnsembleSpec(kind="circulant", n=32, law=sign_law, seed=5)
        a = run_experiment(spec, 3, 60)
        b = run_experiment(spec, 3, 60)
        assert np.array_equal(a.traces, b.traces)
        assert np.array_equal(a.cov_z, b.cov_z)
        assert np.array_equal(a.se_cov, b.se_cov)

    def test_circulant_batch_matches_per_replica(self, sign_law):
        # the batched FFT path must reproduce the one-sample path exactly
        spec = EnsembleSpec(kind="circulant", n=16, law=sign_law, seed=9)
        stats = run_experiment(spec, 4, 12)
        from dataclasses import replace

        for i in range(12):
            one = trace_powers(sample(replace(spec, seed=spec.seed + 1 + i)), 4)
            assert np.allclose(stats.traces[i], one, rtol=1e-12, atol=1e-14)

    def test_covariance_symmetric_and_psd(self, sign_pair_law):
        spec = EnsembleSpec(kind="elliptic", n=80, law=sign_pair_law, seed=3)
        stats = run_experiment(spec, 3, 300)
        assert np.array_equal(stats.cov_z, stats.cov_z.T)
        eigs = np.linalg.eigvalsh(stats.cov_z)
        assert eigs.min() >= -1e-10

    def test_mean_tracks_exact_oracle(self, sign_pair_law):
        n = 200
        spec = EnsembleSpec(kind="elliptic", n=n, law=sign_pair_law, seed=21)
        stats = run_experiment(spec, 4, 400)
        for k in (2, 4):
            exact = float(exact_trace_mean("elliptic", sign_pair_law, n, k))
            se = stats.se_mean[k - 1]
            assert abs(stats.mean_traces[k - 1] - exact) <= 4 * se

    def test_bootstrap_se_shrinks_with_replicas(self, sign_law):
        spec = EnsembleSpec(kind="circulant", n=64, law=GaussianLaw(), seed=2)
        small = run_experiment(spec, 2, 400)
        big = run_experiment(spec, 2, 800)
        ratio = big.se_cov[1, 1] / small.se_cov[1, 1]
        assert ratio == pytest.approx(1 / np.sqrt(2), rel=0.25)

    def test_replicate_guard(self, sign_law):
        spec = EnsembleSpec(kind="circulant", n=8, law=sign_law, seed=1)
        with pytest.raises(ValueError):
            run_experiment(spec, 2, 1)

    def test_seed_range(self, sign_law):
        spec = EnsembleSpec(kind="circulant", n=8, law=sign_law, seed=10)
        stats = run_experiment(spec, 2, 5)
        assert stats.seed_range() == (11, 15)

    def test_thread_count_does_not_change_results(self, sign_pair_law, monkeypatch):
        spec = EnsembleSpec(kind="elliptic", n=40, law=sign_pair_law, seed=6)
        base = run_experiment(spec, 3, 40)
        monkeypatch.setenv("EXPLODINGMOMENTS_THREADS", "4")
        threaded = run_experiment(spec, 3, 40)
        assert np.array_equal(base.traces, threaded.traces)


class TestCompareReport:
    def _stats(self, sign_law):
        spec = EnsembleSpec(kind="circulant", n=16, law=sign_law, seed=4)
        return run_experiment(spec, 2, 50)

    def test_exact_match_passes(self, sign_law):
        stats = self._stats(sign_law)
        emp = Fraction(stats.mean_traces[0]).limit_denominator(10**12)
        rows = compare_report(stats, [(1, None, emp)])
        assert rows[0].passed and abs(rows[0].zscore) < 1e-6

    def test_degenerate_zero_se_guard(self, sign_law):
        stats = self._stats(sign_law)
        stats.se_mean[0] = 0.0
        rows = compare_report(stats, [(1, None, Fraction(10))])
        assert rows[0].zscore is None
        assert not rows[0].passed
        assert "degenerate-zero-se" in rows[0].note

    def test_oracle_discrepancy_noted(self, sign_law):
        stats = self._stats(sign_law)
        rows = compare_report(
            stats,
            [(2, 2, Fraction(2))],
            oracle={(2, 2): Fraction(12, 5)},
        )
        assert rows[0].oracle == Fraction(12, 5)
        assert "oracle-differs-from-prediction" in rows[0].note

    def test_csv_columns(self, sign_law):
        stats = self._stats(sign_law)
        rows = compare_report(stats, [(1, None, Fraction(0)), (2, 2, Fraction(2))])
        text = rows_to_csv(rows)
        header = text.splitlines()[0]
        assert header == "k,l,predicted,oracle,empirical,stderr,zscore,pass,note"
        assert len(text.splitlines()) == 3
