"""Channel sampling, nulling vectors, and the two simulation paths."""

import math

import numpy as np
import pytest
from scipy import stats

from zfoutage.analytic import success_prob_equal_k, sum_capacity_analytic
from zfoutage.core import (
    DomainError,
    RankDeficiencyError,
    StreamAllocation,
    SystemConfig,
)
from zfoutage.montecarlo import (
    BLOCK_TRIALS,
    ChannelSet,
    MonteCarloEstimate,
    SirSample,
    ZfVector,
    direct_distribution_outage,
    direct_sir_samples,
    empirical_link_success,
    empirical_outage,
    link_power_samples,
    link_sir_samples,
    link_success_sweep,
    sample_channel,
    stream_sir,
    zf_nulling_vector,
)


def _grid(num_links, num_antennas, streams, fill=None, rng=None):
    """Build a ChannelSet grid by hand for targeted cases."""
    mats = []
    for tx in range(num_links):
        row = []
        for rx in range(num_links):
            if fill is not None:
                row.append(np.array(fill[tx][rx], dtype=np.complex128))
            else:
                real = rng.standard_normal((num_antennas, streams[tx], 2))
                row.append((real[..., 0] + 1j * real[..., 1]) * math.sqrt(0.5))
        mats.append(tuple(row))
    return ChannelSet(tuple(mats))


class TestChannelSampling:
    def test_deterministic(self):
        cfg = SystemConfig(3, 2, 1.0)
        alloc = StreamAllocation((1, 2, 1))
        a = sample_channel(cfg, alloc, np.random.default_rng(5))
        b = sample_channel(cfg, alloc, np.random.default_rng(5))
        for row_a, row_b in zip(a.matrices, b.matrices):
            for h_a, h_b in zip(row_a, row_b):
                np.testing.assert_array_equal(h_a, h_b)

    def test_shapes_and_properties(self):
        cfg = SystemConfig(3, 4, 1.0)
        alloc = StreamAllocation((1, 3, 2))
        chans = sample_channel(cfg, alloc, np.random.default_rng(0))
        assert chans.num_links == 3
        assert chans.num_antennas == 4
        assert chans.streams == (1, 3, 2)
        assert chans.matrices[1][2].shape == (4, 3)

    def test_entry_moments(self):
        # Unit-variance complex entries: E|h|^2 = 1, split half/half
        # between the real and imaginary parts.
        cfg = SystemConfig(2, 8, 1.0)
        alloc = StreamAllocation((8, 8))
        rng = np.random.default_rng(123)
        entries = np.concatenate(
            [
                np.ravel(h)
                for _ in range(200)
                for row in sample_channel(cfg, alloc, rng).matrices
                for h in row
            ]
        )
        n = entries.size
        assert n == 200 * 4 * 64
        # Var(|h|^2) = 1 for unit-mean exponential power.
        assert abs(np.mean(np.abs(entries) ** 2) - 1.0) < 4.0 / math.sqrt(n)
        se_half = math.sqrt(2 * 0.25 / n)
        assert abs(np.var(entries.real) - 0.5) < 4 * se_half
        assert abs(np.var(entries.imag) - 0.5) < 4 * se_half
        assert abs(np.mean(entries.real)) < 4 * math.sqrt(0.5 / n)

    def test_grid_validation(self):
        good = np.eye(2, dtype=np.complex128)
        with pytest.raises(DomainError):
            ChannelSet(((good,),))
        with pytest.raises(DomainError):
            ChannelSet(((good, good), (good,)))
        ragged = np.ones((3, 1), dtype=np.complex128)
        with pytest.raises(DomainError):
            ChannelSet(((good, good), (ragged, ragged)))
        bad = good.copy()
        bad[0, 0] = np.nan
        with pytest.raises(DomainError):
            ChannelSet(((bad, good), (good, good)))


class TestNullingVector:
    def test_single_stream_matches_filter(self):
        rng = np.random.default_rng(3)
        h = (rng.standard_normal((4, 1)) + 1j * rng.standard_normal((4, 1)))
        q = zf_nulling_vector(h, 0).vector
        np.testing.assert_allclose(
            float(abs(q @ h[:, 0]) ** 2),
            float(np.linalg.norm(h) ** 2),
            rtol=1e-12,
        )

    def test_orthogonal_columns_identity(self):
        h = np.eye(2, dtype=np.complex128)
        q0 = zf_nulling_vector(h, 0).vector
        np.testing.assert_allclose(q0, [1.0, 0.0], atol=1e-14)
        q1 = zf_nulling_vector(h, 1).vector
        np.testing.assert_allclose(q1, [0.0, 1.0], atol=1e-14)

    def test_nulls_excluded_columns(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            m = int(rng.integers(2, 7))
            h = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
            for j in range(m):
                q = zf_nulling_vector(h, j).vector
                np.testing.assert_allclose(float(np.linalg.norm(q)), 1.0, rtol=1e-12)
                excluded = np.delete(h, j, axis=1)
                assert float(np.max(np.abs(q @ excluded))) <= 1e-10

    def test_residual_gain_is_maximal_over_null_space(self):
        # |q h_j|^2 equals the squared norm of h_j's component outside
        # the excluded span; any other unit vector in the admissible
        # space cannot beat it.
        rng = np.random.default_rng(29)
        h = (rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3)))
        q = zf_nulling_vector(h, 0).vector
        gain = float(abs(q @ h[:, 0]) ** 2)
        excluded = np.delete(h, 0, axis=1)
        u, _, _ = np.linalg.svd(excluded, full_matrices=False)
        residual = h[:, 0] - u @ (u.conj().T @ h[:, 0])
        np.testing.assert_allclose(gain, float(np.linalg.norm(residual) ** 2), rtol=1e-12)

    def test_rank_deficient_excluded_columns(self):
        c = np.array([1.0, 2.0, 3.0], dtype=np.complex128)
        h = np.column_stack([c, c, np.array([1.0, 0.0, 0.0])])
        with pytest.raises(RankDeficiencyError):
            zf_nulling_vector(h, 2)

    def test_stream_in_excluded_span(self):
        a = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
        b = np.array([0.0, 1.0, 0.0], dtype=np.complex128)
        h = np.column_stack([a + b, a, b])
        with pytest.raises(RankDeficiencyError):
            zf_nulling_vector(h, 0)

    def test_validation(self):
        with pytest.raises(DomainError):
            zf_nulling_vector(np.ones((2, 3), dtype=np.complex128), 0)
        with pytest.raises(DomainError):
            zf_nulling_vector(np.ones((2, 2), dtype=np.complex128), 2)
        with pytest.raises(DomainError):
            zf_nulling_vector(np.ones(3, dtype=np.complex128), 0)

    def test_unit_norm_enforced_on_type(self):
        with pytest.raises(DomainError):
            ZfVector(np.array([1.0, 1.0], dtype=np.complex128))


class TestStreamSir:
    def test_ratio_invariant(self):
        cfg = SystemConfig(3, 3, 1.0)
        alloc = StreamAllocation((2, 1, 3))
        chans = sample_channel(cfg, alloc, np.random.default_rng(8))
        s = stream_sir(chans, 0, 1)
        assert s.sir == (s.signal_power / s.k_self) / s.interference_power
        assert s.k_self == 2

    def test_scale_invariance(self):
        cfg = SystemConfig(3, 4, 1.0)
        alloc = StreamAllocation((2, 2, 2))
        chans = sample_channel(cfg, alloc, np.random.default_rng(13))
        base = stream_sir(chans, 1, 0)
        for factor in (2.0, 0.1, 1.5 - 0.5j):
            scaled = stream_sir(chans.scaled(factor), 1, 0)
            np.testing.assert_allclose(scaled.sir, base.sir, rtol=1e-12)

    def test_known_two_by_two(self):
        # Hand-built grid: receiver 0's own matrix is the identity, the
        # interferer arrives as a known matrix. q for stream 0 is e1.
        fill = [
            [np.eye(2), np.zeros((2, 2))],
            [np.array([[3.0, 4.0], [0.0, 1.0]]), np.eye(2)],
        ]
        chans = _grid(2, 2, (2, 2), fill=fill)
        s = stream_sir(chans, 0, 0)
        np.testing.assert_allclose(s.signal_power, 1.0, rtol=1e-14)
        # Interference = (|3|^2 + |4|^2) / k = 25 / 2.
        np.testing.assert_allclose(s.interference_power, 12.5, rtol=1e-14)
        np.testing.assert_allclose(s.sir, (1.0 / 2.0) / 12.5, rtol=1e-14)

    def test_sir_sample_validation(self):
        with pytest.raises(DomainError):
            SirSample(signal_power=1.0, interference_power=0.0, k_self=1, sir=1.0)
        with pytest.raises(DomainError):
            SirSample(signal_power=1.0, interference_power=1.0, k_self=2, sir=1.0)

    def test_index_validation(self):
        cfg = SystemConfig(2, 2, 1.0)
        alloc = StreamAllocation((1, 1))
        chans = sample_channel(cfg, alloc, np.random.default_rng(0))
        with pytest.raises(DomainError):
            stream_sir(chans, 2, 0)
        with pytest.raises(DomainError):
            stream_sir(chans, 0, 1)


class TestEstimatorDeterminism:
    def test_same_seed_same_estimate(self):
        cfg = SystemConfig(4, 2, 1.0)
        alloc = StreamAllocation((1, 2, 1, 2))
        a = empirical_link_success(cfg, alloc, 0, 20_000, seed=7)
        b = empirical_link_success(cfg, alloc, 0, 20_000, seed=7)
        assert a == b
        c = empirical_link_success(cfg, alloc, 0, 20_000, seed=8)
        assert a.prob != c.prob

    def test_worker_count_invariance(self):
        cfg = SystemConfig(3, 3, 1.0)
        alloc = StreamAllocation((2, 1, 3))
        serial = empirical_link_success(cfg, alloc, 0, 3 * BLOCK_TRIALS, seed=11)
        parallel = empirical_link_success(
            cfg, alloc, 0, 3 * BLOCK_TRIALS, seed=11, workers=3
        )
        assert serial == parallel

    def test_sample_order_is_block_order(self):
        cfg = SystemConfig(2, 2, 1.0)
        alloc = StreamAllocation((1, 1))
        trials = BLOCK_TRIALS + 100
        whole = link_sir_samples(cfg, alloc, 0, trials, seed=3)
        head = link_sir_samples(cfg, alloc, 0, BLOCK_TRIALS, seed=3)
        np.testing.assert_array_equal(whole[:BLOCK_TRIALS], head)

    def test_sweep_matches_single_calls(self):
        cfg = SystemConfig(3, 4, 1.0)
        alloc = StreamAllocation((2, 1, 2))
        betas = [0.25, 1.0, 4.0]
        sweep = link_success_sweep(cfg, alloc, 0, betas, 30_000, seed=21)
        for beta, est in zip(betas, sweep):
            single = empirical_link_success(
                SystemConfig(3, 4, beta), alloc, 0, 30_000, seed=21
            )
            assert est == single

    def test_validation(self):
        cfg = SystemConfig(2, 2, 1.0)
        alloc = StreamAllocation((1, 1))
        with pytest.raises(DomainError):
            empirical_link_success(cfg, alloc, 0, 0, seed=1)
        with pytest.raises(DomainError):
            empirical_link_success(cfg, alloc, 5, 100, seed=1)
        with pytest.raises(DomainError):
            link_success_sweep(cfg, alloc, 0, [], 100, seed=1)
        with pytest.raises(DomainError):
            link_success_sweep(cfg, alloc, 0, [0.0], 100, seed=1)
        with pytest.raises(DomainError):
            MonteCarloEstimate(prob=1.2, std_error=0.0, trials=10)
        with pytest.raises(DomainError):
            MonteCarloEstimate(prob=0.5, std_error=0.0, trials=0)


class TestMarginals:
    def test_signal_and_summand_means(self):
        # Nulling k-1 directions leaves a chi-squared signal with
        # 2(M-k+1) degrees of freedom (mean M-k+1 in power units) while
        # each interference column keeps unit mean power.
        cfg_base = dict(num_links=3, num_antennas=4, sir_threshold=1.0)
        trials = 50_000
        for k in (1, 2, 4):
            cfg = SystemConfig(**cfg_base)
            alloc = StreamAllocation((k, 2, 1))
            signal, summands = link_power_samples(cfg, alloc, 0, trials, seed=k)
            target = cfg.num_antennas - k + 1
            se = math.sqrt(target / trials)
            assert abs(np.mean(signal) - target) < 4 * se
            assert summands.size == trials * (2 + 1)
            assert abs(np.mean(summands) - 1.0) < 4 / math.sqrt(summands.size)

    def test_full_channel_matches_direct_model(self):
        # Two independently coded paths to the same SIR distribution.
        cfg = SystemConfig(3, 4, 1.0)
        alloc = StreamAllocation((2, 1, 2))
        full = link_sir_samples(cfg, alloc, 0, 10_000, seed=31)
        direct = direct_sir_samples(4, 2, [1, 2], 10_000, seed=77)
        result = stats.ks_2samp(full, direct)
        assert result.pvalue > 0.01

    def test_direct_single_antenna_closed_form(self):
        for beta in (0.5, 1.0, 4.0):
            est = direct_distribution_outage(1, 1, [1, 1, 1], beta, 200_000, seed=5)
            expected = success_prob_equal_k(1, 4, 1, 1, beta)
            assert abs(est.prob - expected) < 3 * max(est.std_error, 1e-4)

    def test_direct_validation(self):
        with pytest.raises(DomainError):
            direct_sir_samples(2, 3, [1], 100, seed=0)
        with pytest.raises(DomainError):
            direct_sir_samples(2, 1, [], 100, seed=0)
        with pytest.raises(DomainError):
            direct_distribution_outage(2, 1, [1], -1.0, 100, seed=0)


class TestOutageEstimates:
    def test_matches_analytic_within_error(self):
        cfg = SystemConfig.from_rate(8, 4, 1.0)
        alloc = StreamAllocation.uniform(8, 1)
        report = empirical_outage(cfg, alloc, 100_000, seed=42)
        exact = sum_capacity_analytic(cfg, alloc)
        for p_mc, p_exact, se in zip(
            report.per_link_success_prob, exact.per_link_success_prob, report.std_error
        ):
            assert abs(p_mc - p_exact) < 3 * max(se, 1e-4)
        assert report.trials == 100_000
        assert report.resampled == 0

    def test_small_sample_flagged(self):
        cfg = SystemConfig(2, 1, 1.0)
        alloc = StreamAllocation((1, 1))
        report = empirical_outage(cfg, alloc, 10, seed=0)
        assert report.small_sample
        assert not empirical_outage(cfg, alloc, 1000, seed=0).small_sample

    def test_report_identities(self):
        cfg = SystemConfig(2, 2, 1.0, rate=1.5)
        alloc = StreamAllocation((1, 2))
        report = empirical_outage(cfg, alloc, 5_000, seed=9)
        for k, p, c in zip(
            alloc.streams, report.per_link_success_prob, report.per_link_capacity
        ):
            assert c == cfg.rate * k * p
        assert report.sum_capacity == math.fsum(report.per_link_capacity)
