"""Empirical engine: channel sampling, ZF nulling, SIR statistics.

Two independent samplers are provided on purpose.  The full-channel path
draws every matrix entry, builds the nulling vector by linear algebra,
and reads the SIR off the definition; the direct path draws the known
marginals (signal ~ Gamma(M-k+1, 1), each interference summand an
Exp(1) scaled by 1/k_m) and skips the matrices entirely.  Agreement
between the two is one of the package's standing cross-checks.

Determinism contract.  Trials are split into fixed blocks of
BLOCK_TRIALS; block b of a given purpose draws from an own counter-keyed
stream, Philox(key=seed, counter=[0, 0, b, purpose<<32 | unit]).  Blocks
are merged in index order, so results depend only on (arguments, seed),
never on the worker count.  Within a block the draw order is fixed:
interference entries first, then the self matrix.  Keeping the
interference draws first means estimates for different k_self candidates
under one seed share their interference realizations, which is what
makes common-random-number comparisons between stream counts tight.

A full-channel trial for link n touches only the matrices arriving at
receiver n, and those are disjoint from (and independent of) every other
receiver's, so per-link simulation on separate substreams draws from the
same joint distribution as materializing the whole N x N grid per trial.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DomainError,
    NumericalError,
    OutageReport,
    RankDeficiencyError,
    StreamAllocation,
    SystemConfig,
)

__all__ = [
    "BLOCK_TRIALS",
    "ChannelSet",
    "ZfVector",
    "SirSample",
    "MonteCarloEstimate",
    "sample_channel",
    "zf_nulling_vector",
    "stream_sir",
    "empirical_link_success",
    "link_success_sweep",
    "link_sir_samples",
    "link_power_samples",
    "empirical_outage",
    "direct_sir_samples",
    "direct_distribution_outage",
]

BLOCK_TRIALS = 8192

# Relative singular-value (or QR-diagonal) floor below which a draw is
# treated as degenerate and resampled.
_RANK_TOL = 1e-10

_PURPOSE_LINK = 1
_PURPOSE_DIRECT = 2

_SQRT_HALF = math.sqrt(0.5)


def _block_rng(seed: int, purpose: int, unit: int, block: int) -> np.random.Generator:
    counter = [0, 0, block, (purpose << 32) | unit]
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def _complex_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """CN(0,1) entries: unit-variance circularly symmetric Gaussians."""
    z = rng.standard_normal(size=shape + (2,))
    return z.view(np.complex128)[..., 0] * _SQRT_HALF


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of the full N x N grid of channel matrices.

    matrices[m][n] is the M x k_m matrix from transmitter m to receiver
    n; column l carries stream l of link m.
    """

    matrices: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.matrices)
        if n < 2 or any(len(row) != n for row in self.matrices):
            raise DomainError("matrices must form an N x N grid with N >= 2")
        rows = self.matrices[0][0].shape[0]
        for m, row in enumerate(self.matrices):
            cols = row[0].shape[1]
            for h in row:
                if h.ndim != 2 or h.shape != (rows, cols):
                    raise DomainError(
                        f"transmitter {m}: expected shape {(rows, cols)}, "
                        f"got {h.shape}"
                    )
                if not np.all(np.isfinite(h.view(np.float64))):
                    raise DomainError("channel entries must be finite")

    @property
    def num_links(self) -> int:
        return len(self.matrices)

    @property
    def num_antennas(self) -> int:
        return self.matrices[0][0].shape[0]

    @property
    def streams(self) -> tuple[int, ...]:
        return tuple(row[0].shape[1] for row in self.matrices)

    def scaled(self, factor: complex) -> "ChannelSet":
        """Same realization with every matrix multiplied by one scalar."""
        return ChannelSet(
            tuple(tuple(factor * h for h in row) for row in self.matrices)
        )


@dataclass(frozen=True, eq=False)
class ZfVector:
    """Unit-norm row vector applied to the received signal (q in q H)."""

    vector: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=np.complex128)
        object.__setattr__(self, "vector", v)
        if v.ndim != 1:
            raise DomainError(f"nulling vector must be 1-D, got shape {v.shape}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"nulling vector norm {norm!r} is not 1 to 1e-12")


@dataclass(frozen=True)
class SirSample:
    """Signal power, aggregate interference power, and their SIR ratio."""

    signal_power: float
    interference_power: float
    k_self: int
    sir: float

    def __post_init__(self) -> None:
        if self.signal_power < 0.0 or self.interference_power <= 0.0:
            raise DomainError("powers must be non-negative / positive")
        if self.sir != (self.signal_power / self.k_self) / self.interference_power:
            raise DomainError("sir field disagrees with its defining ratio")


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Success-probability estimate with its binomial standard error."""

    prob: float
    std_error: float
    trials: int
    resampled: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.prob <= 1.0):
            raise DomainError(f"estimate {self.prob!r} outside [0, 1]")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")


def sample_channel(
    config: SystemConfig, alloc: StreamAllocation, rng: np.random.Generator
) -> ChannelSet:
    """Draw one full channel grid from an externally managed stream."""
    alloc.validate_against(config)
    n, m = config.num_links, config.num_antennas
    grid = []
    for tx in range(n):
        block = _complex_normal(rng, (n, m, alloc.streams[tx]))
        grid.append(tuple(block[rx] for rx in range(n)))
    return ChannelSet(tuple(grid))


def zf_nulling_vector(h_self: np.ndarray, j: int) -> ZfVector:
    """Receiver direction for stream j of one link's own M x k matrix.

    For k = 1 there is nothing to null and the matched direction is
    returned.  Otherwise the vector is the normalized residual of column
    j against the orthogonal complement of the other columns, which is
    the admissible direction maximizing |q H(j)|.  Raises
    RankDeficiencyError when the excluded columns are numerically
    rank-deficient or column j lies in their span.
    """
    h = np.asarray(h_self, dtype=np.complex128)
    if h.ndim != 2:
        raise DomainError(f"h_self must be a matrix, got shape {h.shape}")
    m, k = h.shape
    if k > m:
        raise DomainError(f"streams {k} exceed antennas {m}")
    if not 0 <= j < k:
        raise DomainError(f"stream index {j} out of range for k={k}")
    target = h[:, j]
    if k == 1:
        norm = float(np.linalg.norm(target))
        if norm == 0.0:
            raise RankDeficiencyError("zero column cannot be matched")
        return ZfVector(target.conj() / norm)

    excluded = np.delete(h, j, axis=1)
    u, svals, _ = np.linalg.svd(excluded, full_matrices=False)
    if svals[0] == 0.0 or svals[-1] / svals[0] < _RANK_TOL:
        raise RankDeficiencyError(
            f"excluded columns rank-deficient (sigma ratio "
            f"{0.0 if svals[0] == 0.0 else svals[-1] / svals[0]:.3e})"
        )
    residual = target - u @ (u.conj().T @ target)
    norm = float(np.linalg.norm(residual))
    if norm / float(np.linalg.norm(target)) < _RANK_TOL:
        raise RankDeficiencyError("stream column lies in the excluded span")
    q = residual.conj() / norm
    leak = float(np.max(np.abs(q @ excluded)))
    if leak > 1e-10:
        raise NumericalError(f"nulling residual leaks {leak:.3e} into excluded columns")
    return ZfVector(q)


def stream_sir(channels: ChannelSet, link: int, stream: int) -> SirSample:
    """SIR of one stream of one link on a given realization.

    This is the readable reference path (one trial, explicit nulling
    vector); the batched estimators reproduce it in vectorized form.
    """
    n = channels.num_links
    if not 0 <= link < n:
        raise DomainError(f"link {link} out of range for {n} links")
    streams = channels.streams
    k_self = streams[link]
    if not 0 <= stream < k_self:
        raise DomainError(f"stream {stream} out of range for k={k_self}")
    h_self = channels.matrices[link][link]
    q = zf_nulling_vector(h_self, stream).vector
    signal = float(abs(q @ h_self[:, stream]) ** 2)
    pieces = []
    for m in range(n):
        if m == link:
            continue
        z = q @ channels.matrices[m][link]
        pieces.append(np.sum(z.real * z.real + z.imag * z.imag) / streams[m])
    interference = float(math.fsum(pieces))
    return SirSample(
        signal_power=signal,
        interference_power=interference,
        k_self=k_self,
        sir=(signal / k_self) / interference,
    )


def _link_block(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    seed: int,
    block: int,
    size: int,
    keep_summands: bool,
):
    """Simulate `size` stream-1 trials for one link on one block stream.

    Returns (signal, interference, summands or None, resampled).
    """
    rng = _block_rng(seed, _PURPOSE_LINK, link, block)
    m = config.num_antennas
    k_self = alloc.streams[link]
    others = alloc.others(link)
    col_weights = np.concatenate(
        [np.full(k, 1.0 / k) for k in others]
    )  # one weight per interference column
    k_int = col_weights.size

    signal = np.empty(size)
    interference = np.empty(size)
    summands = np.empty((size, k_int)) if keep_summands else None
    pending = np.arange(size)
    resampled = 0
    while pending.size:
        b = pending.size
        h_int = _complex_normal(rng, (b, m, k_int))
        h_self = _complex_normal(rng, (b, m, k_self))
        target = h_self[:, :, 0]
        if k_self == 1:
            s = np.einsum("bm,bm->b", target, target.conj()).real
            bad = s == 0.0
            residual = target
        else:
            q_mat, r_mat = np.linalg.qr(h_self[:, :, 1:])
            diag = np.abs(np.diagonal(r_mat, axis1=1, axis2=2))
            dmax = diag.max(axis=1)
            bad = (dmax == 0.0) | (diag.min(axis=1) < _RANK_TOL * dmax)
            coeff = np.einsum("bmr,bm->br", q_mat.conj(), target)
            residual = target - np.einsum("bmr,br->bm", q_mat, coeff)
            s = np.einsum("bm,bm->b", residual, residual.conj()).real
            bad |= s == 0.0
        good = ~bad
        rows = pending[good]
        norm = np.sqrt(s[good])
        q = residual[good].conj() / norm[:, None]
        z = np.einsum("bm,bmk->bk", q, h_int[good])
        powers = (z.real * z.real + z.imag * z.imag)
        signal[rows] = s[good]
        interference[rows] = powers @ col_weights
        if keep_summands:
            summands[rows] = powers
        pending = pending[bad]
        resampled += int(bad.sum())
    return signal, interference, summands, resampled


def _link_block_task(args):
    return _link_block(*args)


def _direct_block(
    num_antennas: int,
    k_self: int,
    k_others: tuple[int, ...],
    seed: int,
    block: int,
    size: int,
):
    """Marginal-model trials: signal and interference drawn directly."""
    rng = _block_rng(seed, _PURPOSE_DIRECT, 0, block)
    interference = np.zeros(size)
    for k in k_others:
        interference += rng.gamma(shape=float(k), scale=1.0, size=size) / k
    signal = rng.gamma(shape=float(num_antennas - k_self + 1), scale=1.0, size=size)
    return signal, interference


def _direct_block_task(args):
    return _direct_block(*args)


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_TRIALS)
    sizes = [BLOCK_TRIALS] * full
    if rest:
        sizes.append(rest)
    return sizes


def _run_tasks(task_fn, args_list, workers: int):
    if workers <= 1 or len(args_list) <= 1:
        return [task_fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, args_list, chunksize=4))


def _check_mc_args(trials: int, seed: int) -> None:
    if not (isinstance(trials, int) and trials >= 1):
        raise DomainError(f"trials must be an int >= 1, got {trials!r}")
    if not isinstance(seed, int):
        raise DomainError(f"seed must be an int, got {seed!r}")


def _resample_budget(trials: int) -> int:
    return max(1, trials // 10_000)


def _link_blocks(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    trials: int,
    seed: int,
    workers: int,
    keep_summands: bool = False,
):
    alloc.validate_against(config)
    if not 0 <= link < config.num_links:
        raise DomainError(f"link {link} out of range")
    _check_mc_args(trials, seed)
    args = [
        (config, alloc, link, seed, block, size, keep_summands)
        for block, size in enumerate(_block_sizes(trials))
    ]
    results = _run_tasks(_link_block_task, args, workers)
    resampled = sum(r[3] for r in results)
    if resampled > _resample_budget(trials):
        raise NumericalError(
            f"{resampled} degenerate draws in {trials} trials "
            "(exceeds the 0.01% resampling budget)"
        )
    return results, resampled


def empirical_link_success(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Estimate P(SIR_1 >= beta) for one link from full-channel trials."""
    results, resampled = _link_blocks(config, alloc, link, trials, seed, workers)
    k_self = alloc.streams[link]
    beta = config.sir_threshold
    hits = 0
    for signal, interference, _, _ in results:
        hits += int(np.count_nonzero(signal / k_self >= beta * interference))
    p = hits / trials
    return MonteCarloEstimate(
        prob=p,
        std_error=math.sqrt(p * (1.0 - p) / trials),
        trials=trials,
        resampled=resampled,
    )


def link_success_sweep(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    betas: Sequence[float],
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> list[MonteCarloEstimate]:
    """Per-threshold estimates from one shared simulation run.

    The simulation never looks at beta, so entry i is bit-identical to
    empirical_link_success on a config whose sir_threshold is betas[i]
    with everything else equal.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise DomainError("betas must be non-empty")
    for b in betas:
        if not (math.isfinite(b) and b > 0.0):
            raise DomainError(f"thresholds must be finite and > 0, got {b!r}")
    results, resampled = _link_blocks(config, alloc, link, trials, seed, workers)
    k_self = alloc.streams[link]
    hits = [0] * len(betas)
    for signal, interference, _, _ in results:
        scaled = signal / k_self
        for i, b in enumerate(betas):
            hits[i] += int(np.count_nonzero(scaled >= b * interference))
    out = []
    for h in hits:
        p = h / trials
        out.append(
            MonteCarloEstimate(
                prob=p,
                std_error=math.sqrt(p * (1.0 - p) / trials),
                trials=trials,
                resampled=resampled,
            )
        )
    return out


def link_sir_samples(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> np.ndarray:
    """Raw stream-1 SIR samples for one link, blocks concatenated in order."""
    results, _ = _link_blocks(config, alloc, link, trials, seed, workers)
    k_self = alloc.streams[link]
    return np.concatenate(
        [(signal / k_self) / interference for signal, interference, _, _ in results]
    )


def link_power_samples(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    trials: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """(signal powers, per-column interference summands) for marginal checks.

    The summands are the raw |q H(l)|^2 values, before the 1/k_m
    weighting; each is claimed to have unit mean.
    """
    results, _ = _link_blocks(
        config, alloc, link, trials, seed, workers=1, keep_summands=True
    )
    signal = np.concatenate([r[0] for r in results])
    summands = np.concatenate([r[2] for r in results])
    return signal, summands


def empirical_outage(
    config: SystemConfig,
    alloc: StreamAllocation,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> OutageReport:
    """Full-channel Monte Carlo outage report over all links."""
    probs = []
    errs = []
    resampled = 0
    for link in range(config.num_links):
        est = empirical_link_success(
            config, alloc, link, trials, seed, workers=workers
        )
        probs.append(est.prob)
        errs.append(est.std_error)
        resampled += est.resampled
    return OutageReport.from_success(
        config, alloc, probs, std_error=errs, trials=trials, resampled=resampled
    )


def direct_sir_samples(
    num_antennas: int,
    k_self: int,
    k_others: Sequence[int],
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> np.ndarray:
    """SIR samples from the marginal model (no matrices involved)."""
    others = _check_direct_args(num_antennas, k_self, k_others)
    _check_mc_args(trials, seed)
    args = [
        (num_antennas, k_self, others, seed, block, size)
        for block, size in enumerate(_block_sizes(trials))
    ]
    results = _run_tasks(_direct_block_task, args, workers)
    return np.concatenate(
        [(signal / k_self) / interference for signal, interference in results]
    )


def direct_distribution_outage(
    num_antennas: int,
    k_self: int,
    k_others: Sequence[int],
    beta: float,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Second oracle: P(SIR >= beta) under the direct marginal model."""
    others = _check_direct_args(num_antennas, k_self, k_others)
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"beta must be finite and > 0, got {beta!r}")
    _check_mc_args(trials, seed)
    args = [
        (num_antennas, k_self, others, seed, block, size)
        for block, size in enumerate(_block_sizes(trials))
    ]
    results = _run_tasks(_direct_block_task, args, workers)
    hits = 0
    for signal, interference in results:
        hits += int(np.count_nonzero(signal / k_self >= beta * interference))
    p = hits / trials
    return MonteCarloEstimate(
        prob=p,
        std_error=math.sqrt(p * (1.0 - p) / trials),
        trials=trials,
        resampled=0,
    )


def _check_direct_args(
    num_antennas: int, k_self: int, k_others: Sequence[int]
) -> tuple[int, ...]:
    if not (isinstance(num_antennas, int) and num_antennas >= 1):
        raise DomainError(f"num_antennas must be an int >= 1, got {num_antennas!r}")
    if not (isinstance(k_self, int) and 1 <= k_self <= num_antennas):
        raise DomainError(
            f"k_self must be an int in [1, {num_antennas}], got {k_self!r}"
        )
    others = tuple(int(k) for k in k_others)
    if not others:
        raise DomainError("k_others must name at least one interferer")
    for k in others:
        if not 1 <= k <= num_antennas:
            raise DomainError(
                f"k_others entries must lie in [1, {num_antennas}], got {k}"
            )
    return others
