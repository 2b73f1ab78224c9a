"""Stream-count decisions: best response, sum-capacity search, N thresholds.

The analytic objective evaluates the closed forms; the montecarlo
objective re-estimates each candidate with the same seed, so every
candidate sees common random numbers and comparisons between stream
counts are made on shared interference draws rather than independent
noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

from .analytic import (
    NStarResult,
    link_success_prob,
    min_links_single_stream,
    success_prob_equal_k,
    sum_capacity_analytic,
)
from .core import (
    DomainError,
    SearchBudgetError,
    StreamAllocation,
    SystemConfig,
)
from .montecarlo import empirical_link_success

__all__ = [
    "SearchResult",
    "ThresholdResult",
    "best_response",
    "maximize_sum_capacity",
    "empirical_threshold",
]

_OBJECTIVES = ("analytic", "montecarlo")


@dataclass(frozen=True)
class SearchResult:
    """Outcome of an allocation search.

    per_candidate_values is the full table in exhaustive mode and None
    otherwise; fixed_point reports whether coordinate descent converged
    (None in exhaustive mode).  evaluations counts objective evaluations
    (per-link capacity calls for best-response sweeps, full-allocation
    values in exhaustive mode).
    """

    best_allocation: StreamAllocation
    best_value: float
    evaluations: int
    per_candidate_values: dict[tuple[int, ...], float] | None = None
    fixed_point: bool | None = None


@dataclass(frozen=True)
class ThresholdResult:
    """Empirical single-stream threshold with the analytic bound beside it."""

    threshold: int
    window: int
    analytic: NStarResult


def _check_objective(objective: str, trials, seed) -> None:
    if objective not in _OBJECTIVES:
        raise DomainError(
            f"objective must be one of {_OBJECTIVES}, got {objective!r}"
        )
    if objective == "montecarlo" and (trials is None or seed is None):
        raise DomainError("montecarlo objective requires trials and seed")


def _link_capacity(
    config: SystemConfig,
    alloc: StreamAllocation,
    link: int,
    objective: str,
    trials,
    seed,
    workers: int,
) -> float:
    k = alloc.streams[link]
    if objective == "analytic":
        return config.rate * k * link_success_prob(config, alloc, link)
    est = empirical_link_success(config, alloc, link, trials, seed, workers=workers)
    return config.rate * k * est.prob


def _sum_capacity(
    config: SystemConfig,
    alloc: StreamAllocation,
    objective: str,
    trials,
    seed,
    workers: int,
) -> float:
    if objective == "analytic":
        return sum_capacity_analytic(config, alloc).sum_capacity
    return math.fsum(
        _link_capacity(config, alloc, link, "montecarlo", trials, seed, workers)
        for link in range(config.num_links)
    )


def best_response(
    config: SystemConfig,
    alloc: StreamAllocation,
    link_index: int,
    objective: str = "analytic",
    *,
    trials: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> int:
    """Stream count maximizing one link's own capacity, others held fixed.

    Candidates k = 1..M are scanned in increasing order and only a
    strict improvement replaces the incumbent, so ties resolve to the
    smallest k.  The montecarlo objective reuses one seed for every
    candidate (common random numbers).
    """
    alloc.validate_against(config)
    if not 0 <= link_index < config.num_links:
        raise DomainError(
            f"link index {link_index} out of range for {config.num_links} links"
        )
    _check_objective(objective, trials, seed)
    best_k = 0
    best_value = -math.inf
    for k in range(1, config.num_antennas + 1):
        candidate = alloc.replace(link_index, k)
        value = _link_capacity(
            config, candidate, link_index, objective, trials, seed, workers
        )
        if value > best_value:
            best_k = k
            best_value = value
    return best_k


def maximize_sum_capacity(
    config: SystemConfig,
    mode: str = "exhaustive",
    objective: str = "analytic",
    *,
    budget: int = 1_000_000,
    max_sweeps: int = 50,
    trials: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> SearchResult:
    """Search for the allocation maximizing the sum outage capacity.

    exhaustive: evaluates all M^N allocations (SearchBudgetError when
    that exceeds ``budget``) and returns the full candidate table; ties
    resolve to the lexicographically smallest allocation because
    candidates are enumerated in ascending order under strict
    improvement.

    coordinate: round-robin selfish best-response sweeps from the
    all-ones start until a sweep changes nothing (fixed_point=True) or
    ``max_sweeps`` is hit (fixed_point=False).  This is a heuristic: it
    certifies a fixed point, not a global optimum.
    """
    _check_objective(objective, trials, seed)
    n, m = config.num_links, config.num_antennas

    if mode == "exhaustive":
        total = m**n
        if total > budget:
            raise SearchBudgetError(
                f"exhaustive search needs {total} evaluations, budget is {budget}"
            )
        table: dict[tuple[int, ...], float] = {}
        best_alloc = None
        best_value = -math.inf
        for streams in product(range(1, m + 1), repeat=n):
            alloc = StreamAllocation(streams)
            value = _sum_capacity(config, alloc, objective, trials, seed, workers)
            table[streams] = value
            if value > best_value:
                best_alloc = alloc
                best_value = value
        return SearchResult(
            best_allocation=best_alloc,
            best_value=best_value,
            evaluations=total,
            per_candidate_values=table,
        )

    if mode == "coordinate":
        if max_sweeps < 1:
            raise DomainError(f"max_sweeps must be >= 1, got {max_sweeps!r}")
        alloc = StreamAllocation.uniform(n, 1)
        evaluations = 0
        fixed_point = False
        for _ in range(max_sweeps):
            changed = False
            for link in range(n):
                k = best_response(
                    config,
                    alloc,
                    link,
                    objective,
                    trials=trials,
                    seed=seed,
                    workers=workers,
                )
                evaluations += m
                if k != alloc.streams[link]:
                    alloc = alloc.replace(link, k)
                    changed = True
            if not changed:
                fixed_point = True
                break
        value = _sum_capacity(config, alloc, objective, trials, seed, workers)
        evaluations += 1
        return SearchResult(
            best_allocation=alloc,
            best_value=value,
            evaluations=evaluations,
            fixed_point=fixed_point,
        )

    raise DomainError(f"mode must be 'exhaustive' or 'coordinate', got {mode!r}")


def empirical_threshold(
    num_antennas: int,
    beta: float,
    k_other: int = 1,
    *,
    objective: str = "analytic",
    window: int = 5,
    cap: int = 10_000,
) -> ThresholdResult:
    """Smallest N whose best response is a single stream, and stays so.

    Scans N upward from 2 and returns the first N at which
    best_response = 1 holds for N and the next ``window`` consecutive
    link counts, guarding against non-monotone crossings.  The analytic
    sufficient bound is computed alongside for comparison.  Raises
    SearchBudgetError when no such N <= cap exists.
    """
    if not (isinstance(num_antennas, int) and num_antennas >= 1):
        raise DomainError(f"num_antennas must be an int >= 1, got {num_antennas!r}")
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"beta must be finite and > 0, got {beta!r}")
    if not (isinstance(k_other, int) and 1 <= k_other <= num_antennas):
        raise DomainError(
            f"k_other must be an int in [1, {num_antennas}], got {k_other!r}"
        )
    if objective != "analytic":
        raise DomainError("the threshold scan supports only the analytic objective")
    if window < 0:
        raise DomainError(f"window must be >= 0, got {window!r}")

    def single_stream_best(n: int) -> bool:
        best_k = 0
        best_value = -math.inf
        for k in range(1, num_antennas + 1):
            value = k * success_prob_equal_k(num_antennas, n, k, k_other, beta)
            if value > best_value:
                best_k = k
                best_value = value
        return best_k == 1

    run_start = None
    for n in range(2, cap + window + 1):
        if single_stream_best(n):
            if run_start is None:
                run_start = n
            if n - run_start >= window and run_start <= cap:
                return ThresholdResult(
                    threshold=run_start,
                    window=window,
                    analytic=min_links_single_stream(num_antennas, beta, k_other),
                )
        else:
            run_start = None
    raise SearchBudgetError(
        f"no stable single-stream threshold found up to N = {cap} "
        f"(M={num_antennas}, beta={beta}, k_other={k_other})"
    )
