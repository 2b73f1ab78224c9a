"""Closed-form success probabilities, capacities, and the link-count threshold.

One stream of link n clears the SIR threshold beta when its post-nulling
signal power s ~ Gamma(M - k_self + 1, 1), scaled by 1/k_self, exceeds
beta times the weighted interference power I.  Integrating the Poisson
tail of s against a Gamma(lam, alpha) density for I gives a finite sum

    P(SIR >= beta) = sum_{r=0}^{M-k_self} d^r / (1+d)^{r+lam}
                     * Gamma(r+lam) / (r! Gamma(lam)),    d = beta*k_self/alpha.

Every summand is a negative-binomial probability, so each lies in [0, 1]
and the partial sum is already a probability.  Two regimes share this
form:

* equal interferers (every other link runs k_other streams): the
  interference is exactly Gamma((N-1)*k_other, k_other), so lam and
  alpha are exact and the sum is the true probability;
* arbitrary interferers: (lam, alpha) come from moment matching the
  weighted exponential sum, and the result carries the accuracy of that
  two-moment fit.

The series here uses the summation range r = 0..M-k_self and exponent
r+lam that the underlying integral produces.  A "shifted" variant
(range r = 1..M-k_self+1, exponent r+lam-1) is kept behind a switch on
success_prob_equal_k so the two conventions can be compared against an
integration oracle; it is not used for any result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    DomainError,
    GammaParams,
    NumericalError,
    OutageReport,
    SearchBudgetError,
    StreamAllocation,
    SystemConfig,
    clamp_probability,
    log_gamma,
)

__all__ = [
    "success_prob_equal_k",
    "link_capacity_equal_k",
    "gamma_approx_params",
    "success_prob_general",
    "link_success_prob",
    "NStarResult",
    "min_links_single_stream",
    "sum_capacity_analytic",
]


def _series_sum(num_extra: int, d: float, lam: float, shifted: bool) -> float:
    """Log-domain evaluation of the success series.

    num_extra is M - k_self, the number of terms beyond r = 0.  The
    shifted flag selects the alternative indexing (r from 1 to
    num_extra + 1, denominator exponent r + lam - 1); both variants are
    evaluated term by term through log_gamma so that lam of order 10^3
    neither overflows nor loses the factorial ratios.
    """
    log_d = math.log(d)
    log_1pd = math.log1p(d)
    lg_lam = log_gamma(lam)
    terms = []
    if shifted:
        r_range = range(1, num_extra + 2)
        shift = 1.0
    else:
        r_range = range(0, num_extra + 1)
        shift = 0.0
    for r in r_range:
        log_term = (
            r * log_d
            - (r + lam - shift) * log_1pd
            + log_gamma(r + lam)
            - log_gamma(r + 1.0)
            - lg_lam
        )
        terms.append(math.exp(log_term))
    return math.fsum(terms)


def _check_stream_count(name: str, value: int, num_antennas: int) -> None:
    if not (isinstance(value, int) and 1 <= value <= num_antennas):
        raise DomainError(
            f"{name} must be an int in [1, {num_antennas}], got {value!r}"
        )


def success_prob_equal_k(
    num_antennas: int,
    num_links: int,
    k_self: int,
    k_other: int,
    beta: float,
    *,
    series: str = "ccdf",
) -> float:
    """P(SIR >= beta) for one stream when every interferer runs k_other streams.

    The interference k_other * I is a sum of (N-1)*k_other unit
    exponentials, so the result is exact (no moment matching).  The
    default series="ccdf" is the integral-consistent form; series="shifted"
    evaluates the alternative indexing for comparison purposes only.
    """
    if not (isinstance(num_antennas, int) and num_antennas >= 1):
        raise DomainError(f"num_antennas must be an int >= 1, got {num_antennas!r}")
    if not (isinstance(num_links, int) and num_links >= 2):
        raise DomainError(f"num_links must be an int >= 2, got {num_links!r}")
    _check_stream_count("k_self", k_self, num_antennas)
    _check_stream_count("k_other", k_other, num_antennas)
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"beta must be finite and > 0, got {beta!r}")
    if series not in ("ccdf", "shifted"):
        raise DomainError(f"series must be 'ccdf' or 'shifted', got {series!r}")

    lam = float((num_links - 1) * k_other)
    d = beta * k_self / k_other
    total = _series_sum(num_antennas - k_self, d, lam, series == "shifted")
    return clamp_probability(total)


def link_capacity_equal_k(
    config: SystemConfig, k_self: int, k_other: int
) -> float:
    """Outage capacity rate * k_self * P(SIR >= beta) under equal interferers."""
    p = success_prob_equal_k(
        config.num_antennas,
        config.num_links,
        k_self,
        k_other,
        config.sir_threshold,
    )
    return config.rate * k_self * p


def gamma_approx_params(weights: Sequence[float]) -> GammaParams:
    """Match a Gamma(shape, rate) to X = sum a_i z_i with z_i ~ Exp(1).

    Matching the first two moments gives shape = (sum a)^2 / sum a^2 and
    rate = (sum a) / sum a^2.  The returned pair is verified to reproduce
    E[X] = sum a and Var[X] = sum a^2 before it is handed back; for
    all-equal weights the fit is the exact distribution.
    """
    ws = [float(w) for w in weights]
    if not ws:
        raise DomainError("weights must be non-empty")
    for w in ws:
        if not (math.isfinite(w) and w > 0.0):
            raise DomainError(f"weights must be positive reals, got {w!r}")
    total = math.fsum(ws)
    total_sq = math.fsum(w * w for w in ws)
    params = GammaParams(shape=total * total / total_sq, rate=total / total_sq)
    if not math.isclose(params.mean, total, rel_tol=1e-9):
        raise NumericalError(
            f"moment match lost the mean: {params.mean!r} vs {total!r}"
        )
    if not math.isclose(params.variance, total_sq, rel_tol=1e-9):
        raise NumericalError(
            f"moment match lost the variance: {params.variance!r} vs {total_sq!r}"
        )
    return params


def success_prob_general(
    num_antennas: int,
    k_self: int,
    k_others: Sequence[int],
    beta: float,
) -> float:
    """P(SIR >= beta) for one stream against interferers with arbitrary streams.

    The interference I = sum_m (1/k_m) sum_{l=1}^{k_m} I_{l,m} is a
    weighted sum of unit exponentials, k_m copies of weight 1/k_m per
    interferer.  Its density is replaced by the moment-matched gamma fit
    from gamma_approx_params; the closed form then mirrors the equal-k
    series with d = beta*k_self/alpha and a generally non-integer shape.
    No special casing: when all k_m agree the fit is exact and the value
    lands on success_prob_equal_k to floating-point accuracy.
    """
    if not (isinstance(num_antennas, int) and num_antennas >= 1):
        raise DomainError(f"num_antennas must be an int >= 1, got {num_antennas!r}")
    _check_stream_count("k_self", k_self, num_antennas)
    others = list(k_others)
    if not others:
        raise DomainError("k_others must name at least one interferer")
    for k in others:
        _check_stream_count("k_others entry", k, num_antennas)
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"beta must be finite and > 0, got {beta!r}")

    weights = [1.0 / k for k in others for _ in range(k)]
    params = gamma_approx_params(weights)
    d = beta * k_self / params.rate
    total = _series_sum(num_antennas - k_self, d, params.shape, shifted=False)
    return clamp_probability(total)


@dataclass(frozen=True)
class NStarResult:
    """Smallest link count past which single-stream transmission dominates.

    binding_p is the per-link stream count whose inequality was the last
    to be satisfied during the scan, i.e. the constraint that sets the
    threshold.
    """

    n_star: int
    binding_p: int


def min_links_single_stream(
    num_antennas: int,
    beta: float,
    k_other: int = 1,
    *,
    cap: int = 1_000_000,
) -> NStarResult:
    """Smallest N >= 2 making the capacity ratio chain favor one stream.

    For each candidate stream count p = 1..M the sufficient condition is

        ((k + beta*(p+1)) / (k + beta*p))^{(N-1)k - 1}
            * (beta / (k + beta))^{M - p + 1}  >=  (p+1)/p

    with k = k_other.  The left side grows geometrically in N, so a
    linear scan upward from N = 2 terminates; each p is dropped from the
    pending set once its inequality holds, which keeps the scan O(N*+M).
    Raises SearchBudgetError if the scan passes ``cap`` links.
    """
    if not (isinstance(num_antennas, int) and num_antennas >= 1):
        raise DomainError(f"num_antennas must be an int >= 1, got {num_antennas!r}")
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"beta must be finite and > 0, got {beta!r}")
    _check_stream_count("k_other", k_other, num_antennas)

    k = float(k_other)
    # Per-p constants of the log inequality
    #   ((N-1)k - 1) * slope_p + offset_p >= 0.
    slopes = []
    offsets = []
    for p in range(1, num_antennas + 1):
        slope = math.log((k + beta * (p + 1)) / (k + beta * p))
        offset = (num_antennas - p + 1) * math.log(beta / (k + beta)) - math.log(
            (p + 1) / p
        )
        slopes.append(slope)
        offsets.append(offset)

    pending = list(range(num_antennas))
    satisfied_at = [0] * num_antennas
    n = 2
    while pending:
        if n > cap:
            raise SearchBudgetError(
                f"no threshold found up to N = {cap} "
                f"(M={num_antennas}, beta={beta}, k_other={k_other})"
            )
        exponent = (n - 1) * k - 1.0
        still = []
        for idx in pending:
            if exponent * slopes[idx] + offsets[idx] >= 0.0:
                satisfied_at[idx] = n
            else:
                still.append(idx)
        pending = still
        if pending:
            n += 1

    n_star = n
    # Among constraints satisfied only at the final N, report the one with
    # the smallest margin: the inequality that actually pins the threshold.
    exponent = (n_star - 1) * k - 1.0
    binding = max(
        (idx for idx in range(num_antennas) if satisfied_at[idx] == n_star),
        key=lambda idx: -(exponent * slopes[idx] + offsets[idx]),
    )
    return NStarResult(n_star=n_star, binding_p=binding + 1)


def link_success_prob(
    config: SystemConfig, alloc: StreamAllocation, link: int
) -> float:
    """P(SIR >= beta) for one link of an allocation.

    Dispatches to the exact equal-k series when the other links all run
    the same stream count, and to the moment-matched general form
    otherwise.
    """
    alloc.validate_against(config)
    if not 0 <= link < config.num_links:
        raise DomainError(
            f"link index {link} out of range for {config.num_links} links"
        )
    others = alloc.others(link)
    k_self = alloc.streams[link]
    if len(set(others)) == 1:
        return success_prob_equal_k(
            config.num_antennas,
            config.num_links,
            k_self,
            others[0],
            config.sir_threshold,
        )
    return success_prob_general(
        config.num_antennas, k_self, others, config.sir_threshold
    )


def sum_capacity_analytic(
    config: SystemConfig, alloc: StreamAllocation
) -> OutageReport:
    """Per-link success probabilities and capacities for one allocation."""
    alloc.validate_against(config)
    probs = [
        link_success_prob(config, alloc, link)
        for link in range(config.num_links)
    ]
    return OutageReport.from_success(config, alloc, probs)
