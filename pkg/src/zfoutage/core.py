"""Shared numerical kernel and value types for the outage-capacity library.

Conventions used throughout the package:

* Channel entries are unit-variance circularly symmetric complex Gaussians,
  so every squared-magnitude building block is an Exp(1) variable and a sum
  of m of them is Gamma(shape=m, rate=1).  All gamma distributions here are
  rate-parameterized: Gamma(shape, rate) has mean shape/rate.
* A "success probability" is P(SIR >= beta) for one stream of one link.
  Per-link outage capacity is rate * streams * success_prob, and the sum
  capacity is the exact sum of the per-link values.
* Probabilities produced by series evaluation may land epsilon-outside
  [0, 1].  They are snapped to the interval; excursions larger than
  CLAMP_TOL are counted so that a validation pass can report them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import scipy.special as _sc

__all__ = [
    "ZfOutageError",
    "DomainError",
    "NumericalError",
    "RankDeficiencyError",
    "SearchBudgetError",
    "CLAMP_TOL",
    "SMALL_SAMPLE_FLOOR",
    "clamp_probability",
    "clamp_count",
    "reset_clamp_count",
    "log_gamma",
    "gamma_ccdf",
    "SystemConfig",
    "StreamAllocation",
    "GammaParams",
    "OutageReport",
]


class ZfOutageError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ZfOutageError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericalError(ZfOutageError, ArithmeticError):
    """A computation lost the accuracy it is contracted to deliver."""


class RankDeficiencyError(ZfOutageError, ValueError):
    """A channel matrix is too close to singular for zero-forcing."""


class SearchBudgetError(ZfOutageError, RuntimeError):
    """A discrete search hit its evaluation cap before terminating."""


# Excursions beyond [0, 1] up to this size are snapped silently; anything
# larger is still snapped but counted as a diagnostic event.
CLAMP_TOL = 1e-9

# Monte Carlo estimates from fewer trials than this are flagged so that a
# zero standard error (p in {0, 1}) is not mistaken for certainty.
SMALL_SAMPLE_FLOOR = 100

_clamp_events = 0


def clamp_probability(value: float) -> float:
    """Snap ``value`` to [0, 1], counting excursions larger than CLAMP_TOL.

    Returns the clamped value.  The running count is read with
    :func:`clamp_count` and cleared with :func:`reset_clamp_count`; a clean
    run of the analytic formulas keeps the count at zero.
    """
    global _clamp_events
    if not math.isfinite(value):
        raise NumericalError(f"probability evaluated to {value!r}")
    if value < 0.0:
        if -value > CLAMP_TOL:
            _clamp_events += 1
        return 0.0
    if value > 1.0:
        if value - 1.0 > CLAMP_TOL:
            _clamp_events += 1
        return 1.0
    return value


def clamp_count() -> int:
    """Number of out-of-tolerance clamps since the last reset."""
    return _clamp_events


def reset_clamp_count() -> None:
    """Zero the clamp diagnostic counter."""
    global _clamp_events
    _clamp_events = 0


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for real ``x > 0``.

    Relative error stays below 1e-12 across [1e-3, 1e6], which is the range
    the outage series ever touches.  Raises DomainError off the half-line.
    """
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def gamma_ccdf(shape: float, rate: float, x: float) -> float:
    """P(X >= x) for X ~ Gamma(shape, rate), evaluated without overflow.

    ``gamma_ccdf(a, r, 0)`` is exactly 1, the value is nonincreasing in x,
    and for integer shapes it matches the Poisson tail identity
    P(X >= x) = P(Poisson(rate * x) <= shape - 1).
    """
    if not shape > 0.0:
        raise DomainError(f"gamma_ccdf requires shape > 0, got {shape!r}")
    if not rate > 0.0:
        raise DomainError(f"gamma_ccdf requires rate > 0, got {rate!r}")
    if x < 0.0:
        raise DomainError(f"gamma_ccdf requires x >= 0, got {x!r}")
    return float(_sc.gammaincc(shape, rate * x))


@dataclass(frozen=True)
class SystemConfig:
    """Symmetric interference network: N links, M antennas per node.

    ``sir_threshold`` is the SIR level beta a stream must clear, and
    ``rate`` is the per-stream transmission rate R used in the capacity
    product rate * streams * P(SIR >= beta).
    """

    num_links: int
    num_antennas: int
    sir_threshold: float
    rate: float = 1.0

    def __post_init__(self) -> None:
        if not (isinstance(self.num_links, int) and self.num_links >= 2):
            raise DomainError(
                f"num_links must be an int >= 2, got {self.num_links!r}"
            )
        if not (isinstance(self.num_antennas, int) and self.num_antennas >= 1):
            raise DomainError(
                f"num_antennas must be an int >= 1, got {self.num_antennas!r}"
            )
        if not (math.isfinite(self.sir_threshold) and self.sir_threshold > 0.0):
            raise DomainError(
                f"sir_threshold must be finite and > 0, got {self.sir_threshold!r}"
            )
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise DomainError(f"rate must be finite and > 0, got {self.rate!r}")

    @classmethod
    def from_rate(
        cls, num_links: int, num_antennas: int, rate: float
    ) -> "SystemConfig":
        """Build a config whose SIR threshold is 2**rate - 1.

        With this choice a stream at rate R is in outage exactly when the
        ZF output cannot support R, so threshold and rate move together.
        """
        if not (math.isfinite(rate) and rate > 0.0):
            raise DomainError(f"rate must be finite and > 0, got {rate!r}")
        return cls(
            num_links=num_links,
            num_antennas=num_antennas,
            sir_threshold=2.0**rate - 1.0,
            rate=rate,
        )


@dataclass(frozen=True)
class StreamAllocation:
    """Per-link stream counts (k_1, ..., k_N), hashable for use as a key."""

    streams: tuple[int, ...]

    def __post_init__(self) -> None:
        streams = tuple(int(k) for k in self.streams)
        object.__setattr__(self, "streams", streams)
        if len(streams) < 2:
            raise DomainError(
                f"an allocation needs at least two links, got {streams!r}"
            )
        if any(k < 1 for k in streams):
            raise DomainError(f"stream counts must be >= 1, got {streams!r}")

    @classmethod
    def uniform(cls, num_links: int, streams_per_link: int) -> "StreamAllocation":
        return cls((int(streams_per_link),) * int(num_links))

    @property
    def num_links(self) -> int:
        return len(self.streams)

    def others(self, link: int) -> tuple[int, ...]:
        """Stream counts of every link except ``link``."""
        if not 0 <= link < len(self.streams):
            raise DomainError(
                f"link index {link} out of range for {len(self.streams)} links"
            )
        return self.streams[:link] + self.streams[link + 1 :]

    def replace(self, link: int, streams: int) -> "StreamAllocation":
        """Copy of this allocation with one link's count changed."""
        if not 0 <= link < len(self.streams):
            raise DomainError(
                f"link index {link} out of range for {len(self.streams)} links"
            )
        new = list(self.streams)
        new[link] = int(streams)
        return StreamAllocation(tuple(new))

    def validate_against(self, config: SystemConfig) -> None:
        """Check length and per-link bounds for ``config``; raise DomainError."""
        if len(self.streams) != config.num_links:
            raise DomainError(
                f"allocation has {len(self.streams)} links, "
                f"config has {config.num_links}"
            )
        if any(k > config.num_antennas for k in self.streams):
            raise DomainError(
                f"stream counts {self.streams} exceed "
                f"{config.num_antennas} antennas"
            )


@dataclass(frozen=True)
class GammaParams:
    """Shape/rate pair of a rate-parameterized gamma distribution."""

    shape: float
    rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise DomainError(f"shape must be finite and > 0, got {self.shape!r}")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise DomainError(f"rate must be finite and > 0, got {self.rate!r}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / (self.rate * self.rate)


@dataclass(frozen=True)
class OutageReport:
    """Per-link success probabilities and the capacities derived from them.

    The derived fields are not free: construction re-checks that each
    capacity equals rate * streams * success_prob bit for bit and that
    ``sum_capacity`` is the exact (math.fsum) sum of the per-link values,
    so a report can never drift from its own inputs.  ``std_error`` is
    None for analytic results; Monte Carlo results carry the binomial
    standard error per link plus bookkeeping about the run.
    """

    streams: tuple[int, ...]
    rate: float
    per_link_success_prob: tuple[float, ...]
    per_link_capacity: tuple[float, ...]
    sum_capacity: float
    std_error: tuple[float, ...] | None = None
    trials: int | None = None
    resampled: int = 0
    small_sample: bool = field(default=False)

    def __post_init__(self) -> None:
        n = len(self.streams)
        if n < 2:
            raise DomainError(f"a report covers >= 2 links, got {n}")
        if len(self.per_link_success_prob) != n or len(self.per_link_capacity) != n:
            raise DomainError("per-link fields must share one length")
        if self.std_error is not None and len(self.std_error) != n:
            raise DomainError("std_error length must match the link count")
        for p in self.per_link_success_prob:
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"success probability {p!r} outside [0, 1]")
        for k, p, c in zip(
            self.streams, self.per_link_success_prob, self.per_link_capacity
        ):
            expect = self.rate * k * p
            if c != expect:
                raise DomainError(
                    f"capacity {c!r} is not rate*streams*prob ({expect!r})"
                )
        if self.sum_capacity != math.fsum(self.per_link_capacity):
            raise DomainError("sum_capacity is not the exact per-link sum")
        if self.std_error is not None:
            for s in self.std_error:
                if not (math.isfinite(s) and s >= 0.0):
                    raise DomainError(f"standard error {s!r} must be >= 0")

    @classmethod
    def from_success(
        cls,
        config: SystemConfig,
        alloc: StreamAllocation,
        success_prob,
        std_error=None,
        trials: int | None = None,
        resampled: int = 0,
    ) -> "OutageReport":
        """Derive capacities from success probabilities for one scenario."""
        alloc.validate_against(config)
        probs = tuple(float(p) for p in success_prob)
        caps = tuple(
            config.rate * k * p for k, p in zip(alloc.streams, probs)
        )
        return cls(
            streams=alloc.streams,
            rate=config.rate,
            per_link_success_prob=probs,
            per_link_capacity=caps,
            sum_capacity=math.fsum(caps),
            std_error=None if std_error is None else tuple(float(s) for s in std_error),
            trials=trials,
            resampled=resampled,
            small_sample=(trials is not None and trials < SMALL_SAMPLE_FLOOR),
        )
