"""Redundancy allocation across paths and quality-vs-overhead planning.

Congested paths get fewer redundant descriptions: a path's weight is its
free buffer fraction 1 - peak/capacity, and the redundant description
budget is split proportionally to weights.  The alternative "product"
normalization divides by the product of all weights instead; it is kept
selectable for comparison but does not preserve the budget total and
breaks down when any path is saturated.

Planning works on the reception-count distribution: with independent
per-description delivery probabilities the number of descriptions that
arrive is exhaustively enumerated, and a quality model maps reception
counts to expected quality through its thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class AllocationError(Exception):
    """No capacity information usable for a redundancy split."""


class BudgetError(Exception):
    """No candidate geometry satisfies the overhead budget."""


@dataclass(frozen=True)
class PathStats:
    """Peak queue occupancy observed along one path."""

    peak_queue: int
    queue_capacity: int

    def __post_init__(self):
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")
        if not 0 <= self.peak_queue <= self.queue_capacity:
            raise ValueError("peak_queue must lie in [0, capacity]")

    @property
    def free_fraction(self) -> float:
        return 1.0 - self.peak_queue / self.queue_capacity


def allocate(
    path_stats: list[PathStats],
    total: float,
    normalization: str = "sum",
) -> list[float]:
    """Split ``total`` redundant descriptions across paths by free space."""
    if not path_stats:
        raise ValueError("at least one path required")
    if total < 0:
        raise ValueError("total must be >= 0")
    weights = [s.free_fraction for s in path_stats]
    if normalization == "sum":
        norm = sum(weights)
        if norm <= 0.0:
            raise AllocationError("every path is fully congested")
    elif normalization == "product":
        norm = math.prod(weights)
        if norm <= 0.0:
            raise AllocationError(
                "product normalization undefined with a saturated path"
            )
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return [total * w / norm for w in weights]


def largest_remainder_round(values: list[float], total: int) -> list[int]:
    """Round non-negative reals to ints that sum exactly to ``total``.

    Floors first, then hands out the remaining units by descending
    fractional part (ties toward the earlier entry, so results are
    order-stable).
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    if any(v < 0 for v in values):
        raise ValueError("values must be >= 0")
    floors = [math.floor(v) for v in values]
    leftover = total - sum(floors)
    if leftover < 0 or leftover > len(values):
        raise ValueError(
            f"total {total} not reachable by rounding values summing to "
            f"{sum(values):g}"
        )
    order = sorted(range(len(values)),
                   key=lambda i: (floors[i] - values[i], i))
    out = list(floors)
    for i in order[:leftover]:
        out[i] += 1
    return out


def reception_distribution(probs: list[float]) -> list[float]:
    """P[exactly k descriptions arrive] for k = 0..N, by 2^N enumeration.

    Descriptions are delivered independently with the given probabilities.
    Exhaustive enumeration keeps this a transparent desk-scale oracle, so
    N is capped at 16.
    """
    n = len(probs)
    if n == 0:
        raise ValueError("at least one probability required")
    if n > 16:
        raise ValueError("enumeration supports at most 16 descriptions")
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise ValueError("probabilities must lie in [0, 1]")
    dist = [0.0] * (n + 1)
    for mask in range(1 << n):
        prob = 1.0
        for i, p in enumerate(probs):
            prob *= p if mask >> i & 1 else 1.0 - p
        dist[mask.bit_count()] += prob
    return dist


@dataclass(frozen=True)
class QualityModel:
    """Stepwise quality: increment j is earned once reception >= threshold j.

    Expected quality is the increment-weighted tail of the reception
    distribution, so a model with increments summing to 1 yields a value
    in [0, 1].
    """

    increments: tuple[float, ...]
    thresholds: tuple[int, ...]

    def __post_init__(self):
        if len(self.increments) != len(self.thresholds) or not self.increments:
            raise ValueError("need matching, non-empty increments/thresholds")
        if any(q < 0 for q in self.increments):
            raise ValueError("increments must be >= 0")
        if any(r < 0 for r in self.thresholds):
            raise ValueError("thresholds must be >= 0")
        if list(self.thresholds) != sorted(self.thresholds):
            raise ValueError("thresholds must be non-decreasing")

    @classmethod
    def all_or_nothing(cls, needed: int) -> "QualityModel":
        """Full quality at ``needed`` receptions, nothing below."""
        return cls(increments=(1.0,), thresholds=(needed,))


def expected_quality(model: QualityModel, distribution: list[float]) -> float:
    """Sum of increment_j * P[receptions >= threshold_j]."""
    n = len(distribution) - 1
    if max(model.thresholds) > n:
        raise ValueError(
            f"threshold {max(model.thresholds)} outside distribution "
            f"support 0..{n}"
        )
    tail = [0.0] * (n + 2)
    for k in range(n, -1, -1):
        tail[k] = tail[k + 1] + distribution[k]
    return sum(q * tail[r] for q, r in zip(model.increments, model.thresholds))


def optimize_mn(
    per_path_probs: list[float],
    candidates: list[tuple[int, int]],
    overhead_budget: float,
    model: QualityModel | None = None,
) -> tuple[int, int]:
    """Best (m, n) among candidates with overhead n/m within budget.

    Description i is assumed to travel path i modulo the path count.  With
    no explicit model each candidate is scored all-or-nothing at its own
    m.  Ties prefer fewer descriptions, then fewer required ones.
    """
    if not per_path_probs:
        raise ValueError("per-path probabilities required")
    if not candidates:
        raise ValueError("candidate list is empty")
    best: tuple[float, int, int] | None = None
    best_pair: tuple[int, int] | None = None
    for m, n in candidates:
        if m < 1 or n < m:
            raise ValueError(f"invalid candidate ({m}, {n})")
        if n / m > overhead_budget + 1e-9:
            continue
        probs = [per_path_probs[i % len(per_path_probs)] for i in range(n)]
        dist = reception_distribution(probs)
        scoring = model if model is not None else QualityModel.all_or_nothing(m)
        score = expected_quality(scoring, dist)
        key = (-score, n, m)
        if best is None or key < best:
            best = key
            best_pair = (m, n)
    if best_pair is None:
        raise BudgetError(
            f"no candidate meets overhead budget {overhead_budget:g}"
        )
    return best_pair
