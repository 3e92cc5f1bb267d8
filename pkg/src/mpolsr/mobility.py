"""Random waypoint motion.

Each node travels in a straight line toward a uniformly drawn waypoint at
a speed drawn from the configured range, pauses on arrival, then draws
the next leg.  All randomness comes from the caller's generator and is
consumed in node order, so trajectories are reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass


@dataclass
class Motion:
    x: float
    y: float
    target_x: float
    target_y: float
    speed: float
    pause_until: float


def init_motions(
    count: int,
    area: tuple[float, float],
    rng: random.Random,
    placements: dict[int, tuple[float, float]] | None = None,
) -> list[Motion]:
    """Uniform initial positions (or fixed ones) with no leg in progress."""
    out = []
    for i in range(count):
        if placements is not None and i in placements:
            x, y = placements[i]
        else:
            x = rng.uniform(0.0, area[0])
            y = rng.uniform(0.0, area[1])
        out.append(Motion(x, y, x, y, 0.0, 0.0))
    return out


def step_motions(
    motions: list[Motion],
    area: tuple[float, float],
    speed_range: tuple[float, float],
    pause_time: float,
    dt: float,
    now: float,
    rng: random.Random,
) -> bool:
    """Advance every node by ``dt`` seconds, drawing new legs as needed.

    Returns True when any position changed, so callers can skip
    recomputing anything position-derived during pauses.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    lo, hi = speed_range
    moved = False
    for m in motions:
        if now < m.pause_until:
            continue
        if m.x == m.target_x and m.y == m.target_y:
            if hi <= 0.0:
                continue  # immobile configuration
            m.target_x = rng.uniform(0.0, area[0])
            m.target_y = rng.uniform(0.0, area[1])
            m.speed = rng.uniform(lo, hi)
            if m.speed <= 0.0:
                m.target_x, m.target_y = m.x, m.y
                continue
        dx = m.target_x - m.x
        dy = m.target_y - m.y
        dist = math.hypot(dx, dy)
        step = m.speed * dt
        if step >= dist:
            m.x, m.y = m.target_x, m.target_y
            m.pause_until = now + pause_time
        else:
            m.x += dx / dist * step
            m.y += dy / dist * step
        moved = True
    return moved
