"""Dykstra alternating projections for two-cone problems.

Two flavours are used throughout the package:

* projection onto the intersection K1 ∩ K2 of two closed convex cones, and
* the split feasibility question c = a + b with a ∈ K1, b ∈ K2
  (membership of c in the Minkowski sum K1 + K2).

Plain alternating projections would only find a point of an intersection
of translates; Dykstra's correction terms make the iterates converge to
the actual nearest point, which is what turns the final residual into a
meaningful distance estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import DEFAULT, Tolerances, frobenius

Projection = Callable[[np.ndarray], np.ndarray]


@dataclass
class DykstraResult:
    point: np.ndarray           # final K1-feasible iterate (intersection flavour)
    residual: float
    iterations: int
    converged: bool


@dataclass
class SplitResult:
    part1: np.ndarray
    part2: np.ndarray
    residual: float             # ||c - part1 - part2||_F
    iterations: int
    converged: bool
    deficit: np.ndarray | None  # normalized unsplit direction when infeasible


def _stagnated(history: list[float], window: int, progress: float) -> bool:
    if len(history) <= window:
        return False
    old = history[-window - 1]
    new = history[-1]
    return old - new < progress * max(1.0, old)


def project_intersection(
    x0: np.ndarray,
    proj1: Projection,
    proj2: Projection,
    tol: float = DEFAULT.cone,
    max_iter: int = DEFAULT.max_iter,
    opts: Tolerances = DEFAULT,
) -> DykstraResult:
    """Dykstra projection of x0 onto K1 ∩ K2.

    The residual is the distance between the two one-sided projections,
    which vanishes exactly on the intersection.
    """
    x = np.array(x0, dtype=complex)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    history: list[float] = []
    y = x
    for it in range(1, max_iter + 1):
        y = proj1(x + p)
        p = x + p - y
        x = proj2(y + q)
        q = y + q - x
        res = frobenius(x - y)
        history.append(res)
        if res <= tol:
            return DykstraResult(point=x, residual=res, iterations=it, converged=True)
        if _stagnated(history, opts.dykstra_window, opts.dykstra_progress):
            break
    return DykstraResult(point=x, residual=history[-1], iterations=len(history), converged=False)


def split_sum(
    c: np.ndarray,
    proj1: Projection,
    proj2: Projection,
    tol: float = DEFAULT.cone,
    max_iter: int = DEFAULT.max_iter,
    opts: Tolerances = DEFAULT,
) -> SplitResult:
    """Decide c = a + b with a ∈ K1, b ∈ K2 by Dykstra in the product space.

    The product-space sets are C1 = K1 × K2 (cone projections, with Dykstra
    corrections) and the affine constraint C2 = {(a, b) : a + b = c}
    (exact projection, no correction needed for an affine set).
    """
    c = np.asarray(c, dtype=complex)
    a = c / 2
    b = c / 2
    pa = np.zeros_like(c)
    pb = np.zeros_like(c)
    history: list[float] = []
    best = None
    for it in range(1, max_iter + 1):
        a1 = proj1(a + pa)
        b1 = proj2(b + pb)
        pa = a + pa - a1
        pb = b + pb - b1
        gap = c - a1 - b1
        res = frobenius(gap)
        history.append(res)
        if best is None or res < best[0]:
            best = (res, a1, b1, gap)
        if res <= tol:
            return SplitResult(part1=a1, part2=b1, residual=res, iterations=it,
                               converged=True, deficit=None)
        # affine step: distribute the split gap evenly
        a = a1 + gap / 2
        b = b1 + gap / 2
        if _stagnated(history, opts.dykstra_window, opts.dykstra_progress):
            break
    res, a1, b1, gap = best
    scale = frobenius(gap)
    deficit = gap / scale if scale > 0 else gap
    return SplitResult(part1=a1, part2=b1, residual=res, iterations=len(history),
                       converged=False, deficit=deficit)
