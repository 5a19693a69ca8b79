"""Finite-difference verification of analytic gradients.

Central differences ``(f(p + eps) - f(p - eps)) / (2 eps)`` on a random
subsample of parameter coordinates, compared against the tape's gradients.
Closures must be deterministic (dropout off, noise frozen); the checker runs
the closure twice and refuses to proceed if the two losses differ.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import KernelError, Tensor

MIN_SAMPLED_COORDS = 200


def grad_check(
    closure: Callable[[], Tensor],
    parameters: list[Tensor],
    epsilon: float = 1e-3,
    rng: np.random.Generator | None = None,
    min_coords: int = MIN_SAMPLED_COORDS,
) -> float:
    """Max relative error between analytic and numerical gradients.

    Every parameter contributes coordinates; when the total exceeds
    ``min_coords`` a seeded random subsample of that size is checked instead.
    Returns 0.0 for a closure with no parameters (vacuously correct).
    """
    if not parameters:
        return 0.0
    if rng is None:
        rng = np.random.default_rng(0)

    first = closure().data.copy()
    second = closure().data.copy()
    if not np.array_equal(first, second):
        raise KernelError(
            "closure is not deterministic (two forward passes disagree); "
            "freeze noise and disable dropout before gradient checking"
        )

    for p in parameters:
        p.grad = None
    loss = closure()
    loss.backward()
    analytic = [
        np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in parameters
    ]

    coords = [
        (i, j) for i, p in enumerate(parameters) for j in range(p.data.size)
    ]
    if len(coords) > min_coords:
        picked = rng.choice(len(coords), size=min_coords, replace=False)
        coords = [coords[int(k)] for k in sorted(picked)]

    max_rel_error = 0.0
    for i, j in coords:
        flat = parameters[i].data.reshape(-1)
        original = flat[j]
        flat[j] = original + epsilon
        f_plus = float(closure().data)
        flat[j] = original - epsilon
        f_minus = float(closure().data)
        flat[j] = original
        numeric = (f_plus - f_minus) / (2.0 * epsilon)
        a = float(analytic[i].reshape(-1)[j])
        denom = max(abs(a) + abs(numeric), 1e-10)
        rel = abs(a - numeric) / denom
        max_rel_error = max(max_rel_error, rel)
    return max_rel_error
