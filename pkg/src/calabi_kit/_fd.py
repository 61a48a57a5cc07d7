"""Fourth-order central finite-difference stencils."""
from __future__ import annotations

from typing import Callable

import numpy as np

# offsets, weights; divide by h**order
STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    3: ((-3, -2, -1, 1, 2, 3), (1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8)),
}


def central_derivative(f: Callable[[np.ndarray], np.ndarray], x0: float, order: int, h: float) -> float:
    """``d^order f / dx^order`` at ``x0``; ``f`` is evaluated on a whole array at once."""
    offsets, weights = STENCILS[order]
    xs = x0 + h * np.asarray(offsets, dtype=float)
    values = np.asarray(f(xs), dtype=float)
    return float(np.dot(weights, values) / h**order)
