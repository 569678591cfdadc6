"""Central finite-difference stencils on equally spaced samples.

Every function takes the samples f(x0 + k h) for k = -r..r (so ``len = 2r+1``)
and returns the derivative estimate at x0.  All stencils are fourth order.
"""

from __future__ import annotations

import numpy as np

# weights for k = -3..3
_W1 = np.array([0.0, 1.0, -8.0, 0.0, 8.0, -1.0, 0.0]) / 12.0
_W2 = np.array([0.0, -1.0, 16.0, -30.0, 16.0, -1.0, 0.0]) / 12.0
_W3 = np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0
_W4 = np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0

_TABLE = {1: _W1, 2: _W2, 3: _W3, 4: _W4}


def weights(order: int, radius: int) -> np.ndarray:
    """Stencil weights for the given derivative order on 2*radius+1 points."""
    w = _TABLE[order]
    if radius == 3:
        return w
    if radius == 2 and order <= 2:
        return w[1:-1]
    raise ValueError(f"no fourth-order stencil for derivative {order} on {2 * radius + 1} points")


def derivative(samples, h: float, order: int, axis: int = 0) -> np.ndarray:
    """Apply the stencil along ``axis`` of an array of equally spaced samples."""
    samples = np.asarray(samples, dtype=float)
    radius = (samples.shape[axis] - 1) // 2
    w = weights(order, radius)
    return np.tensordot(w, np.moveaxis(samples, axis, 0), axes=1) / h**order


def richardson(coarse, fine, order: int = 4):
    """Combine estimates with step h and h/2 whose error is O(h^order)."""
    f = 2.0**order
    return (f * np.asarray(fine) - np.asarray(coarse)) / (f - 1.0)
