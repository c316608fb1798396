"""Finite-difference stencils on uniform grids (interior points only)."""

from __future__ import annotations

import numpy as np

# central stencils: order of accuracy -> {derivative: (offsets, weights)}
_CENTRAL = {
    2: {
        1: ((-1, 1), (-0.5, 0.5)),
        2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
        3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    },
    4: {
        1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
        2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
        3: ((-3, -2, -1, 1, 2, 3), (1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8)),
    },
}


def half_width(derivative: int, accuracy: int = 2) -> int:
    offsets, _ = _CENTRAL[accuracy][derivative]
    return max(abs(o) for o in offsets)


def central(f: np.ndarray, h: float, derivative: int, axis: int = -1, accuracy: int = 2) -> np.ndarray:
    """Derivative along ``axis`` at the points where the stencil fits.

    The result is shorter than ``f`` by ``2 * half_width`` along ``axis``.
    """
    offsets, weights = _CENTRAL[accuracy][derivative]
    w = max(abs(o) for o in offsets)
    f = np.moveaxis(np.asarray(f, dtype=float), axis, -1)
    n = f.shape[-1]
    out = np.zeros(f.shape[:-1] + (n - 2 * w,))
    for o, c in zip(offsets, weights):
        out += c * f[..., w + o: n - w + o]
    return np.moveaxis(out / h**derivative, -1, axis)


def trim(f: np.ndarray, width: int, axis: int = -1) -> np.ndarray:
    """Drop ``width`` points at both ends along ``axis``."""
    if width == 0:
        return np.asarray(f)
    f = np.moveaxis(np.asarray(f), axis, -1)
    return np.moveaxis(f[..., width:-width], -1, axis)
