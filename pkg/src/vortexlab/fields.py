"""Complex fields on a grid, supercurrents, and Jacobians.

The pairing (b, c) = (b conj(c) + conj(b) c) / 2 gives the supercurrent
j(w) = (i w, grad w) = Im(conj(w) grad w) and the Jacobian
J(w) = det grad w = curl j(w) / 2, computed with centered differences
(one-sided on the boundary).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._operators import centered_gradient
from .errors import BadParams, NonFiniteInput


@dataclass(frozen=True)
class ComplexField:
    """Grid samples of a complex field with a timestamp."""

    grid: object
    w: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.complex128)
        if w.shape != self.grid.shape:
            raise BadParams("field shape does not match grid")
        if not np.isfinite(w.view(np.float64)).all():
            raise NonFiniteInput("non-finite field samples")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def supercurrent(field):
    """(j_x, j_y) arrays of the momentum density Im(conj(w) grad w)."""
    w = field.w
    gx, gy = centered_gradient(w, field.grid.hx, field.grid.hy)
    wc = np.conj(w)
    return (wc * gx).imag, (wc * gy).imag


def jacobian(field):
    """J(w) = curl j / 2 on the grid."""
    jx, jy = supercurrent(field)
    hx, hy = field.grid.hx, field.grid.hy
    djy_dx, _ = centered_gradient(jy, hx, hy)
    _, djx_dy = centered_gradient(jx, hx, hy)
    return 0.5 * (djy_dx - djx_dy)


def plaquette_windings(field):
    """Integer phase winding of every grid plaquette, shape (nx-1, ny-1).

    The winding is the sum of principal-value phase differences around the
    four plaquette edges divided by 2*pi, an exact integer for any field with
    no zero on a plaquette corner or edge.
    """
    w = field.w
    # principal-value difference along an edge a -> b is angle(b * conj(a))
    d_bottom = np.angle(w[1:, :-1] * np.conj(w[:-1, :-1]))
    d_right = np.angle(w[1:, 1:] * np.conj(w[1:, :-1]))
    d_top = np.angle(w[:-1, 1:] * np.conj(w[1:, 1:]))
    d_left = np.angle(w[:-1, :-1] * np.conj(w[:-1, 1:]))
    total = d_bottom + d_right + d_top + d_left
    winding = total / (2.0 * np.pi)
    return np.rint(winding).astype(np.int64)


def plaquette_winding_defect(field):
    """max |phase sum / 2 pi - nearest integer| over all plaquettes; zero up to
    rounding because the principal-value sum is an exact multiple of 2 pi."""
    w = field.w
    d_bottom = np.angle(w[1:, :-1] * np.conj(w[:-1, :-1]))
    d_right = np.angle(w[1:, 1:] * np.conj(w[1:, :-1]))
    d_top = np.angle(w[:-1, 1:] * np.conj(w[1:, 1:]))
    d_left = np.angle(w[:-1, :-1] * np.conj(w[:-1, 1:]))
    winding = (d_bottom + d_right + d_top + d_left) / (2.0 * np.pi)
    return float(np.abs(winding - np.rint(winding)).max())


def boundary_winding(field):
    """Winding of arg w around the outer boundary of the grid (counterclockwise)."""
    w = field.w
    loop = np.concatenate([w[:, 0], w[-1, 1:, ], w[-2::-1, -1], w[0, -2::-1]])
    diffs = np.angle(loop[1:] * np.conj(loop[:-1]))
    return int(np.rint(diffs.sum() / (2.0 * np.pi)))
