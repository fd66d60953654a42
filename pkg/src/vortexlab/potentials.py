"""Analytic background potentials with exact gradients and Hessians.

Builtin forms:
    gaussian        exp(-|x|^2)
    step            0.225 * tanh(x1)
    double_gaussian exp(-|x-(1,0)|^2) + exp(-|x+(1,0)|^2)
    lattice         sum over integer centers (j,k), |j|,|k| <= extent, of
                    exp(-|x-(j,k)|^2)

Points are accepted as shape (2,) or (m, 2); values come back scalar or (m,),
gradients (2,) or (m, 2), Hessians (2, 2) or (m, 2, 2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams


@dataclass(frozen=True)
class AnalyticPotential:
    """Background potential: callables for value, gradient, and Hessian."""

    kind: str
    value_fn: callable = field(repr=False)
    grad_fn: callable = field(repr=False)
    hess_fn: callable = field(repr=False)
    params: tuple = ()

    def __call__(self, points):
        pts, single = _prep(points)
        v = self.value_fn(pts)
        return float(v[0]) if single else v

    def gradient(self, points):
        pts, single = _prep(points)
        g = self.grad_fn(pts)
        return g[0] if single else g

    def hessian(self, points):
        pts, single = _prep(points)
        h = self.hess_fn(pts)
        return h[0] if single else h

    def on_grid(self, grid):
        """Sample values on a Grid2D, shape (nx, ny)."""
        pts = grid.points()
        return self.value_fn(pts).reshape(grid.nx, grid.ny)


def _prep(points):
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    return pts.reshape(-1, 2), single


def _gaussian_sum(centers, amplitudes=None):
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    if amplitudes is None:
        amplitudes = np.ones(len(centers))
    amplitudes = np.asarray(amplitudes, dtype=np.float64)

    def value(pts):
        d = pts[:, None, :] - centers[None, :, :]
        e = np.exp(-(d[..., 0] ** 2 + d[..., 1] ** 2))
        return e @ amplitudes

    def grad(pts):
        d = pts[:, None, :] - centers[None, :, :]
        e = np.exp(-(d[..., 0] ** 2 + d[..., 1] ** 2)) * amplitudes
        return -2.0 * np.einsum("mc,mcd->md", e, d)

    def hess(pts):
        d = pts[:, None, :] - centers[None, :, :]
        e = np.exp(-(d[..., 0] ** 2 + d[..., 1] ** 2)) * amplitudes
        outer = np.einsum("mcd,mce->mcde", d, d)
        eye = np.eye(2)
        return np.einsum("mc,mcde->mde", e, 4.0 * outer) - 2.0 * e.sum(axis=1)[:, None, None] * eye

    return value, grad, hess


def builtin_potential(kind, **params):
    """Construct one of the builtin backgrounds by name."""
    if kind == "gaussian":
        v, g, h = _gaussian_sum([[0.0, 0.0]])
        return AnalyticPotential("gaussian", v, g, h)
    if kind == "step":
        amp = float(params.pop("amplitude", 0.225))
        if params:
            raise BadParams(f"unknown step params {sorted(params)}")

        def value(pts):
            return amp * np.tanh(pts[:, 0])

        def grad(pts):
            g = np.zeros_like(pts)
            g[:, 0] = amp / np.cosh(pts[:, 0]) ** 2
            return g

        def hess(pts):
            h = np.zeros((len(pts), 2, 2))
            s = 1.0 / np.cosh(pts[:, 0]) ** 2
            h[:, 0, 0] = -2.0 * amp * s * np.tanh(pts[:, 0])
            return h

        return AnalyticPotential("step", value, grad, hess, params=(amp,))
    if kind == "double_gaussian":
        v, g, h = _gaussian_sum([[1.0, 0.0], [-1.0, 0.0]])
        return AnalyticPotential("double_gaussian", v, g, h)
    if kind == "lattice":
        extent = int(params.pop("extent", 15))
        if params:
            raise BadParams(f"unknown lattice params {sorted(params)}")
        if extent < 0 or extent > 100:
            raise BadParams("lattice extent must be in [0, 100]")
        rng = np.arange(-extent, extent + 1)
        jj, kk = np.meshgrid(rng, rng, indexing="ij")
        centers = np.column_stack([jj.ravel(), kk.ravel()]).astype(np.float64)
        v, g, h = _gaussian_sum(centers)
        return AnalyticPotential("lattice", v, g, h, params=(extent,))
    if kind == "zero":
        return zero_potential()
    raise BadParams(f"unknown potential kind {kind!r}")


def zero_potential():
    def value(pts):
        return np.zeros(len(pts))

    def grad(pts):
        return np.zeros_like(pts)

    def hess(pts):
        return np.zeros((len(pts), 2, 2))

    return AnalyticPotential("zero", value, grad, hess)


def potential_from_callables(value_fn, grad_fn, hess_fn, kind="custom", params=()):
    """Wrap user-supplied vectorized callables as an AnalyticPotential."""
    return AnalyticPotential(kind, value_fn, grad_fn, hess_fn, params=tuple(params))


def scaled_potential(base, factor):
    """factor * base, keeping derivatives consistent."""
    return AnalyticPotential(
        f"scaled({base.kind})",
        lambda pts: factor * base.value_fn(pts),
        lambda pts: factor * base.grad_fn(pts),
        lambda pts: factor * base.hess_fn(pts),
        params=(factor, *base.params),
    )


def polynomial_bump_potential(amplitude=1.0, radius=1.0, center=(0.0, 0.0), power=4):
    """Compactly supported bump a*(1 - |x-c|^2/R^2)^m, zero outside |x-c| < R.

    With m >= 4 this is C^2 with exactly compactly supported gradient, and its
    derivative hierarchy is tame enough that the background solver shows its
    clean eps^2 rate already at eps ~ 0.1 (the exponential bump's Gevrey tail
    stalls the empirical order at those scales).
    """
    cx, cy = float(center[0]), float(center[1])
    R2 = float(radius) ** 2
    a = float(amplitude)
    m = int(power)
    if m < 2:
        raise BadParams("power must be >= 2 for a C^1 bump")

    def _s(pts):
        dx = pts[:, 0] - cx
        dy = pts[:, 1] - cy
        return dx, dy, (dx * dx + dy * dy) / R2

    def value(pts):
        _, _, s = _s(pts)
        return a * np.maximum(1.0 - s, 0.0) ** m

    def grad(pts):
        dx, dy, s = _s(pts)
        u = np.maximum(1.0 - s, 0.0)
        coef = -2.0 * a * m * u ** (m - 1) / R2
        return np.column_stack([coef * dx, coef * dy])

    def hess(pts):
        dx, dy, s = _s(pts)
        u = np.maximum(1.0 - s, 0.0)
        c1 = -2.0 * a * m * u ** (m - 1) / R2
        c2 = 4.0 * a * m * (m - 1) * u ** (m - 2) / R2 ** 2
        h = np.empty((len(pts), 2, 2))
        h[:, 0, 0] = c1 + c2 * dx * dx
        h[:, 1, 1] = c1 + c2 * dy * dy
        h[:, 0, 1] = h[:, 1, 0] = c2 * dx * dy
        return h

    return AnalyticPotential("poly_bump", value, grad, hess,
                             params=(a, radius, cx, cy, m))


def bump_potential(amplitude=1.0, radius=1.0, center=(0.0, 0.0)):
    """Smooth bump a*exp(1 - 1/(1 - |x-c|^2/R^2)) with compactly supported gradient.

    Value and all derivatives vanish identically outside |x-c| < R, which is
    the hypothesis for the eps^2 convergence of the background solver.
    """
    cx, cy = float(center[0]), float(center[1])
    R2 = float(radius) ** 2
    a = float(amplitude)

    def _core(pts):
        dx = pts[:, 0] - cx
        dy = pts[:, 1] - cy
        s = (dx * dx + dy * dy) / R2  # s in [0,1) inside the support
        inside = s < 1.0
        u = np.where(inside, 1.0 - s, 1.0)
        val = np.zeros(len(pts))
        val[inside] = a * np.exp(1.0 - 1.0 / u[inside])
        return dx, dy, s, inside, u, val

    def value(pts):
        return _core(pts)[-1]

    def grad(pts):
        dx, dy, s, inside, u, val = _core(pts)
        g = np.zeros((len(pts), 2))
        # d/ds of exp(1 - 1/(1-s)) = -val / (1-s)^2 ; ds/dx = 2*dx/R2
        coef = np.zeros(len(pts))
        coef[inside] = -val[inside] / u[inside] ** 2 * (2.0 / R2)
        g[:, 0] = coef * dx
        g[:, 1] = coef * dy
        return g

    def hess(pts):
        dx, dy, s, inside, u, val = _core(pts)
        h = np.zeros((len(pts), 2, 2))
        # f(s) = a*exp(1 - 1/(1-s)); f' = -f/u^2, f'' = f*(1 - 2u)/u^4,  u = 1-s
        f1 = np.zeros(len(pts))
        f2 = np.zeros(len(pts))
        f1[inside] = -val[inside] / u[inside] ** 2
        f2[inside] = val[inside] * (1.0 - 2.0 * u[inside]) / u[inside] ** 4
        sx = 2.0 * dx / R2
        sy = 2.0 * dy / R2
        h[:, 0, 0] = f2 * sx * sx + f1 * 2.0 / R2
        h[:, 1, 1] = f2 * sy * sy + f1 * 2.0 / R2
        h[:, 0, 1] = h[:, 1, 0] = f2 * sx * sy
        return h

    return AnalyticPotential("bump", value, grad, hess, params=(a, radius, cx, cy))
