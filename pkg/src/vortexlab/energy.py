"""Vortex interaction energy and the limiting unit-modulus phase field.

On the full plane the renormalized energy is the Coulomb sum
    W = -pi * sum_{j != k} d_j d_k log|a_j - a_k|   (ordered pairs),
the correct form for dynamics far from boundaries. On a disk of radius R the
boundary contribution is expressed through the Green's function with
logarithmic pole 2*pi*d*delta and zero boundary values,
    G(x, a, d) = d * [log|x - a| - log(|x - a*| |a| / R)],  a* = R^2 a/|a|^2,
whose regular part F(x, a) = G(x, a, d) - d log|x - a| enters
    W = -pi sum_{j != k} d_j d_k log|a_j - a_k| + pi sum_{j,k} d_j F(a_j, a_k).

H0 adds the background coupling pi * sum_j Q0(a_j); H_eps additionally counts
the per-core cost pi |log eps| + gamma0 per vortex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, CoincidentVortices, EvaluationAtVortex, UnsupportedDomain
from .geometry import Domain

_COINCIDENCE_TOL = 1e-14


def _check_separated(config):
    pts = config.positions
    n = len(pts)
    if n < 2:
        return
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    if dist.min() <= _COINCIDENCE_TOL:
        raise CoincidentVortices("two vortices coincide")


def _pair_sum_log(config):
    """sum over ordered pairs of d_j d_k log|a_j - a_k| and its gradient."""
    pts = config.positions
    deg = config.degrees.astype(np.float64)
    n = len(pts)
    if n < 2:
        return 0.0, np.zeros((n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    dist2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    np.fill_diagonal(dist2, 1.0)
    dd = np.outer(deg, deg)
    np.fill_diagonal(dd, 0.0)
    total = float(np.sum(dd * 0.5 * np.log(dist2)))
    # gradient wrt a_k of the ordered-pair sum: 2 d_k sum_{j != k} d_j (a_k-a_j)/|.|^2
    coef = dd / dist2
    grad = 2.0 * np.einsum("kj,kjd->kd", coef, diff)
    return total, grad


def _image_points(pts, radius):
    """Circle inversion a -> R^2 a / |a|^2; the origin maps to infinity (inf)."""
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    out = np.empty_like(pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:] = radius ** 2 * pts / r2[:, None]
    out[r2 == 0.0] = np.inf
    return out


@dataclass(frozen=True)
class GreensData:
    """Disk Green's function with pole 2*pi*d*delta_a and zero boundary trace."""

    domain: Domain

    def __post_init__(self):
        if self.domain.kind != "disk":
            raise UnsupportedDomain("Green's data implemented for the disk")

    def greens(self, x, alpha, d):
        x = np.asarray(x, dtype=np.float64)
        return d * (math.log(np.hypot(*(x - alpha))) - self.regular_log(x, alpha))

    def regular_log(self, x, alpha):
        """log(|x - a*| |a| / R); harmonic in x inside the disk."""
        R = self.domain.radius
        alpha = np.asarray(alpha, dtype=np.float64)
        r_a = math.hypot(*alpha)
        if r_a == 0.0:
            return math.log(R)
        star = R ** 2 * alpha / r_a ** 2
        return math.log(np.hypot(*(np.asarray(x) - star)) * r_a / R)

    def regular_part(self, x, alpha, d):
        """F(x, a) = G(x, a, d) - d log|x - a|, finite at x = a."""
        return -d * self.regular_log(x, alpha)


def renormalized_energy(config, domain):
    """Interaction energy of the configuration on the plane or a disk."""
    _check_separated(config)
    pair, _ = _pair_sum_log(config)
    if domain.kind == "plane":
        return -math.pi * pair
    if domain.kind == "disk":
        config.validate_in(domain)
        gd = GreensData(domain)
        deg = config.degrees
        pts = config.positions
        boundary = 0.0
        for j in range(len(pts)):
            for k in range(len(pts)):
                boundary += deg[j] * gd.regular_part(pts[j], pts[k], deg[k])
        return -math.pi * pair + math.pi * boundary
    raise UnsupportedDomain("renormalized energy needs the plane or a disk")


def grad_renormalized_energy(config, domain, k):
    """Gradient of the interaction energy with respect to vortex k."""
    _check_separated(config)
    if not 0 <= k < config.n:
        raise BadParams(f"vortex index {k} out of range")
    _, pair_grad = _pair_sum_log(config)
    g = -math.pi * pair_grad[k]
    if domain.kind == "plane":
        return g
    if domain.kind == "disk":
        config.validate_in(domain)
        return g + math.pi * _boundary_gradient(config, domain.radius, k)
    raise UnsupportedDomain("renormalized energy needs the plane or a disk")


def _boundary_gradient(config, R, m):
    """d/d a_m of sum_{j,k} d_j F(a_j, a_k) with F = -d_k log(|a_j - a_k*||a_k|/R)."""
    pts = config.positions
    deg = config.degrees.astype(np.float64)
    n = len(pts)
    stars = _image_points(pts, R)
    grad = np.zeros(2)
    # dependence through a_j = a_m (a_m appears as the evaluation point)
    for k in range(n):
        if not np.isfinite(stars[k]).all():
            continue  # image at infinity: F is the constant -d_k log R
        v = pts[m] - stars[k]
        grad += -deg[m] * deg[k] * v / (v @ v)
    # dependence through a_k = a_m (the image point and the |a_k| factor move)
    r2 = pts[m] @ pts[m]
    if r2 > 0:
        jac_star = (R ** 2 / r2) * (np.eye(2) - 2.0 * np.outer(pts[m], pts[m]) / r2)
        for j in range(n):
            v = pts[j] - stars[m]
            grad += -deg[j] * deg[m] * (-(jac_star.T @ (v / (v @ v))) + pts[m] / r2)
    return grad


@dataclass(frozen=True)
class EnergyBreakdown:
    """Interaction energy split into its defined pieces.

    h0 = w + background exactly; h_eps - h0 = n (pi |log eps| + gamma0)
    when eps and gamma0 are supplied (otherwise h_eps is None).
    """

    w: float
    background: float
    h0: float
    h_eps: float | None
    gamma0: float | None

    def as_dict(self):
        """JSON-ready mapping of the breakdown."""
        return {"w": self.w, "background": self.background, "h0": self.h0,
                "h_eps": self.h_eps, "gamma0": self.gamma0}


def interaction_hamiltonian(config, domain, q0, eps=None, gamma0=None):
    """W plus the background coupling, with the optional per-core expansion."""
    w = renormalized_energy(config, domain)
    background = math.pi * float(np.sum(q0.value_fn(config.positions)))
    h0 = w + background
    h_eps = None
    if eps is not None and gamma0 is not None:
        h_eps = h0 + config.n * (math.pi * abs(math.log(eps)) + gamma0)
    return EnergyBreakdown(w, background, h0, h_eps, gamma0)


def grad_h0(config, domain, q0, k):
    """Gradient of H0 = W + pi sum Q0(a_j) with respect to vortex k."""
    g = grad_renormalized_energy(config, domain, k)
    return g + math.pi * q0.gradient(config.positions[k])


def canonical_phase_current(config, domain, x):
    """Current of the limiting unit-modulus field at a non-vortex point.

    Plane: sum_j d_j (x - a_j)^perp / |x - a_j|^2 with v^perp = (-v2, v1).
    Disk: subtracts the same-degree image contributions at a_j*, which makes
    the normal component vanish on the boundary circle.
    """
    x = np.asarray(x, dtype=np.float64)
    pts = config.positions
    deg = config.degrees.astype(np.float64)
    diff = x[None, :] - pts
    dist2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
    if dist2.min() <= _COINCIDENCE_TOL:
        raise EvaluationAtVortex(f"x = {x} is a vortex center")
    perp = np.column_stack([-diff[:, 1], diff[:, 0]])
    j = (deg / dist2) @ perp
    if domain.kind == "plane":
        return j
    if domain.kind == "disk":
        stars = _image_points(pts, domain.radius)
        for d, s in zip(deg, stars):
            if not np.isfinite(s).all():
                continue
            v = x - s
            j -= d * np.array([-v[1], v[0]]) / (v @ v)
        return j
    raise UnsupportedDomain("canonical current needs the plane or a disk")
