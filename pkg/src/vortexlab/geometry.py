"""Domains, point-vortex configurations, and signed atomic measures.

Positions are float64 arrays of shape (n, 2); degrees are +-1 integers.
All types are immutable value objects, safe to share between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, NonFiniteInput


def _as_points(x, name="points"):
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise BadParams(f"{name} must have shape (n, 2), got {pts.shape}")
    return pts


@dataclass(frozen=True)
class Domain:
    """Spatial domain: full plane, disk of radius R about the origin, or a rectangle."""

    kind: str  # "plane" | "disk" | "rectangle"
    radius: float = 0.0
    bounds: tuple = ()  # (xmin, xmax, ymin, ymax) for rectangles

    def __post_init__(self):
        if self.kind == "disk" and not self.radius > 0:
            raise BadParams("disk radius must be positive")
        if self.kind == "rectangle":
            xmin, xmax, ymin, ymax = self.bounds
            if not (xmin < xmax and ymin < ymax):
                raise BadParams("rectangle must have xmin < xmax and ymin < ymax")
        if self.kind not in ("plane", "disk", "rectangle"):
            raise BadParams(f"unknown domain kind {self.kind!r}")

    @classmethod
    def plane(cls):
        return cls("plane")

    @classmethod
    def disk(cls, radius):
        return cls("disk", radius=float(radius))

    @classmethod
    def rectangle(cls, xmin, xmax, ymin, ymax):
        return cls("rectangle", bounds=(float(xmin), float(xmax), float(ymin), float(ymax)))

    @property
    def is_bounded(self):
        return self.kind != "plane"

    def boundary_distance(self, points):
        """Distance from each point to the domain boundary (inf on the plane)."""
        pts = _as_points(points)
        if self.kind == "plane":
            return np.full(len(pts), np.inf)
        if self.kind == "disk":
            return self.radius - np.hypot(pts[:, 0], pts[:, 1])
        xmin, xmax, ymin, ymax = self.bounds
        return np.minimum.reduce([
            pts[:, 0] - xmin, xmax - pts[:, 0],
            pts[:, 1] - ymin, ymax - pts[:, 1],
        ])

    def contains(self, points, strict=True):
        d = self.boundary_distance(points)
        return d > 0 if strict else d >= 0


@dataclass(frozen=True)
class VortexConfig:
    """Positions and degrees of n point vortices."""

    positions: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.positions, "positions")
        deg = np.asarray(self.degrees, dtype=np.int64).ravel()
        if len(deg) != len(pts):
            raise BadParams("positions and degrees must have the same length")
        if len(pts) < 1:
            raise BadParams("need at least one vortex")
        if not np.all(np.abs(deg) == 1):
            raise BadParams("degrees must all be +1 or -1")
        if not np.isfinite(pts).all():
            raise NonFiniteInput("non-finite vortex position")
        pts = pts.copy(); pts.setflags(write=False)
        deg = deg.copy(); deg.setflags(write=False)
        object.__setattr__(self, "positions", pts)
        object.__setattr__(self, "degrees", deg)

    @property
    def n(self):
        return len(self.degrees)

    def validate_in(self, domain):
        """Check all vortices lie strictly inside a bounded domain."""
        if domain.is_bounded and not np.all(domain.contains(self.positions)):
            raise BadParams("vortex outside the domain")

    def with_positions(self, positions):
        return VortexConfig(positions, self.degrees)

    def flipped(self):
        """Same positions with all degrees negated (reverses the flow direction)."""
        return VortexConfig(self.positions, -self.degrees)


@dataclass(frozen=True)
class AtomicMeasure:
    """Signed sum of weighted point masses, canonicalized on construction.

    Coincident atoms (within ``merge_tol``) are merged by weight summation and
    zero-weight atoms dropped, so no two atoms share a location.
    """

    points: np.ndarray
    weights: np.ndarray
    merge_tol: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        wts = np.asarray(self.weights, dtype=np.float64).ravel()
        if len(wts) != len(pts):
            raise BadParams("points and weights must have the same length")
        if len(pts) and not (np.isfinite(pts).all() and np.isfinite(wts).all()):
            raise NonFiniteInput("non-finite atom")
        pts, wts = _merge_atoms(pts, wts, self.merge_tol)
        pts.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 2)), np.zeros(0))

    @classmethod
    def from_config(cls, config, weight_scale=math.pi):
        """pi-weighted measure of a vortex configuration: sum of d_j * pi * delta."""
        return cls(config.positions, weight_scale * config.degrees.astype(np.float64))

    @property
    def n_atoms(self):
        return len(self.weights)

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def scaled(self, factor):
        return AtomicMeasure(self.points, factor * self.weights)


def _merge_atoms(pts, wts, tol):
    """Merge coincident atoms, preserving first-occurrence order."""
    if len(pts) == 0:
        return pts.reshape(0, 2).copy(), wts.copy()
    out_p, out_w = [], []
    for p, w in zip(pts, wts):
        for k, q in enumerate(out_p):
            if abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol:
                out_w[k] += w
                break
        else:
            out_p.append(p)
            out_w.append(w)
    out_p = np.array(out_p, dtype=np.float64).reshape(-1, 2)
    out_w = np.array(out_w, dtype=np.float64)
    scale = max(1.0, np.abs(out_w).max() if len(out_w) else 1.0)
    keep = np.abs(out_w) > 1e-15 * scale
    return out_p[keep], out_w[keep]


def separation_radius(config, domain):
    """1/8 of the smallest vortex-vortex or vortex-boundary distance.

    On the full plane the boundary term is absent; a single vortex there has
    infinite separation radius. Coincident vortices give 0.
    """
    pts = config.positions
    n = len(pts)
    dmin = np.inf
    if n > 1:
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        dmin = dist[~np.eye(n, dtype=bool)].min()
    if domain.is_bounded:
        dmin = min(dmin, domain.boundary_distance(pts).min())
    return 0.125 * float(dmin)


@dataclass(frozen=True)
class Pairing:
    """Greedy sign-compatible assignment of detected atoms to reference vortices."""

    pairs: tuple  # of (reference index, atom index)
    unmatched_atoms: tuple
    unmatched_refs: tuple


def pair_configurations(reference, detected):
    """Match detected atoms to reference vortices by nearest sign-compatible pairs.

    The matching gate is half the minimum vortex separation (4 * r_alpha on
    the plane), so each atom can claim at most one exclusive ball; atoms
    farther than that from every compatible vortex are reported unmatched.
    """
    gate = 4.0 * separation_radius(reference, Domain.plane())
    ref_pts, ref_deg = reference.positions, reference.degrees
    at_pts, at_wts = detected.points, detected.weights
    cand = []
    for i in range(len(ref_pts)):
        for j in range(len(at_pts)):
            if ref_deg[i] * at_wts[j] <= 0:
                continue
            d = math.hypot(*(ref_pts[i] - at_pts[j]))
            if d <= gate:
                cand.append((d, i, j))
    cand.sort()
    used_i, used_j, pairs = set(), set(), []
    for _, i, j in cand:
        if i in used_i or j in used_j:
            continue
        pairs.append((i, j))
        used_i.add(i)
        used_j.add(j)
    unmatched_atoms = tuple(j for j in range(len(at_pts)) if j not in used_j)
    unmatched_refs = tuple(i for i in range(len(ref_pts)) if i not in used_i)
    return Pairing(tuple(pairs), unmatched_atoms, unmatched_refs)


def save_config(config, path):
    """Write a configuration as plain-text 'x y d' lines."""
    with open(path, "w") as fh:
        fh.write("# x y d\n")
        for (x, y), d in zip(config.positions, config.degrees):
            fh.write(f"{float(x)!r} {float(y)!r} {int(d):+d}\n")


def load_config(path):
    """Read a configuration from plain-text 'x y d' lines ('#' comments allowed)."""
    pts, deg = [], []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise BadParams(f"malformed vortex line: {line!r}")
            pts.append((float(parts[0]), float(parts[1])))
            deg.append(int(parts[2]))
    return VortexConfig(np.array(pts), np.array(deg))
