"""Flat-norm distance between signed atomic measures.

The homogeneous W^{-1,1} distance between atomic measures is realized as a
minimum-cost transport problem: positive mass moves to negative mass at
Euclidean cost and, on bounded domains, any unit of mass may instead be paid
off at its distance to the boundary. Exact for atomic measures; solved by
Hungarian matching with one virtual boundary node per unit quantum.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BadParams, NonFiniteInput, WeightMismatch
from .geometry import AtomicMeasure

#: weights within this tolerance of an integer multiple share a quantum
GCD_TOL = 1e-12


def _float_gcd(values, tol):
    g = 0.0
    for v in values:
        v = abs(float(v))
        while v > tol:
            g, v = v, math.fmod(g, v)
            if min(v, abs(g - v)) < tol:
                v = 0.0
    if g <= tol:
        raise BadParams("cannot quantize weights (gcd underflow)")
    return g


def _difference_atoms(a, b):
    pts = np.vstack([a.points, b.points])
    wts = np.concatenate([a.weights, -b.weights])
    return AtomicMeasure(pts, wts)


def _split_quanta(measure, tol=GCD_TOL):
    """Split atoms into unit quanta of size gcd(|weights|)."""
    wts = measure.weights
    if len(wts) == 0:
        return np.zeros((0, 2)), np.zeros((0, 2)), 0.0
    scale = np.abs(wts).max()
    q = _float_gcd(np.abs(wts), tol * max(1.0, scale))
    pos, neg = [], []
    for p, w in zip(measure.points, wts):
        count = int(round(abs(w) / q))
        (pos if w > 0 else neg).extend([p] * count)
    return np.asarray(pos).reshape(-1, 2), np.asarray(neg).reshape(-1, 2), q


def flat_norm_distance(a, b, domain):
    """Flat-norm (dual Lipschitz) distance between two atomic measures.

    On bounded domains mass may exit through the boundary at its boundary
    distance, so the totals of ``a`` and ``b`` need not agree. On the full
    plane there is no boundary sink and differing totals raise WeightMismatch.
    """
    for m in (a, b):
        if len(m.points) and not np.isfinite(m.points).all():
            raise NonFiniteInput("NaN coordinates in measure")
    diff = _difference_atoms(a, b)
    if diff.n_atoms == 0:
        return 0.0
    if not domain.is_bounded:
        tol = 1e-9 * max(1.0, np.abs(a.weights).sum() + np.abs(b.weights).sum())
        if abs(a.total_weight - b.total_weight) > tol:
            raise WeightMismatch(
                f"total weights differ on the plane: {a.total_weight} vs {b.total_weight}")
    pos, neg, q = _split_quanta(diff)
    p, n = len(pos), len(neg)
    if p == 0 and n == 0:
        return 0.0

    if not domain.is_bounded:
        # pure matching, p == n guaranteed by the weight check
        cost = np.hypot(pos[:, None, 0] - neg[None, :, 0],
                        pos[:, None, 1] - neg[None, :, 1])
        rows, cols = linear_sum_assignment(cost)
        return q * float(cost[rows, cols].sum())

    # bounded domain: square (p+n) x (n+p) matrix with virtual boundary nodes.
    # Row i < p is positive quantum i, row p+j is the boundary source dedicated
    # to negative quantum j; column j < n is negative quantum j, column n+i the
    # boundary sink dedicated to positive quantum i. Source-to-sink pairs cost 0.
    big = np.inf
    cost = np.full((p + n, n + p), big)
    if p and n:
        cost[:p, :n] = np.hypot(pos[:, None, 0] - neg[None, :, 0],
                                pos[:, None, 1] - neg[None, :, 1])
    if p:
        bd_pos = domain.boundary_distance(pos)
        cost[np.arange(p), n + np.arange(p)] = bd_pos
    if n:
        bd_neg = domain.boundary_distance(neg)
        cost[p + np.arange(n), np.arange(n)] = bd_neg
    cost[p:, n:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    return q * float(cost[rows, cols].sum())
