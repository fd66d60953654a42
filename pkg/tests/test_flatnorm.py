import math

import numpy as np
import pytest

from vortexlab.errors import NonFiniteInput, WeightMismatch
from vortexlab.flatnorm import flat_norm_distance
from vortexlab.geometry import AtomicMeasure, Domain, VortexConfig, separation_radius

from oracles import brute_force_flat_norm

PI = math.pi
SQUARE = Domain.rectangle(0, 1, 0, 1)
BOX = Domain.rectangle(-10, 10, -10, 10)


def test_identical_measures_zero():
    m = AtomicMeasure([[0.3, 0.4], [0.6, 0.1]], [PI, -PI])
    assert flat_norm_distance(m, m, SQUARE) == 0.0
    assert flat_norm_distance(m, m, Domain.plane()) == 0.0


def test_matched_lemma_regime():
    # well-separated matched atoms: distance is the sum of displacements
    a = AtomicMeasure([[0.0, 0.0], [1.0, 0.0]], [PI, PI])
    b = AtomicMeasure([[0.01, 0.0], [1.0, 0.02]], [PI, PI])
    d = flat_norm_distance(a, b, BOX)
    assert d == pytest.approx(PI * 0.03, rel=1e-12)


def test_boundary_exit():
    # atom 0.05 from the nearest wall, centered in y so the x=0 wall is closest
    dom = Domain.rectangle(0, 1, -0.5, 0.5)
    a = AtomicMeasure([[0.05, 0.0]], [PI])
    b = AtomicMeasure.empty()
    d = flat_norm_distance(a, b, dom)
    oracle = brute_force_flat_norm([[0.05, 0.0]], [], dom, quantum=PI)
    assert oracle == pytest.approx(0.05 * PI)
    assert d == pytest.approx(oracle, rel=1e-12)


def test_plane_weight_mismatch():
    a = AtomicMeasure([[0.0, 0.0]], [PI])
    b = AtomicMeasure.empty()
    with pytest.raises(WeightMismatch):
        flat_norm_distance(a, b, Domain.plane())


def test_nan_rejected():
    a = AtomicMeasure([[0.0, 0.0]], [PI])
    bad = AtomicMeasure.__new__(AtomicMeasure)
    object.__setattr__(bad, "points", np.array([[np.nan, 0.0]]))
    object.__setattr__(bad, "weights", np.array([PI]))
    object.__setattr__(bad, "merge_tol", 1e-12)
    with pytest.raises(NonFiniteInput):
        flat_norm_distance(a, bad, SQUARE)


def _random_measure(rng, max_atoms=2, domain=BOX):
    # <= 2 atoms per sign per measure keeps the signed difference within the
    # brute-force oracle's <= 4 quanta per sign regime
    n_pos = rng.integers(0, max_atoms + 1)
    n_neg = rng.integers(0, max_atoms + 1)
    pts = rng.uniform(-8, 8, size=(n_pos + n_neg, 2))
    wts = np.concatenate([np.full(n_pos, PI), np.full(n_neg, -PI)])
    return AtomicMeasure(pts, wts)


def test_brute_force_equivalence_200_instances():
    rng = np.random.default_rng(42)
    for _ in range(200):
        a = _random_measure(rng)
        b = _random_measure(rng)
        d = flat_norm_distance(a, b, BOX)
        # recompute the signed difference the oracle's way
        pts = np.vstack([a.points, b.points])
        wts = np.concatenate([a.weights, -b.weights])
        diff = AtomicMeasure(pts, wts)
        pos = diff.points[diff.weights > 0]
        neg = diff.points[diff.weights < 0]
        oracle = brute_force_flat_norm(pos, neg, BOX, quantum=PI)
        assert d == pytest.approx(oracle, rel=1e-10, abs=1e-10)


def test_brute_force_equivalence_plane():
    rng = np.random.default_rng(7)
    for _ in range(50):
        k = rng.integers(1, 4)
        a = AtomicMeasure(rng.uniform(-5, 5, (k, 2)), np.full(k, PI))
        b = AtomicMeasure(rng.uniform(-5, 5, (k, 2)), np.full(k, PI))
        d = flat_norm_distance(a, b, Domain.plane())
        oracle = brute_force_flat_norm(a.points, b.points, Domain.plane(), quantum=PI)
        assert d == pytest.approx(oracle, rel=1e-10)


def test_metric_properties():
    rng = np.random.default_rng(11)
    for _ in range(60):
        ms = [_random_measure(rng, max_atoms=3) for _ in range(3)]
        dab = flat_norm_distance(ms[0], ms[1], BOX)
        dba = flat_norm_distance(ms[1], ms[0], BOX)
        assert dab == pytest.approx(dba, rel=1e-10, abs=1e-12)
        dac = flat_norm_distance(ms[0], ms[2], BOX)
        dcb = flat_norm_distance(ms[2], ms[1], BOX)
        assert dab <= dac + dcb + 1e-9
    # zero iff equal
    a = _random_measure(np.random.default_rng(1), max_atoms=3)
    assert flat_norm_distance(a, a, BOX) == 0.0


def test_lemma_small_displacement_exact():
    # paper regime: displacement below r_alpha/4 gives sum of |alpha_k - xi_k|
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = rng.integers(1, 5)
        pts = rng.uniform(-6, 6, (n, 2))
        deg = rng.choice([-1, 1], n)
        cfg = VortexConfig(pts, deg)
        r_alpha = separation_radius(cfg, BOX)
        if r_alpha <= 0:
            continue
        shift = rng.uniform(-1, 1, (n, 2))
        shift *= r_alpha / (8 * n) / np.maximum(np.hypot(shift[:, 0], shift[:, 1]), 1e-12)[:, None]
        moved = pts + shift
        a = AtomicMeasure.from_config(cfg)
        b = AtomicMeasure.from_config(VortexConfig(moved, deg))
        expected = PI * np.hypot(shift[:, 0], shift[:, 1]).sum()
        d = flat_norm_distance(a, b, BOX)
        assert d == pytest.approx(expected, abs=1e-9)


def test_mixed_quantum_weights():
    # weights pi and 2*pi quantize to a common quantum
    a = AtomicMeasure([[0.0, 0.0]], [2 * PI])
    b = AtomicMeasure([[0.1, 0.0], [0.0, 0.1]], [PI, PI])
    d = flat_norm_distance(a, b, BOX)
    assert d == pytest.approx(PI * 0.2, rel=1e-12)
