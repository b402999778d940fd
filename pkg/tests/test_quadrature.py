"""Grids, rules, refinement estimates and the kernel backends."""

import math

import numpy as np
import pytest

from scaleflow.kernels import _pykernels

try:
    from scaleflow.kernels import _ckernels
except ImportError:  # pure-python install
    _ckernels = None
from scaleflow.quadrature import (
    Box,
    GAUSS,
    QuadratureGrid,
    UnderResolvedError,
    boundary_mass_fraction,
    integrate_on_grid,
    integrate_with_refinement,
    resolved_nodes,
)

HAS_COMPILED = _ckernels is not None


def test_box_basics():
    box = Box((0.0, -1.0), (2.0, 1.0))
    assert box.dim == 2
    assert box.sides == (2.0, 2.0)
    assert box.volume() == 4.0
    clipped = box.intersect(Box((1.0, -5.0), (5.0, 0.0)))
    assert clipped.lows == (1.0, -1.0) and clipped.highs == (2.0, 0.0)
    with pytest.raises(ValueError):
        Box((0.0,), (0.0,))


def test_gauss_exact_for_polynomials():
    # a 16-point panel integrates degree <= 31 exactly
    grid = QuadratureGrid(box=Box((0.0,), (1.0,)), nodes_per_axis=(16,), rule=GAUSS)
    value = integrate_on_grid(lambda p: p[:, 0] ** 5, grid)
    assert value.real == pytest.approx(1.0 / 6.0, abs=1e-15)


def test_midpoint_weights_sum_to_volume():
    grid = QuadratureGrid(box=Box((0.0, 0.0), (2.0, 3.0)), nodes_per_axis=(32, 16))
    _, w = grid.points_and_weights()
    assert float(np.sum(w)) == pytest.approx(6.0, rel=1e-14)


def test_gaussian_integral_2d():
    # closed form: integral of exp(-|x|^2 / 2) over R^2 equals 2*pi
    grid = QuadratureGrid(box=Box((-10.0, -10.0), (10.0, 10.0)), nodes_per_axis=(256, 256))
    value, estimate = integrate_with_refinement(
        lambda p: np.exp(-0.5 * np.sum(p**2, axis=1)), grid
    )
    assert abs(value.real - 2.0 * math.pi) <= 1e-8
    assert estimate <= 1e-8


def test_refinement_estimate_tracks_error():
    # a kinked integrand converges slowly; the doubling estimate must
    # bound the distance between successive refinements
    grid = QuadratureGrid(box=Box((-1.0,), (1.0,)), nodes_per_axis=(37,))
    f = lambda p: np.abs(p[:, 0])
    value, estimate = integrate_with_refinement(f, grid)
    finer = integrate_on_grid(f, grid.refined(4))
    assert abs(value - finer) <= 2.0 * estimate + 1e-12


def test_non_finite_integrand_rejected():
    grid = QuadratureGrid(box=Box((0.0,), (1.0,)), nodes_per_axis=(8,))
    with pytest.raises(ValueError):
        integrate_on_grid(lambda p: np.where(p[:, 0] > 0.5, np.inf, 1.0), grid)


def test_boundary_mass_detection():
    grid = QuadratureGrid(box=Box((-1.0,), (1.0,)), nodes_per_axis=(64,))
    centered = boundary_mass_fraction(lambda p: np.exp(-20 * p[:, 0] ** 2), grid)
    assert centered < 1e-6
    shifted = boundary_mass_fraction(lambda p: np.exp(-20 * (p[:, 0] - 1.0) ** 2), grid)
    assert shifted > 1e-3


def test_resolved_nodes_rule():
    # 8 nodes per period on a unit side with frequency 100 needs 800 nodes
    assert resolved_nodes(1.0, 100.0, base=64) == 800
    assert resolved_nodes(1.0, 1.0, base=64) == 64
    assert resolved_nodes(1.0, 100.0, base=64, multiple_of=16) == 800
    assert resolved_nodes(1.0, 101.0, base=64, multiple_of=16) == 816
    with pytest.raises(UnderResolvedError):
        resolved_nodes(1.0, 1e6, base=64, cap=4096)


@pytest.mark.parametrize("n", [1, 7, 1023, 1024, 1025, 2048, 2049, 4097, 1 << 16])
def test_pairwise_backends_agree(n):
    rng = np.random.default_rng(n)
    values = rng.normal(size=n) + 1j * rng.normal(size=n)
    weights = rng.uniform(0.5, 1.5, size=n)
    py_sum = _pykernels.pairwise_sum(values)
    py_dot = _pykernels.pairwise_dot(weights, values)
    assert py_sum == _pykernels.pairwise_sum(values)  # deterministic
    ref = complex(np.sum(weights * values))
    assert abs(py_dot - ref) <= 1e-12 * max(1.0, abs(ref))
    if HAS_COMPILED:
        c_sum = _ckernels.pairwise_sum(values)
        c_dot = _ckernels.pairwise_dot(weights, values)
        assert abs(c_sum - py_sum) <= 1e-13 * max(1.0, abs(py_sum))
        assert abs(c_dot - py_dot) <= 1e-13 * max(1.0, abs(py_dot))


def test_trig_eval_backends_agree():
    rng = np.random.default_rng(0)
    freqs = rng.uniform(-3, 3, size=(5, 2))
    coeffs = rng.normal(size=5) + 1j * rng.normal(size=5)
    pts = rng.uniform(-2, 2, size=(257, 2))
    py = _pykernels.trig_eval(freqs, coeffs, pts)
    direct = (np.exp(2j * np.pi * (pts @ freqs.T)) @ coeffs)
    assert np.max(np.abs(py - direct)) <= 1e-12
    if HAS_COMPILED:
        cc = _ckernels.trig_eval(freqs, coeffs, pts)
        assert np.max(np.abs(cc - py)) <= 1e-12
