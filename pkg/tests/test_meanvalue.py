"""Mean values: closed forms, weak-star pairings, seminorms, invariances.

Oscillatory pairing oracles are one-dimensional Fourier transforms of the
test functions, evaluated in closed form or by adaptive quadrature.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from scaleflow import (
    DiagonalScaling,
    GridSpec,
    Homogenizer,
    MeanFunction,
    TrigPolynomial,
    bump,
    empirical_mean,
    gaussian,
    mean,
    triangle,
    verify_convolution,
    verify_translation_invariance,
    window_seminorm,
)
from scaleflow.meanvalue import fit_decay_order, mean_with_estimate
from scaleflow.quadrature import Box

SIN2 = TrigPolynomial.sine([1.0]) * TrigPolynomial.sine([1.0])
OSC_SPEC = GridSpec(rule="gauss", base_nodes=256, panel_order=16, max_nodes=1 << 21)


def lebesgue_line(spec=OSC_SPEC):
    return Homogenizer.lebesgue(DiagonalScaling((1,)), spec)


def test_mean_closed_forms():
    # cell integral of sin^2(2 pi y) is 1/2
    assert mean(MeanFunction.periodic_trig(SIN2)) == 0.5 + 0j
    oracle, _ = quad(lambda y: math.sin(2 * math.pi * y) ** 2, 0.0, 1.0)
    assert oracle == pytest.approx(0.5, abs=1e-12)
    assert mean(MeanFunction.constant(1.0)) == 1.0
    poly = TrigPolynomial.from_terms([([0.0], 3.0), ([1.0], 2.0)])
    assert mean(MeanFunction.almost_periodic(poly)) == 3.0
    limit = 2.0 - 1.0j

    def decays(pts):
        return limit + 1.0 / (1.0 + np.sum(np.atleast_2d(pts) ** 2, axis=1))

    assert mean(MeanFunction.vanishing(decays, limit, 1)) == limit


def test_mean_periodic_evaluator_quadrature():
    u = MeanFunction.periodic(
        lambda pts: np.sin(2 * np.pi * np.atleast_2d(pts)[:, 0]) ** 2, dimension=1
    )
    value, estimate = mean_with_estimate(u)
    assert abs(value - 0.5) <= 1e-10
    assert estimate <= 1e-10


def test_mean_bounded_by_sup_norm():
    rng = np.random.default_rng(3)
    for _ in range(10):
        coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)
        poly = TrigPolynomial.from_terms(
            [([k], c) for k, c in zip([-2.0, 0.0, 1.0], coeffs)]
        )
        u = MeanFunction.almost_periodic(poly)
        sup = float(np.max(np.abs(poly(np.linspace(0, 50, 20001)))))
        assert abs(mean(u)) <= sup + 1e-9


def test_mean_linear_and_positive():
    a, b = 1.5 - 0.5j, -2.0
    p = TrigPolynomial.from_terms([([0.0], 0.25), ([1.0], 1.0)])
    q = TrigPolynomial.from_terms([([0.0], b), ([2.0], 3.0)])
    left = mean(MeanFunction.almost_periodic(p * a + q))
    assert left == a * 0.25 + b
    nonneg = MeanFunction.periodic_trig(SIN2)  # sin^2 >= 0
    assert mean(nonneg).real >= 0.0


def test_class_invariant_checks():
    periodic = MeanFunction.periodic_trig(SIN2)
    assert periodic.check_class()
    aperiodic = MeanFunction.periodic(
        lambda pts: np.atleast_2d(pts)[:, 0], dimension=1
    )
    assert not aperiodic.check_class()
    limit = 0.5
    ok = MeanFunction.vanishing(
        lambda pts: limit + np.exp(-np.sum(np.atleast_2d(pts) ** 2, axis=1)), limit, 1
    )
    assert ok.check_class()
    bad = MeanFunction.vanishing(
        lambda pts: np.cos(np.atleast_2d(pts)[:, 0]), 0.0, 1
    )
    assert not bad.check_class()


def _pairing_oracle_sin2(phi_fn, support, eps):
    """r(eps) for sin^2(2 pi x / eps) against phi, by adaptive quadrature."""
    lo, hi = support
    base, _ = quad(phi_fn, lo, hi, limit=800)
    osc, _ = quad(
        lambda x: phi_fn(x) * math.cos(4.0 * math.pi * x / eps), lo, hi, limit=4000
    )
    return 0.5 * (1.0 - osc / base)


def test_empirical_mean_matches_oscillatory_oracle():
    hz = lebesgue_line()
    u = MeanFunction.periodic_trig(SIN2)
    phi = triangle(0.3, 0.7)
    report = empirical_mean(u, hz, phi, [2.0**-3, 2.0**-4, 2.0**-5])
    fn = lambda x: max(0.0, 1.0 - abs(x - 0.3) / 0.7)
    for row in report.rows:
        oracle = _pairing_oracle_sin2(fn, (-0.4, 1.0), row["eps"])
        assert row["value"].real == pytest.approx(oracle, abs=1e-9)
        assert abs(row["value"].imag) <= 1e-12


def test_empirical_mean_periodic_converges_with_order():
    # a centred hat function has transform >= 0, so the dyadic errors decay
    # without phase-driven wiggles
    hz = lebesgue_line()
    u = MeanFunction.periodic_trig(SIN2)
    phi = triangle(0.0, 0.7)
    ladder = [2.0**-n for n in range(1, 11)]
    report = empirical_mean(u, hz, phi, ladder)
    assert report.limit == 0.5 + 0j
    assert report.final_error <= 1e-2
    errors = [r["abs_err"] for r in report.rows]
    # monotone decay with 10% slack down to the quadrature floor
    informative = [e for e in errors if e > 1e-12]
    assert all(b <= 1.1 * a for a, b in zip(informative, informative[1:]))
    assert report.fitted_order >= 0.9


def test_empirical_mean_constant_exact():
    hz = lebesgue_line()
    u = MeanFunction.constant(1.0)
    phi = gaussian([0.3], 1.0)
    report = empirical_mean(u, hz, phi, [0.5, 0.25, 0.125])
    for row in report.rows:
        assert row["value"] == pytest.approx(1.0, rel=1e-14)


def test_empirical_mean_riemann_lebesgue():
    hz = lebesgue_line()
    u = MeanFunction.almost_periodic(TrigPolynomial.character([1.0]))
    phi = gaussian([0.3], 1.0)
    report = empirical_mean(u, hz, phi, [2.0**-12])
    assert abs(report.rows[-1]["value"]) <= 1e-3
    assert report.limit == 0j


def test_empirical_mean_integrable_function_pairs_to_zero():
    # compactly supported u: the pairing scales like the pushforward factor
    hz = lebesgue_line()
    profile = bump([0.0], 1.0)
    u = MeanFunction.vanishing(profile.fn, 0.0, 1)
    phi = gaussian([0.3], 1.0)
    report = empirical_mean(u, hz, phi, [2.0**-n for n in range(1, 11)])
    errors = [r["abs_err"] for r in report.rows]
    assert errors[-1] <= 1e-3
    assert errors[-1] <= errors[0] * 1e-2
    assert report.fitted_order >= 0.9  # the pairing scales like eps itself


def test_fit_decay_order_informative_and_floor():
    eps = [2.0**-n for n in range(1, 7)]
    errs = [e**2 for e in eps]
    assert fit_decay_order(eps, errs) == pytest.approx(2.0, abs=1e-6)
    assert math.isinf(fit_decay_order(eps, [1e-16] * 6))


def test_window_seminorm_constant():
    hz = lebesgue_line()
    u = MeanFunction.constant(1.0)
    window = Box((-0.5,), (0.5,))
    result = window_seminorm(u, hz, 1.0, window, [1.0, 0.5, 0.25])
    assert result["value"] == pytest.approx(1.0, rel=1e-10)  # the window volume
    assert result["lower_bound_only"]


def test_window_seminorm_bounded_by_sup():
    hz = lebesgue_line()
    poly = TrigPolynomial.from_terms([([0.0], 0.3), ([1.0], 0.7)])
    u = MeanFunction.almost_periodic(poly)
    window = Box((-1.0,), (1.0,))
    result = window_seminorm(u, hz, 2.0, window, [1.0, 0.5, 0.25, 0.125])
    sup = poly.sup_norm_bound()
    assert result["value"] <= sup * (2.0 ** (1.0 / 2.0)) + 1e-9


def test_window_seminorm_oscillatory_closed_form():
    hz = lebesgue_line()
    u = MeanFunction.periodic_trig(SIN2)
    window = Box((-0.5,), (0.5,))
    samples = [1.0, 0.5, 0.25]
    result = window_seminorm(u, hz, 1.0, window, samples)
    oracles = []
    for eps in samples:
        oracle, _ = quad(lambda x: math.sin(2 * math.pi * x / eps) ** 2, -0.5, 0.5,
                         limit=400)
        oracles.append(oracle)
    assert result["value"] == pytest.approx(max(oracles), rel=1e-9)
    for (eps, value), oracle in zip(result["samples"], oracles):
        assert value == pytest.approx(oracle, rel=1e-9)


def test_window_seminorm_rejects_large_parameters():
    hz = lebesgue_line()
    with pytest.raises(ValueError):
        window_seminorm(MeanFunction.constant(1.0), hz, 1.0, Box((-0.5,), (0.5,)), [2.0])
    with pytest.raises(ValueError):
        window_seminorm(MeanFunction.constant(1.0), hz, 0.5, Box((-0.5,), (0.5,)), [0.5])


def test_translation_invariance():
    hz = lebesgue_line()
    u = MeanFunction.periodic_trig(SIN2)
    phi = triangle(0.3, 0.7)
    ladder = [2.0**-n for n in range(1, 9)]
    trivial = verify_translation_invariance(u, hz, [0.0], phi, ladder)
    assert trivial.passed and trivial.difference == 0.0
    shifted = verify_translation_invariance(u, hz, [0.3], phi, ladder)
    assert shifted.passed
    assert shifted.first.limit == shifted.second.limit == 0.5 + 0j
    # translation multiplies coefficients by unit phases: means agree exactly
    assert mean(u.translate([0.3])) == mean(u)


def test_convolution_constant_and_characters():
    hz = lebesgue_line()
    phi = triangle(0.3, 0.7)
    ladder = [2.0**-n for n in range(1, 8)]
    # unit-mass kernel with constant input reproduces the constant
    kernel_mass = 16.0 * 0.5 / 15.0  # quartic bump mass at width 1/2
    raw = bump([0.0], 0.5)
    unit = type(raw)("unit-kernel", lambda p: raw.fn(p) / kernel_mass, raw.support)
    const = MeanFunction.constant(2.5)
    report = verify_convolution(unit, const, hz, phi, ladder)
    assert report.passed
    # Fourier multiplier: kernel * e = F(kernel)(1) e keeps the zero mean
    char = MeanFunction.almost_periodic(TrigPolynomial.character([1.0]))
    report = verify_convolution(gaussian([0.0], 0.5), char, hz, phi, ladder)
    assert report.passed
    assert mean(char) == 0j


def test_convolution_doubling_kernel():
    # kernel of total mass 2 against mean-1/2 input gives limit 1
    hz = lebesgue_line()
    phi = triangle(0.3, 0.7)
    ladder = [2.0**-n for n in range(1, 9)]
    raw = bump([0.0], 0.5)
    mass = 16.0 * 0.5 / 15.0
    doubler = type(raw)("double-kernel", lambda p: 2.0 * raw.fn(p) / mass, raw.support)
    u = MeanFunction.periodic_trig(SIN2)
    report = verify_convolution(doubler, u, hz, phi, ladder)
    assert report.passed
    convolved_final = report.first.rows[-1]["value"]
    assert convolved_final == pytest.approx(1.0, abs=1e-6)


def test_empirical_mean_two_dimensional():
    # tensor product of two mean-1/2 oscillations has mean 1/4
    spec = GridSpec(rule="gauss", base_nodes=64, panel_order=16, max_nodes=1 << 12)
    hz = Homogenizer.lebesgue(DiagonalScaling((1, 1)), spec)
    tensor = (TrigPolynomial.sine([1.0, 0.0]) * TrigPolynomial.sine([1.0, 0.0])) * (
        TrigPolynomial.sine([0.0, 1.0]) * TrigPolynomial.sine([0.0, 1.0])
    )
    u = MeanFunction.periodic_trig(tensor)
    assert mean(u) == 0.25 + 0j
    phi = bump([0.3, 0.3], 2.0)
    report = empirical_mean(u, hz, phi, [2.0**-n for n in range(1, 4)])
    assert report.limit == 0.25 + 0j
    assert report.final_error <= 5e-3
