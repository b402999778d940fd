"""Mean values of bounded functions along a scaling flow.

Three function classes carry a closed-form mean: periodic functions (cell
integral), functions with a limit at infinity (that limit) and almost
periodic trigonometric polynomials (zero-frequency coefficient).  The
empirical machinery pairs u(H_eps(x)) against fixed test functions along a
parameter ladder and fits the decay order of the error, which verifies the
weak-star convergence that defines the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import GridSpec, Homogenizer, TestFunction, integrate
from .quadrature import Box, QuadratureGrid, integrate_with_refinement
from .trig import TrigPolynomial

PERIODIC = "periodic"
VANISHING = "vanishing-at-infinity"
ALMOST_PERIODIC = "almost-periodic"

ERROR_FLOOR = 1e-13


@dataclass(frozen=True)
class MeanFunction:
    """A bounded function with a known mean-value class."""

    kind: str
    dimension: int
    evaluator: object = None
    poly: TrigPolynomial | None = None
    limit: complex | None = None
    cell: Box | None = None
    harmonics: float = 8.0  # oscillation bound for plain periodic evaluators

    # -- constructors -------------------------------------------------------

    @classmethod
    def periodic_trig(cls, poly: TrigPolynomial, cell: Box | None = None) -> "MeanFunction":
        cell = cell or Box((0.0,) * poly.dim, (1.0,) * poly.dim)
        for f, _ in poly.terms():
            scaled = [fi * si for fi, si in zip(f, cell.sides)]
            if any(abs(v - round(v)) > 1e-9 for v in scaled):
                raise ValueError(f"frequency {f} is not periodic on the cell")
        return cls(kind=PERIODIC, dimension=poly.dim, poly=poly, cell=cell)

    @classmethod
    def periodic(cls, evaluator, dimension: int, cell: Box | None = None, harmonics: float = 8.0
                 ) -> "MeanFunction":
        cell = cell or Box((0.0,) * dimension, (1.0,) * dimension)
        return cls(kind=PERIODIC, dimension=dimension, evaluator=evaluator, cell=cell,
                   harmonics=harmonics)

    @classmethod
    def vanishing(cls, evaluator, limit: complex, dimension: int) -> "MeanFunction":
        return cls(kind=VANISHING, dimension=dimension, evaluator=evaluator, limit=complex(limit))

    @classmethod
    def almost_periodic(cls, poly: TrigPolynomial) -> "MeanFunction":
        return cls(kind=ALMOST_PERIODIC, dimension=poly.dim, poly=poly)

    @classmethod
    def constant(cls, value: complex, dimension: int = 1) -> "MeanFunction":
        return cls.almost_periodic(TrigPolynomial.constant(value, dimension))

    # -- evaluation -----------------------------------------------------------

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        if self.poly is not None:
            return self.poly(pts)
        return np.asarray(self.evaluator(pts), dtype=np.complex128).ravel()

    def oscillation_bound(self) -> np.ndarray:
        """Per-axis frequency bound used by grid-resolution rules."""
        if self.poly is not None:
            return self.poly.max_abs_freq()
        if self.kind == PERIODIC:
            return np.asarray([self.harmonics / s for s in self.cell.sides])
        return np.ones(self.dimension)

    def translate(self, shift) -> "MeanFunction":
        shift = np.atleast_1d(np.asarray(shift, dtype=np.float64))
        if self.poly is not None:
            poly = self.poly.translate(shift)
            if self.kind == PERIODIC:
                return MeanFunction(kind=self.kind, dimension=self.dimension, poly=poly,
                                    cell=self.cell)
            return MeanFunction(kind=self.kind, dimension=self.dimension, poly=poly)
        ev = self.evaluator
        return MeanFunction(
            kind=self.kind,
            dimension=self.dimension,
            evaluator=lambda pts: ev(np.atleast_2d(pts) - shift),
            limit=self.limit,
            cell=self.cell,
            harmonics=self.harmonics,
        )

    # -- class invariants (sampled) ---------------------------------------------

    def check_class(self, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-3.0, 3.0, size=(64, self.dimension))
        if self.kind == PERIODIC:
            shifts = rng.integers(-3, 4, size=(8, self.dimension)).astype(float)
            shifts *= np.asarray(self.cell.sides)
            base = self(pts)
            return all(
                np.max(np.abs(self(pts + s) - base)) <= 1e-12 * (1 + np.max(np.abs(base)))
                for s in shifts
            )
        if self.kind == VANISHING:
            radii = np.array([1e2, 1e4, 1e6])
            dirs = pts[:8] / np.linalg.norm(pts[:8], axis=1, keepdims=True)
            worst = [
                float(np.max(np.abs(self(r * dirs) - self.limit))) for r in radii
            ]
            return worst[-1] <= 1e-6 * (1.0 + abs(self.limit)) and worst[-1] <= worst[0] + 1e-12
        return True


def mean_with_estimate(u: MeanFunction) -> tuple[complex, float]:
    """Closed-form mean per class; quadrature only for plain periodic maps."""
    if u.kind == VANISHING:
        return complex(u.limit), 0.0
    if u.poly is not None:
        return u.poly.zero_coefficient(), 0.0
    nodes = 2048 if u.dimension == 1 else 256
    grid = QuadratureGrid(box=u.cell, nodes_per_axis=(nodes,) * u.dimension)
    value, est = integrate_with_refinement(lambda pts: u(pts), grid)
    return value / u.cell.volume(), est / u.cell.volume()


def mean(u: MeanFunction) -> complex:
    return mean_with_estimate(u)[0]


# -- empirical verification ------------------------------------------------------


@dataclass
class ConvergenceReport:
    rows: list  # dicts: eps, value, abs_err, quad_est
    limit: complex
    fitted_order: float
    floor: float

    @property
    def final_error(self) -> float:
        return self.rows[-1]["abs_err"]

    def to_json(self) -> dict:
        return {
            "limit": self.limit,
            "fitted_order": self.fitted_order,
            "floor": self.floor,
            "rows": self.rows,
        }


def fit_decay_order(eps_values, errors, window: int = 6, floor: float = ERROR_FLOOR) -> float:
    """Least-squares slope of log(error) against log(eps-scale).

    Only the informative tail is used: entries whose error already sits at
    the quadrature floor are excluded, and if fewer than two informative
    points remain the decay is reported as infinite (below measurement).
    """
    eps_values = list(eps_values)[-window:]
    errors = list(errors)[-window:]
    pts = [(e, v) for e, v in zip(eps_values, errors) if v > floor]
    if len(pts) < 2:
        return math.inf
    x = np.log([abs(e) for e, _ in pts])
    y = np.log([v for _, v in pts])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def _ladder_scale(group, eps: float) -> float:
    """Monotone scale of an element for log-log fits (distance toward theta)."""
    if group.theta == 0.0:
        return float(eps)
    return math.exp(float(eps))  # additive groups: theta = -inf


def empirical_mean(
    u: MeanFunction,
    hz: Homogenizer,
    phi: TestFunction,
    ladder,
    grid_spec: GridSpec | None = None,
) -> ConvergenceReport:
    """Pair u(H_eps(x)) against phi along the ladder and track the error.

    The pairing r(eps) = integral(phi * u(H_eps .)) / integral(phi) must
    approach the closed-form mean; grids are auto-sized per eps so the
    composed oscillation stays resolved.
    """
    spec = grid_spec or hz.grid_spec
    base, base_est = integrate(hz, phi)
    if abs(base) == 0.0:
        raise ValueError("test function must have nonzero integral")
    limit, limit_est = mean_with_estimate(u)
    action = hz.action
    bound_u = u.oscillation_bound()
    gridded = hasattr(hz.measure, "clip")
    rows = []
    for eps in ladder:
        eps = action.group.validate(eps)
        grid = None
        if gridded:
            comp_bound = np.abs(action.matrix(eps)).T @ bound_u
            grid = spec.build(hz.measure.clip(phi.support), tuple(comp_bound))
        integrand = TestFunction(
            name=f"{phi.name}*u",
            fn=lambda pts: np.asarray(phi(pts)) * u(action.apply(eps, pts)),
            support=phi.support,
        )
        value, est = integrate(hz, integrand, grid=grid)
        r = value / base
        rows.append(
            {
                "eps": float(eps),
                "value": r,
                "abs_err": abs(r - limit),
                "quad_est": (est + abs(r) * base_est) / abs(base),
            }
        )
    floor = max(ERROR_FLOOR, 10.0 * limit_est)
    order = fit_decay_order(
        [_ladder_scale(action.group, row["eps"]) for row in rows],
        [row["abs_err"] for row in rows],
        floor=floor,
    )
    return ConvergenceReport(rows=rows, limit=limit, fitted_order=order, floor=floor)


def window_seminorm(
    u: MeanFunction,
    hz: Homogenizer,
    p: float,
    window: Box,
    eps_samples,
    grid_spec: GridSpec | None = None,
) -> dict:
    """Max over sampled eps <= e of the L^p mass of u(H_eps .) on a window.

    A finite sample of parameters only bounds the supremum from below; the
    report says so explicitly.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    spec = grid_spec or hz.grid_spec
    action = hz.action
    group = action.group
    bound_u = u.oscillation_bound()
    values = []
    for eps in eps_samples:
        eps = group.validate(eps)
        if group.compare(eps, group.identity) > 0:
            raise ValueError("seminorm samples must satisfy eps <= identity")
        grid = None
        if hasattr(hz.measure, "clip"):
            comp_bound = np.abs(action.matrix(eps)).T @ bound_u
            grid = spec.build(hz.measure.clip(window), tuple(comp_bound))
        integrand = TestFunction(
            name="abs-power",
            fn=lambda pts: np.abs(u(action.apply(eps, pts))) ** p,
            support=window,
        )
        value, _ = integrate(hz, integrand, grid=grid)
        values.append((float(eps), float(abs(value)) ** (1.0 / p)))
    return {
        "value": max(v for _, v in values),
        "samples": values,
        "lower_bound_only": True,
        "p": p,
    }


@dataclass
class ComparisonReport:
    first: ConvergenceReport
    second: ConvergenceReport
    difference: float
    tolerance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "difference": self.difference,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "first": self.first.to_json(),
            "second": self.second.to_json(),
        }


def _combined_tolerance(a: ConvergenceReport, b: ConvergenceReport) -> float:
    slack_a = max(a.final_error, a.rows[-1]["quad_est"], ERROR_FLOOR)
    slack_b = max(b.final_error, b.rows[-1]["quad_est"], ERROR_FLOOR)
    return 2.0 * (slack_a + slack_b)


def verify_translation_invariance(
    u: MeanFunction,
    hz: Homogenizer,
    shift,
    phi: TestFunction,
    ladder,
    grid_spec: GridSpec | None = None,
) -> ComparisonReport:
    """Empirical means of u and of its translate must share the same limit."""
    first = empirical_mean(u, hz, phi, ladder, grid_spec)
    second = empirical_mean(u.translate(shift), hz, phi, ladder, grid_spec)
    diff = abs(first.rows[-1]["value"] - second.rows[-1]["value"])
    tol = _combined_tolerance(first, second)
    return ComparisonReport(first=first, second=second, difference=diff, tolerance=tol,
                            passed=diff <= tol)


def convolve(kernel: TestFunction, u: MeanFunction, grid_spec: GridSpec | None = None
             ) -> MeanFunction:
    """Convolution kernel * u for trig-backed u via Fourier coefficients.

    Each coefficient is scaled by the kernel transform at its frequency,
    computed by quadrature over the kernel support.
    """
    if u.poly is None:
        raise ValueError("convolution needs a trig-backed function")
    spec = grid_spec or GridSpec()
    terms = []
    for freq, coeff in u.poly.terms():
        f = np.asarray(freq)
        grid = spec.build(kernel.support, tuple(np.abs(f)))
        transform, _ = integrate_with_refinement(
            lambda pts: np.asarray(kernel(pts)) * np.exp(-2j * np.pi * (pts @ f)), grid
        )
        terms.append((freq, coeff * transform))
    poly = TrigPolynomial.from_terms(terms, dim=u.dimension)
    if u.kind == PERIODIC:
        return MeanFunction.periodic_trig(poly, u.cell)
    return MeanFunction.almost_periodic(poly)


def verify_convolution(
    kernel: TestFunction,
    u: MeanFunction,
    hz: Homogenizer,
    phi: TestFunction,
    ladder,
    grid_spec: GridSpec | None = None,
) -> ComparisonReport:
    """Mean of kernel * u must equal mean(u) times the kernel's total mass."""
    convolved = convolve(kernel, u, grid_spec)
    kernel_mass, _ = integrate(hz, kernel)
    first = empirical_mean(convolved, hz, phi, ladder, grid_spec)
    second = empirical_mean(u, hz, phi, ladder, grid_spec)
    predicted = mean(u) * kernel_mass
    diff = abs(first.rows[-1]["value"] - predicted)
    tol = _combined_tolerance(first, second)
    return ComparisonReport(first=first, second=second, difference=diff, tolerance=tol,
                            passed=diff <= tol)
