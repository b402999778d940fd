"""Homogeneous measures on R^N and their verification by quadrature.

The central object is the :class:`Homogenizer` triple (domain, action,
measure) together with the positive factor map c(eps) satisfying
``pushforward by H_eps = c(eps) * measure``.  Beside Lebesgue, weighted
power densities and point masses, a measure can be *constructed* from any
compactly supported seed away from the center by integrating orbit
evaluations against the weighted Haar measure of the acting group; the
construction is checked by the same homogeneity battery as the built-ins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import Action, DiagonalScaling
from .groups import INTEGER_ADDITIVE, POSITIVE_MULTIPLICATIVE, RGroup
from .quadrature import (
    GAUSS,
    MIDPOINT,
    Box,
    QuadratureGrid,
    boundary_mass_fraction,
    integrate_with_refinement,
    resolved_nodes,
)

LEBESGUE = "lebesgue"
WEIGHTED = "weighted-density"
DIRAC = "dirac"

BOUNDARY_MASS_TOL = 1e-6
DEFAULT_TAIL_CUT = 1e-10


class SupportEscapeError(RuntimeError):
    """Integrand mass was detected at the quadrature boundary."""


# -- test functions ----------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A named vectorised integrand with a known numerical support box."""

    __test__ = False  # plain data, despite the pytest-like name

    name: str
    fn: object
    support: Box

    def __call__(self, pts) -> np.ndarray:
        return np.asarray(self.fn(np.atleast_2d(pts)), dtype=np.complex128).ravel()


def gaussian(center, sigma: float, name: str | None = None) -> TestFunction:
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    radius = 12.0 * sigma
    box = Box(tuple(center - radius), tuple(center + radius))

    def fn(pts):
        d2 = np.sum((pts - center) ** 2, axis=1)
        return np.exp(-d2 / (2.0 * sigma**2))

    return TestFunction(name or f"gauss-{sigma:g}", fn, box)


def bump(center, width: float, name: str | None = None) -> TestFunction:
    """Compactly supported quartic bump (1 - (r/width)^2)^2 on a ball."""
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    box = Box(tuple(center - width), tuple(center + width))

    def fn(pts):
        r2 = np.sum((pts - center) ** 2, axis=1) / width**2
        return np.where(r2 < 1.0, (1.0 - np.minimum(r2, 1.0)) ** 2, 0.0)

    return TestFunction(name or f"bump-{width:g}", fn, box)


def triangle(center: float, width: float, name: str | None = None) -> TestFunction:
    """One-dimensional hat function, Fourier transform ~ f^-2."""
    box = Box((center - width,), (center + width,))

    def fn(pts):
        return np.maximum(0.0, 1.0 - np.abs(pts[:, 0] - center) / width)

    return TestFunction(name or f"triangle-{width:g}", fn, box)


def mollifier(center, width: float, name: str | None = None) -> TestFunction:
    """Infinitely smooth compact bump exp(1 - 1/(1 - r^2)) on a ball.

    All derivatives vanish at the support edge, so oscillatory pairings
    against it decay faster than any power.
    """
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    box = Box(tuple(center - width), tuple(center + width))

    def fn(pts):
        r2 = np.sum((pts - center) ** 2, axis=1) / width**2
        inside = r2 < 1.0
        safe = np.where(inside, 1.0 - r2, 1.0)
        return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)

    return TestFunction(name or f"mollifier-{width:g}", fn, box)


def parabola(box: Box, name: str | None = None) -> TestFunction:
    """Product of normalized edge-vanishing parabolas on a box."""
    lows = np.asarray(box.lows)
    highs = np.asarray(box.highs)
    half = (highs - lows) / 2.0

    def fn(pts):
        pts = np.atleast_2d(pts)
        factors = (pts - lows) * (highs - pts) / half**2
        inside = np.all((pts >= lows) & (pts <= highs), axis=1)
        return np.prod(np.maximum(factors, 0.0), axis=1) * inside

    return TestFunction(name or "parabola", fn, box)


def default_battery(dim: int, offset: float = 0.3) -> list:
    """Three tensor Gaussians plus one compact bump, all center-offset."""
    center = np.full(dim, offset)
    return [
        gaussian(center, 0.5),
        gaussian(center, 1.0),
        gaussian(center, 2.0),
        bump(center, 2.0),
    ]


# -- measures and homogenizers ------------------------------------------------


@dataclass(frozen=True)
class MeasureDescriptor:
    """Lebesgue, a weighted density, or a point mass.

    ``domain`` bounds may be infinite; the effective quadrature box clips a
    candidate support box against them.
    """

    kind: str
    dimension: int
    density: object = None
    point: tuple | None = None
    domain_lows: tuple | None = None
    domain_highs: tuple | None = None

    def __post_init__(self):
        if self.kind not in (LEBESGUE, WEIGHTED, DIRAC):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == WEIGHTED and self.density is None:
            raise ValueError("weighted measure requires a density")
        if self.kind == DIRAC and self.point is None:
            raise ValueError("point mass requires a point")

    @classmethod
    def lebesgue(cls, dimension: int) -> "MeasureDescriptor":
        return cls(kind=LEBESGUE, dimension=dimension)

    @classmethod
    def dirac(cls, point) -> "MeasureDescriptor":
        point = tuple(float(p) for p in np.atleast_1d(point))
        return cls(kind=DIRAC, dimension=len(point), point=point)

    @classmethod
    def power_density(cls, power: float) -> "MeasureDescriptor":
        """Density t^power on the positive half line."""

        def density(pts):
            return np.maximum(pts[:, 0], 0.0) ** power

        return cls(
            kind=WEIGHTED,
            dimension=1,
            density=density,
            domain_lows=(0.0,),
            domain_highs=(math.inf,),
        )

    def clip(self, box: Box) -> Box:
        lows = self.domain_lows or (-math.inf,) * self.dimension
        highs = self.domain_highs or (math.inf,) * self.dimension
        new_lows = tuple(max(a, b) for a, b in zip(box.lows, lows))
        new_highs = tuple(min(a, b) for a, b in zip(box.highs, highs))
        if any(h <= l for l, h in zip(new_lows, new_highs)):
            # support lies outside the measure domain: keep a sliver so the
            # quadrature returns 0 instead of failing
            side = 1e-6
            anchor = tuple(min(max(l, a), b - side) for l, a, b in zip(box.lows, lows, highs))
            return Box(anchor, tuple(a + side for a in anchor))
        return Box(new_lows, new_highs)


@dataclass(frozen=True)
class GridSpec:
    """How to build quadrature grids: rule, base resolution, caps."""

    rule: str = MIDPOINT
    base_nodes: int = 1024
    panel_order: int = 16
    max_nodes: int = 1 << 21
    nodes_per_period: int = 8

    def build(self, box: Box, max_freqs=None) -> QuadratureGrid:
        if max_freqs is None:
            max_freqs = (0.0,) * box.dim
        multiple = self.panel_order if self.rule == GAUSS else 1
        nodes = tuple(
            resolved_nodes(
                side,
                f,
                base=self.base_nodes,
                nodes_per_period=self.nodes_per_period,
                cap=self.max_nodes,
                multiple_of=multiple,
            )
            for side, f in zip(box.sides, max_freqs)
        )
        return QuadratureGrid(box=box, nodes_per_axis=nodes, rule=self.rule, panel_order=self.panel_order)

    def to_config(self) -> dict:
        return {
            "rule": self.rule,
            "base_nodes": self.base_nodes,
            "panel_order": self.panel_order,
            "max_nodes": self.max_nodes,
            "nodes_per_period": self.nodes_per_period,
        }


@dataclass(frozen=True)
class Homogenizer:
    """Action plus measure plus the positive factor map of the pushforward."""

    action: Action
    measure: object  # MeasureDescriptor or ConstructedMeasure
    factor_map: object  # callable eps -> positive float
    grid_spec: GridSpec = field(default_factory=GridSpec)

    @classmethod
    def lebesgue(cls, action: Action, grid_spec: GridSpec | None = None) -> "Homogenizer":
        # volume change of a linear map gives the factor directly
        return cls(
            action=action,
            measure=MeasureDescriptor.lebesgue(action.dimension),
            factor_map=lambda eps: 1.0 / action.volume_factor(eps),
            grid_spec=grid_spec or GridSpec(),
        )

    @classmethod
    def weighted_power(
        cls, action: DiagonalScaling, power: float, grid_spec: GridSpec | None = None
    ) -> "Homogenizer":
        if action.dimension != 1:
            raise ValueError("power densities are one-dimensional")
        rate = action.exponents[0] * (power + 1.0)
        return cls(
            action=action,
            measure=MeasureDescriptor.power_density(power),
            factor_map=lambda eps: float(eps) ** rate,
            grid_spec=grid_spec or GridSpec(),
        )

    @classmethod
    def point_mass(cls, action: Action, point=None) -> "Homogenizer":
        point = action.center() if point is None else point
        return cls(
            action=action,
            measure=MeasureDescriptor.dirac(point),
            factor_map=lambda eps: 1.0,
            grid_spec=GridSpec(),
        )

    def with_factor_map(self, factor_map) -> "Homogenizer":
        return Homogenizer(
            action=self.action, measure=self.measure, factor_map=factor_map, grid_spec=self.grid_spec
        )


def _weighted_integrand(measure, phi):
    if measure.kind == WEIGHTED:
        return lambda pts: measure.density(pts) * np.asarray(phi(pts))
    return phi


def integrate(hz: Homogenizer, phi, grid: QuadratureGrid | None = None):
    """Pair the measure with a test function; returns (value, error estimate)."""
    measure = hz.measure
    if isinstance(measure, ConstructedMeasure):
        return measure.pairing(phi)
    if measure.kind == DIRAC:
        point = np.asarray(measure.point)
        return complex(phi(point[None, :])[0]), 0.0
    if grid is None:
        if not isinstance(phi, TestFunction):
            raise ValueError("a grid is required for plain-callable integrands")
        grid = hz.grid_spec.build(measure.clip(phi.support))
    return integrate_with_refinement(_weighted_integrand(measure, phi), grid)


def _image_box(action: Action, eps: float, box: Box) -> Box:
    """Bounding box of the image of ``box`` under H at the inverse parameter."""
    inv = action.group.inverse(eps)
    a = action.matrix(inv)
    center = 0.5 * (np.asarray(box.lows) + np.asarray(box.highs))
    half = 0.5 * (np.asarray(box.highs) - np.asarray(box.lows))
    new_center = a @ center
    new_half = np.abs(a) @ half
    return Box(tuple(new_center - new_half), tuple(new_center + new_half))


def pushforward_pairing(hz: Homogenizer, eps: float, phi, grid: QuadratureGrid | None = None):
    """Quadrature of x -> phi(H_eps(x)) against the measure.

    The quadrature box follows the composed integrand's support (the image
    of the support of phi under the inverse map); mass detected on the box
    boundary raises :class:`SupportEscapeError`.
    """
    measure = hz.measure
    action = hz.action
    eps = action.group.validate(eps)
    composed = lambda pts: np.asarray(phi(action.apply(eps, pts)), dtype=np.complex128)
    if isinstance(measure, ConstructedMeasure):
        if isinstance(phi, TestFunction):
            composed = TestFunction(
                name=f"{phi.name}@{eps:g}",
                fn=composed,
                support=_image_box(action, eps, phi.support),
            )
        return measure.pairing(composed)
    if measure.kind == DIRAC:
        point = np.asarray(measure.point)
        return complex(phi(action.apply(eps, point)[None, :])[0]), 0.0
    if grid is None:
        if not isinstance(phi, TestFunction):
            raise ValueError("a grid is required for plain-callable integrands")
        grid = hz.grid_spec.build(measure.clip(_image_box(action, eps, phi.support)))
    integrand = _weighted_integrand(measure, composed)
    value, estimate = integrate_with_refinement(integrand, grid)
    fraction = boundary_mass_fraction(integrand, grid)
    if fraction > BOUNDARY_MASS_TOL:
        raise SupportEscapeError(
            f"{fraction:.2e} of the integrand mass sits on the grid boundary"
        )
    return value, estimate


@dataclass
class HomogeneityReport:
    rows: list  # dicts: eps, phi, lhs, rhs, abs_err, rel_err, quad_est
    factor_decay: list  # (eps, c(eps)) ordered toward the group infimum
    decay_ok: bool
    passed: bool
    tol_rel: float

    def to_json(self) -> dict:
        return {
            "check": "homogeneity",
            "passed": self.passed,
            "tol_rel": self.tol_rel,
            "decay_ok": self.decay_ok,
            "factor_decay": [[e, c] for e, c in self.factor_decay],
            "rows": self.rows,
        }


def verify_homogeneity(
    hz: Homogenizer,
    ladder,
    battery,
    tol_rel: float = 1e-6,
) -> HomogeneityReport:
    """Check pushforward(eps, phi) = c(eps) * integral(phi) over a battery.

    Also checks the factor decays along the ladder (ordered toward the
    group infimum): strictly decreasing and at least halved overall, which
    together with the certified multiplicativity forces the vanishing limit.
    """
    rows = []
    ok = True
    for phi in battery:
        base, base_est = integrate(hz, phi)
        for eps in ladder:
            lhs, lhs_est = pushforward_pairing(hz, eps, phi)
            c = float(hz.factor_map(eps))
            rhs = c * base
            scale = max(abs(rhs), 1e-300)
            rel = abs(lhs - rhs) / scale
            entry_ok = rel <= tol_rel
            ok = ok and entry_ok
            rows.append(
                {
                    "eps": float(eps),
                    "phi": getattr(phi, "name", "phi"),
                    "lhs": lhs,
                    "rhs": rhs,
                    "abs_err": abs(lhs - rhs),
                    "rel_err": rel,
                    "quad_est": (lhs_est + c * base_est) / scale,
                    "passed": entry_ok,
                }
            )
    factors = [(float(e), float(hz.factor_map(e))) for e in ladder]
    values = [c for _, c in factors]
    decay_ok = all(b < a for a, b in zip(values, values[1:])) and values[-1] <= 0.5 * values[0]
    return HomogeneityReport(
        rows=rows, factor_decay=factors, decay_ok=decay_ok, passed=ok and decay_ok, tol_rel=tol_rel
    )


def check_factor_multiplicative(hz: Homogenizer, sample_count: int = 128, seed: int = 0) -> float:
    """Worst relative defect of c(e e') = c(e) c(e') on sampled pairs."""
    from .actions import _sample_parameters

    rng = np.random.default_rng(seed)
    group = hz.action.group
    eps1 = _sample_parameters(group, rng, sample_count)
    eps2 = _sample_parameters(group, rng, sample_count)
    worst = 0.0
    for a, b in zip(eps1, eps2):
        lhs = hz.factor_map(group.compose(a, b))
        rhs = hz.factor_map(a) * hz.factor_map(b)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst


# -- the constructive measure --------------------------------------------------


@dataclass
class ConstructedMeasure:
    """Measure built by pairing orbits of a seed measure with weighted Haar mass.

    ``pairing(phi)`` evaluates the double integral of phi along orbits of
    the seed nodes against the weight h on the group, truncated where the
    closed-form tail mass drops below ``tail_cut`` and extended on the
    other side until successive blocks stop contributing.
    """

    group: RGroup
    action: Action
    seed_nodes: np.ndarray  # (K, N)
    seed_weights: np.ndarray  # (K,)
    tail_cut: float = DEFAULT_TAIL_CUT
    nodes_per_unit: int = 96
    block_width: float = 4.0
    max_blocks: int = 120

    kind = "constructed"

    def _haar_windows(self):
        """Yield (parameter array, quadrature weights) blocks, upper end first."""
        if self.group.kind == INTEGER_ADDITIVE:
            hi = int(self.group.tail_threshold(self.tail_cut))
            width = 8
            for j in range(self.max_blocks):
                block = np.arange(hi - (j + 1) * width + 1, hi - j * width + 1, dtype=np.float64)
                yield block, np.ones_like(block)
            return
        v_hi = self.group.tail_threshold(self.tail_cut)
        if self.group.kind == POSITIVE_MULTIPLICATIVE:
            v_hi = math.log(v_hi)
        q = 8
        panels_per_block = max(1, int(round(self.block_width * self.nodes_per_unit / q)))
        ref_nodes, ref_weights = np.polynomial.legendre.leggauss(q)
        for j in range(self.max_blocks):
            lo = v_hi - (j + 1) * self.block_width
            hi = v_hi - j * self.block_width
            edges = np.linspace(lo, hi, panels_per_block + 1)
            half = 0.5 * (edges[1:] - edges[:-1])
            mid = 0.5 * (edges[1:] + edges[:-1])
            v = (mid[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
            w = (half[:, None] * ref_weights[None, :]).ravel()
            yield v, w

    def _block_value(self, phi, v: np.ndarray, w: np.ndarray) -> tuple[complex, float, float]:
        """One-block contribution, the largest |phi| seen, the smallest orbit norm."""
        multiplicative = self.group.kind == POSITIVE_MULTIPLICATIVE
        total = 0j
        peak = 0.0
        min_norm = math.inf
        for vi, wi in zip(v, w):
            eps = math.exp(vi) if multiplicative else float(vi)
            images = self.action.apply(eps, self.seed_nodes)
            min_norm = min(min_norm, float(np.min(np.linalg.norm(images, axis=1))))
            values = np.asarray(phi(images), dtype=np.complex128).ravel()
            if not np.all(np.isfinite(values.view(np.float64))):
                raise ValueError("integrand returned non-finite values")
            peak = max(peak, float(np.max(np.abs(values))))
            total += wi * self.group.weight(eps) * complex(np.dot(self.seed_weights, values))
        return total, peak, min_norm

    def _sweep(self, phi, support_radius: float | None) -> tuple[complex, float]:
        # Blocks descend from the tail cutoff; orbits run from the center
        # outward, so the sweep may stop only after they have crossed the
        # integrand's bounding radius (with patience when that is unknown).
        patience = 2 if support_radius is not None else 8
        total = 0j
        peak = 0.0
        quiet = 0
        for v, w in self._haar_windows():
            block, block_peak, min_norm = self._block_value(phi, v, w)
            total += block
            peak = max(peak, block_peak)
            support_passed = support_radius is None or min_norm > support_radius
            if support_passed and abs(block) <= 1e-14 * (1.0 + abs(total)):
                quiet += 1
                if quiet >= patience:
                    break
            else:
                quiet = 0
        return total, peak

    def pairing(self, phi) -> tuple[complex, float]:
        radius = None
        if isinstance(phi, TestFunction):
            corners = np.abs(
                np.stack([np.asarray(phi.support.lows), np.asarray(phi.support.highs)])
            )
            radius = float(np.linalg.norm(np.max(corners, axis=0)))
        value, peak = self._sweep(phi, radius)
        fine = ConstructedMeasure(
            group=self.group,
            action=self.action,
            seed_nodes=self.seed_nodes,
            seed_weights=self.seed_weights,
            tail_cut=self.tail_cut,
            nodes_per_unit=self.nodes_per_unit * 2,
            block_width=self.block_width,
            max_blocks=self.max_blocks,
        )
        refined, _ = fine._sweep(phi, radius)
        estimate = abs(refined - value) + self.tail_cut * peak
        return refined, estimate

    def as_homogenizer(self, grid_spec: GridSpec | None = None) -> Homogenizer:
        group = self.group
        return Homogenizer(
            action=self.action,
            measure=self,
            factor_map=lambda eps: group.weight(group.inverse(eps)),
            grid_spec=grid_spec or GridSpec(),
        )


def construct_measure(
    group: RGroup,
    action: Action,
    seed: MeasureDescriptor,
    tail_cut: float = DEFAULT_TAIL_CUT,
    seed_nodes_per_axis: int = 128,
) -> ConstructedMeasure:
    """Build a homogeneous measure from a compactly supported seed off-center.

    The seed must carry positive mass and keep a positive distance from the
    action's center.
    """
    if action.group != group:
        raise ValueError("action and group disagree")
    if seed.kind == DIRAC:
        nodes = np.asarray(seed.point, dtype=np.float64)[None, :]
        weights = np.ones(1)
    else:
        if seed.domain_lows is None or not all(
            math.isfinite(v) for v in seed.domain_lows + seed.domain_highs
        ):
            raise ValueError("seed measures need a finite domain box")
        box = Box(seed.domain_lows, seed.domain_highs)
        grid = QuadratureGrid(box=box, nodes_per_axis=(seed_nodes_per_axis,) * box.dim)
        nodes, weights = grid.points_and_weights()
        if seed.kind == WEIGHTED:
            weights = weights * np.asarray(seed.density(nodes), dtype=np.float64)
    if float(np.sum(weights)) <= 0.0:
        raise ValueError("seed measure must be nonzero")
    distances = np.linalg.norm(nodes - action.center(), axis=1)
    if float(np.min(distances)) <= 1e-9:
        raise ValueError("seed support must stay away from the center")
    return ConstructedMeasure(
        group=group,
        action=action,
        seed_nodes=nodes,
        seed_weights=np.asarray(weights, dtype=np.float64),
        tail_cut=tail_cut,
    )


# -- vanishing mass at the center ------------------------------------------------


@dataclass
class CenterNullReport:
    masses: list  # (radius, mass)
    trivial: bool
    passed: bool

    def to_json(self) -> dict:
        return {
            "check": "center-null",
            "passed": self.passed,
            "trivial": self.trivial,
            "masses": [[r, m] for r, m in self.masses],
        }


def verify_center_null(hz: Homogenizer, radii=None) -> CenterNullReport:
    """Integrate smoothed ball indicators around the center for shrinking radii."""
    if radii is None:
        radii = [2.0 ** (-n) for n in range(0, 8)]
    center = hz.action.center()
    masses = []
    for rho in radii:
        phi = bump(center, rho, name=f"ball-{rho:g}")
        value, _ = integrate(hz, phi)
        masses.append((float(rho), abs(value)))
    values = [m for _, m in masses]
    trivial = values[-1] > 0.5 * values[0] and values[0] > 0.0
    decreasing = all(b < a or a == 0.0 for a, b in zip(values, values[1:]))
    vanishing = values[0] == 0.0 or values[-1] <= 1e-2 * max(values[0], 1e-300)
    return CenterNullReport(masses=masses, trivial=trivial, passed=decreasing and vanishing and not trivial)
