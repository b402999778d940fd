"""Concrete scaling-group actions on R^N with numeric certificates.

Every built-in variant acts linearly, so beside sampled evidence the
certificates can cross-check exact operator-norm bounds.  Set inclusions
(absorption of a ball, escape to infinity) are certified on deterministic
low-discrepancy samples of ball boundaries along a parameter ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .groups import POSITIVE_MULTIPLICATIVE, REAL_ADDITIVE, RGroup

GROUP_LAW_TOL = 1e-9
CENTER_TOL = 1e-12


def matrix_exponential(a: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor evaluation of exp(a).

    The argument is halved until its 1-norm is below 1/2, a fixed-order
    Taylor sum is taken, and the result squared back; the truncation level
    keeps the series error below 1e-13 with margin.
    """
    a = np.asarray(a, dtype=np.float64)
    norm = np.linalg.norm(a, 1)
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    b = a / (2.0**squarings)
    result = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for n in range(1, 21):
        term = term @ b / n
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def _as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 1:
        if pts.shape[0] != dim:
            raise ValueError(f"expected a point in R^{dim}, got shape {pts.shape}")
        return pts[None, :], True
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts, False


def sphere_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic low-discrepancy unit directions, axes included."""
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    if dim == 1:
        return axes[: max(2, count)] if count <= 2 else axes
    extra = max(0, count - 2 * dim)
    if extra == 0:
        return axes
    sampler = qmc.Halton(d=dim, scramble=False, seed=0)
    u = sampler.random(extra + 8)
    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    z = z[norms > 1e-8][:extra]
    return np.concatenate([axes, z / np.linalg.norm(z, axis=1, keepdims=True)])


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.center)

    def boundary_points(self, count: int) -> np.ndarray:
        dirs = sphere_directions(self.dim, count)
        return np.asarray(self.center) + self.radius * dirs


class Action:
    """Base class: a parametrised family of linear maps of R^N."""

    group: RGroup
    dimension: int

    def matrix(self, eps: float) -> np.ndarray:
        raise NotImplementedError

    def apply(self, eps: float, x):
        pts, single = _as_points(x, self.dimension)
        out = pts @ self.matrix(eps).T
        return out[0] if single else out

    def apply_inverse(self, eps: float, x):
        return self.apply(self.group.inverse(eps), x)

    def center(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def operator_norm(self, eps: float) -> float:
        return float(np.linalg.norm(self.matrix(eps), 2))

    def parameter_window(self) -> float:
        """Half-width of the certificate sampling window (log scale for the
        multiplicative group).  Variants whose values grow exponentially in
        the parameter narrow it so rounding stays below the certificate
        tolerance."""
        return 2.0 if self.group.kind == POSITIVE_MULTIPLICATIVE else 3.0

    def volume_factor(self, eps: float) -> float:
        """|det| of the representing matrix; used by Lebesgue pushforwards."""
        return abs(float(np.linalg.det(self.matrix(eps))))

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class DiagonalScaling(Action):
    """Coordinatewise scaling x_i -> x_i / eps**r_i over the positive reals."""

    exponents: tuple
    group: RGroup = field(default_factory=lambda: RGroup(POSITIVE_MULTIPLICATIVE))

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(r) for r in self.exponents))
        if self.group.kind != POSITIVE_MULTIPLICATIVE:
            raise ValueError("diagonal scaling requires the multiplicative group")
        if any(r < 1 for r in self.exponents):
            raise ValueError("scaling exponents must be integers >= 1")

    @property
    def dimension(self) -> int:
        return len(self.exponents)

    def matrix(self, eps: float) -> np.ndarray:
        eps = self.group.validate(eps)
        return np.diag(eps ** -np.asarray(self.exponents, dtype=np.float64))

    def apply(self, eps: float, x):
        eps = self.group.validate(eps)
        pts, single = _as_points(x, self.dimension)
        out = pts * eps ** -np.asarray(self.exponents, dtype=np.float64)
        return out[0] if single else out

    def apply_inverse(self, eps: float, x):
        return self.apply(self.group.inverse(eps), x)

    def operator_norm(self, eps: float) -> float:
        eps = self.group.validate(eps)
        return float(np.max(eps ** -np.asarray(self.exponents, dtype=np.float64)))

    def volume_factor(self, eps: float) -> float:
        return float(self.group.validate(eps) ** -sum(self.exponents))

    def to_config(self) -> dict:
        return {"variant": "diagonal-scaling", "exponents": list(self.exponents)}


@dataclass(frozen=True)
class LinearFamily(Action):
    """Action given by an arbitrary matrix-valued map eps -> B(eps).

    The map is not validated against the composition law at construction;
    ``certify_group_law`` exists precisely to test it.
    """

    group: RGroup
    dimension: int
    matrix_fn: ...  # callable (eps) -> (N, N) array

    def matrix(self, eps: float) -> np.ndarray:
        eps = self.group.validate(eps)
        b = np.asarray(self.matrix_fn(eps), dtype=np.float64)
        if b.shape != (self.dimension, self.dimension):
            raise ValueError(f"matrix map returned shape {b.shape}")
        return b

    def apply_inverse(self, eps: float, x):
        # inverse map of H_eps; equals H at the inverse parameter whenever
        # the family satisfies the composition law
        pts, single = _as_points(x, self.dimension)
        try:
            out = np.linalg.solve(self.matrix(eps), pts.T).T
        except np.linalg.LinAlgError as exc:
            raise ValueError("singular matrix: invalid action definition") from exc
        return out[0] if single else out

    def to_config(self) -> dict:
        return {"variant": "linear-family", "dimension": self.dimension}


@dataclass(frozen=True)
class ExpSemigroup(Action):
    """One-parameter group x -> exp(-k*eps) * exp(-eps*P) x on R^N."""

    k: float
    generator: tuple  # row-major N*N entries
    dimension: int
    group: RGroup = field(default_factory=lambda: RGroup(REAL_ADDITIVE))

    def __post_init__(self):
        p = self.generator_matrix()
        if self.group.kind != REAL_ADDITIVE:
            raise ValueError("exponential semigroup requires the additive reals")
        if self.k <= np.linalg.norm(p, 2):
            raise ValueError("decay rate k must exceed the operator norm of P")

    @classmethod
    def from_matrix(cls, k: float, p, group: RGroup | None = None) -> "ExpSemigroup":
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("generator must be a square matrix")
        kwargs = {} if group is None else {"group": group}
        return cls(k=float(k), generator=tuple(p.ravel()), dimension=p.shape[0], **kwargs)

    def generator_matrix(self) -> np.ndarray:
        return np.asarray(self.generator, dtype=np.float64).reshape(
            self.dimension, self.dimension
        )

    def matrix(self, eps: float) -> np.ndarray:
        eps = self.group.validate(eps)
        return math.exp(-self.k * eps) * matrix_exponential(-eps * self.generator_matrix())

    def parameter_window(self) -> float:
        # keep exp((k + |P|) * window) small enough that rounding cannot
        # masquerade as a composition-law violation
        growth = self.k + float(np.linalg.norm(self.generator_matrix(), 2))
        return min(3.0, 4.0 / growth)

    def to_config(self) -> dict:
        return {
            "variant": "exp-semigroup",
            "k": self.k,
            "matrix": self.generator_matrix().tolist(),
        }


@dataclass(frozen=True)
class ProductAction(Action):
    """Componentwise action of a shared group on a product of spaces."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product requires at least one factor")
        g = self.factors[0].group
        if any(f.group != g for f in self.factors):
            raise ValueError("product factors must share one group")

    @property
    def group(self) -> RGroup:
        return self.factors[0].group

    @property
    def dimension(self) -> int:
        return sum(f.dimension for f in self.factors)

    def _slices(self):
        start = 0
        for f in self.factors:
            yield f, slice(start, start + f.dimension)
            start += f.dimension

    def matrix(self, eps: float) -> np.ndarray:
        out = np.zeros((self.dimension, self.dimension))
        for f, sl in self._slices():
            out[sl, sl] = f.matrix(eps)
        return out

    def apply(self, eps: float, x):
        pts, single = _as_points(x, self.dimension)
        out = np.empty_like(pts)
        for f, sl in self._slices():
            out[:, sl] = f.apply(eps, pts[:, sl])
        return out[0] if single else out

    def apply_inverse(self, eps: float, x):
        pts, single = _as_points(x, self.dimension)
        out = np.empty_like(pts)
        for f, sl in self._slices():
            out[:, sl] = f.apply_inverse(eps, pts[:, sl])
        return out[0] if single else out

    def operator_norm(self, eps: float) -> float:
        return max(f.operator_norm(eps) for f in self.factors)

    def volume_factor(self, eps: float) -> float:
        return math.prod(f.volume_factor(eps) for f in self.factors)

    def parameter_window(self) -> float:
        return min(f.parameter_window() for f in self.factors)

    def to_config(self) -> dict:
        return {"variant": "product", "factors": [f.to_config() for f in self.factors]}


def product(actions) -> ProductAction:
    return ProductAction(factors=tuple(actions))


# -- certificates ------------------------------------------------------------


@dataclass
class GroupLawReport:
    passed: bool
    worst_violation: float
    tolerance: float
    sample_count: int
    seed: int

    def to_json(self) -> dict:
        return {
            "check": "group-law",
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }


def _sample_parameters(
    group: RGroup, rng: np.random.Generator, count: int, window: float | None = None
) -> np.ndarray:
    if group.kind == POSITIVE_MULTIPLICATIVE:
        w = 2.0 if window is None else window
        return np.exp(rng.uniform(-w, w, size=count))
    if group.kind == REAL_ADDITIVE:
        w = 3.0 if window is None else window
        return rng.uniform(-w, w, size=count)
    hi = 6 if window is None else max(1, int(window))
    return rng.integers(-hi, hi + 1, size=count).astype(np.float64)


def certify_group_law(action: Action, sample_count: int = 64, seed: int = 0) -> GroupLawReport:
    """Sample (eps, eps', x) and compare H_eps(H_eps'(x)) with H_(eps eps')(x)."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    window = action.parameter_window()
    eps1 = _sample_parameters(action.group, rng, sample_count, window)
    eps2 = _sample_parameters(action.group, rng, sample_count, window)
    xs = rng.normal(scale=2.0, size=(sample_count, action.dimension))
    worst = 0.0
    for a, b, x in zip(eps1, eps2, xs):
        lhs = action.apply(a, action.apply(b, x))
        rhs = action.apply(action.group.compose(a, b), x)
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / (1.0 + np.linalg.norm(x))))
    return GroupLawReport(
        passed=worst <= GROUP_LAW_TOL,
        worst_violation=worst,
        tolerance=GROUP_LAW_TOL,
        sample_count=sample_count,
        seed=seed,
    )


@dataclass
class AbsorptionCertificate:
    """Witness that H at inverse parameters maps K into V from a threshold on."""

    source_set: Ball
    target_set: Ball
    threshold: float | None
    sample_evidence: list  # (eps, worst sampled distance from center)
    exact_bounds: list | None  # (eps, operator-norm distance bound)
    passed: bool

    def to_json(self) -> dict:
        return {
            "check": "absorption",
            "source": {"center": list(self.source_set.center), "radius": self.source_set.radius},
            "target": {"center": list(self.target_set.center), "radius": self.target_set.radius},
            "threshold": self.threshold,
            "passed": self.passed,
            "sample_evidence": [[e, d] for e, d in self.sample_evidence],
            "exact_bounds": None
            if self.exact_bounds is None
            else [[e, d] for e, d in self.exact_bounds],
        }


def certify_absorption(
    action: Action,
    source: Ball,
    target: Ball,
    ladder,
    directions_per_dim: int = 64,
) -> AbsorptionCertificate:
    """Find the largest ladder entry alpha with H_(eps^-1)(K) inside V for eps <= alpha.

    ``target`` must be centred at the action's center; sampled boundary
    points of ``source`` provide the finite witness, and for the built-in
    linear variants an exact operator-norm bound is recorded alongside.
    """
    center = action.center()
    if np.linalg.norm(np.asarray(target.center) - center) > CENTER_TOL:
        raise ValueError("target ball must be centred at the action center")
    ladder = [action.group.validate(e) for e in ladder]
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must decrease strictly")
    if source.radius == 0.0 and np.allclose(source.center, center):
        pts = center[None, :]
    else:
        pts = source.boundary_points(directions_per_dim * action.dimension)
    evidence = []
    exact = []
    ok = []
    for eps in ladder:
        images = action.apply_inverse(eps, pts)
        dist = float(np.max(np.linalg.norm(images - center, axis=1)))
        evidence.append((eps, dist))
        inv = action.group.inverse(eps)
        opnorm = action.operator_norm(inv)
        bound = opnorm * source.radius + float(
            np.linalg.norm(action.apply(inv, np.asarray(source.center)) - center)
        )
        exact.append((eps, bound))
        ok.append(dist <= target.radius)
    threshold = None
    for i in range(len(ladder)):
        if all(ok[i:]):
            threshold = ladder[i]
            break
    return AbsorptionCertificate(
        source_set=source,
        target_set=target,
        threshold=threshold,
        sample_evidence=evidence,
        exact_bounds=exact,
        passed=threshold is not None,
    )


@dataclass
class EscapeReport:
    passed: bool
    threshold: float | None
    radius: float
    norms: list  # (eps, |H_eps(x)|)

    def to_json(self) -> dict:
        return {
            "check": "escape",
            "passed": self.passed,
            "threshold": self.threshold,
            "radius": self.radius,
            "norms": [[e, n] for e, n in self.norms],
        }


def certify_escape(action: Action, x, ladder, radius: float) -> EscapeReport:
    """Check |H_eps(x)| exceeds ``radius`` for all ladder entries past a threshold."""
    x = np.asarray(x, dtype=np.float64)
    if np.linalg.norm(x - action.center()) <= CENTER_TOL:
        raise ValueError("escape is undefined at the center")
    ladder = [action.group.validate(e) for e in ladder]
    norms = [(eps, float(np.linalg.norm(action.apply(eps, x)))) for eps in ladder]
    threshold = None
    for i in range(len(norms)):
        if all(n > radius for _, n in norms[i:]):
            threshold = ladder[i]
            break
    return EscapeReport(passed=threshold is not None, threshold=threshold, radius=radius, norms=norms)
