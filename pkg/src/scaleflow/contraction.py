"""Contraction flows: Lipschitz bounds and fixed-point location of the center.

For the built-in linear actions the global Lipschitz constant of H_eps is
the operator norm of its matrix; generic actions fall back to a sampled
supremum over point pairs, which only bounds the constant from below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import Action

SUBMULT_SLACK = 1e-9
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10**5


@dataclass(frozen=True)
class ContractionFlow:
    action: Action

    def lipschitz(self, eps: float) -> float:
        """Lipschitz constant of H_eps (exact for linear variants)."""
        try:
            return self.action.operator_norm(eps)
        except NotImplementedError:
            return self._sampled_lipschitz(eps)

    def _sampled_lipschitz(self, eps: float, pairs: int = 10**4, seed: int = 0) -> float:
        # lower bound only: the true constant is a supremum over all pairs
        rng = np.random.default_rng(seed)
        dim = self.action.dimension
        xs = rng.uniform(-5.0, 5.0, size=(pairs, dim))
        ys = rng.uniform(-5.0, 5.0, size=(pairs, dim))
        keep = np.linalg.norm(xs - ys, axis=1) > 1e-9
        xs, ys = xs[keep], ys[keep]
        num = np.linalg.norm(self.action.apply(eps, xs) - self.action.apply(eps, ys), axis=1)
        den = np.linalg.norm(xs - ys, axis=1)
        return float(np.max(num / den))


@dataclass
class SubmultiplicativityReport:
    passed: bool
    worst_excess: float
    decay_values: list  # (eps, l(eps^-1)) along the ladder
    decay_monotone: bool
    decay_final: float
    bounded: bool

    def to_json(self) -> dict:
        return {
            "check": "submultiplicative",
            "passed": self.passed,
            "worst_excess": self.worst_excess,
            "decay": [[e, v] for e, v in self.decay_values],
            "decay_monotone": self.decay_monotone,
            "decay_final": self.decay_final,
            "bounded": self.bounded,
        }


def certify_submultiplicative(
    flow: ContractionFlow,
    sample_count: int = 256,
    seed: int = 0,
    ladder=None,
) -> SubmultiplicativityReport:
    """Check l(e e') <= l(e) l(e') on sampled pairs plus decay of l(eps^-1).

    The decay check follows a ladder toward the group infimum: the values
    l(eps^-1) must stay finite, decrease monotonically and end below their
    starting value by a factor of 10.
    """
    from .actions import _sample_parameters

    group = flow.action.group
    rng = np.random.default_rng(seed)
    eps1 = _sample_parameters(group, rng, sample_count)
    eps2 = _sample_parameters(group, rng, sample_count)
    worst = 0.0
    for a, b in zip(eps1, eps2):
        lab = flow.lipschitz(group.compose(a, b))
        la, lb = flow.lipschitz(a), flow.lipschitz(b)
        excess = (lab - la * lb) / max(la * lb, 1e-300)
        worst = max(worst, float(excess))
    if ladder is None:
        ladder = group.ladder(12)
    decay = [(float(e), flow.lipschitz(group.inverse(e))) for e in ladder]
    values = [v for _, v in decay]
    bounded = all(np.isfinite(values))
    monotone = all(b <= a * (1.0 + SUBMULT_SLACK) for a, b in zip(values, values[1:]))
    decayed = values[-1] <= 0.1 * values[0]
    return SubmultiplicativityReport(
        passed=worst <= SUBMULT_SLACK and bounded and monotone and decayed,
        worst_excess=worst,
        decay_values=decay,
        decay_monotone=monotone,
        decay_final=values[-1],
        bounded=bounded,
    )


@dataclass
class FixedPointResult:
    point: np.ndarray
    iterations: int
    residual: float
    step_ratios: list
    contraction_bound: float
    center_distance: float
    cross_parameter_distance: float

    def to_json(self) -> dict:
        return {
            "check": "fixed-point",
            "point": self.point.tolist(),
            "iterations": self.iterations,
            "residual": self.residual,
            "contraction_bound": self.contraction_bound,
            "center_distance": self.center_distance,
            "cross_parameter_distance": self.cross_parameter_distance,
        }


def _iterate(flow: ContractionFlow, eps: float, x0, tol: float, max_iter: int):
    group = flow.action.group
    inv = group.inverse(eps)
    x = np.asarray(x0, dtype=np.float64)
    ratios = []
    prev_step = None
    for n in range(1, max_iter + 1):
        x_next = flow.action.apply(inv, x)
        step = float(np.linalg.norm(x_next - x))
        if prev_step is not None and prev_step > 1e-280:
            ratios.append(step / prev_step)
        prev_step = step
        x = x_next
        if step <= tol:
            return x, n, ratios
    raise RuntimeError(
        f"no convergence after {max_iter} iterations: contraction fails at eps={eps}"
    )


def fixed_point(
    flow: ContractionFlow,
    eps: float,
    x0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FixedPointResult:
    """Locate the invariant point by iterating H at the inverse parameter.

    Requires l(eps^-1) < 1.  The result is checked against the action's
    center (within 10*tol) and against a second admissible parameter
    eps*eps (within 2*tol), mirroring the uniqueness of the fixed point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    group = flow.action.group
    eps = group.validate(eps)
    bound = flow.lipschitz(group.inverse(eps))
    if bound >= 1.0:
        raise ValueError(f"l(eps^-1) = {bound} is not below 1: not a contraction")
    x, iters, ratios = _iterate(flow, eps, x0, tol, max_iter)
    residual = float(np.linalg.norm(flow.action.apply(group.inverse(eps), x) - x))
    center_distance = float(np.linalg.norm(x - flow.action.center()))
    if center_distance > 10.0 * tol:
        raise RuntimeError("fixed point does not match the action center")
    eps2 = group.compose(eps, eps)
    y, _, _ = _iterate(flow, eps2, x0, tol, max_iter)
    cross = float(np.linalg.norm(x - y))
    if cross > 2.0 * tol:
        raise RuntimeError("fixed point depends on the contraction parameter")
    return FixedPointResult(
        point=x,
        iterations=iters,
        residual=residual,
        step_ratios=ratios,
        contraction_bound=bound,
        center_distance=center_distance,
        cross_parameter_distance=cross,
    )
