"""Canonical scaling groups of reals and their weight homomorphisms.

Three groups are supported: the additive reals, the multiplicative positive
reals, and the additive integers.  Each carries the natural total order, an
identity ``e``, a greatest lower bound ``theta`` (possibly ``-inf``), a
positive weight homomorphism ``h`` and the closed-form mass of the upper
tail ``{eps >= alpha}`` under the weighted Haar measure ``h * m``.

Group elements are plain floats; the integer group validates integrality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REAL_ADDITIVE = "real-additive"
POSITIVE_MULTIPLICATIVE = "positive-multiplicative"
INTEGER_ADDITIVE = "integer-additive"

KINDS = (REAL_ADDITIVE, POSITIVE_MULTIPLICATIVE, INTEGER_ADDITIVE)

_DEFAULT_PARAM = {
    REAL_ADDITIVE: 1.0,
    POSITIVE_MULTIPLICATIVE: 1.0,
    INTEGER_ADDITIVE: 0.5,
}

_INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class RGroup:
    """One of the three canonical scaling groups.

    ``weight_param`` is the decay rate r > 0 of the weight homomorphism for
    the real kinds, and the geometric ratio a in (0, 1) for the integers.
    """

    kind: str
    weight_param: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.weight_param is None:
            object.__setattr__(self, "weight_param", _DEFAULT_PARAM[self.kind])
        p = self.weight_param
        if self.kind == INTEGER_ADDITIVE:
            if not 0.0 < p < 1.0:
                raise ValueError("integer-additive ratio must lie in (0, 1)")
        elif p <= 0.0:
            raise ValueError("weight rate must be positive")

    # -- structure ---------------------------------------------------------

    @property
    def identity(self) -> float:
        return 1.0 if self.kind == POSITIVE_MULTIPLICATIVE else 0.0

    @property
    def theta(self) -> float:
        """Greatest lower bound of the group inside the extended reals."""
        return 0.0 if self.kind == POSITIVE_MULTIPLICATIVE else -math.inf

    def validate(self, eps: float) -> float:
        """Check membership and return ``eps`` as a float."""
        eps = float(eps)
        if not math.isfinite(eps):
            raise ValueError("group elements must be finite")
        if self.kind == POSITIVE_MULTIPLICATIVE and eps <= 0.0:
            raise ValueError(f"{eps} is not a positive real")
        if self.kind == INTEGER_ADDITIVE and abs(eps - round(eps)) > _INTEGER_TOL:
            raise ValueError(f"{eps} is not an integer")
        return eps

    def compose(self, eps: float, other: float) -> float:
        eps, other = self.validate(eps), self.validate(other)
        if self.kind == POSITIVE_MULTIPLICATIVE:
            return eps * other
        return eps + other

    def inverse(self, eps: float) -> float:
        eps = self.validate(eps)
        if self.kind == POSITIVE_MULTIPLICATIVE:
            return 1.0 / eps
        return -eps

    def compare(self, eps: float, other: float) -> int:
        """Natural real order: -1, 0 or +1."""
        eps, other = self.validate(eps), self.validate(other)
        return (eps > other) - (eps < other)

    # -- weight and tails --------------------------------------------------

    def weight(self, eps: float) -> float:
        """The positive weight homomorphism h at ``eps``."""
        eps = self.validate(eps)
        r = self.weight_param
        if self.kind == REAL_ADDITIVE:
            return math.exp(-r * eps)
        if self.kind == POSITIVE_MULTIPLICATIVE:
            return eps ** (-r)
        return r ** round(eps)

    def tail_mass(self, alpha: float) -> float:
        """Closed-form mass of ``{eps >= alpha}`` for the measure h * m.

        Haar measure m is Lebesgue on the additive reals, ``d eps / eps`` on
        the multiplicative reals, and counting measure on the integers, so
        the tails integrate to ``exp(-r*alpha)/r``, ``alpha**(-r)/r`` and
        ``a**alpha/(1-a)`` respectively.
        """
        alpha = self.validate(alpha)
        r = self.weight_param
        if self.kind == REAL_ADDITIVE:
            return math.exp(-r * alpha) / r
        if self.kind == POSITIVE_MULTIPLICATIVE:
            return alpha ** (-r) / r
        return r ** round(alpha) / (1.0 - r)

    def tail_threshold(self, mass: float) -> float:
        """Smallest ``alpha`` with ``tail_mass(alpha) <= mass``."""
        if mass <= 0.0:
            raise ValueError("mass must be positive")
        r = self.weight_param
        if self.kind == REAL_ADDITIVE:
            return -math.log(mass * r) / r
        if self.kind == POSITIVE_MULTIPLICATIVE:
            return (mass * r) ** (-1.0 / r)
        return float(math.ceil(math.log(mass * (1.0 - r)) / math.log(r)))

    # -- ladders ------------------------------------------------------------

    def ladder(self, count: int = 12, step: float | None = None) -> np.ndarray:
        """Decreasing sequence of elements <= e heading toward theta.

        Multiplicative groups use the geometric ladder ``step**-n`` (default
        step 2); additive groups use ``-n * step`` (default step 1).
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        n = np.arange(1, count + 1, dtype=np.float64)
        if self.kind == POSITIVE_MULTIPLICATIVE:
            s = 2.0 if step is None else float(step)
            if s <= 1.0:
                raise ValueError("multiplicative ladder step must exceed 1")
            return s ** (-n)
        s = 1.0 if step is None else float(step)
        if s <= 0.0:
            raise ValueError("additive ladder step must be positive")
        if self.kind == INTEGER_ADDITIVE:
            if s < 1.0:
                raise ValueError("integer ladder steps below 1 repeat entries")
            return -np.round(n * s)
        return -n * s

    def to_config(self) -> dict:
        return {"kind": self.kind, "weight_param": self.weight_param}

    @classmethod
    def from_config(cls, block: dict) -> "RGroup":
        return cls(kind=block["kind"], weight_param=block.get("weight_param"))
