"""Finite trigonometric polynomials sum_k c_k exp(2 pi i <k, x>) on R^N.

The frequency list is kept canonical (lexicographically sorted, duplicates
merged) so coefficient extraction is exact and reproducible.  Evaluation on
point arrays goes through the kernel backend.
"""

from __future__ import annotations

import numpy as np

from . import kernels

_FREQ_DECIMALS = 9  # frequencies closer than 1e-9 are treated as equal


def _freq_key(freq) -> tuple:
    return tuple(round(float(f), _FREQ_DECIMALS) for f in freq)


class TrigPolynomial:
    """Immutable frequency/coefficient representation of an almost-periodic map."""

    __slots__ = ("freqs", "coeffs", "_index")

    def __init__(self, freqs, coeffs):
        freqs = np.atleast_2d(np.asarray(freqs, dtype=np.float64))
        coeffs = np.asarray(coeffs, dtype=np.complex128).ravel()
        if freqs.shape[0] != coeffs.shape[0]:
            raise ValueError("one coefficient per frequency required")
        merged: dict[tuple, complex] = {}
        rep: dict[tuple, np.ndarray] = {}
        for f, c in zip(freqs, coeffs):
            key = _freq_key(f)
            merged[key] = merged.get(key, 0j) + complex(c)
            rep.setdefault(key, f)
        keys = sorted(merged)
        if not keys:
            keys = [(0.0,) * freqs.shape[1]]
            merged = {keys[0]: 0j}
            rep = {keys[0]: np.zeros(freqs.shape[1])}
        self.freqs = np.array([rep[k] for k in keys], dtype=np.float64)
        self.coeffs = np.array([merged[k] for k in keys], dtype=np.complex128)
        self._index = {k: i for i, k in enumerate(keys)}

    # -- constructors --------------------------------------------------------

    @classmethod
    def constant(cls, value, dim: int = 1) -> "TrigPolynomial":
        return cls(np.zeros((1, dim)), [value])

    @classmethod
    def character(cls, freq) -> "TrigPolynomial":
        freq = np.atleast_1d(np.asarray(freq, dtype=np.float64))
        return cls(freq[None, :], [1.0])

    @classmethod
    def cosine(cls, freq) -> "TrigPolynomial":
        freq = np.atleast_1d(np.asarray(freq, dtype=np.float64))
        return cls(np.stack([freq, -freq]), [0.5, 0.5])

    @classmethod
    def sine(cls, freq) -> "TrigPolynomial":
        freq = np.atleast_1d(np.asarray(freq, dtype=np.float64))
        return cls(np.stack([freq, -freq]), [-0.5j, 0.5j])

    @classmethod
    def from_terms(cls, terms, dim: int | None = None) -> "TrigPolynomial":
        """Build from ``[(freq_vector, coefficient), ...]``."""
        freqs = [np.atleast_1d(np.asarray(f, dtype=np.float64)) for f, _ in terms]
        coeffs = [c for _, c in terms]
        if not terms:
            return cls.constant(0.0, dim or 1)
        return cls(np.stack(freqs), coeffs)

    # -- basic queries --------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def coefficient(self, freq) -> complex:
        i = self._index.get(_freq_key(np.atleast_1d(freq)))
        return 0j if i is None else complex(self.coeffs[i])

    def zero_coefficient(self) -> complex:
        return self.coefficient(np.zeros(self.dim))

    def max_abs_freq(self) -> np.ndarray:
        """Per-axis maximum |frequency|; used by resolution rules."""
        return np.max(np.abs(self.freqs), axis=0)

    def sup_norm_bound(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def terms(self):
        return [(tuple(f), complex(c)) for f, c in zip(self.freqs, self.coeffs)]

    # -- evaluation ------------------------------------------------------------

    def __call__(self, x) -> np.ndarray | complex:
        pts = np.asarray(x, dtype=np.float64)
        single_point = False
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
            single_point = True
        elif pts.ndim == 1:
            if self.dim == 1:
                pts = pts[:, None]
            else:
                pts = pts[None, :]
                single_point = True
        out = kernels.trig_eval(self.freqs, self.coeffs, pts)
        return complex(out[0]) if single_point else out

    # -- algebra -----------------------------------------------------------------

    def __add__(self, other) -> "TrigPolynomial":
        other = self._coerce(other)
        return TrigPolynomial(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def __sub__(self, other) -> "TrigPolynomial":
        return self + (self._coerce(other) * (-1.0))

    def __mul__(self, other) -> "TrigPolynomial":
        if np.isscalar(other):
            return TrigPolynomial(self.freqs, self.coeffs * complex(other))
        other = self._coerce(other)
        freqs = (self.freqs[:, None, :] + other.freqs[None, :, :]).reshape(-1, self.dim)
        coeffs = (self.coeffs[:, None] * other.coeffs[None, :]).ravel()
        return TrigPolynomial(freqs, coeffs)

    __rmul__ = __mul__

    def conjugate(self) -> "TrigPolynomial":
        return TrigPolynomial(-self.freqs, np.conj(self.coeffs))

    def translate(self, shift) -> "TrigPolynomial":
        """The map x -> p(x - shift): each coefficient picks up a unit phase."""
        shift = np.atleast_1d(np.asarray(shift, dtype=np.float64))
        phases = np.exp(-2j * np.pi * (self.freqs @ shift))
        return TrigPolynomial(self.freqs, self.coeffs * phases)

    def compose_linear(self, matrix) -> "TrigPolynomial":
        """The map x -> p(A x); frequencies transform by the transpose."""
        a = np.asarray(matrix, dtype=np.float64)
        return TrigPolynomial(self.freqs @ a, self.coeffs)

    def _coerce(self, other) -> "TrigPolynomial":
        if isinstance(other, TrigPolynomial):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        if np.isscalar(other):
            return TrigPolynomial.constant(other, self.dim)
        raise TypeError(f"cannot combine TrigPolynomial with {type(other)!r}")

    def __repr__(self) -> str:
        inner = ", ".join(f"{c:.3g}*e({tuple(f)})" for f, c in zip(self.freqs, self.coeffs))
        return f"TrigPolynomial({inner})"
