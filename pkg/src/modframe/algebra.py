"""The commutative C*-algebra C(X) over a finite spectrum X.

For finite X, C(X) is just ``C^X`` with pointwise product, pointwise
conjugation and the sup norm.  Elements are stored as a complex vector
indexed by the (ordered) points of the spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "SpectrumMismatch",
    "FiniteSpectrum",
    "AlgebraElement",
    "alg_mul",
    "alg_adjoint",
    "alg_norm",
    "alg_is_positive",
    "alg_leq",
]

#: Default positivity tolerance for the cone order.
DEFAULT_TOL = 1e-9


class SpectrumMismatch(ValueError):
    """Raised when two objects live over different spectra."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FiniteSpectrum:
    """An ordered, finite list of distinct point labels."""

    points: tuple[str, ...]

    def __init__(self, points: Sequence[str]):
        pts = tuple(str(p) for p in points)
        if not pts:
            raise ValueError("spectrum must be nonempty")
        if len(set(pts)) != len(pts):
            raise ValueError(f"spectrum labels must be unique, got {list(pts)}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of_size(cls, n: int, prefix: str = "t") -> "FiniteSpectrum":
        return cls([f"{prefix}{i + 1}" for i in range(n)])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def index(self, label: str) -> int:
        return self.points.index(label)

    def to_json(self) -> list[str]:
        return list(self.points)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A complex-valued function on a finite spectrum."""

    spectrum: FiniteSpectrum
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.shape[0] != len(self.spectrum):
            raise ValueError(
                f"expected {len(self.spectrum)} values, got {vals.shape[0]}"
            )
        object.__setattr__(self, "values", _frozen(vals))

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, spectrum: FiniteSpectrum, c: complex) -> "AlgebraElement":
        return cls(spectrum, np.full(len(spectrum), c, dtype=complex))

    @classmethod
    def one(cls, spectrum: FiniteSpectrum) -> "AlgebraElement":
        return cls.constant(spectrum, 1.0)

    @classmethod
    def zero(cls, spectrum: FiniteSpectrum) -> "AlgebraElement":
        return cls.constant(spectrum, 0.0)

    # arithmetic -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement) and other.spectrum == self.spectrum
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, AlgebraElement):
            _check_same(self, other)
            return other.values
        if np.isscalar(other):
            return np.full(len(self.spectrum), other, dtype=complex)
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return AlgebraElement(self.spectrum, self.values + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return AlgebraElement(self.spectrum, self.values - v)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return AlgebraElement(self.spectrum, v - self.values)

    def __neg__(self):
        return AlgebraElement(self.spectrum, -self.values)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return alg_mul(self, other)
        if np.isscalar(other):
            return AlgebraElement(self.spectrum, self.values * other)
        return NotImplemented

    __rmul__ = __mul__

    def adjoint(self) -> "AlgebraElement":
        return alg_adjoint(self)

    def norm(self) -> float:
        return alg_norm(self)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def __repr__(self) -> str:
        return f"AlgebraElement({dict(zip(self.spectrum.points, self.values.tolist()))})"

    def to_json(self) -> dict:
        return {
            "spectrum": self.spectrum.to_json(),
            "values": [[float(z.real), float(z.imag)] for z in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AlgebraElement":
        spectrum = FiniteSpectrum(obj["spectrum"])
        vals = [complex(re, im) for re, im in obj["values"]]
        return cls(spectrum, vals)


def _check_same(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.spectrum != b.spectrum:
        raise SpectrumMismatch(
            f"spectra differ: {list(a.spectrum.points)} vs {list(b.spectrum.points)}"
        )


def alg_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Pointwise product ``(ab)(t) = a(t) b(t)``, exactly commutative."""
    _check_same(a, b)
    # numpy's complex multiply may fuse operations asymmetrically; spelling out
    # the real arithmetic keeps alg_mul(a, b) == alg_mul(b, a) bit for bit
    ar, ai = a.values.real, a.values.imag
    br, bi = b.values.real, b.values.imag
    return AlgebraElement(a.spectrum, (ar * br - ai * bi) + 1j * (ar * bi + ai * br))


def alg_adjoint(a: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(a.spectrum, np.conj(a.values))


def alg_norm(a: AlgebraElement) -> float:
    """Sup norm over the spectrum."""
    return float(np.max(np.abs(a.values)))


def alg_is_positive(a: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    """``a >= 0`` iff every value is real (up to ``tol``) with real part ``>= -tol``."""
    v = a.values
    return bool(np.all(np.abs(v.imag) <= tol) and np.all(v.real >= -tol))


def alg_leq(a: AlgebraElement, b: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    """``a <= b`` in the positive-cone order."""
    _check_same(a, b)
    return alg_is_positive(b - a, tol)
