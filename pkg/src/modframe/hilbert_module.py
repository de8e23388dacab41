"""Finitely generated Hilbert C(X)-modules as fields of Hilbert spaces.

Over a finite spectrum every finitely generated Hilbert C(X)-module is a
direct sum of one finite-dimensional Hilbert space per point of X.  An
element is a vector per fiber, an adjointable A-linear operator is a matrix
per fiber, and the A-valued inner product is the fiberwise Euclidean one.
Fiber dimensions may differ from point to point (non-free modules), and
zero-dimensional fibers are allowed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, FiniteSpectrum, SpectrumMismatch

__all__ = [
    "DEFAULT_FLOOR",
    "ShapeMismatch",
    "SpectralError",
    "ModuleShape",
    "ModuleElement",
    "ModuleOperator",
    "inner",
    "module_norm",
    "op_apply",
    "op_adjoint",
    "op_compose",
    "op_norm",
    "herm_eig",
    "op_spectral_fn",
    "op_exp_skew",
    "is_hermitian",
    "is_unitary",
]

#: Invertibility floor on eigenvalues for every inversion in the package.
DEFAULT_FLOOR = 1e-8


class ShapeMismatch(ValueError):
    """Raised when fiber dimensions of operands are incompatible."""


class SpectralError(ValueError):
    """Raised when functional calculus preconditions fail."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModuleShape:
    """Fiber dimensions of a module, one per point of the spectrum."""

    spectrum: FiniteSpectrum
    fiber_dims: tuple[int, ...]

    def __init__(self, spectrum: FiniteSpectrum, fiber_dims: Sequence[int]):
        dims = tuple(int(d) for d in fiber_dims)
        if len(dims) != len(spectrum):
            raise ValueError(
                f"need one fiber dimension per point ({len(spectrum)}), got {len(dims)}"
            )
        if any(d < 0 for d in dims):
            raise ValueError(f"fiber dimensions must be nonnegative: {dims}")
        if not any(dims):
            raise ValueError("at least one fiber must have positive dimension")
        object.__setattr__(self, "spectrum", spectrum)
        object.__setattr__(self, "fiber_dims", dims)

    @classmethod
    def uniform(cls, spectrum: FiniteSpectrum, dim: int) -> "ModuleShape":
        return cls(spectrum, [dim] * len(spectrum))

    def __len__(self) -> int:
        return len(self.fiber_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.fiber_dims)

    def to_json(self) -> dict:
        return {"spectrum": self.spectrum.to_json(), "fiber_dims": list(self.fiber_dims)}

    @classmethod
    def from_json(cls, obj: dict) -> "ModuleShape":
        return cls(FiniteSpectrum(obj["spectrum"]), obj["fiber_dims"])


def _complex_pairs(arr: np.ndarray):
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    return [_complex_pairs(row) for row in arr]


def _from_pairs(obj, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.size == 0:
        return np.zeros(shape, dtype=complex)
    if arr.shape[-1] != 2:
        raise ValueError("complex numbers must be encoded as [re, im] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if out.shape != shape:
        raise ShapeMismatch(f"expected array of shape {shape}, got {out.shape}")
    return out


@dataclass(frozen=True, eq=False)
class ModuleElement:
    """A vector field over the spectrum: one complex vector per fiber."""

    shape: ModuleShape
    fibers: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.fibers) != len(self.shape):
            raise ShapeMismatch("need one fiber vector per spectrum point")
        fibs = []
        for d, f in zip(self.shape.fiber_dims, self.fibers):
            v = np.array(f, dtype=complex).reshape(-1)
            if v.shape[0] != d:
                raise ShapeMismatch(f"fiber vector of length {v.shape[0]}, expected {d}")
            fibs.append(_frozen(v))
        object.__setattr__(self, "fibers", tuple(fibs))

    @classmethod
    def zeros(cls, shape: ModuleShape) -> "ModuleElement":
        return cls(shape, tuple(np.zeros(d, dtype=complex) for d in shape.fiber_dims))

    @classmethod
    def basis_vector(cls, shape: ModuleShape, i: int) -> "ModuleElement":
        """The element equal to ``e_i`` in every fiber (requires ``i < dim`` everywhere)."""
        fibs = []
        for d in shape.fiber_dims:
            v = np.zeros(d, dtype=complex)
            v[i] = 1.0
            fibs.append(v)
        return cls(shape, tuple(fibs))

    def _check(self, other: "ModuleElement") -> None:
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape.fiber_dims} vs {other.shape.fiber_dims}")

    def __eq__(self, other) -> bool:
        """Exact equality of shapes and entries."""
        return (isinstance(other, ModuleElement) and other.shape == self.shape
                and all(np.array_equal(a, b) for a, b in zip(self.fibers, other.fibers)))

    __hash__ = None

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        self._check(other)
        return ModuleElement(self.shape, tuple(a + b for a, b in zip(self.fibers, other.fibers)))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        self._check(other)
        return ModuleElement(self.shape, tuple(a - b for a, b in zip(self.fibers, other.fibers)))

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.shape, tuple(-a for a in self.fibers))

    def __mul__(self, c) -> "ModuleElement":
        """Scalar or module action ``a·x`` (commutative, so both sides agree)."""
        if isinstance(c, AlgebraElement):
            if c.spectrum != self.shape.spectrum:
                raise SpectrumMismatch("algebra element over a different spectrum")
            return ModuleElement(
                self.shape, tuple(v * a for v, a in zip(self.fibers, c.values))
            )
        if np.isscalar(c):
            return ModuleElement(self.shape, tuple(v * c for v in self.fibers))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c) -> "ModuleElement":
        return self * (1.0 / c)

    def to_json(self) -> dict:
        return {"fibers": [_complex_pairs(v) for v in self.fibers]}

    @classmethod
    def from_json(cls, obj: dict, shape: ModuleShape) -> "ModuleElement":
        fibers = obj["fibers"]
        if len(fibers) != len(shape):
            raise ShapeMismatch("element has wrong number of fibers")
        return cls(shape, tuple(_from_pairs(f, (d,)) for f, d in zip(fibers, shape.fiber_dims)))


@dataclass(frozen=True, eq=False)
class ModuleOperator:
    """An adjointable A-linear map: one ``codim(t) x dim(t)`` matrix per fiber."""

    domain: ModuleShape
    codomain: ModuleShape
    fibers: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.domain.spectrum != self.codomain.spectrum:
            raise SpectrumMismatch("domain and codomain over different spectra")
        if len(self.fibers) != len(self.domain):
            raise ShapeMismatch("need one fiber matrix per spectrum point")
        fibs = []
        for m, n, f in zip(self.codomain.fiber_dims, self.domain.fiber_dims, self.fibers):
            a = np.array(f, dtype=complex).reshape(m, n)
            fibs.append(_frozen(a))
        object.__setattr__(self, "fibers", tuple(fibs))

    # constructors ---------------------------------------------------------

    @classmethod
    def identity(cls, shape: ModuleShape) -> "ModuleOperator":
        return cls(shape, shape, tuple(np.eye(d, dtype=complex) for d in shape.fiber_dims))

    @classmethod
    def zeros(cls, domain: ModuleShape, codomain: ModuleShape | None = None) -> "ModuleOperator":
        codomain = domain if codomain is None else codomain
        return cls(
            domain,
            codomain,
            tuple(np.zeros((m, n), dtype=complex)
                  for m, n in zip(codomain.fiber_dims, domain.fiber_dims)),
        )

    @classmethod
    def scalar(cls, shape: ModuleShape, a: Union[complex, AlgebraElement]) -> "ModuleOperator":
        """Multiplication by a scalar or by an algebra element."""
        vals = a.values if isinstance(a, AlgebraElement) else [a] * len(shape)
        return cls(shape, shape, tuple(v * np.eye(d) for v, d in zip(vals, shape.fiber_dims)))

    @classmethod
    def from_columns(cls, domain: ModuleShape, codomain: ModuleShape,
                     columns: Sequence[ModuleElement]) -> "ModuleOperator":
        """Operator whose ``j``-th column (in every fiber) is ``columns[j]``.

        Only meaningful when the domain is free, i.e. every fiber has
        dimension ``len(columns)``.
        """
        fibs = []
        for t, n in enumerate(domain.fiber_dims):
            if n != len(columns):
                raise ShapeMismatch("domain fiber dimension must equal number of columns")
            m = codomain.fiber_dims[t]
            fibs.append(np.column_stack([c.fibers[t] for c in columns]) if n
                        else np.zeros((m, 0)))
        return cls(domain, codomain, tuple(fibs))

    # properties -----------------------------------------------------------

    @property
    def is_square(self) -> bool:
        return self.domain == self.codomain

    @property
    def H(self) -> "ModuleOperator":
        return op_adjoint(self)

    def norm(self) -> float:
        return op_norm(self)

    # arithmetic -----------------------------------------------------------

    def _check_same(self, other: "ModuleOperator") -> None:
        if self.domain != other.domain or self.codomain != other.codomain:
            raise ShapeMismatch("operators act between different modules")

    def __eq__(self, other) -> bool:
        return (isinstance(other, ModuleOperator) and other.domain == self.domain
                and other.codomain == self.codomain
                and all(np.array_equal(a, b) for a, b in zip(self.fibers, other.fibers)))

    __hash__ = None

    def __add__(self, other: "ModuleOperator") -> "ModuleOperator":
        self._check_same(other)
        return ModuleOperator(self.domain, self.codomain,
                              tuple(a + b for a, b in zip(self.fibers, other.fibers)))

    def __sub__(self, other: "ModuleOperator") -> "ModuleOperator":
        self._check_same(other)
        return ModuleOperator(self.domain, self.codomain,
                              tuple(a - b for a, b in zip(self.fibers, other.fibers)))

    def __neg__(self) -> "ModuleOperator":
        return ModuleOperator(self.domain, self.codomain, tuple(-a for a in self.fibers))

    def __mul__(self, c) -> "ModuleOperator":
        if isinstance(c, AlgebraElement):
            return ModuleOperator(self.domain, self.codomain,
                                  tuple(m * a for m, a in zip(self.fibers, c.values)))
        if np.isscalar(c):
            return ModuleOperator(self.domain, self.codomain, tuple(m * c for m in self.fibers))
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, ModuleOperator):
            return op_compose(self, other)
        if isinstance(other, ModuleElement):
            return op_apply(self, other)
        return NotImplemented

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {"fibers": [_complex_pairs(m) if m.size else [[] for _ in range(m.shape[0])]
                           for m in self.fibers]}

    @classmethod
    def from_json(cls, obj: dict, domain: ModuleShape,
                  codomain: ModuleShape | None = None) -> "ModuleOperator":
        codomain = domain if codomain is None else codomain
        fibers = obj["fibers"]
        if len(fibers) != len(domain):
            raise ShapeMismatch("operator has wrong number of fibers")
        return cls(domain, codomain, tuple(
            _from_pairs(f, (m, n))
            for f, m, n in zip(fibers, codomain.fiber_dims, domain.fiber_dims)))


# ---------------------------------------------------------------------------
# inner product and norms


def inner(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """A-valued inner product, linear in ``x`` and conjugate-linear in ``y``."""
    x._check(y)
    return AlgebraElement(x.shape.spectrum,
                          [np.vdot(b, a) for a, b in zip(x.fibers, y.fibers)])


def module_norm(x: ModuleElement) -> float:
    """``||x|| = ||<x, x>||^(1/2)``, i.e. the largest fiber norm."""
    return float(max((np.linalg.norm(v) for v in x.fibers), default=0.0))


def op_norm(m: ModuleOperator) -> float:
    """C*-norm on End*(H): the largest fiberwise spectral norm."""
    return float(max((np.linalg.norm(a, 2) for a in m.fibers if a.size), default=0.0))


def op_apply(m: ModuleOperator, x: ModuleElement) -> ModuleElement:
    if x.shape != m.domain:
        raise ShapeMismatch("element is not in the operator's domain")
    return ModuleElement(m.codomain, tuple(a @ v for a, v in zip(m.fibers, x.fibers)))


def op_adjoint(m: ModuleOperator) -> ModuleOperator:
    return ModuleOperator(m.codomain, m.domain, tuple(a.conj().T for a in m.fibers))


def op_compose(m: ModuleOperator, n: ModuleOperator) -> ModuleOperator:
    """``m ∘ n``."""
    if n.codomain != m.domain:
        raise ShapeMismatch("cannot compose: codomain/domain mismatch")
    return ModuleOperator(n.domain, m.codomain, tuple(a @ b for a, b in zip(m.fibers, n.fibers)))


def is_hermitian(m: ModuleOperator, tol: float = 1e-9) -> bool:
    if not m.is_square:
        return False
    return all(np.linalg.norm(a - a.conj().T, 2) <= tol * max(np.linalg.norm(a, 2), 1e-300)
               for a in m.fibers if a.size)


def is_unitary(m: ModuleOperator, tol: float = 1e-8) -> bool:
    if not m.is_square:
        return False
    return all(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0]), 2) <= tol
               for a in m.fibers if a.size)


# ---------------------------------------------------------------------------
# spectral calculus


def herm_eig(m: ModuleOperator, tol: float = 1e-9) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-fiber eigendecomposition of a Hermitian operator.

    Returns a list of ``(eigenvalues, eigenvectors)`` with eigenvalues in
    ascending order and unitary eigenvector matrices.  Raises
    ``SpectralError`` if some fiber is not Hermitian within ``tol``
    (relative to its norm).
    """
    if not is_hermitian(m, tol):
        raise SpectralError("operator is not fiberwise Hermitian")
    out = []
    for a in m.fibers:
        if not a.size:
            out.append((np.zeros(0), np.zeros((0, 0), dtype=complex)))
            continue
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        out.append((w, v))
    return out


def _log_unitary_fiber(a: np.ndarray, unitary_tol: float) -> np.ndarray:
    n = a.shape[0]
    if np.linalg.norm(a.conj().T @ a - np.eye(n), 2) > unitary_tol:
        raise SpectralError("log_unitary requires a unitary operator")
    t, z = scipy.linalg.schur(a, output="complex")
    lam = np.diag(t)
    theta = np.angle(lam)
    # principal branch (-pi, pi]; phases that round to -pi join +pi
    theta = np.where(theta <= -np.pi + 1e-8, np.pi, theta)
    return (z * (1j * theta)) @ z.conj().T


SpectralFn = Union[str, Callable[[np.ndarray], np.ndarray]]

_NAMED = {
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
    "inv": lambda w: 1.0 / w,
}


def op_spectral_fn(m: ModuleOperator, fn: SpectralFn, floor: float = DEFAULT_FLOOR,
                   *, unitary_tol: float = 1e-8) -> ModuleOperator:
    """Fiberwise functional calculus ``V f(diag λ) V*``.

    ``fn`` is one of ``"sqrt"``, ``"inv_sqrt"``, ``"inv"``, ``"log_unitary"``
    or any vectorized callable on eigenvalues.  For the named Hermitian
    functions every eigenvalue must be at least ``floor``; callables get the
    raw eigenvalues and impose no floor.  ``"log_unitary"`` returns the
    skew-Hermitian principal logarithm ``K`` with ``exp(K) = m``.
    """
    if fn == "log_unitary":
        return ModuleOperator(m.domain, m.codomain, tuple(
            _log_unitary_fiber(a, unitary_tol) if a.size else a for a in m.fibers))
    if isinstance(fn, str):
        if fn not in _NAMED:
            raise ValueError(f"unknown spectral function {fn!r}")
        f = _NAMED[fn]
        check_floor = True
    else:
        f = fn
        check_floor = False
    fibs = []
    for (w, v), a in zip(herm_eig(m), m.fibers):
        if not a.size:
            fibs.append(a)
            continue
        if check_floor and w[0] < floor:
            raise SpectralError(
                f"eigenvalue {w[0]:.3e} below floor {floor:.1e} for {fn!r}")
        fibs.append((v * f(w)) @ v.conj().T)
    return ModuleOperator(m.domain, m.codomain, tuple(fibs))


def op_exp_skew(k: ModuleOperator, s: float = 1.0) -> ModuleOperator:
    """``exp(s K)`` for skew-Hermitian ``K``, computed as a unitary."""
    h = (-1j) * k
    fibs = []
    for (w, v), a in zip(herm_eig(h), k.fibers):
        fibs.append((v * np.exp(1j * s * w)) @ v.conj().T if a.size else a)
    return ModuleOperator(k.domain, k.codomain, tuple(fibs))
