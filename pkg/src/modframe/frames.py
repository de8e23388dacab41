"""Modular frames: analysis and frame operators, bounds, duals, canonicalization.

Conventions: the frame operator is ``S = T*T`` where ``T`` is the analysis
operator ``x -> (<x, x_j>)_j``, so fiberwise ``S(t) = sum_j x_j(t) x_j(t)*``.
The reconstruction formula then reads ``x = sum_j <x, S^-1 x_j> x_j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement
from .hilbert_module import (
    DEFAULT_FLOOR,
    ModuleElement,
    ModuleOperator,
    ModuleShape,
    ShapeMismatch,
    herm_eig,
    inner,
    module_norm,
    op_spectral_fn,
)

__all__ = [
    "CLASSIFY_TOL",
    "NotAFrame",
    "FrameSystem",
    "FrameBounds",
    "MultiGenerator",
    "analysis_operator",
    "frame_operator",
    "frame_bounds",
    "canonical_dual",
    "reconstruct_residual",
    "canonical_parseval",
    "energy_sum",
]

#: Relative tolerance for tight/Parseval decisions.
CLASSIFY_TOL = 1e-8


class NotAFrame(ValueError):
    """The family has zero lower frame bound."""


def _check_shared(shape: ModuleShape, vectors: Sequence[ModuleElement]) -> None:
    for v in vectors:
        if v.shape != shape:
            raise ShapeMismatch("all vectors must share the module shape")


class FrameSystem:
    """A finite indexed family ``{x_j}`` in a Hilbert module.

    The analysis operator, frame operator and bounds are computed lazily
    and cached on first access.
    """

    def __init__(self, shape: ModuleShape, vectors: Sequence[ModuleElement]):
        vectors = tuple(vectors)
        if not vectors:
            raise ValueError("a frame system needs at least one vector")
        _check_shared(shape, vectors)
        self.shape = shape
        self.vectors = vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, j: int) -> ModuleElement:
        return self.vectors[j]

    @property
    def index_shape(self) -> ModuleShape:
        """Shape of the standard module ``A^J``."""
        return ModuleShape.uniform(self.shape.spectrum, len(self.vectors))

    def synthesis_matrices(self) -> list[np.ndarray]:
        """Per fiber, the ``dim x |J|`` matrix with columns ``x_j(t)``."""
        return [np.column_stack([v.fibers[t] for v in self.vectors])
                if d else np.zeros((0, len(self.vectors)), dtype=complex)
                for t, d in enumerate(self.shape.fiber_dims)]

    @cached_property
    def analysis(self) -> ModuleOperator:
        return ModuleOperator(self.shape, self.index_shape,
                              tuple(x.conj().T for x in self.synthesis_matrices()))

    @cached_property
    def frame_op(self) -> ModuleOperator:
        t = self.analysis
        return t.H @ t

    @cached_property
    def bounds(self) -> "FrameBounds":
        return frame_bounds(self)

    def map(self, op: ModuleOperator) -> "FrameSystem":
        """The family ``{op x_j}``."""
        return FrameSystem(op.codomain, [op @ v for v in self.vectors])

    def to_json(self) -> dict:
        return {"module": self.shape.to_json(), "vectors": [v.to_json() for v in self.vectors]}

    @classmethod
    def from_json(cls, obj: dict) -> "FrameSystem":
        shape = ModuleShape.from_json(obj["module"])
        return cls(shape, [ModuleElement.from_json(v, shape) for v in obj["vectors"]])


@dataclass(frozen=True)
class FrameBounds:
    """Optimal frame bounds, as scalars and as functions on the spectrum.

    Fibers of dimension zero impose no constraint; there ``lower_fn`` and
    ``upper_fn`` carry the scalar bounds so that ``lower = min(lower_fn)``
    and ``upper = max(upper_fn)`` hold everywhere.
    """

    lower: float
    upper: float
    lower_fn: AlgebraElement
    upper_fn: AlgebraElement
    tol: float = CLASSIFY_TOL

    @property
    def is_frame(self) -> bool:
        return self.lower > self.tol

    @property
    def is_tight(self) -> bool:
        return self.is_frame and self.upper - self.lower <= self.tol * self.upper

    @property
    def is_parseval(self) -> bool:
        return (self.is_tight
                and max(abs(self.lower - 1.0), abs(self.upper - 1.0))
                <= self.tol * max(1.0, self.upper))

    @property
    def classification(self) -> str:
        if self.is_parseval:
            return "parseval"
        if self.is_tight:
            return "tight"
        if self.is_frame:
            return "frame"
        return "bessel"

    def to_json(self) -> dict:
        return {
            "C": self.lower,
            "D": self.upper,
            "lower_fn": self.lower_fn.to_json(),
            "upper_fn": self.upper_fn.to_json(),
            "classification": self.classification,
        }


@dataclass(frozen=True)
class MultiGenerator:
    """An ordered tuple ``(phi_1, ..., phi_N)`` of module elements."""

    generators: tuple[ModuleElement, ...]

    def __init__(self, generators: Sequence[ModuleElement]):
        gens = tuple(generators)
        if not gens:
            raise ValueError("a multi-generator needs at least one element")
        _check_shared(gens[0].shape, gens)
        object.__setattr__(self, "generators", gens)

    @property
    def shape(self) -> ModuleShape:
        return self.generators[0].shape

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, k: int) -> ModuleElement:
        return self.generators[k]

    def map(self, op: ModuleOperator) -> "MultiGenerator":
        return MultiGenerator([op @ g for g in self.generators])

    def to_json(self) -> dict:
        return {"generators": [g.to_json() for g in self.generators]}

    @classmethod
    def from_json(cls, obj: dict, shape: ModuleShape) -> "MultiGenerator":
        return cls([ModuleElement.from_json(g, shape) for g in obj["generators"]])


def analysis_operator(frame: FrameSystem) -> ModuleOperator:
    """``T x = sum_j <x, x_j> chi_j``; fiber row ``j`` is ``x_j(t)*``."""
    return frame.analysis


def frame_operator(frame: FrameSystem) -> ModuleOperator:
    return frame.frame_op


def frame_bounds(frame: FrameSystem, tol: float = CLASSIFY_TOL) -> FrameBounds:
    """Fiberwise extreme eigenvalues of the frame operator."""
    spectrum = frame.shape.spectrum
    lo = np.full(len(spectrum), np.nan)
    hi = np.full(len(spectrum), np.nan)
    for t, (w, _) in enumerate(herm_eig(frame.frame_op)):
        if w.size:
            lo[t], hi[t] = max(w[0], 0.0), max(w[-1], 0.0)
    c, d = float(np.nanmin(lo)), float(np.nanmax(hi))
    lo[np.isnan(lo)] = c
    hi[np.isnan(hi)] = d
    return FrameBounds(c, d, AlgebraElement(spectrum, lo), AlgebraElement(spectrum, hi), tol)


def _require_frame(frame: FrameSystem, tol: float) -> None:
    b = frame_bounds(frame, tol)
    if not b.is_frame:
        raise NotAFrame(f"lower frame bound {b.lower:.3e} <= {tol:.1e}")


def canonical_dual(frame: FrameSystem, tol: float = CLASSIFY_TOL) -> FrameSystem:
    """The dual family ``{S^-1 x_j}``."""
    _require_frame(frame, tol)
    s_inv = op_spectral_fn(frame.frame_op, "inv", floor=min(tol, DEFAULT_FLOOR))
    return frame.map(s_inv)


def reconstruct_residual(frame: FrameSystem, x: ModuleElement,
                         tol: float = CLASSIFY_TOL) -> float:
    """``|| x - sum_j <x, S^-1 x_j> x_j ||``."""
    dual = canonical_dual(frame, tol)
    rec = ModuleElement.zeros(frame.shape)
    for xj, yj in zip(frame.vectors, dual.vectors):
        rec = rec + inner(x, yj) * xj
    return module_norm(x - rec)


def canonical_parseval(frame: FrameSystem, tol: float = CLASSIFY_TOL) -> FrameSystem:
    """The Parseval frame ``{S^-1/2 x_j}``."""
    _require_frame(frame, tol)
    return frame.map(op_spectral_fn(frame.frame_op, "inv_sqrt", floor=min(tol, DEFAULT_FLOOR)))


def energy_sum(gen: MultiGenerator) -> AlgebraElement:
    """``sum_k <phi_k, phi_k>``."""
    total = AlgebraElement.zero(gen.shape.spectrum)
    for g in gen:
        total = total + inner(g, g)
    return total
