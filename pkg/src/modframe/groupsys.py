"""Finite groups, unitary representations on Hilbert modules, and dilation.

Groups are given extensionally by a Cayley table.  A representation
assigns one unitary module operator to each group element; since the base
algebra is commutative and the module is a field of Hilbert spaces, the
representation may differ from fiber to fiber.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .algebra import FiniteSpectrum
from .frames import CLASSIFY_TOL, FrameSystem, MultiGenerator
from .hilbert_module import (
    ModuleElement,
    ModuleOperator,
    ModuleShape,
    ShapeMismatch,
    op_norm,
)

__all__ = [
    "RANK_CUTOFF",
    "GroupAxiomError",
    "RepresentationError",
    "FiniteGroup",
    "cyclic_group",
    "direct_product",
    "symmetric_group",
    "dihedral_group",
    "UnitaryRepresentation",
    "standard_group_module",
    "regular_representations",
    "orbit_multiframe",
    "VECTOR_LABELS",
    "VectorClassification",
    "classify_vector",
    "Dilation",
    "dilate",
    "numerical_rank",
]

#: Relative singular-value cutoff for every rank decision.
RANK_CUTOFF = 1e-8


class GroupAxiomError(ValueError):
    """A Cayley table violates a group axiom."""


class RepresentationError(ValueError):
    """A family of operators is not a unitary representation."""


def numerical_rank(sv: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    if sv.size == 0 or sv[0] <= 1e-13:
        return 0
    return int(np.sum(sv > cutoff * sv[0]))


# ---------------------------------------------------------------------------
# groups


class FiniteGroup:
    """A finite group given by its multiplication table.

    ``table[a][b]`` is the index of the product ``elements[a] * elements[b]``.
    Associativity, identity and inverses are checked exhaustively on
    construction.
    """

    def __init__(self, elements: Sequence[str], table):
        self.elements = tuple(str(e) for e in elements)
        n = len(self.elements)
        if n == 0:
            raise GroupAxiomError("a group needs at least one element")
        if len(set(self.elements)) != n:
            raise GroupAxiomError("element labels must be unique")
        lookup = {e: i for i, e in enumerate(self.elements)}
        rows = []
        for r, row in enumerate(table):
            rows.append([lookup[v] if isinstance(v, str) else int(v) for v in row])
        tab = np.array(rows, dtype=int)
        if tab.shape != (n, n):
            raise GroupAxiomError(f"table must be {n}x{n}, got {tab.shape}")
        if tab.min() < 0 or tab.max() >= n:
            raise GroupAxiomError("table entries out of range")
        self.table = tab
        self.table.setflags(write=False)
        self._validate()

    def _validate(self) -> None:
        t = self.table
        n = len(self.elements)
        # (ab)c vs a(bc) for all triples at once
        left = t[t, :]                     # left[a, b, c] = (ab)c
        right = t[:, t]                    # right[a, b, c] = a(bc)
        bad = np.argwhere(left != right)
        if bad.size:
            a, b, c = (self.elements[i] for i in bad[0])
            raise GroupAxiomError(f"not associative at ({a!r}, {b!r}, {c!r})")
        ids = [e for e in range(n)
               if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
        if not ids:
            raise GroupAxiomError("no identity element")
        self.identity = ids[0]
        inv = np.full(n, -1)
        for a in range(n):
            hits = np.flatnonzero(t[a] == self.identity)
            if hits.size != 1 or t[hits[0], a] != self.identity:
                raise GroupAxiomError(f"element {self.elements[a]!r} has no two-sided inverse")
            inv[a] = hits[0]
        self.inverse = inv
        self.inverse.setflags(write=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteGroup) and self.elements == other.elements
                and np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return hash((self.elements, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"FiniteGroup(order={len(self)}, elements={list(self.elements)})"

    def index(self, g: Union[int, str]) -> int:
        return self.elements.index(g) if isinstance(g, str) else int(g)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "table": self.table.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteGroup":
        return cls(obj["elements"], obj["table"])


def _from_permutations(perms: list[tuple[int, ...]], labels: list[str]) -> FiniteGroup:
    pos = {p: i for i, p in enumerate(perms)}
    # (p*q)(i) = p(q(i))
    table = [[pos[tuple(p[q[i]] for i in range(len(q)))] for q in perms] for p in perms]
    return FiniteGroup(labels, table)


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([f"r{k}" for k in range(n)],
                       [[(a + b) % n for b in range(n)] for a in range(n)])


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    pairs = list(itertools.product(range(len(g)), range(len(h))))
    pos = {p: i for i, p in enumerate(pairs)}
    labels = [f"({g.elements[a]},{h.elements[b]})" for a, b in pairs]
    table = [[pos[(g.mul(a1, a2), h.mul(b1, b2))] for (a2, b2) in pairs] for (a1, b1) in pairs]
    return FiniteGroup(labels, table)


def symmetric_group(n: int) -> FiniteGroup:
    perms = list(itertools.permutations(range(n)))
    return _from_permutations(perms, ["".join(str(i) for i in p) for p in perms])


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the regular ``n``-gon as permutations of its vertices."""
    perms = []
    for k in range(n):
        perms.append(tuple((i + k) % n for i in range(n)))
    for k in range(n):
        perms.append(tuple((k - i) % n for i in range(n)))
    labels = [f"r{k}" for k in range(n)] + [f"s{k}" for k in range(n)]
    return _from_permutations(perms, labels)


# ---------------------------------------------------------------------------
# representations


class UnitaryRepresentation:
    """A homomorphism from a finite group into the unitaries on a module."""

    def __init__(self, group: FiniteGroup, shape: ModuleShape,
                 images: Sequence[ModuleOperator], *, validate: bool = True,
                 tol: float = 1e-9):
        self.group = group
        self.shape = shape
        self.images = tuple(images)
        if len(self.images) != len(group):
            raise RepresentationError("need one image per group element")
        for im in self.images:
            if im.domain != shape or im.codomain != shape:
                raise ShapeMismatch("representation images must act on the module")
        if validate:
            self.validate(tol)

    def validate(self, tol: float = 1e-9) -> None:
        g = self.group
        eye = ModuleOperator.identity(self.shape)
        if op_norm(self.images[g.identity] - eye) > 0.1 * tol:
            raise RepresentationError("identity element is not mapped to I")
        for a, u in enumerate(self.images):
            if op_norm(u.H @ u - eye) > tol:
                raise RepresentationError(f"image of {g.elements[a]!r} is not unitary")
        for a, b in itertools.product(range(len(g)), repeat=2):
            err = op_norm(self.images[g.mul(a, b)] - self.images[a] @ self.images[b])
            if err > tol:
                raise RepresentationError(
                    f"not a homomorphism at ({g.elements[a]!r}, {g.elements[b]!r}): {err:.2e}")

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, g: Union[int, str]) -> ModuleOperator:
        return self.images[self.group.index(g)]

    def conjugate(self, w: ModuleOperator) -> "UnitaryRepresentation":
        """The equivalent representation ``g -> W U_g W*`` on ``W``'s codomain."""
        return UnitaryRepresentation(self.group, w.codomain,
                                     [w @ u @ w.H for u in self.images], validate=False)

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "module": self.shape.to_json(),
            "images": {e: u.to_json() for e, u in zip(self.group.elements, self.images)},
        }

    @classmethod
    def from_json(cls, obj: dict, group: FiniteGroup | None = None,
                  tol: float = 1e-9) -> "UnitaryRepresentation":
        group = FiniteGroup.from_json(obj["group"]) if group is None else group
        shape = ModuleShape.from_json(obj["module"])
        images = obj["images"]
        missing = [e for e in group.elements if e not in images]
        if missing:
            raise RepresentationError(f"missing images for {missing}")
        ops = [ModuleOperator.from_json(images[e], shape) for e in group.elements]
        return cls(group, shape, ops, tol=tol)


def standard_group_module(group: FiniteGroup, spectrum: FiniteSpectrum
                          ) -> tuple[ModuleShape, list[ModuleElement]]:
    """``l^2_G(A)`` and its standard basis ``chi_U`` in element order."""
    shape = ModuleShape.uniform(spectrum, len(group))
    return shape, [ModuleElement.basis_vector(shape, i) for i in range(len(group))]


def regular_representations(group: FiniteGroup, spectrum: FiniteSpectrum
                            ) -> tuple[UnitaryRepresentation, UnitaryRepresentation]:
    """Left and right regular representations.

    ``L_U chi_V = chi_{UV}`` and ``R_U chi_V = chi_{V U^-1}``; every fiber
    carries the same permutation matrix.
    """
    n = len(group)
    shape = ModuleShape.uniform(spectrum, n)
    lefts, rights = [], []
    for u in range(n):
        lm = np.zeros((n, n))
        rm = np.zeros((n, n))
        for v in range(n):
            lm[group.mul(u, v), v] = 1.0
            rm[group.mul(v, group.inv(u)), v] = 1.0
        lefts.append(ModuleOperator(shape, shape, (lm,) * len(spectrum)))
        rights.append(ModuleOperator(shape, shape, (rm,) * len(spectrum)))
    return (UnitaryRepresentation(group, shape, lefts, validate=False),
            UnitaryRepresentation(group, shape, rights, validate=False))


def orbit_multiframe(rep: UnitaryRepresentation, gen: MultiGenerator) -> FrameSystem:
    """The family ``{U phi_j}`` indexed by ``(U, j)``, group element outermost."""
    if gen.shape != rep.shape:
        raise ShapeMismatch("generators do not live in the representation module")
    return FrameSystem(rep.shape, [u @ phi for u in rep.images for phi in gen])


# ---------------------------------------------------------------------------
# vector classification

#: Labels from strongest to weakest.
VECTOR_LABELS = (
    "complete wandering",
    "wandering",
    "complete Parseval frame vector",
    "Parseval frame vector",
    "complete frame vector",
    "frame vector",
    "complete Bessel",
    "Bessel",
    "none",
)


@dataclass(frozen=True)
class VectorClassification:
    """Outcome of :func:`classify_vector`.

    ``lower``/``upper`` are the frame bounds of the orbit on its own span
    (which is the whole module when ``complete``).
    """

    label: str
    complete: bool
    wandering: bool
    parseval: bool
    frame: bool
    bessel: bool
    lower: float
    upper: float
    ranks: tuple[int, ...]
    flags: dict = field(default_factory=dict, compare=False)

    def holds(self, label: str) -> bool:
        """Whether the defining property of ``label`` holds (not just the strongest)."""
        return self.flags[label]

    def to_json(self) -> dict:
        return {"label": self.label, "C": self.lower, "D": self.upper,
                "complete": self.complete, "ranks": list(self.ranks)}


def classify_vector(rep: UnitaryRepresentation, x: ModuleElement,
                    tol: float = CLASSIFY_TOL) -> VectorClassification:
    if x.shape != rep.shape:
        raise ShapeMismatch("vector does not live in the representation module")
    n = len(rep.group)
    ranks, lows, highs = [], [], []
    complete, wandering = True, True
    for t, d in enumerate(rep.shape.fiber_dims):
        if d == 0:
            ranks.append(0)
            wandering = False
            continue
        orbit = np.column_stack([u.fibers[t] @ x.fibers[t] for u in rep.images])
        sv = np.linalg.svd(orbit, compute_uv=False)
        r = numerical_rank(sv)
        ranks.append(r)
        complete &= r == d
        if r:
            lows.append(sv[r - 1] ** 2)
            highs.append(sv[0] ** 2)
        gram = orbit.conj().T @ orbit
        wandering &= bool(np.abs(gram - np.eye(n)).max() <= tol)
    lower = float(min(lows)) if lows else 0.0
    upper = float(max(highs)) if highs else 0.0
    frame = lower > tol
    bessel = upper > tol
    parseval = frame and max(abs(lower - 1.0), abs(upper - 1.0)) <= tol * max(1.0, upper)
    flags = {
        "complete wandering": complete and wandering,
        "wandering": wandering,
        "complete Parseval frame vector": complete and parseval,
        "Parseval frame vector": parseval,
        "complete frame vector": complete and frame,
        "frame vector": frame,
        "complete Bessel": complete and bessel,
        "Bessel": bessel,
        "none": True,
    }
    label = next(lab for lab in VECTOR_LABELS if flags[lab])
    return VectorClassification(label, complete, wandering, parseval, frame, bessel,
                                lower, upper, tuple(ranks), flags)


# ---------------------------------------------------------------------------
# dilation


@dataclass(frozen=True)
class Dilation:
    """The analysis isometry ``T: H -> l^2_G(A)`` of a Parseval frame vector.

    ``P = T T*`` is the projection onto ``T(H)``; ``left`` is the left
    regular representation on ``l^2_G(A)``.
    """

    T: ModuleOperator
    P: ModuleOperator
    left: UnitaryRepresentation
    eta: ModuleElement

    def residuals(self, rep: UnitaryRepresentation) -> dict[str, float]:
        t, p = self.T, self.P
        chi_e = ModuleElement.basis_vector(t.codomain, rep.group.identity)
        lefts = self.left.images
        return {
            "isometry": op_norm(t.H @ t - ModuleOperator.identity(t.domain)),
            "intertwining": max(op_norm(lu @ t - t @ u) for lu, u in zip(lefts, rep.images)),
            "idempotent": op_norm(p @ p - p),
            "commutes_with_L": max(op_norm(p @ lu - lu @ p) for lu in lefts),
            "eta_to_P_chi_e": float(max(np.linalg.norm(a - b) for a, b in
                                  zip((t @ self.eta).fibers, (p @ chi_e).fibers))),
        }


def dilate(rep: UnitaryRepresentation, eta: ModuleElement,
           tol: float = CLASSIFY_TOL) -> Dilation:
    """Embed ``H`` into ``l^2_G(A)`` via ``T x = sum_U <x, U eta> chi_U``.

    Raises ``ValueError`` unless ``eta`` is a complete Parseval frame vector.
    """
    cls = classify_vector(rep, eta, tol)
    if not cls.holds("complete Parseval frame vector"):
        raise ValueError(f"dilation needs a complete Parseval frame vector, got {cls.label!r}")
    left, _ = regular_representations(rep.group, rep.shape.spectrum)
    t_op = FrameSystem(rep.shape, [u @ eta for u in rep.images]).analysis
    t_op = ModuleOperator(rep.shape, left.shape, t_op.fibers)
    return Dilation(t_op, t_op @ t_op.H, left, eta)
