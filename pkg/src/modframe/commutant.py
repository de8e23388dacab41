"""Commutants, bicommutants and the von Neumann algebras of a finite group.

Every A-linear operator over a finite spectrum is a field of matrices, so
a commutant is the fiberwise direct sum of ordinary matrix commutants.
Each fiber's commutant is the null space of the vectorized Sylvester
system ``M O_k - O_k M = 0``.  Spans are stored fiber by fiber as
orthonormal bases for the Hilbert-Schmidt pairing ``tr(M* N)``.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, FiniteSpectrum
from .groupsys import (
    RANK_CUTOFF,
    FiniteGroup,
    UnitaryRepresentation,
    regular_representations,
    standard_group_module,
)
from .hilbert_module import (
    ModuleElement,
    ModuleOperator,
    ModuleShape,
    ShapeMismatch,
    op_exp_skew,
    op_norm,
    op_spectral_fn,
)

__all__ = [
    "MEMBERSHIP_TOL",
    "NotInAlgebra",
    "DegenerateBasis",
    "EquivalenceError",
    "OperatorAlgebraBasis",
    "commutant",
    "bicommutant",
    "same_span",
    "random_unitary",
    "GroupVonNeumann",
    "Lemma33Report",
    "check_lemma33",
    "pi_map",
    "pi_inverse",
    "trace_phi",
    "equivalent_projection_isometry",
    "rep_commutant",
    "rep_bicommutant",
]

#: Relative residual below which an operator counts as a member of a span.
MEMBERSHIP_TOL = 1e-8


class NotInAlgebra(ValueError):
    """An operator is not in the required operator space."""


class DegenerateBasis(ValueError):
    """A linear solve on an algebra basis was rank deficient."""


class EquivalenceError(RuntimeError):
    """No partial isometry realizing the projection equivalence was found."""


def _orthonormal_columns(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column span, rank decided by ``RANK_CUTOFF``."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] <= 1e-13:
        return np.zeros((a.shape[0], 0), dtype=complex)
    return u[:, s > RANK_CUTOFF * s[0]]


class OperatorAlgebraBasis:
    """A linear space of operators on a module, stored fiber by fiber.

    ``fiber_bases[t]`` is an ``n_t^2 x d_t`` matrix whose orthonormal columns
    are row-major vectorizations of the basis matrices at fiber ``t``.  The
    global space is the direct sum over fibers, so its basis consists of
    operators supported on a single fiber.
    """

    def __init__(self, shape: ModuleShape, fiber_bases: Sequence[np.ndarray]):
        self.shape = shape
        self.fiber_bases = tuple(np.asarray(b, dtype=complex) for b in fiber_bases)
        for b, n in zip(self.fiber_bases, shape.fiber_dims):
            if b.shape[0] != n * n:
                raise ShapeMismatch("fiber basis does not match fiber dimension")

    @classmethod
    def span(cls, ops: Sequence[ModuleOperator],
             shape: ModuleShape | None = None) -> "OperatorAlgebraBasis":
        """Linear span of the given operators."""
        shape = ops[0].domain if shape is None else shape
        bases = []
        for t, n in enumerate(shape.fiber_dims):
            vecs = np.column_stack([op.fibers[t].reshape(-1) for op in ops]) if ops else \
                np.zeros((n * n, 0))
            bases.append(_orthonormal_columns(vecs))
        return cls(shape, bases)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.fiber_bases)

    @property
    def dimension(self) -> int:
        return sum(self.dims)

    def fiber_matrices(self, t: int) -> list[np.ndarray]:
        n = self.shape.fiber_dims[t]
        return [c.reshape(n, n) for c in self.fiber_bases[t].T]

    @cached_property
    def basis(self) -> list[ModuleOperator]:
        out = []
        for t in range(len(self.shape)):
            for m in self.fiber_matrices(t):
                fibs = [np.zeros((n, n), dtype=complex) for n in self.shape.fiber_dims]
                fibs[t] = m
                out.append(ModuleOperator(self.shape, self.shape, tuple(fibs)))
        return out

    def combine(self, coeffs: Sequence[np.ndarray]) -> ModuleOperator:
        """Operator with per-fiber coefficient vectors in this basis."""
        fibs = [(b @ c).reshape(n, n)
                for b, c, n in zip(self.fiber_bases, coeffs, self.shape.fiber_dims)]
        return ModuleOperator(self.shape, self.shape, tuple(fibs))

    def project(self, m: ModuleOperator) -> ModuleOperator:
        return self.combine([b.conj().T @ a.reshape(-1)
                             for b, a in zip(self.fiber_bases, m.fibers)])

    def membership_residual(self, m: ModuleOperator) -> float:
        """Relative Hilbert-Schmidt distance from ``m`` to the span."""
        if m.domain != self.shape or m.codomain != self.shape:
            raise ShapeMismatch("operator acts on a different module")
        num = den = 0.0
        for b, a in zip(self.fiber_bases, m.fibers):
            v = a.reshape(-1)
            num += np.linalg.norm(v - b @ (b.conj().T @ v)) ** 2
            den += np.linalg.norm(v) ** 2
        return float(np.sqrt(num) / max(np.sqrt(den), 1e-300)) if den else 0.0

    def contains(self, m: ModuleOperator, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.membership_residual(m) <= tol

    def require(self, m: ModuleOperator, what: str = "operator",
                tol: float = MEMBERSHIP_TOL) -> None:
        r = self.membership_residual(m)
        if r > tol:
            raise NotInAlgebra(f"{what} is not in the algebra (residual {r:.2e})")

    @property
    def unital(self) -> bool:
        return self.contains(ModuleOperator.identity(self.shape))

    @property
    def star_closed(self) -> bool:
        return all(self.contains(b.H, 1e-9) for b in self.basis)

    def random_element(self, rng: np.random.Generator, *, real: bool = False) -> ModuleOperator:
        coeffs = []
        for d in self.dims:
            c = rng.standard_normal(d)
            if not real:
                c = c + 1j * rng.standard_normal(d)
            coeffs.append(c)
        return self.combine(coeffs)

    def to_json(self) -> dict:
        return {
            "module": self.shape.to_json(),
            "dims": list(self.dims),
            "unital": self.unital,
            "star_closed": self.star_closed,
            "basis": [b.to_json() for b in self.basis],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OperatorAlgebraBasis":
        shape = ModuleShape.from_json(obj["module"])
        return cls.span([ModuleOperator.from_json(b, shape) for b in obj["basis"]], shape)


def _fiber_commutant(mats: Sequence[np.ndarray], n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    eye = np.eye(n)
    r = np.zeros((0, n * n), dtype=complex)
    scale = 0.0
    for o in mats:
        # row-major vec: vec(M O) = (I ⊗ O^T) vec(M), vec(O M) = (O ⊗ I) vec(M)
        k = np.kron(eye, o.T) - np.kron(o, eye)
        r = scipy.linalg.qr(np.vstack([r, k]), mode="r")[0][: n * n]
        scale = max(scale, np.linalg.norm(o, 2))
    if scale == 0.0:
        return np.eye(n * n, dtype=complex)
    # the cutoff is relative to the operators, not to the system: a numerically
    # scalar generator gives a system that is pure roundoff and must count as zero
    _, sv, vh = scipy.linalg.svd(r)
    rank = int(np.sum(sv > RANK_CUTOFF * scale))
    return vh[rank:].conj().T.astype(complex)


OpsLike = Union[Sequence[ModuleOperator], OperatorAlgebraBasis]


def commutant(ops: OpsLike) -> OperatorAlgebraBasis:
    """``{M : M O = O M for all O in ops}``, fiberwise."""
    if isinstance(ops, OperatorAlgebraBasis):
        shape = ops.shape
        per_fiber = [ops.fiber_matrices(t) for t in range(len(shape))]
    else:
        ops = list(ops)
        if not ops:
            raise ValueError("need at least one operator")
        shape = ops[0].domain
        for o in ops:
            if o.domain != shape or o.codomain != shape:
                raise ShapeMismatch("commutant needs square operators on one module")
        per_fiber = [[o.fibers[t] for o in ops] for t in range(len(shape))]
    return OperatorAlgebraBasis(
        shape, [_fiber_commutant(m, n) for m, n in zip(per_fiber, shape.fiber_dims)])


def bicommutant(ops: OpsLike) -> OperatorAlgebraBasis:
    return commutant(commutant(ops))


def same_span(a: OperatorAlgebraBasis, b: OperatorAlgebraBasis,
              tol: float = MEMBERSHIP_TOL) -> tuple[bool, float]:
    """Mutual containment check; returns ``(equal, worst residual)``."""
    worst = max([b.membership_residual(m) for m in a.basis]
                + [a.membership_residual(m) for m in b.basis], default=0.0)
    return (a.dims == b.dims and worst <= tol), worst


def random_unitary(alg: OperatorAlgebraBasis, rng: np.random.Generator,
                   scale: float = 1.0) -> ModuleOperator:
    """``exp(K)`` for a random skew-Hermitian ``K`` in a *-closed algebra."""
    x = alg.random_element(rng) * scale
    return op_exp_skew(x - x.H)


# ---------------------------------------------------------------------------
# the group von Neumann algebras on l^2_G(A)


class GroupVonNeumann:
    """``l^2_G(A)`` together with ``L``, ``R``, ``M = {L}''`` and ``M' = {L}'``."""

    def __init__(self, group: FiniteGroup, spectrum: FiniteSpectrum):
        self.group = group
        self.spectrum = spectrum
        self.shape, self.chi = standard_group_module(group, spectrum)
        self.left, self.right = regular_representations(group, spectrum)

    @property
    def chi_e(self) -> ModuleElement:
        return self.chi[self.group.identity]

    @cached_property
    def M(self) -> OperatorAlgebraBasis:
        return bicommutant(self.left.images)

    @cached_property
    def M_prime(self) -> OperatorAlgebraBasis:
        return commutant(self.left.images)

    @cached_property
    def N(self) -> OperatorAlgebraBasis:
        return bicommutant(self.right.images)

    @cached_property
    def N_prime(self) -> OperatorAlgebraBasis:
        return commutant(self.right.images)


@dataclass
class Lemma33Report:
    group_order: int
    dims: dict
    residuals: dict
    passed: bool

    def to_json(self) -> dict:
        return {"group_order": self.group_order, "dims": self.dims,
                "residuals": self.residuals, "passed": self.passed}


def check_lemma33(group: FiniteGroup, spectrum: FiniteSpectrum,
                  rng: np.random.Generator | None = None, n_pairs: int = 10,
                  tol: float = MEMBERSHIP_TOL) -> Lemma33Report:
    """Check ``{L}'' = {R}'`` and ``{R}'' = {L}'`` and that ``{L}'`` and ``{R}'`` commute."""
    rng = np.random.default_rng(0) if rng is None else rng
    ctx = GroupVonNeumann(group, spectrum)
    eq_m, res_m = same_span(ctx.M, ctx.N_prime, tol)
    eq_n, res_n = same_span(ctx.N, ctx.M_prime, tol)
    comm = 0.0
    for _ in range(n_pairs):
        t_op = ctx.M_prime.random_element(rng)
        s_op = ctx.N_prime.random_element(rng)
        comm = max(comm, op_norm(t_op @ s_op - s_op @ t_op) / (op_norm(t_op) * op_norm(s_op)))
    dims = {"M": list(ctx.M.dims), "M_prime": list(ctx.M_prime.dims),
            "N": list(ctx.N.dims), "N_prime": list(ctx.N_prime.dims)}
    residuals = {"M_vs_N_prime": res_m, "N_vs_M_prime": res_n, "TS_minus_ST": comm}
    return Lemma33Report(len(group), dims, residuals, bool(eq_m and eq_n and comm <= 1e-9))


def pi_map(ctx: GroupVonNeumann, a: ModuleOperator,
           tol: float = MEMBERSHIP_TOL) -> ModuleOperator:
    """The conjugate-linear isomorphism ``M -> M'`` with ``pi(A) B chi_e = B A* chi_e``.

    Taking ``B = L_V`` fixes the columns: ``pi(A) chi_V = L_V A* chi_e``.
    """
    ctx.M.require(a, "argument of pi", tol)
    a_star_chi = a.H @ ctx.chi_e
    cols = [lv @ a_star_chi for lv in ctx.left.images]
    out = ModuleOperator.from_columns(ctx.shape, ctx.shape, cols)
    ctx.M_prime.require(out, "pi(A)", tol)
    return out


def pi_inverse(ctx: GroupVonNeumann, t_op: ModuleOperator,
               tol: float = MEMBERSHIP_TOL) -> ModuleOperator:
    """The ``A`` in ``M`` with ``pi(A) = T``, i.e. ``A* chi_e = T chi_e``."""
    ctx.M_prime.require(t_op, "argument of pi^-1", tol)
    target = t_op @ ctx.chi_e
    e = ctx.group.identity
    coeffs = []
    for t, n in enumerate(ctx.shape.fiber_dims):
        mats = ctx.M.fiber_matrices(t)
        sys = np.column_stack([m[:, e] for m in mats])
        c, _, rank, _ = np.linalg.lstsq(sys, target.fibers[t], rcond=None)
        if rank < len(mats):
            raise DegenerateBasis(f"evaluation at chi_e is rank deficient in fiber {t}")
        coeffs.append(c)
    a_star = ctx.M.combine(coeffs)
    return a_star.H


def trace_phi(ctx: GroupVonNeumann, a: ModuleOperator) -> AlgebraElement:
    """``phi(A) = <A chi_e, chi_e>``."""
    e = ctx.group.identity
    return AlgebraElement(ctx.spectrum, [m[e, e] for m in a.fibers])


def _partial_isometry_factor(e: ModuleOperator) -> ModuleOperator:
    def inv_sqrt_on_support(w):
        top = w.max() if w.size else 0.0
        keep = w > max(RANK_CUTOFF * top, 1e-14)
        out = np.zeros_like(w)
        out[keep] = 1.0 / np.sqrt(w[keep])
        return out

    return e @ op_spectral_fn(e.H @ e, inv_sqrt_on_support)


def equivalent_projection_isometry(alg: OperatorAlgebraBasis, p: ModuleOperator,
                                   q: ModuleOperator, rng: np.random.Generator,
                                   retries: int = 16, tol: float = 1e-8) -> ModuleOperator:
    """A partial isometry ``C`` in ``alg`` with ``CC* = I - P`` and ``C*C = I - Q``.

    Draws random ``D`` in the algebra and takes the polar partial isometry of
    ``(I - P) D (I - Q)``.  Generic draws reach the maximal rank available in
    the algebra, which is the full rank of ``I - P`` whenever ``I - P`` and
    ``I - Q`` are equivalent there.
    """
    alg.require(p, "P")
    alg.require(q, "Q")
    eye = ModuleOperator.identity(alg.shape)
    ip, iq = eye - p, eye - q
    best = np.inf
    for _ in range(retries):
        c = _partial_isometry_factor(ip @ alg.random_element(rng) @ iq)
        err = max(op_norm(c @ c.H - ip), op_norm(c.H @ c - iq), alg.membership_residual(c))
        if err <= tol:
            return c
        best = min(best, err)
    raise EquivalenceError(
        f"no partial isometry found after {retries} draws (best residual {best:.2e})")


_REP_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def rep_commutant(rep: UnitaryRepresentation) -> OperatorAlgebraBasis:
    """``G'`` for the images of ``rep`` (memoized per representation)."""
    entry = _REP_CACHE.setdefault(rep, {})
    if "prime" not in entry:
        entry["prime"] = commutant(rep.images)
    return entry["prime"]


def rep_bicommutant(rep: UnitaryRepresentation) -> OperatorAlgebraBasis:
    """``G''`` for the images of ``rep`` (memoized per representation)."""
    entry = _REP_CACHE.setdefault(rep, {})
    if "double" not in entry:
        entry["double"] = commutant(rep_commutant(rep))
    return entry["double"]
