"""Frame-vector parameterization by the double commutant, and best Parseval approximation.

Given a complete Parseval frame vector ``eta`` for a unitary group ``G``,
every complete Parseval frame vector is ``A eta`` for a unitary ``A`` in
``G''``; complete frame vectors correspond to invertible ``A`` and Bessel
vectors to arbitrary ``A`` in ``G''``.  :func:`solve_generator` builds such
an ``A`` constructively inside the group von Neumann algebra on
``l^2_G(A)``.

For a multi-frame generator ``Phi`` the generator ``S^-1/2 Phi`` (with
``S`` the frame operator of the orbit) is the unique closest Parseval
multi-frame generator in the positive-cone order of ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, alg_is_positive, alg_norm
from .commutant import (
    GroupVonNeumann,
    equivalent_projection_isometry,
    pi_inverse,
    random_unitary,
    rep_bicommutant,
    rep_commutant,
)
from .frames import CLASSIFY_TOL, MultiGenerator, NotAFrame, energy_sum, frame_bounds
from .groupsys import (
    UnitaryRepresentation,
    VectorClassification,
    classify_vector,
    dilate,
    orbit_multiframe,
)
from .hilbert_module import (
    ModuleElement,
    ModuleOperator,
    inner,
    module_norm,
    op_exp_skew,
    op_norm,
    op_spectral_fn,
)

__all__ = [
    "KINDS",
    "ParameterizationError",
    "ParameterizationWitness",
    "apply_generator",
    "solve_generator",
    "ParsevalPath",
    "connect_parseval_vectors",
    "ApproximationReport",
    "best_parseval_approx",
    "certify_optimality",
    "cross_term_identity",
    "EnergyCheck",
    "check_energy_equality",
    "is_complete_parseval_generator",
]

KINDS = ("unitary", "invertible", "adjointable")

_EXPECTED_LABEL = {
    "unitary": "complete Parseval frame vector",
    "invertible": "complete frame vector",
}


class ParameterizationError(ValueError):
    """A precondition or postcondition of the parameterization failed."""


def _min_singular(a: ModuleOperator) -> float:
    return float(min(np.linalg.svd(m, compute_uv=False)[-1] for m in a.fibers if m.size))


def _kind_residuals(a: ModuleOperator, kind: str) -> dict[str, float]:
    eye = ModuleOperator.identity(a.domain)
    if kind == "unitary":
        return {"unitarity": max(op_norm(a.H @ a - eye), op_norm(a @ a.H - eye))}
    if kind == "invertible":
        return {"min_singular": _min_singular(a)}
    return {}


def _check_kind(a: ModuleOperator, kind: str, tol: float = 1e-8) -> dict[str, float]:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    res = _kind_residuals(a, kind)
    if kind == "unitary" and res["unitarity"] > tol:
        raise ParameterizationError(f"operator is not unitary ({res['unitarity']:.2e})")
    if kind == "invertible" and res["min_singular"] < tol:
        raise ParameterizationError(
            f"operator is not invertible (smallest singular value {res['min_singular']:.2e})")
    return res


@dataclass
class ParameterizationWitness:
    """An operator ``A`` in ``G''`` with ``A eta = xi``."""

    A: ModuleOperator
    kind: str
    residuals: dict[str, float]

    def to_json(self) -> dict:
        return {"kind": self.kind, "A": self.A.to_json(), "residuals": self.residuals}


def _require_parseval_vector(rep, x, what, tol) -> VectorClassification:
    cls = classify_vector(rep, x, tol)
    if not cls.holds("complete Parseval frame vector"):
        raise ParameterizationError(f"{what} is not a complete Parseval frame vector ({cls.label})")
    return cls


def apply_generator(rep: UnitaryRepresentation, eta: ModuleElement, a: ModuleOperator,
                    kind: str = "unitary", tol: float = CLASSIFY_TOL
                    ) -> tuple[ModuleElement, VectorClassification]:
    """``xi = A eta`` for ``A`` in ``G''`` of the declared kind.

    Returns ``xi`` with its classification.  A unitary ``A`` must give a
    complete Parseval frame vector, an invertible one a complete frame
    vector, and any ``A`` a vector whose orbit is Bessel on the whole
    module with bound at most ``||A||^2``.
    """
    _require_parseval_vector(rep, eta, "eta", tol)
    gdd = rep_bicommutant(rep)
    gdd.require(a, "A (in G'')")
    _check_kind(a, kind)
    xi = a @ eta
    cls = classify_vector(rep, xi, tol)
    want = _EXPECTED_LABEL.get(kind)
    if want is not None and not cls.holds(want):
        raise ParameterizationError(f"A eta classified {cls.label!r}, expected {want!r}")
    bound = op_norm(a) ** 2
    if cls.upper > bound * (1 + tol) + tol:
        raise ParameterizationError(
            f"Bessel bound {cls.upper:.6g} exceeds ||A||^2 = {bound:.6g}")
    return xi, cls


def _polar_isometry(b: ModuleOperator) -> ModuleOperator:
    """Partial isometry ``V`` with ``B = (BB*)^1/2 V``."""
    def inv_sqrt_on_support(w):
        top = w.max() if w.size else 0.0
        keep = w > max(1e-8 * top, 1e-14)
        out = np.zeros_like(w)
        out[keep] = 1.0 / np.sqrt(w[keep])
        return out

    return op_spectral_fn(b @ b.H, inv_sqrt_on_support) @ b


def solve_generator(rep: UnitaryRepresentation, eta: ModuleElement, xi: ModuleElement,
                    rng: np.random.Generator | int | None = 0, kind: str = "unitary",
                    tol: float = CLASSIFY_TOL) -> ParameterizationWitness:
    """Construct ``A`` in ``G''`` of the given kind with ``A eta = xi``.

    Steps: dilate ``H`` into ``l^2_G(A)`` through the analysis operator of
    ``eta`` (so ``eta -> P chi_e``); define ``B chi_U = L_U xi~`` in ``M'``;
    complete the polar part of ``B`` to a unitary with a partial isometry
    ``C`` in ``M'`` between ``I - P`` and ``I - Q``; pull ``B + C`` back
    through ``pi`` to ``M``; compress to ``H``.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    _require_parseval_vector(rep, eta, "eta", tol)
    dil = dilate(rep, eta, tol)
    xi_cls = classify_vector(rep, xi, tol)
    need = _EXPECTED_LABEL.get(kind)
    if need is not None and not xi_cls.holds(need):
        raise ParameterizationError(f"xi is {xi_cls.label!r}; kind {kind!r} needs {need!r}")

    gdd = rep_bicommutant(rep)
    eye_h = ModuleOperator.identity(rep.shape)
    if all(np.allclose(a, b, rtol=0, atol=1e-14) for a, b in zip(eta.fibers, xi.fibers)):
        res = {"generation": 0.0, "membership": 0.0}
        res.update(_kind_residuals(eye_h, kind))
        return ParameterizationWitness(eye_h, kind, res)

    ctx = GroupVonNeumann(rep.group, rep.shape.spectrum)
    p = dil.P
    xi_t = dil.T @ xi
    b = ModuleOperator.from_columns(ctx.shape, ctx.shape, [lu @ xi_t for lu in ctx.left.images])
    res: dict[str, float] = {"B_in_M_prime": ctx.M_prime.membership_residual(b)}

    if kind == "adjointable":
        top = b
    else:
        v = _polar_isometry(b)
        q = v.H @ v
        res["range_P"] = op_norm(v @ v.H - p)
        res["Q_idempotent"] = op_norm(q @ q - q)
        if kind == "unitary":
            res["BBstar_minus_P"] = op_norm(b @ b.H - p)
        c = equivalent_projection_isometry(ctx.M_prime, p, q, rng)
        top = b + c
        res["partial_isometry"] = max(op_norm(c @ c.H - (ModuleOperator.identity(ctx.shape) - p)),
                                      op_norm(c.H @ c - (ModuleOperator.identity(ctx.shape) - q)))
    big_a = pi_inverse(ctx, top).H
    res["dilated_generation"] = module_norm(big_a @ (dil.T @ eta) - xi_t)
    res["A_in_M"] = ctx.M.membership_residual(big_a)

    a = dil.T.H @ big_a @ dil.T
    res["generation"] = module_norm(a @ eta - xi)
    res["membership"] = gdd.membership_residual(a)
    res.update(_kind_residuals(a, kind))
    if res["generation"] > 1e-8 or res["membership"] > 1e-8:
        raise ParameterizationError(f"witness failed verification: {res}")
    _check_kind(a, kind)
    return ParameterizationWitness(a, kind, res)


@dataclass
class ParsevalPath:
    """Points ``exp(sK) eta`` for ``s = 0, 1/steps, ..., 1`` with ``exp(K) = A``."""

    points: list[ModuleElement]
    witness: ParameterizationWitness
    classifications: list[VectorClassification]
    max_membership: float
    max_endpoint_error: float

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def all_parseval(self) -> bool:
        return all(c.holds("complete Parseval frame vector") for c in self.classifications)

    def to_json(self) -> dict:
        return {
            "points": [p.to_json() for p in self.points],
            "labels": [c.label for c in self.classifications],
            "all_complete_parseval": self.all_parseval,
            "max_membership_residual": self.max_membership,
            "endpoint_error": self.max_endpoint_error,
            "witness": self.witness.to_json(),
        }


def connect_parseval_vectors(rep: UnitaryRepresentation, eta: ModuleElement,
                             xi: ModuleElement, steps: int = 16,
                             rng: np.random.Generator | int | None = 0,
                             tol: float = 1e-7) -> ParsevalPath:
    """A norm-continuous path of complete Parseval frame vectors from ``eta`` to ``xi``."""
    if steps < 1:
        raise ValueError("steps must be positive")
    witness = solve_generator(rep, eta, xi, rng, "unitary")
    k = op_spectral_fn(witness.A, "log_unitary")
    gdd = rep_bicommutant(rep)
    points, labels, memb = [], [], 0.0
    for i in range(steps + 1):
        u = op_exp_skew(k, i / steps)
        memb = max(memb, gdd.membership_residual(u))
        x = u @ eta
        points.append(x)
        labels.append(classify_vector(rep, x, tol))
    return ParsevalPath(points, witness, labels, memb, module_norm(points[-1] - xi))


# ---------------------------------------------------------------------------
# best Parseval approximation


def is_complete_parseval_generator(rep: UnitaryRepresentation, gen: MultiGenerator,
                                   tol: float = CLASSIFY_TOL) -> bool:
    return frame_bounds(orbit_multiframe(rep, gen), tol).is_parseval


@dataclass
class ApproximationReport:
    """Best approximation, frame operator and (optionally) sampled optimality gaps."""

    best: MultiGenerator
    frame_op: ModuleOperator
    residuals: dict[str, float]
    gaps: list[AlgebraElement] = field(default_factory=list)
    sample_modes: list[str] = field(default_factory=list)
    uniqueness_ok: bool | None = None
    all_gaps_nonnegative: bool | None = None

    def gap_summary(self) -> dict:
        if not self.gaps:
            return {}
        vals = np.array([g.values.real for g in self.gaps])
        spec = self.gaps[0].spectrum.points
        return {
            "n_samples": len(self.gaps),
            "min": dict(zip(spec, vals.min(axis=0).tolist())),
            "median": dict(zip(spec, np.median(vals, axis=0).tolist())),
            "max_imag": float(np.abs(np.array([g.values.imag for g in self.gaps])).max()),
        }

    def to_json(self) -> dict:
        out = {"best": self.best.to_json(), "residuals": self.residuals}
        if self.gaps:
            out["gaps"] = self.gap_summary()
            out["all_gaps_nonnegative"] = self.all_gaps_nonnegative
            out["uniqueness_ok"] = self.uniqueness_ok
        return out


def best_parseval_approx(rep: UnitaryRepresentation, phi: MultiGenerator,
                         tol: float = CLASSIFY_TOL) -> ApproximationReport:
    """``S^-1/2 Phi`` where ``S`` is the frame operator of ``{U phi_j}``."""
    orbit = orbit_multiframe(rep, phi)
    if not frame_bounds(orbit, tol).is_frame:
        raise NotAFrame("the orbit of the generators is not a frame")
    s = orbit.frame_op
    scale = max(1.0, op_norm(s))
    comm = max(op_norm(s @ u - u @ s) for u in rep.images) / scale
    best = phi.map(op_spectral_fn(s, "inv_sqrt", floor=min(tol, 1e-8)))
    s_best = orbit_multiframe(rep, best).frame_op
    parseval = op_norm(s_best - ModuleOperator.identity(rep.shape))
    return ApproximationReport(best, s, {"S_commutes_with_G": comm, "best_parseval": parseval})


def _gap(phi: MultiGenerator, psi: MultiGenerator, best: MultiGenerator) -> AlgebraElement:
    return (energy_sum(MultiGenerator([p - q for p, q in zip(phi, psi)]))
            - energy_sum(MultiGenerator([p - b for p, b in zip(phi, best)])))


def cross_term_identity(rep: UnitaryRepresentation, phi: MultiGenerator,
                        psi: MultiGenerator, s: ModuleOperator | None = None) -> float:
    """``|| sum_k <T_best S^-1/4 phi_k, T_Psi S^-1/4 phi_k> - sum_k <psi_k, phi_k> ||``."""
    if s is None:
        s = orbit_multiframe(rep, phi).frame_op
    s_m14 = op_spectral_fn(s, lambda w: w ** -0.25)
    best = phi.map(op_spectral_fn(s, "inv_sqrt"))
    t_best = orbit_multiframe(rep, best).analysis
    t_psi = orbit_multiframe(rep, psi).analysis
    lhs = AlgebraElement.zero(rep.shape.spectrum)
    rhs = AlgebraElement.zero(rep.shape.spectrum)
    for f, p in zip(phi, psi):
        y = s_m14 @ f
        lhs = lhs + inner(t_best @ y, t_psi @ y)
        rhs = rhs + inner(p, f)
    return alg_norm(lhs - rhs)


def _random_complete_parseval(rep, n_gen, rng, tol, max_tries=50) -> MultiGenerator:
    shape = rep.shape
    for _ in range(max_tries):
        gen = MultiGenerator([
            ModuleElement(shape, tuple(rng.standard_normal(d) + 1j * rng.standard_normal(d)
                                       for d in shape.fiber_dims))
            for _ in range(n_gen)])
        orbit = orbit_multiframe(rep, gen)
        if frame_bounds(orbit, tol).lower > 1e-6:
            return gen.map(op_spectral_fn(orbit.frame_op, "inv_sqrt"))
    raise RuntimeError("could not draw a multi-frame generator for this representation")


def certify_optimality(rep: UnitaryRepresentation, phi: MultiGenerator, n_samples: int = 100,
                       rng: np.random.Generator | int | None = 0,
                       gap_tol: float = 1e-8) -> ApproximationReport:
    """Sample Parseval multi-frame generators and check none beats ``S^-1/2 Phi``.

    Half the samples are ``W S^-1/2 Phi`` for random unitaries ``W`` in
    ``G'`` (the first one with ``W = I``), the rest are canonicalized
    random Gaussian generators.  Every gap must be positive in the cone
    order up to ``gap_tol``; samples with vanishing gap must coincide with
    the optimum.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    report = best_parseval_approx(rep, phi)
    best = report.best
    gp = rep_commutant(rep)
    n_a = (n_samples + 1) // 2
    cross, energy, unique_dev = 0.0, 0.0, 0.0
    unique_ok = True
    e_best = energy_sum(best)
    for i in range(n_samples):
        if i < n_a:
            w = ModuleOperator.identity(rep.shape) if i == 0 else random_unitary(gp, rng)
            psi = best.map(w)
            mode = "commutant_unitary"
        else:
            psi = _random_complete_parseval(rep, len(phi), rng, CLASSIFY_TOL)
            mode = "canonicalized_random"
        gap = _gap(phi, psi, best)
        report.gaps.append(gap)
        report.sample_modes.append(mode)
        cross = max(cross, cross_term_identity(rep, phi, psi, report.frame_op))
        energy = max(energy, alg_norm(energy_sum(psi) - e_best))
        if alg_norm(gap) <= 1e-10:
            dev = max(module_norm(p - b) for p, b in zip(psi, best))
            unique_dev = max(unique_dev, dev)
            unique_ok &= dev <= 1e-6
    report.all_gaps_nonnegative = all(alg_is_positive(g, gap_tol) for g in report.gaps)
    report.uniqueness_ok = unique_ok
    report.residuals.update({
        "min_gap": float(min(g.values.real.min() for g in report.gaps)),
        "cross_term_identity": cross,
        "energy_equality": energy,
        "uniqueness_deviation": unique_dev,
    })
    return report


@dataclass
class EnergyCheck:
    energy_phi: AlgebraElement
    energy_psi: AlgebraElement
    residual: float

    def to_json(self) -> dict:
        return {"energy_phi": self.energy_phi.to_json(), "energy_psi": self.energy_psi.to_json(),
                "residual": self.residual}


def check_energy_equality(rep: UnitaryRepresentation, phi: MultiGenerator,
                          psi: MultiGenerator, tol: float = CLASSIFY_TOL) -> EnergyCheck:
    """``sum <phi_k, phi_k> = sum <psi_k, psi_k>`` for complete Parseval generators."""
    for name, gen in (("Phi", phi), ("Psi", psi)):
        if not is_complete_parseval_generator(rep, gen, tol):
            raise ParameterizationError(f"{name} is not a complete Parseval multi-frame generator")
    e1, e2 = energy_sum(phi), energy_sum(psi)
    return EnergyCheck(e1, e2, alg_norm(e1 - e2))
