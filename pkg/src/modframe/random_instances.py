"""Seeded random instances: compressed regular representations and generators.

Representations are built fiber by fiber: take a random Hermitian element
of the right group algebra, keep a spectral projection ``P`` of it (which
commutes with every left translation), restrict the left regular
representation to the range of ``P``, and conjugate by a random unitary.
Such representations always admit the complete Parseval frame vector
``P chi_e``, carried along as ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .algebra import FiniteSpectrum
from .commutant import random_unitary, rep_bicommutant
from .frames import FrameSystem, MultiGenerator
from .groupsys import (
    FiniteGroup,
    UnitaryRepresentation,
    cyclic_group,
    dihedral_group,
    direct_product,
    regular_representations,
    symmetric_group,
)
from .hilbert_module import ModuleElement, ModuleOperator, ModuleShape
from .io import InstanceBundle

__all__ = [
    "CAPS",
    "CapExceeded",
    "named_group",
    "random_element",
    "compressed_regular",
    "InstanceSpec",
    "rand_instance",
]

CAPS = {"points": 8, "fiber_dim": 8, "group_order": 24, "generators": 4}


class CapExceeded(ValueError):
    pass


def named_group(name: str) -> FiniteGroup:
    """``trivial``, ``Zn``, ``Z2xZ2``, ``Sn`` (n <= 4) or ``Dn``."""
    key = name.strip().replace("/", "").replace("×", "x").upper()
    if key in ("TRIVIAL", "1", "Z1"):
        return cyclic_group(1)
    if key == "Z2XZ2":
        return direct_product(cyclic_group(2), cyclic_group(2))
    if key.startswith("Z") and key[1:].isdigit():
        return cyclic_group(int(key[1:]))
    if key.startswith("S") and key[1:].isdigit() and int(key[1:]) <= 4:
        return symmetric_group(int(key[1:]))
    if key.startswith("D") and key[1:].isdigit():
        return dihedral_group(int(key[1:]))
    raise ValueError(f"unknown group name {name!r}")


def random_element(shape: ModuleShape, rng: np.random.Generator) -> ModuleElement:
    """Standard complex Gaussian in every fiber."""
    return ModuleElement(shape, tuple(
        (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2)
        for d in shape.fiber_dims))


def _cut_points(w: np.ndarray, max_rank: int) -> list[int]:
    # cluster boundaries of the sorted spectrum
    cuts = [r for r in range(1, len(w)) if w[r] - w[r - 1] > 1e-6 and r <= max_rank]
    if len(w) <= max_rank:
        cuts.append(len(w))
    return cuts


def compressed_regular(group: FiniteGroup, spectrum: FiniteSpectrum,
                       rng: np.random.Generator, max_dim: int = 8,
                       ranks: list[int] | None = None, conjugate: bool = True
                       ) -> tuple[UnitaryRepresentation, ModuleElement]:
    """A subrepresentation of the left regular representation, fiber by fiber.

    Returns the representation and its complete Parseval frame vector
    ``eta`` (the image of ``P chi_e``).  ``ranks`` forces fiber dimensions;
    each forced rank must be a sum of cluster sizes of the drawn projection
    spectrum (always true for abelian groups).
    """
    n = len(group)
    left, right = regular_representations(group, spectrum)
    e = group.identity
    per_fiber_imgs, etas, dims = [], [], []
    for t in range(len(spectrum)):
        for _ in range(100):
            c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            h = sum(ci * r.fibers[t] for ci, r in zip(c, right.images))
            w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
            cuts = _cut_points(w, max_dim)
            if ranks is not None:
                cuts = [r for r in cuts if r == ranks[t]]
            if cuts:
                break
        else:
            raise RuntimeError("could not draw a projection of the requested rank")
        r = int(cuts[rng.integers(len(cuts))])
        basis = v[:, :r]
        if conjugate:
            basis = basis @ unitary_group.rvs(r, random_state=rng).conj().T if r > 1 else \
                basis * np.exp(2j * np.pi * rng.random())
        per_fiber_imgs.append([basis.conj().T @ lu.fibers[t] @ basis for lu in left.images])
        etas.append(basis.conj().T[:, e])
        dims.append(r)
    shape = ModuleShape(spectrum, dims)
    images = [ModuleOperator(shape, shape, tuple(per_fiber_imgs[t][g] for t in range(len(dims))))
              for g in range(n)]
    rep = UnitaryRepresentation(group, shape, images)
    return rep, ModuleElement(shape, tuple(etas))


@dataclass
class InstanceSpec:
    """Sizes for :func:`rand_instance`."""

    points: int = 2
    max_dim: int = 4
    group: str = "Z3"
    generators: int = 2
    frame_size: int = 6
    seed: int = 0

    def check(self) -> FiniteGroup:
        if not 1 <= self.points <= CAPS["points"]:
            raise CapExceeded(f"points must be in [1, {CAPS['points']}]")
        if not 1 <= self.max_dim <= CAPS["fiber_dim"]:
            raise CapExceeded(f"max_dim must be in [1, {CAPS['fiber_dim']}]")
        if not 1 <= self.generators <= CAPS["generators"]:
            raise CapExceeded(f"generators must be in [1, {CAPS['generators']}]")
        group = named_group(self.group)
        if len(group) > CAPS["group_order"]:
            raise CapExceeded(f"group order must be at most {CAPS['group_order']}")
        if self.frame_size < 1:
            raise CapExceeded("frame_size must be positive")
        return group


def rand_instance(spec: InstanceSpec) -> InstanceBundle:
    """Deterministic random bundle for the given sizes and seed.

    Contents: a compressed regular representation, its Parseval vector
    ``eta``, ``xi = A0 eta`` for a random unitary ``A0`` in ``G''``, a random
    vector ``x``, Gaussian generators ``phi`` and a Gaussian frame ``F``.
    """
    group = spec.check()
    rng = np.random.default_rng(spec.seed)
    spectrum = FiniteSpectrum.of_size(spec.points)
    rep, eta = compressed_regular(group, spectrum, rng, spec.max_dim)
    shape = rep.shape
    a0 = random_unitary(rep_bicommutant(rep), rng)
    frame = FrameSystem(shape, [random_element(shape, rng) for _ in range(spec.frame_size)])
    phi = MultiGenerator([random_element(shape, rng) for _ in range(spec.generators)])
    return InstanceBundle(
        spectrum, shape, group, rep,
        frames={"F": frame},
        generators={"phi": phi},
        vectors={"eta": eta, "xi": a0 @ eta, "x": random_element(shape, rng)},
        seed=spec.seed,
    )
