"""
Orbits of a single vector
=========================

For a unitary representation of a finite group, the orbit {U x} of one
vector can be an orthonormal basis, a Parseval frame, a frame, or less.
A complete Parseval frame vector embeds the module into the regular
representation.
"""
import numpy as np

from modframe import (
    FiniteSpectrum, ModuleElement, classify_vector, dilate,
    regular_representations, symmetric_group,
)
from modframe.random_instances import compressed_regular

X = FiniteSpectrum.of_size(2)
S3 = symmetric_group(3)

left, _ = regular_representations(S3, X)
chi_e = ModuleElement.basis_vector(left.shape, S3.identity)
print("chi_e in l2(S3):", classify_vector(left, chi_e).label)

flat = ModuleElement(left.shape, (np.ones(6), np.ones(6)))
c = classify_vector(left, flat)
print("constant vector:", c.label, "with orbit rank", c.ranks)

# a subrepresentation of the regular one, with fiber dimensions varying by point
rep, eta = compressed_regular(S3, X, np.random.default_rng(4))
print("fiber dims:", rep.shape.fiber_dims)
print("eta:", classify_vector(rep, eta).label)
print("2 eta:", classify_vector(rep, 2 * eta).label)

dil = dilate(rep, eta)
for name, value in dil.residuals(rep).items():
    print(f"  {name:16s} {value:.1e}")
