"""
All Parseval frame vectors from one
===================================

Every complete Parseval frame vector is A eta for a unitary A in the
double commutant.  Given two of them we recover such an A, then walk
between them along exp(sK) eta with K = log A.
"""
import numpy as np

from modframe import (
    FiniteSpectrum, apply_generator, connect_parseval_vectors, module_norm,
    random_unitary, rep_bicommutant, solve_generator, symmetric_group,
)
from modframe.random_instances import compressed_regular

rng = np.random.default_rng(2)
rep, eta = compressed_regular(symmetric_group(3), FiniteSpectrum.of_size(2), rng)
gdd = rep_bicommutant(rep)
print("fiber dims", rep.shape.fiber_dims, "double commutant dims", gdd.dims)

a0 = random_unitary(gdd, rng)
xi, cls = apply_generator(rep, eta, a0)
print("xi = A0 eta is a", cls.label)

w = solve_generator(rep, eta, xi, rng=0)
print("recovered A: ||A eta - xi|| =", module_norm(w.A @ eta - xi))
print("             ||A - A0||     =", max(np.abs(p - q).max() for p, q in zip(w.A.fibers, a0.fibers)))

path = connect_parseval_vectors(rep, eta, xi, steps=8)
print("labels along the path:", set(c.label for c in path.classifications))
print("distance from eta:", [round(module_norm(p - eta), 3) for p in path])
