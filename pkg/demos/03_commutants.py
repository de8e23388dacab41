"""
Commutants of the regular representations
=========================================

On l2(G) with coefficients in C(X) the left and right regular
representations generate each other's commutants.  The map pi sends the
left algebra onto the right one, and phi(A) = <A chi_e, chi_e> is a
faithful trace.
"""
import numpy as np

from modframe import (
    FiniteSpectrum, GroupVonNeumann, check_lemma33, commutant, dihedral_group,
    op_norm, pi_map, trace_phi,
)

X = FiniteSpectrum.of_size(2)
D4 = dihedral_group(4)
ctx = GroupVonNeumann(D4, X)

print("dim {L}' per fiber :", commutant(ctx.left.images).dims)
print("dim {L}'' per fiber:", ctx.M.dims)

rpt = check_lemma33(D4, X)
print("{L}'' = {R}' and {R}'' = {L}':", rpt.passed, rpt.residuals)

# pi(L_U) is R_U
u = 3
print("||pi(L_U) - R_U|| =", op_norm(pi_map(ctx, ctx.left.images[u]) - ctx.right.images[u]))

rng = np.random.default_rng(1)
a, b = ctx.M.random_element(rng), ctx.M.random_element(rng)
print("phi(AB) - phi(BA) =", (trace_phi(ctx, a @ b) - trace_phi(ctx, b @ a)).values)
print("phi(A*A) =", trace_phi(ctx, a.H @ a).values.real.round(4))
