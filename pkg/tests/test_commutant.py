import numpy as np
import pytest

from modframe import (
    EquivalenceError,
    FiniteSpectrum,
    GroupVonNeumann,
    ModuleOperator,
    ModuleShape,
    NotInAlgebra,
    OperatorAlgebraBasis,
    bicommutant,
    check_lemma33,
    commutant,
    cyclic_group,
    direct_product,
    equivalent_projection_isometry,
    op_norm,
    pi_inverse,
    pi_map,
    random_unitary,
    same_span,
    symmetric_group,
    trace_phi,
)

from conftest import random_op, s3_irrep

X1 = FiniteSpectrum.of_size(1)
X2 = FiniteSpectrum.of_size(2)


def test_commutant_of_identity():
    shape = ModuleShape(X1, (3,))
    assert commutant([ModuleOperator.identity(shape)]).dims == (9,)
    # the commutant of everything is the scalars
    assert bicommutant([ModuleOperator.identity(shape)]).dims == (1,)


def test_commutant_of_z2_regular():
    ctx = GroupVonNeumann(cyclic_group(2), X2)
    c = commutant(ctx.left.images)
    assert c.dims == (2, 2)
    for b in c.basis:
        m = b.fibers[0] if np.abs(b.fibers[0]).max() else b.fibers[1]
        assert np.isclose(m[0, 0], m[1, 1]) and np.isclose(m[0, 1], m[1, 0])


def test_irreducible_commutant_is_scalars():
    rep = s3_irrep(X2)
    c = commutant(rep.images)
    assert c.dims == (1, 1)
    assert c.contains(ModuleOperator.identity(rep.shape))
    assert bicommutant(rep.images).dims == (4, 4)


def test_commutant_basis_commutes(rng):
    shape = ModuleShape(X2, (3, 4))
    ops = [random_op(shape, rng)]
    # a random single operator has a commutant spanned by its own powers
    c = commutant(ops)
    assert c.dims == (3, 4)
    for b in c.basis:
        for o in ops:
            assert op_norm(b @ o - o @ b) <= 1e-10 * op_norm(b) * op_norm(o)


def test_bicommutant_contains_span_and_closes(rng):
    ctx = GroupVonNeumann(symmetric_group(3), X1)
    bc = bicommutant(ctx.left.images)
    assert bc.dims == (6,)
    assert all(bc.contains(u) for u in ctx.left.images)
    assert same_span(commutant(bc), commutant(ctx.left.images))[0]


@pytest.mark.parametrize("group", [cyclic_group(2), cyclic_group(3), symmetric_group(3),
                                   direct_product(cyclic_group(2), cyclic_group(2))])
def test_lemma33(group):
    rep = check_lemma33(group, X2)
    assert rep.passed
    n = len(group)
    assert rep.dims["M"] == rep.dims["N_prime"] == [n, n]
    assert rep.dims["N"] == rep.dims["M_prime"] == [n, n]


def test_membership():
    ctx = GroupVonNeumann(cyclic_group(3), X1)
    assert ctx.M.contains(ctx.left.images[1])
    assert not ctx.M.contains(ModuleOperator(ctx.shape, ctx.shape, (np.diag([1.0, 0, 0]),)))
    with pytest.raises(NotInAlgebra):
        ctx.M.require(ModuleOperator(ctx.shape, ctx.shape, (np.diag([1.0, 0, 0]),)))


def test_star_closed_unital():
    ctx = GroupVonNeumann(symmetric_group(3), X2)
    assert ctx.M.unital and ctx.M.star_closed and ctx.M_prime.star_closed


def test_pi_of_left_is_right():
    g = symmetric_group(3)
    ctx = GroupVonNeumann(g, X2)
    assert op_norm(pi_map(ctx, ModuleOperator.identity(ctx.shape))
                   - ModuleOperator.identity(ctx.shape)) <= 1e-12
    for u in range(len(g)):
        p = pi_map(ctx, ctx.left.images[u])
        for v in range(len(g)):
            out = p @ ctx.chi[v]
            expect = ctx.chi[g.mul(v, g.inv(u))]
            assert all(np.allclose(a, b) for a, b in zip(out.fibers, expect.fibers))


def test_pi_round_trip_and_properties(rng):
    ctx = GroupVonNeumann(cyclic_group(4), X2)
    for _ in range(5):
        a, b = ctx.M.random_element(rng), ctx.M.random_element(rng)
        assert op_norm(pi_inverse(ctx, pi_map(ctx, a)) - a) <= 1e-9 * op_norm(a)
        # conjugate linear and multiplicative
        lam = 0.3 - 1.7j
        assert op_norm(pi_map(ctx, lam * a) - np.conj(lam) * pi_map(ctx, a)) <= 1e-9
        assert op_norm(pi_map(ctx, a @ b) - pi_map(ctx, a) @ pi_map(ctx, b)) <= 1e-9


def test_pi_rejects_outside(rng):
    ctx = GroupVonNeumann(cyclic_group(3), X1)
    with pytest.raises(NotInAlgebra):
        pi_map(ctx, random_op(ctx.shape, rng))


def test_trace(rng):
    ctx = GroupVonNeumann(cyclic_group(4), X2)
    assert np.allclose(trace_phi(ctx, ModuleOperator.identity(ctx.shape)).values, 1)
    for u in range(1, 4):
        assert np.allclose(trace_phi(ctx, ctx.left.images[u]).values, 0)
    for _ in range(20):
        a, b = ctx.M.random_element(rng), ctx.M.random_element(rng)
        diff = trace_phi(ctx, a @ b) - trace_phi(ctx, b @ a)
        assert np.abs(diff.values).max() <= 1e-10


def test_trace_faithful(rng):
    ctx = GroupVonNeumann(symmetric_group(3), X1)
    for _ in range(20):
        a = ctx.M.random_element(rng)
        pos = a.H @ a
        assert trace_phi(ctx, pos).values[0].real >= op_norm(pos) / 6 * (1 - 1e-12)


def _random_projection(alg, rng, rank_frac=0.5):
    h = alg.random_element(rng)
    h = h + h.H
    fibs = []
    for m in h.fibers:
        w, v = np.linalg.eigh(m)
        k = len(w) // 2
        fibs.append(v[:, :k] @ v[:, :k].conj().T)
    return ModuleOperator(alg.shape, alg.shape, tuple(fibs))


def test_equivalent_projection_isometry(rng):
    ctx = GroupVonNeumann(cyclic_group(4), X2)
    alg = ctx.M_prime
    eye = ModuleOperator.identity(ctx.shape)
    c = equivalent_projection_isometry(alg, eye, eye, rng)
    assert op_norm(c) <= 1e-12

    q = _random_projection(alg, rng)
    w = random_unitary(alg, rng)
    p = w @ q @ w.H
    c = equivalent_projection_isometry(alg, p, q, rng)
    assert op_norm(c @ c.H - (eye - p)) <= 1e-8
    assert op_norm(c.H @ c - (eye - q)) <= 1e-8
    assert alg.membership_residual(c) <= 1e-8


def test_inequivalent_projections_fail(rng):
    ctx = GroupVonNeumann(cyclic_group(2), X1)
    alg = ctx.M_prime
    eye = ModuleOperator.identity(ctx.shape)
    plus = ModuleOperator(ctx.shape, ctx.shape, (np.full((2, 2), 0.5),))
    # I - 0 has rank 2 while I - plus has rank 1
    with pytest.raises(EquivalenceError):
        equivalent_projection_isometry(alg, 0 * eye, plus, rng, retries=4)


def test_span_and_json(rng):
    ctx = GroupVonNeumann(cyclic_group(3), X1)
    sp = OperatorAlgebraBasis.span(ctx.left.images)
    assert same_span(sp, ctx.M)[0]
    assert isinstance(ctx.M.to_json()["basis"], list)
