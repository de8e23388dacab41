import numpy as np
import pytest

from modframe import (
    FiniteSpectrum,
    ModuleElement,
    ModuleOperator,
    MultiGenerator,
    NotAFrame,
    NotInAlgebra,
    ParameterizationError,
    apply_generator,
    best_parseval_approx,
    certify_optimality,
    check_energy_equality,
    connect_parseval_vectors,
    cross_term_identity,
    cyclic_group,
    inner,
    module_norm,
    op_norm,
    random_unitary,
    regular_representations,
    rep_bicommutant,
    rep_commutant,
    solve_generator,
    symmetric_group,
)
from modframe.random_instances import compressed_regular, random_element

from conftest import elem, random_op, scalar_shape, trivial_rep

X1 = FiniteSpectrum.of_size(1)
X2 = FiniteSpectrum.of_size(2)
H = 1 / np.sqrt(2)


@pytest.fixture
def s3_instance():
    return compressed_regular(symmetric_group(3), X2, np.random.default_rng(7))


def test_apply_identity_and_translation(z2):
    left, _ = regular_representations(z2, X1)
    chi = [ModuleElement.basis_vector(left.shape, i) for i in range(2)]
    xi, cls = apply_generator(left, chi[0], ModuleOperator.identity(left.shape))
    assert xi == chi[0] and cls.label == "complete wandering"
    xi, cls = apply_generator(left, chi[0], left.images[1])
    assert xi == chi[1] and cls.holds("complete Parseval frame vector")


def test_apply_scaling(s3_instance):
    rep, eta = s3_instance
    xi, cls = apply_generator(rep, eta, 2 * ModuleOperator.identity(rep.shape), "invertible")
    assert cls.label == "complete frame vector"
    assert cls.lower == pytest.approx(4) and cls.upper == pytest.approx(4)


def test_apply_kinds(s3_instance, rng):
    rep, eta = s3_instance
    gdd = rep_bicommutant(rep)
    u = random_unitary(gdd, rng)
    assert apply_generator(rep, eta, u, "unitary")[1].holds("complete Parseval frame vector")
    y = gdd.random_element(rng)
    inv = u @ (y.H @ y + ModuleOperator.identity(rep.shape))
    assert apply_generator(rep, eta, inv, "invertible")[1].holds("complete frame vector")
    a = gdd.random_element(rng)
    _, cls = apply_generator(rep, eta, a, "adjointable")
    assert cls.holds("Bessel") and cls.upper <= op_norm(a) ** 2 * (1 + 1e-9)


def test_apply_rejects(s3_instance, rng):
    rep, eta = s3_instance
    with pytest.raises(NotInAlgebra):
        apply_generator(rep, eta, random_op(rep.shape, rng))
    gdd = rep_bicommutant(rep)
    with pytest.raises(ParameterizationError):
        apply_generator(rep, eta, 2 * ModuleOperator.identity(rep.shape), "unitary")
    with pytest.raises(ParameterizationError):
        apply_generator(rep, 2 * eta, ModuleOperator.identity(rep.shape))
    with pytest.raises(ValueError):
        apply_generator(rep, eta, gdd.random_element(rng), "bogus")


def test_solve_identity(s3_instance):
    rep, eta = s3_instance
    w = solve_generator(rep, eta, eta)
    assert module_norm(w.A @ eta - eta) <= 1e-12
    assert w.residuals["unitarity"] <= 1e-12


def test_solve_scalar_sign(z2):
    shape = scalar_shape()
    rep = trivial_rep(z2, shape)
    w = solve_generator(rep, elem(shape, H), elem(shape, -H))
    assert np.allclose(w.A.fibers[0], [[-1]], atol=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_solve_round_trip(s3_instance, seed):
    rep, eta = s3_instance
    a0 = random_unitary(rep_bicommutant(rep), np.random.default_rng(seed))
    xi = a0 @ eta
    w = solve_generator(rep, eta, xi, rng=seed)
    assert w.residuals["generation"] <= 1e-8
    assert w.residuals["membership"] <= 1e-8
    assert w.residuals["unitarity"] <= 1e-8
    assert module_norm(w.A @ eta - xi) <= 1e-8


def test_solve_other_kinds(s3_instance, rng):
    rep, eta = s3_instance
    gdd = rep_bicommutant(rep)
    y = gdd.random_element(rng)
    xi = (y.H @ y + ModuleOperator.identity(rep.shape)) @ eta
    for kind in ("invertible", "adjointable"):
        w = solve_generator(rep, eta, xi, kind=kind)
        assert w.residuals["generation"] <= 1e-8 and w.residuals["membership"] <= 1e-8
    with pytest.raises(ParameterizationError):
        solve_generator(rep, eta, xi, kind="unitary")


def test_solve_rejects_non_parseval_base(s3_instance):
    rep, eta = s3_instance
    with pytest.raises(ParameterizationError):
        solve_generator(rep, 2 * eta, eta)


def test_path_scalar(z2):
    shape = scalar_shape()
    rep = trivial_rep(z2, shape)
    path = connect_parseval_vectors(rep, elem(shape, H), elem(shape, -H), steps=4)
    for i, p in enumerate(path):
        assert np.allclose(p.fibers[0], np.exp(1j * np.pi * i / 4) * H, atol=1e-10)
    assert path.all_parseval


def test_path_constant(s3_instance):
    rep, eta = s3_instance
    path = connect_parseval_vectors(rep, eta, eta, steps=3)
    assert all(module_norm(p - eta) <= 1e-12 for p in path)


def test_path_random(s3_instance, rng):
    rep, eta = s3_instance
    xi = random_unitary(rep_bicommutant(rep), rng) @ eta
    path = connect_parseval_vectors(rep, eta, xi, steps=16)
    assert len(path) == 17 and path.all_parseval
    assert path.max_membership <= 1e-7 and path.max_endpoint_error <= 1e-7


def test_best_already_parseval(s3_instance):
    rep, eta = s3_instance
    rpt = best_parseval_approx(rep, MultiGenerator([eta]))
    assert module_norm(rpt.best[0] - eta) <= 1e-9


def test_best_scalar():
    shape = scalar_shape()
    rep = trivial_rep(cyclic_group(1), shape)
    rpt = best_parseval_approx(rep, MultiGenerator([elem(shape, 2)]))
    assert np.allclose(rpt.frame_op.fibers[0], [[4]])
    assert np.allclose(rpt.best[0].fibers[0], [1])


def test_best_fiberwise_normalization(z2):
    left, _ = regular_representations(z2, X2)
    chi_e = ModuleElement.basis_vector(left.shape, 0)
    phi = elem(left.shape, [2, 0], [3, 0])
    rpt = best_parseval_approx(left, MultiGenerator([phi]))
    assert module_norm(rpt.best[0] - chi_e) <= 1e-12


def test_best_rejects_non_frame(z2):
    left, _ = regular_representations(z2, X1)
    with pytest.raises(NotAFrame):
        best_parseval_approx(left, MultiGenerator([elem(left.shape, [1, 1])]))


def test_gap_scalar_example():
    shape = scalar_shape()
    rep = trivial_rep(cyclic_group(1), shape)
    phi = MultiGenerator([elem(shape, 2)])
    best = best_parseval_approx(rep, phi).best
    psi = MultiGenerator([elem(shape, -1)])
    d_psi = inner(phi[0] - psi[0], phi[0] - psi[0])
    d_best = inner(phi[0] - best[0], phi[0] - best[0])
    assert np.allclose((d_psi - d_best).values, 8)


def test_certify(s3_instance, rng):
    rep, _ = s3_instance
    phi = MultiGenerator([random_element(rep.shape, rng) for _ in range(2)])
    rpt = certify_optimality(rep, phi, n_samples=20, rng=3)
    assert rpt.all_gaps_nonnegative and rpt.uniqueness_ok
    assert rpt.sample_modes.count("commutant_unitary") == 10
    assert np.abs(rpt.gaps[0].values).max() <= 1e-10
    assert rpt.residuals["cross_term_identity"] <= 1e-9
    assert rpt.residuals["energy_equality"] <= 1e-9


def test_cross_term_identity(s3_instance, rng):
    rep, _ = s3_instance
    phi = MultiGenerator([random_element(rep.shape, rng)])
    best = best_parseval_approx(rep, phi).best
    w = random_unitary(rep_commutant(rep), rng)
    assert cross_term_identity(rep, phi, best.map(w)) <= 1e-9


def test_energy_equality(z2, s3_instance, rng):
    left, _ = regular_representations(z2, X1)
    chi = [ModuleElement.basis_vector(left.shape, i) for i in range(2)]
    chk = check_energy_equality(left, MultiGenerator([chi[0]]), MultiGenerator([chi[1]]))
    assert np.allclose(chk.energy_phi.values, 1) and chk.residual == 0

    rep, _ = s3_instance
    phi = MultiGenerator([random_element(rep.shape, rng) for _ in range(2)])
    best = best_parseval_approx(rep, phi).best
    w = random_unitary(rep_commutant(rep), rng)
    assert check_energy_equality(rep, best, best.map(w)).residual <= 1e-9
    with pytest.raises(ParameterizationError):
        check_energy_equality(rep, best, phi)


def test_witness_json(s3_instance):
    rep, eta = s3_instance
    out = solve_generator(rep, eta, eta).to_json()
    assert out["kind"] == "unitary" and "A" in out
