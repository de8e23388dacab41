import numpy as np
import pytest

from modframe import (
    AlgebraElement,
    FiniteSpectrum,
    ModuleElement,
    ModuleOperator,
    ModuleShape,
    ShapeMismatch,
    SpectralError,
    herm_eig,
    inner,
    module_norm,
    op_adjoint,
    op_apply,
    op_compose,
    op_exp_skew,
    op_norm,
    op_spectral_fn,
)
from modframe.random_instances import random_element

from conftest import elem, random_op

X2 = FiniteSpectrum.of_size(2)
S11 = ModuleShape(X2, (1, 1))


def test_inner_orthogonal():
    shape = ModuleShape(FiniteSpectrum.of_size(1), (2,))
    assert inner(elem(shape, [1, 0]), elem(shape, [0, 1])).values[0] == 0


def test_inner_hand_example():
    x = elem(S11, [1], [2])
    y = elem(S11, [1], [1j])
    assert np.allclose(inner(x, y).values, [1, -2j])


def test_inner_axioms(rng):
    shape = ModuleShape(FiniteSpectrum.of_size(3), (2, 0, 4))
    x, y = random_element(shape, rng), random_element(shape, rng)
    a = AlgebraElement(shape.spectrum, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    assert np.allclose(inner(a * x, y).values, (a * inner(x, y)).values, atol=1e-12)
    assert np.allclose(inner(x, y).values, np.conj(inner(y, x).values), atol=1e-14)
    assert inner(x, x).values[1] == 0


def test_inner_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        inner(elem(S11, [1], [2]), elem(ModuleShape(X2, (1, 2)), [1], [1, 1]))


def test_module_norm():
    shape1 = ModuleShape(FiniteSpectrum.of_size(1), (2,))
    assert module_norm(ModuleElement.zeros(S11)) == 0
    assert module_norm(elem(shape1, [3, 4])) == pytest.approx(5)
    assert module_norm(elem(S11, [1], [2])) == pytest.approx(2)


def test_operator_identities(rng):
    shape = ModuleShape(FiniteSpectrum.of_size(2), (3, 2))
    m, n = random_op(shape, rng), random_op(shape, rng)
    x, y = random_element(shape, rng), random_element(shape, rng)
    assert op_apply(ModuleOperator.identity(shape), x) == x
    lhs, rhs = inner(op_apply(m, x), y), inner(x, op_apply(op_adjoint(m), y))
    assert np.allclose(lhs.values, rhs.values, atol=1e-12 * op_norm(m))
    diff = op_adjoint(op_compose(m, n)) - op_compose(op_adjoint(n), op_adjoint(m))
    assert op_norm(diff) <= 1e-12 * op_norm(m) * op_norm(n)


def test_operator_shape_mismatch(rng):
    a = ModuleShape(X2, (2, 2))
    b = ModuleShape(X2, (3, 2))
    with pytest.raises(ShapeMismatch):
        op_compose(random_op(a, rng), random_op(b, rng))


def test_herm_eig_examples(rng):
    shape = ModuleShape(FiniteSpectrum.of_size(1), (2,))
    swap = ModuleOperator(shape, shape, (np.array([[0, 1], [1, 0]]),))
    (w, _), = herm_eig(swap)
    assert np.allclose(w, [-1, 1])
    diag = ModuleOperator(shape, shape, (np.diag([3.0, -2.0]),))
    (w, v), = herm_eig(diag)
    assert np.allclose(w, [-2, 3])
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])

    shape = ModuleShape(X2, (4, 3))
    h = random_op(shape, rng)
    h = h + h.H
    for (w, v), m in zip(herm_eig(h), h.fibers):
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - m) <= 1e-10 * np.linalg.norm(m, 2)
        assert np.linalg.norm(v.conj().T @ v - np.eye(len(w))) <= 1e-10


def test_herm_eig_rejects_nonhermitian(rng):
    with pytest.raises(SpectralError):
        herm_eig(random_op(ModuleShape(X2, (3, 3)), rng))


def test_spectral_functions(rng):
    shape = ModuleShape(FiniteSpectrum.of_size(1), (2,))
    eye = ModuleOperator.identity(shape)
    assert op_norm(op_spectral_fn(eye, "inv_sqrt") - eye) <= 1e-15
    d = ModuleOperator(shape, shape, (np.diag([4.0, 9.0]),))
    assert np.allclose(op_spectral_fn(d, "inv_sqrt").fibers[0], np.diag([0.5, 1 / 3]))
    assert np.allclose(op_spectral_fn(d, "sqrt").fibers[0], np.diag([2, 3]))
    assert np.allclose(op_spectral_fn(d, "inv").fibers[0], np.diag([0.25, 1 / 9]))

    shape = ModuleShape(X2, (4, 2))
    y = random_op(shape, rng)
    s = y.H @ y + 0.1 * ModuleOperator.identity(shape)
    r = op_spectral_fn(s, "inv_sqrt")
    assert op_norm(r @ s @ r - ModuleOperator.identity(shape)) <= 1e-9


def test_spectral_floor():
    shape = ModuleShape(FiniteSpectrum.of_size(1), (2,))
    d = ModuleOperator(shape, shape, (np.diag([1.0, 1e-12]),))
    with pytest.raises(SpectralError):
        op_spectral_fn(d, "inv_sqrt")


def test_log_unitary_round_trip(rng):
    shape = ModuleShape(X2, (3, 2))
    q = ModuleOperator(shape, shape, tuple(np.linalg.qr(f)[0] for f in random_op(shape, rng).fibers))
    k = op_spectral_fn(q, "log_unitary")
    assert op_norm(k + k.H) <= 1e-12
    assert op_norm(op_exp_skew(k) - q) <= 1e-10


def test_log_of_minus_one_takes_pi_branch():
    shape = ModuleShape(FiniteSpectrum.of_size(1), (1,))
    k = op_spectral_fn(ModuleOperator.scalar(shape, -1.0), "log_unitary")
    assert np.allclose(k.fibers[0], [[1j * np.pi]])
