import numpy as np
import pytest

from modframe import (
    FiniteSpectrum,
    ModuleElement,
    ModuleOperator,
    ModuleShape,
    UnitaryRepresentation,
    cyclic_group,
)


def elem(shape, *fibers):
    return ModuleElement(shape, tuple(np.atleast_1d(np.asarray(f, dtype=complex)) for f in fibers))


def scalar_shape(points=1):
    return ModuleShape(FiniteSpectrum.of_size(points), (1,) * points)


def trivial_rep(group, shape):
    eye = ModuleOperator.identity(shape)
    return UnitaryRepresentation(group, shape, [eye] * len(group))


def random_op(shape, rng):
    return ModuleOperator(shape, shape, tuple(
        rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for d in shape.fiber_dims))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def z2():
    return cyclic_group(2)


def s3_irrep(spectrum):
    """The 2-dimensional irreducible representation of S3 on every fiber."""
    import itertools
    from modframe import symmetric_group
    group = symmetric_group(3)
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float).T
    basis /= np.linalg.norm(basis, axis=0)
    shape = ModuleShape(spectrum, (2,) * len(spectrum))
    images = []
    for perm in itertools.permutations(range(3)):
        p = np.zeros((3, 3))
        p[list(perm), range(3)] = 1
        m = basis.T @ p @ basis
        images.append(ModuleOperator(shape, shape, (m,) * len(spectrum)))
    return UnitaryRepresentation(group, shape, images)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(number, title: str, ok: bool, detail: str = "") -> bool:
        tag = f"criterion {number:>2}" if isinstance(number, int) else f"{number:<12}"
        line = f"{tag} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
