import numpy as np
import pytest
from numpy.testing import assert_allclose

from lib.errors import DomainExceeded, IllConditioned, Singular
from lib.tensor_core import (DerivativeConfig, ScalarField, SymMatrix, derive, invert_batch, invert_symmetric,
                             signature)
from lib.types import DerivativeScheme

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])


def test_symmatrix_storage_is_symmetric():
    m = SymMatrix.from_full([[1.0, 2.0], [2.0, 3.0]])
    assert m.entries == (1.0, 2.0, 3.0)
    assert m[0, 1] == m[1, 0] == 2.0
    assert_allclose(m.full, [[1.0, 2.0], [2.0, 3.0]])
    assert SymMatrix.identity(3).norm_inf() == 1.0


def test_symmatrix_rejects_wrong_storage():
    with pytest.raises(ValueError, match="Invalid SymMatrix storage"):
        SymMatrix(3, (1.0, 2.0))
    with pytest.raises(ValueError, match="Invalid SymMatrix shape"):
        SymMatrix.from_full(np.ones((2, 3)))


def test_invert_symmetric_lorentzian():
    g = np.array([[-2.0, 0.3, 0.0, 0.0],
                  [0.3, 1.5, 0.0, 0.0],
                  [0.0, 0.0, 4.0, 0.0],
                  [0.0, 0.0, 0.0, 9.0]])
    inverse = invert_symmetric(SymMatrix.from_full(g))
    assert_allclose(inverse.full @ g, np.eye(4), atol=1e-13)


def test_invert_symmetric_failures():
    with pytest.raises(Singular):
        invert_symmetric(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(Singular, match="zero or non-finite row"):
        invert_symmetric(np.diag([1.0, 0.0]))
    with pytest.raises(IllConditioned) as info:
        invert_symmetric(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-13]]))
    assert info.value.condition > 1e12


def test_invert_batch_marks_failures():
    stack = np.array([np.diag([1.0, 2.0]), [[1.0, 1.0], [1.0, 1.0]]])
    inverse = invert_batch(stack)
    assert_allclose(inverse[0], np.diag([1.0, 0.5]))
    assert np.all(np.isnan(inverse[1]))
    with pytest.raises(Singular):
        invert_batch(stack, strict=True)


def test_signature_counts():
    assert signature(MINKOWSKI) == (1, 3, 0)
    assert signature(np.diag([-1.0, 1.0, 1.0, 0.0])) == (1, 2, 1)


@pytest.mark.parametrize("closed_form", [False, True])
def test_derive_agrees_between_schemes(closed_form):
    f = ScalarField(lambda p: p[..., 0] ** 2 * p[..., 1], [(None, None)] * 2, closed_form=closed_form)
    assert float(derive(f, [2.0, 3.0], 0)) == pytest.approx(12.0, rel=1e-9)
    assert float(derive(f, [2.0, 3.0], 1)) == pytest.approx(4.0, rel=1e-9)


def test_derive_on_many_points():
    f = ScalarField(lambda p: np.sin(p[..., 0]), [(None, None)])
    x = np.linspace(0.0, 1.0, 5)[:, None]
    assert_allclose(derive(f, x, 0), np.cos(x[:, 0]), rtol=1e-9)


def test_derive_near_domain_edge():
    f = ScalarField(lambda p: 3.0 * p[..., 0], [(0.0, None)], name="edge")
    with pytest.raises(DomainExceeded, match="central stencil"):
        derive(f, [1e-6], 0)
    assert float(derive(f, [1e-6], 0, DerivativeConfig(one_sided=True))) == pytest.approx(3.0)


def test_derive_validation():
    f = ScalarField(lambda p: p[..., 0], [(None, None)])
    with pytest.raises(ValueError, match="Invalid axis"):
        derive(f, [1.0], 2)
    with pytest.raises(ValueError, match="Invalid base_step"):
        DerivativeConfig(base_step=0.0)
    assert DerivativeConfig().resolve(f) is DerivativeScheme.CENTRAL
