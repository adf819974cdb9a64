import numpy as np
import pytest
from numpy.testing import assert_allclose

from lib.dual import Dual, eps_part, real_part, stack


def test_power_and_exponential_rules():
    cube = Dual(2.0, 1.0) ** 3
    assert float(cube.real) == pytest.approx(8.0)
    assert float(cube.eps) == pytest.approx(12.0)

    e = np.exp(Dual(0.0, 1.0))
    assert float(e.real) == pytest.approx(1.0)
    assert float(e.eps) == pytest.approx(1.0)


def test_variable_exponent():
    value = 2.0 ** Dual(3.0, 1.0)
    assert float(value.real) == pytest.approx(8.0)
    assert float(value.eps) == pytest.approx(8.0 * np.log(2.0))


def test_quotient_rule():
    q = Dual(1.0, 1.0) / Dual(2.0, 0.0)
    assert float(q.real) == pytest.approx(0.5)
    assert float(q.eps) == pytest.approx(0.5)


def test_closed_form_runs_unchanged_on_arrays():
    def f(x):
        return x * np.exp(-x) + np.sin(x) / (1.0 + x * x)

    x = np.linspace(0.1, 2.0, 7)
    value = f(Dual(x, np.ones_like(x)))
    expected = (1.0 - x) * np.exp(-x) + (np.cos(x) * (1.0 + x * x) - 2.0 * x * np.sin(x)) / (1.0 + x * x) ** 2
    assert_allclose(value.real, f(x), rtol=1e-14)
    assert_allclose(value.eps, expected, rtol=1e-12)


def test_ndarray_operands_defer_to_dual():
    value = np.array([1.0, 2.0]) * Dual(np.array([3.0, 4.0]), np.array([1.0, 0.0]))
    assert isinstance(value, Dual)
    assert_allclose(value.eps, [1.0, 0.0])


def test_indexing_and_stack():
    d = Dual(np.arange(6.0).reshape(2, 3), 1.0)
    column = d[..., 1]
    assert_allclose(column.real, [1.0, 4.0])
    assert_allclose(column.eps, [1.0, 1.0])
    joined = stack([1.0, column.real, column], axis=-1)
    assert joined.shape == (2, 3)
    assert_allclose(joined.eps, [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])


def test_unsupported_ufunc_raises():
    with pytest.raises(TypeError):
        np.floor(Dual(1.5, 1.0))


def test_part_accessors_on_plain_values():
    assert_allclose(real_part([1.0, 2.0]), [1.0, 2.0])
    assert_allclose(eps_part([1.0, 2.0]), [0.0, 0.0])
    assert float(Dual(1.0, 2.0).sum().eps) == 2.0
