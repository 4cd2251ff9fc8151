import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from mpwtsvm.kernels import KernelSpec, augment, augmented_kernel_block, gram, kernel_value

RBF1 = KernelSpec("rbf", 1.0)
LIN = KernelSpec("linear")


def test_rbf_same_point_is_one():
    for sigma in (0.01, 1.0, 100.0):
        assert kernel_value([3.0, -2.0], [3.0, -2.0], KernelSpec("rbf", sigma)) == 1.0


def test_rbf_unit_distance():
    assert kernel_value([0.0, 0.0], [1.0, 0.0], RBF1) == pytest.approx(np.exp(-1.0), abs=1e-12)
    assert kernel_value([0.0, 0.0], [1.0, 0.0], RBF1) == pytest.approx(0.367879, abs=1e-6)


def test_rbf_width_uses_sigma_squared():
    assert kernel_value([0.0], [2.0], KernelSpec("rbf", 2.0)) == pytest.approx(np.exp(-1.0), abs=1e-15)


def test_linear_dot_product():
    assert kernel_value([1.0, 2.0], [3.0, 4.0], LIN) == 11.0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_value([1.0, 2.0], [1.0], LIN)
    with pytest.raises(ValueError):
        augmented_kernel_block(np.zeros((2, 2)), np.zeros((3, 3)), LIN)


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("rbf", 0.0)
    with pytest.raises(ValueError):
        KernelSpec("poly")
    assert KernelSpec.from_dict(RBF1.to_dict()) == RBF1


def test_block_single_point():
    assert augmented_kernel_block(np.array([[0.3, 0.7]]), np.array([[0.3, 0.7]]), RBF1).tolist() == [[1.0, 1.0]]


def test_block_linear_basis():
    e = np.eye(2)
    assert augmented_kernel_block(e, e, LIN).tolist() == [[1, 0, 1], [0, 1, 1]]


def test_block_shape_and_ones():
    rng = np.random.default_rng(0)
    om = augmented_kernel_block(rng.random((3, 4)), rng.random((5, 4)), RBF1)
    assert om.shape == (3, 6)
    assert np.all(om[:, -1] == 1.0)


def test_block_empty_reference():
    with pytest.raises(ValueError):
        augmented_kernel_block(np.zeros((2, 2)), np.zeros((0, 2)), RBF1)


def test_gram_matches_pointwise():
    rng = np.random.default_rng(1)
    x, c = rng.random((4, 3)), rng.random((5, 3))
    for spec in (RBF1, LIN, KernelSpec("rbf", 0.3)):
        expect = np.array([[kernel_value(a, b, spec) for b in c] for a in x])
        assert np.allclose(gram(x, c, spec), expect, rtol=0, atol=1e-14)


def test_augment():
    assert augment(np.array([[2.0, 3.0]])).tolist() == [[2.0, 3.0, 1.0]]


@given(hnp.arrays(float, st.tuples(st.integers(1, 50), st.integers(1, 4)), elements=st.floats(-3, 3)),
       st.floats(0.05, 20))
def test_rbf_gram_symmetric_unit_diagonal_psd(x, sigma):
    k = gram(x, x, KernelSpec("rbf", sigma))
    assert np.array_equal(k, k.T)
    assert np.all(np.diag(k) == 1.0)
    assert np.linalg.eigvalsh(k).min() >= -1e-8


@given(hnp.arrays(float, 3, elements=st.floats(-5, 5)), hnp.arrays(float, 3, elements=st.floats(-5, 5)))
def test_kernel_value_symmetric(x, y):
    for spec in (RBF1, LIN):
        assert kernel_value(x, y, spec) == kernel_value(y, x, spec)


def test_rbf_entries_increase_with_sigma():
    x, y = [0.0, 0.0], [1.0, 2.0]
    vals = [kernel_value(x, y, KernelSpec("rbf", s)) for s in (0.5, 2.0, 50.0)]
    assert vals[0] < vals[1] < vals[2] < 1.0
