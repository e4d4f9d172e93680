import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.curvature import CurvatureSpectrum, ShapeOperator
from services.symfun import (
    brute_force_symmetric, elementary_symmetric, garding_cone_contains,
    newton_maclaurin_gap, newton_tensor, newton_traces, normalized_mean_curvature,
    random_shape_operator, random_spectra, restricted_symmetric, sigma_gradient,
    symmetric_stack,
)
from utils.errors import ArgumentError, PreconditionError, ValidationError


def test_sigma_of_one_two_three():
    spectrum = CurvatureSpectrum.of([1.0, 2.0, 3.0])
    assert elementary_symmetric(spectrum, 0) == 1.0
    assert elementary_symmetric(spectrum, 1) == pytest.approx(6.0)
    assert elementary_symmetric(spectrum, 2) == pytest.approx(11.0)
    assert elementary_symmetric(spectrum, 3) == pytest.approx(6.0)
    assert elementary_symmetric(spectrum, 4) == 0.0


def test_negative_order_rejected():
    with pytest.raises(ArgumentError):
        elementary_symmetric(CurvatureSpectrum.of([1.0]), -1)


def test_empty_spectrum_rejected():
    with pytest.raises(ValidationError):
        CurvatureSpectrum.of([])


def test_stack_matches_subset_enumeration(rng):
    for spectrum in random_spectra(rng, 200):
        for r in range(spectrum.n + 1):
            assert elementary_symmetric(spectrum, r) == pytest.approx(
                brute_force_symmetric(spectrum, r), rel=1e-10, abs=1e-10)


def test_stack_is_vectorized():
    kappa = np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
    assert_allclose(symmetric_stack(kappa, 3), [[1, 6, 11, 6], [1, 3, 3, 1]])


def test_normalized_mean_curvature():
    spectrum = CurvatureSpectrum.of([1.0, 2.0, 3.0])
    assert normalized_mean_curvature(spectrum, 1) == pytest.approx(2.0)
    assert normalized_mean_curvature(spectrum, 2) == pytest.approx(11.0 / 3.0)
    with pytest.raises(ArgumentError):
        normalized_mean_curvature(spectrum, 4)


def test_restricted_symmetric():
    spectrum = CurvatureSpectrum.of([1.0, 2.0, 3.0])
    assert restricted_symmetric(spectrum, 0, 1) == pytest.approx(5.0)
    assert restricted_symmetric(spectrum, 2, 2) == pytest.approx(2.0)


def test_newton_tensors_of_diagonal_operator():
    shape = ShapeOperator.diagonal([1.0, 2.0, 3.0])
    assert_allclose(newton_tensor(shape, 0).matrix, np.eye(3))
    assert_allclose(newton_tensor(shape, 1).matrix, np.diag([5.0, 4.0, 3.0]))
    assert_allclose(newton_tensor(shape, 2).matrix, np.diag([6.0, 3.0, 2.0]))
    with pytest.raises(ArgumentError):
        newton_tensor(shape, 3)


def test_newton_traces_closed_forms():
    shape = ShapeOperator.diagonal([1.0, 2.0, 3.0])
    assert_allclose(newton_traces(shape, 1), (12.0, 22.0, 48.0))
    assert_allclose(newton_traces(shape, 2), (11.0, 18.0, 36.0))


def test_newton_traces_with_general_metric(rng):
    for n in (2, 3, 4):
        shape = random_shape_operator(rng, n)
        for r in range(n):
            newton_traces(shape, r)


def test_sigma_gradient_is_newton_tensor(rng):
    shape = random_shape_operator(rng, 3)
    for r in range(1, 4):
        gradient = sigma_gradient(shape, r)
        assert np.all(np.isfinite(gradient))


def test_non_self_adjoint_operator_rejected():
    with pytest.raises(ValidationError):
        ShapeOperator(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_garding_cone():
    assert garding_cone_contains(CurvatureSpectrum.of([1.0, 2.0, 3.0]), 3)
    assert garding_cone_contains(CurvatureSpectrum.of([3.0, 3.0, -1.0]), 2)
    assert not garding_cone_contains(CurvatureSpectrum.of([3.0, 3.0, -1.0]), 3)


def test_newton_maclaurin_gap():
    spectrum = CurvatureSpectrum.of([1.0, 2.0, 3.0])
    assert newton_maclaurin_gap(spectrum, 1, 2) == pytest.approx(1.0 / 3.0)
    umbilic = CurvatureSpectrum.of([2.0, 2.0, 2.0])
    assert newton_maclaurin_gap(umbilic, 1, 3) == pytest.approx(0.0, abs=1e-12)


def test_newton_maclaurin_gap_outside_cone():
    with pytest.raises(PreconditionError):
        newton_maclaurin_gap(CurvatureSpectrum.of([1.0, -2.0, -3.0]), 1, 2)
    with pytest.raises(ArgumentError):
        newton_maclaurin_gap(CurvatureSpectrum.of([1.0, 2.0]), 2, 2)


def test_newton_maclaurin_nonnegative_in_cone(rng):
    checked = 0
    for spectrum in random_spectra(rng, 300, low=-0.5, high=2.0):
        n = spectrum.n
        for l in range(2, n + 1):
            if garding_cone_contains(spectrum, l):
                for k in range(1, l):
                    assert newton_maclaurin_gap(spectrum, k, l) >= -1e-12
                    checked += 1
    assert checked > 0
