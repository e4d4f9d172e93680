import numpy as np
import pytest

from models.fields import SurfaceField, VariationField
from utils.errors import ArgumentError, ValidationError

KEY = (2, 8, 1.0)


def make(values, boundary=None, key=KEY, provenance='analytic', name='f'):
    return SurfaceField(np.asarray(values, dtype=float), boundary, key, provenance, name)


def test_fields_are_read_only():
    field = make([1.0, 2.0])
    with pytest.raises(ValueError):
        field.interior[0] = 5.0


def test_non_finite_values_rejected():
    with pytest.raises(ValidationError):
        make([1.0, np.nan])


def test_unknown_provenance_rejected():
    with pytest.raises(ValidationError):
        make([1.0], provenance='guessed')


def test_arithmetic_keeps_boundary_and_provenance():
    a = make([1.0, 2.0], np.array([3.0]), name='a')
    b = make([4.0, 5.0], np.array([6.0]), name='b')
    total = a + b
    assert total.interior.tolist() == [5.0, 7.0]
    assert total.boundary.tolist() == [9.0]
    assert total.provenance == 'analytic'
    assert total.name == '(a+b)'
    assert (2.0 * a).interior.tolist() == [2.0, 4.0]
    assert (1.0 - a).interior.tolist() == [0.0, -1.0]


def test_missing_boundary_propagates():
    a = make([1.0, 2.0], np.array([3.0]))
    b = make([4.0, 5.0], provenance='sampled')
    combined = a * b
    assert combined.boundary is None
    assert combined.provenance == 'sampled'


def test_node_sets_must_match():
    with pytest.raises(ArgumentError):
        make([1.0]) + make([1.0], key=(2, 12, 1.0))
    with pytest.raises(ArgumentError):
        make([1.0]).require((3, 8, 1.0))


def test_sup_includes_boundary():
    assert make([1.0, -2.0], np.array([-3.0])).sup() == 3.0


def test_variation_field_needs_boundary_speed():
    with pytest.raises(ValidationError):
        VariationField(make([1.0]), np.zeros((1, 3)), np.zeros((1, 3)))
    zero = VariationField(make([0.0], np.array([0.0])), np.zeros((1, 3)), np.zeros((1, 3)))
    assert zero.is_zero
