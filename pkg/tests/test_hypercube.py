import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walshprod import (
    DimensionMismatchError,
    MAX_DIMENSION,
    SubsetMask,
    as_sign_vector,
    dataset_from_rows,
    enumerate_cube,
    expectation_of_product,
    monomial_eval,
    sample_dataset,
    xor,
)
from oracles import cube_average_expectation


def mask(d, coords):
    return SubsetMask.from_coords(d, coords)


@st.composite
def masks(draw, d=None):
    dim = d if d is not None else draw(st.integers(1, 24))
    bits = draw(st.integers(0, (1 << dim) - 1))
    return SubsetMask(dim, bits)


class TestSubsetMask:
    def test_coords_roundtrip(self):
        s = mask(5, [0, 3])
        assert s.coords() == (0, 3)
        assert s.degree == 2
        assert 3 in s and 1 not in s

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            mask(3, [3])
        with pytest.raises(ValueError):
            SubsetMask(3, 1 << 3)
        with pytest.raises(ValueError):
            SubsetMask(MAX_DIMENSION + 1, 0)


class TestXor:
    def test_symmetric_difference(self):
        assert xor(mask(3, [0, 1]), mask(3, [1, 2])) == mask(3, [0, 2])

    def test_self_cancellation(self):
        s = mask(4, [1, 3])
        assert xor(s, s) == SubsetMask.empty(4)

    def test_identity_element(self):
        s = mask(4, [1, 3])
        assert xor(s, SubsetMask.empty(4)) == s

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            xor(mask(3, [0]), mask(4, [0]))

    @given(st.integers(1, 20).flatmap(lambda d: st.tuples(masks(d), masks(d), masks(d))))
    def test_group_laws(self, triple):
        a, b, c = triple
        assert xor(xor(a, b), c) == xor(a, xor(b, c))
        assert xor(a, b) == xor(b, a)
        assert xor(a, SubsetMask.empty(a.d)) == a
        assert xor(a, a) == SubsetMask.empty(a.d)


class TestMonomialEval:
    def test_empty_set_is_one(self):
        x = as_sign_vector([-1, 1, -1])
        assert monomial_eval(SubsetMask.empty(3), x) == 1

    def test_single_coordinate(self):
        x = as_sign_vector([-1, 1])
        assert monomial_eval(mask(2, [0]), x) == -1

    def test_pair_of_negatives(self):
        x = as_sign_vector([-1, -1, 1])
        assert monomial_eval(mask(3, [0, 1]), x) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            monomial_eval(mask(3, [0]), as_sign_vector([1, -1]))

    @given(st.integers(1, 8).flatmap(lambda d: st.tuples(masks(d), masks(d))))
    def test_multiplicative_in_the_set(self, pair):
        a, b = pair
        for x in enumerate_cube(a.d):
            assert monomial_eval(xor(a, b), x) == monomial_eval(a, x) * monomial_eval(b, x)

    def test_multiplicative_at_d12(self):
        a = mask(12, [0, 4, 7, 11])
        b = mask(12, [4, 5, 11])
        for x in enumerate_cube(12):
            assert monomial_eval(xor(a, b), x) == monomial_eval(a, x) * monomial_eval(b, x)


class TestExpectationOfProduct:
    def test_empty_product(self):
        assert expectation_of_product([]) == 1

    def test_single_coordinate_vanishes(self):
        assert expectation_of_product([mask(2, [0])]) == 0

    def test_cancelling_triple(self):
        sets = [mask(3, [0, 1]), mask(3, [0]), mask(3, [1])]
        assert expectation_of_product(sets) == 1

    def test_nonvanishing_pair(self):
        assert expectation_of_product([mask(3, [0]), mask(3, [1])]) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            expectation_of_product([mask(2, [0]), mask(3, [0])])

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(1, 8).flatmap(
            lambda d: st.lists(masks(d), min_size=1, max_size=4)
        )
    )
    def test_matches_cube_average(self, sets):
        assert expectation_of_product(sets) == cube_average_expectation(sets)

    def test_cube_average_at_d12(self):
        sets = [mask(12, [0, 5, 11]), mask(12, [5]), mask(12, [0, 11])]
        assert expectation_of_product(sets) == 1
        assert cube_average_expectation(sets) == 1.0


class TestSampleDataset:
    def test_deterministic(self):
        a = sample_dataset(4, 3, seed=7)
        b = sample_dataset(4, 3, seed=7)
        assert (a.rows == b.rows).all()
        assert a.seed == 7 and a.rng is not None

    def test_single_entry_shape(self):
        ds = sample_dataset(1, 1, seed=123)
        assert ds.rows.shape == (1, 1)
        assert ds.rows[0, 0] in (-1, 1)

    def test_column_mean_within_clt_bound(self):
        ds = sample_dataset(100_000, 2, seed=1)
        assert abs(ds.rows[:, 0].mean()) < 0.02

    def test_entries_are_signs(self):
        ds = sample_dataset(50, 6, seed=3)
        assert set(np.unique(ds.rows)) <= {-1, 1}

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            sample_dataset(0, 3, seed=1)
        with pytest.raises(ValueError):
            sample_dataset(3, 0, seed=1)


class TestCubeEnumeration:
    def test_all_points_once(self):
        cube = enumerate_cube(4)
        assert cube.shape == (16, 4)
        assert len({tuple(r) for r in cube}) == 16

    def test_dataset_from_rows_validates(self):
        with pytest.raises(ValueError):
            dataset_from_rows([[1, 2]])
