import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclt.errors import DimensionMismatchError, InvalidParameterError
from fraclt.geometry import (Cube, contains, lattice_center_relation, lattice_offsets, point_distance,
                             subdivide)


def test_unit_cube_basics():
    Q = Cube.unit(3)
    assert Q.volume == 1.0
    assert np.allclose(Q.lo, 0.0) and np.allclose(Q.hi, 1.0)
    assert Cube.from_corner([1.0, 2.0], 2.0).center == (2.0, 3.0)


@pytest.mark.parametrize("side", [0.0, -1.0, np.inf])
def test_bad_side_rejected(side):
    with pytest.raises(InvalidParameterError):
        Cube((0.0,), side)


@pytest.mark.parametrize("k,d", [(2, 1), (2, 2), (3, 2), (3, 3), (4, 1)])
def test_subdivide_counts_and_volumes(k, d):
    Q = Cube.from_corner([-1.0] * d, 2.0)
    kids = subdivide(Q, k)
    assert len(kids) == k ** d == len(lattice_offsets(k, d))
    assert sum(c.volume for c in kids) == pytest.approx(Q.volume, rel=1e-14)
    assert all(c.depth == 1 for c in kids)


def test_odd_k_middle_child_keeps_center_exactly():
    Q = Cube((0.1, 0.7, -0.3), 0.9)
    mid = subdivide(Q, 3)[13]
    assert mid.center == Q.center


@given(st.integers(2, 4), st.integers(1, 3),
       st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=3, max_size=3))
def test_children_tile_the_parent(k, d, xs):
    root = Cube.unit(d)
    x = np.array(xs[:d])
    owners = [c for c in subdivide(root, k) if contains(c, x, root)]
    assert len(owners) == 1


def test_contains_dimension_check():
    with pytest.raises(DimensionMismatchError):
        contains(Cube.unit(2), [0.5])


def test_point_distance():
    Q = Cube.unit(2)
    assert point_distance(Q, [0.5, 0.5]) == 0.0
    assert point_distance(Q, [4.0, 5.0]) == pytest.approx(5.0)


def _float_relation(index, level, k):
    # independent float version of the center relation on the unit root
    h = k ** -level
    lo = np.array(index) * h
    hi = lo + h
    c = np.full(len(index), 0.5)
    shares = bool(np.all((lo < c) & (c < hi)))
    gap = np.maximum(0, np.maximum(lo - c, c - hi))
    return shares, bool(np.sqrt(np.sum(gap ** 2)) >= h / 2 - 1e-12)


@given(st.sampled_from([3, 5]), st.integers(1, 3), st.data())
def test_lattice_relation_matches_float_geometry(k, level, data):
    d = data.draw(st.integers(1, 3))
    index = data.draw(st.lists(st.integers(0, k ** level - 1), min_size=d, max_size=d))
    assert lattice_center_relation(index, level, k) == _float_relation(index, level, k)
