from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix

from sullivan.errors import DomainMismatchError
from sullivan.linalg import (
    RationalMatrix,
    SubspaceBasis,
    combinations_in_span,
    image_basis,
    kernel_basis,
    quotient_dimension,
    rank,
    rref,
    solve_affine_in_subspace,
)

entries = st.integers(-3, 3)


def matrices(max_rows=5, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(entries, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_rref_small():
    m = RationalMatrix.from_dense([[2, 4, 2], [1, 2, 3]])
    red, pivots, r = rref(m)
    assert r == 2 and pivots == [0, 2]
    assert red.to_dense() == [[1, 2, 0], [0, 0, 1]]


def test_kernel_of_identity_is_zero():
    assert kernel_basis(RationalMatrix.identity(4)).dim == 0
    assert kernel_basis(RationalMatrix.zero(2, 3)).dim == 3


def test_rational_entries_stay_exact():
    m = RationalMatrix.from_dense([[F(1, 3), F(2, 3)]])
    k = kernel_basis(m)
    (v,) = k.vectors
    assert m.matvec(v) == [0]
    assert all(isinstance(x, F) for x in v)


@given(matrices())
def test_rank_matches_sympy(rows):
    assert rank(RationalMatrix.from_dense(rows)) == Matrix(rows).rank()


@given(matrices())
def test_rank_nullity(rows):
    m = RationalMatrix.from_dense(rows)
    k = kernel_basis(m)
    assert k.dim + rank(m) == m.ncols
    for v in k.vectors:
        assert not any(m.matvec(v))


@given(matrices())
def test_image_is_column_space(rows):
    m = RationalMatrix.from_dense(rows)
    img = image_basis(m)
    assert img.dim == rank(m)
    for j in range(m.ncols):
        assert img.contains(m.column(j))


@given(matrices(), st.lists(entries, min_size=6, max_size=6))
def test_solve_affine_solution_is_valid(rows, x0):
    m = RationalMatrix.from_dense(rows)
    b = m.matvec(x0[: m.ncols])
    x = solve_affine_in_subspace(m, b)
    assert x is not None
    assert m.matvec(x) == b


def test_solve_affine_in_subspace_respects_subspace():
    m = RationalMatrix.from_dense([[1, 1, 0], [0, 0, 1]])
    s = SubspaceBasis.coordinate(3, [1, 2])
    x = solve_affine_in_subspace(m, [2, 3], s)
    assert x == [0, 2, 3]
    assert solve_affine_in_subspace(m, [2, 3], SubspaceBasis.coordinate(3, [2])) is None


def test_solve_affine_rejects_bad_rhs():
    with pytest.raises(DomainMismatchError):
        solve_affine_in_subspace(RationalMatrix.identity(2), [1, 2, 3])


def test_subspace_sum_and_intersection():
    a = SubspaceBasis.span(3, [[1, 0, 0], [0, 1, 0]])
    b = SubspaceBasis.span(3, [[0, 1, 0], [0, 0, 1]])
    assert (a + b).dim == 3
    meet = a.intersect(b)
    assert meet.dim == 1 and meet.contains([0, 5, 0])
    assert quotient_dimension(a, b) == 1
    assert meet.is_subspace_of(a) and not a.is_subspace_of(b)


@given(matrices(4, 4), matrices(4, 4))
def test_intersection_dimension_formula(r1, r2):
    n = 4
    a = SubspaceBasis.span(n, [row + [0] * (n - len(row)) for row in r1])
    b = SubspaceBasis.span(n, [row + [0] * (n - len(row)) for row in r2])
    assert a.intersect(b).dim == a.dim + b.dim - (a + b).dim


def test_residual_is_canonical():
    s = SubspaceBasis.span(3, [[1, 1, 0]])
    assert s.residual([2, 2, 1]) == s.residual([0, 0, 1])


def test_combinations_in_span():
    # columns: e1, e1, e2 -> c0*e1 lies in span of the rest, c1 on col 2 does not
    m = RationalMatrix.from_dense([[1, 1, 0], [0, 0, 1]])
    assert combinations_in_span(m, [0]).dim == 1
    m2 = RationalMatrix.from_dense([[1, 0, 0], [0, 0, 1]])
    assert combinations_in_span(m2, [0]).dim == 0
