import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergman_toeplitz import (DomainError, MultiIndex, as_points, contains, density_unnormalized,
                              disk, make_domain, matrix_ball, multi_index_enumerate, unit_ball)
from bergman_toeplitz.domains import count_monomials, index_array

from oracles import brute_grids


@pytest.mark.parametrize("kind,n,m,p", [("unit_ball", 1, 1, 2), ("matrix_ball", 2, 2, 4),
                                        ("unit_ball", 3, 1, 4), ("matrix_ball", 2, 3, 5),
                                        ("matrix_ball", 3, 1, 4)])
def test_genus(kind, n, m, p):
    d = make_domain(kind, n, m)
    assert d.genus == p
    # integer identity: genus * rank = dim + tube_dim
    assert d.genus * d.rank == d.dim + d.tube_dim


def test_matrix_ball_structure():
    d = matrix_ball(2, 3)
    assert (d.rank, d.tube_dim, d.dim) == (2, 4, 6)


@pytest.mark.parametrize("n,m", [(0, 1), (1, 0), (-2, 2)])
def test_bad_sizes(n, m):
    with pytest.raises(DomainError):
        make_domain("matrix_ball", n, m)


def test_contains_examples():
    assert contains(unit_ball(3), np.zeros(3))
    assert not contains(unit_ball(2), np.array([0.8, 0.7]))
    assert contains(matrix_ball(2, 2), np.diag([0.9, 0.5]))
    assert not contains(disk(), 1.0)  # boundary is excluded
    pts = np.array([0.1, 0.99, 1.2])
    assert contains(disk(), pts).tolist() == [True, True, False]


def test_contains_uses_largest_singular_value():
    # Frobenius norm 1.2 but operator norm 0.9
    z = np.diag([0.9, 0.8])
    assert np.linalg.norm(z) > 1 and contains(matrix_ball(2, 2), z)


def test_density_examples():
    assert density_unnormalized(disk(), 2.5, 0.0) == pytest.approx(1.0)
    assert density_unnormalized(disk(), 4.0, 0.5) == pytest.approx(0.5625, abs=1e-15)
    z = np.array([0.3 + 0.1j, -0.2j])
    assert density_unnormalized(unit_ball(2), 3.0, z) == pytest.approx(1.0)
    assert density_unnormalized(matrix_ball(2, 2), 4.0, np.diag([0.5, 0.2])) == pytest.approx(1.0)


def test_density_matrix_ball_exponent():
    z = np.diag([0.5, 0.2])
    assert density_unnormalized(matrix_ball(2, 2), 6.0, z) == pytest.approx((0.75 * 0.96) ** 2)


def test_weight_precondition():
    with pytest.raises(DomainError):
        density_unnormalized(disk(), 1.0, 0.0)
    with pytest.raises(DomainError):
        density_unnormalized(disk(), 2.0, 1.5)


def test_enumeration_examples():
    assert [a.entries for a in multi_index_enumerate(disk(), 2)] == [(0,), (1,), (2,)]
    idx = multi_index_enumerate(matrix_ball(2, 2), 1)
    assert len(idx) == 5
    assert idx[0].degree == 0 and idx[1].grid.tolist() == [[1, 0], [0, 0]]
    assert len(multi_index_enumerate(matrix_ball(2, 2), 2)) == 15


@pytest.mark.parametrize("n,m,k", [(2, 2, 3), (3, 1, 4), (1, 3, 3), (2, 3, 2)])
def test_enumeration_matches_brute_force(n, m, k):
    dom = make_domain("unit_ball" if m == 1 else "matrix_ball", n, m)
    ours = {tuple(a.grid.ravel()) for a in multi_index_enumerate(dom, k)}
    ref = {tuple(g.ravel()) for g in brute_grids(n, m, k)}
    assert ours == ref
    assert len(ours) == count_monomials(n * m, k)


def test_enumeration_is_graded():
    degs = [a.degree for a in multi_index_enumerate(matrix_ball(2, 2), 3)]
    assert degs == sorted(degs)


def test_unit_ball_equals_matrix_ball_column():
    b, mb = unit_ball(3), matrix_ball(3, 1)
    assert (b.genus, b.rank, b.dim, b.tube_dim) == (mb.genus, mb.rank, mb.dim, mb.tube_dim)
    rng = np.random.default_rng(0)
    z = (rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3))) * 0.3
    np.testing.assert_array_equal(contains(b, z), contains(mb, z.reshape(20, 3, 1)))
    inside = z[contains(b, z)]
    np.testing.assert_allclose(density_unnormalized(b, 5.0, inside),
                               density_unnormalized(mb, 5.0, inside.reshape(-1, 3, 1)))
    assert [a.entries for a in multi_index_enumerate(b, 3)] == \
        [a.entries for a in multi_index_enumerate(mb, 3)]


def test_as_points_rejects_bad_shape():
    with pytest.raises(DomainError):
        as_points(unit_ball(2), np.zeros(3))


def test_domain_json_roundtrip():
    d = matrix_ball(2, 3)
    assert type(d).from_json(d.to_json()) == d


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=4, max_size=4))
def test_multi_index_degree_is_entry_sum(entries):
    a = MultiIndex.from_grid(np.array(entries).reshape(2, 2))
    assert a.degree == sum(entries)
    assert a.grid.sum() == a.degree


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3),
       st.lists(st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
                min_size=9, max_size=9))
def test_membership_is_singular_value_test(n, m, vals):
    z = np.array(vals[: n * m]).reshape(n, m)
    dom = make_domain("unit_ball" if m == 1 else "matrix_ball", n, m)
    top = np.linalg.svd(z, compute_uv=False)[0]
    if abs(top - 1) > 1e-12:
        assert bool(contains(dom, z)) == (top < 1)


def test_index_array_shape():
    idx = multi_index_enumerate(matrix_ball(2, 2), 2)
    arr = index_array(idx)
    assert arr.shape[0] == 15 and arr.reshape(15, -1).sum(axis=1).max() == 2
