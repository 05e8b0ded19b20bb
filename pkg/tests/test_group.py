import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergman_toeplitz import (GroupElement, GroupError, average_operator, average_symbol,
                              bergman_basis, disk, hyperbolic_arc, hyperbolic_subgroup,
                              intertwine_defect, invariance_defect, jacobian_factor, k_invariant,
                              matrix_ball, maximal_compact_subgroup, mc_sample, mobius_apply,
                              parabolic, parabolic_subgroup, pi_lambda_matrix, pkp_assemble,
                              pkp_factorize, radial, radial_rule, real_form, real_form_subgroup,
                              rotation_subgroup, subgroup_from_name, toeplitz_matrix,
                              torus_invariant, torus_subgroup, unit_ball)
from bergman_toeplitz.group import continued_power
from bergman_toeplitz.symbols import expression

from oracles import numerical_jacobian_det, su_nm_generator


def random_element(rng, n, m, scale=0.5):
    return GroupElement.from_generator(su_nm_generator(rng, n, m, scale), 1.0, n, m)


def random_points(rng, n, m, count, radius=0.8):
    z = rng.standard_normal((count, n, m)) + 1j * rng.standard_normal((count, n, m))
    top = np.linalg.svd(z, compute_uv=False)[:, 0]
    return z * (radius * rng.random(count) / top)[:, None, None]


def test_membership_and_generators():
    with pytest.raises(GroupError):
        GroupElement(np.diag([2.0, 0.5]), 1, 1)  # preserves det but not J
    with pytest.raises(GroupError):
        GroupElement.from_generator(np.array([[0, 1], [-1, 0]], complex), 1.0, 1, 1)
    g = random_element(np.random.default_rng(0), 2, 2)
    assert g.membership_defect < 1e-12
    assert np.allclose((g @ g.inverse()).matrix, np.eye(4), atol=1e-12)


def test_identity_acts_trivially():
    z = random_points(np.random.default_rng(1), 2, 2, 10)
    e = GroupElement.identity(2, 2)
    np.testing.assert_allclose(mobius_apply(e, z), z)
    np.testing.assert_allclose(jacobian_factor(e, z), 1.0)


def test_hyperbolic_boost_moves_origin():
    t = 0.5
    g = hyperbolic_subgroup().element(t)
    np.testing.assert_allclose(g.matrix, [[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]],
                               atol=1e-14)
    assert mobius_apply(g, 0.0)[0, 0, 0] == pytest.approx(np.tanh(t), abs=1e-15)


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_group_law(n, m):
    rng = np.random.default_rng(n * 10 + m)
    z = random_points(rng, n, m, 50)
    for _ in range(5):
        g1, g2 = random_element(rng, n, m), random_element(rng, n, m)
        lhs = mobius_apply(g1, mobius_apply(g2, z))
        rhs = mobius_apply(g1 @ g2, z)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (2, 2)])
def test_jacobian_against_finite_differences(n, m):
    rng = np.random.default_rng(3)
    g = random_element(rng, n, m)
    for z in random_points(rng, n, m, 4, 0.6):
        fd = numerical_jacobian_det(lambda w: mobius_apply(g, w)[0], z)
        assert jacobian_factor(g, z)[0] == pytest.approx(fd, rel=1e-7)


def test_rotation_jacobian():
    th = 0.7
    g = GroupElement(np.diag([np.exp(0.5j * th), np.exp(-0.5j * th)]), 1, 1)
    z = np.array([0.1, 0.5j, -0.3 + 0.2j])
    np.testing.assert_allclose(jacobian_factor(g, z), np.exp(1j * th))
    np.testing.assert_allclose(mobius_apply(g, z)[:, 0, 0], np.exp(1j * th) * z)


@pytest.mark.parametrize("n,m", [(1, 1), (2, 2), (2, 1)])
def test_jacobian_cocycle(n, m):
    rng = np.random.default_rng(4)
    z = random_points(rng, n, m, 30)
    g1, g2 = random_element(rng, n, m), random_element(rng, n, m)
    lhs = jacobian_factor(g1 @ g2, z)
    rhs = jacobian_factor(g1, mobius_apply(g2, z)) * jacobian_factor(g2, z)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


def test_pkp_examples():
    a = np.array([[2.0, 1j], [0, 1]])
    d = np.array([[1.0, 0], [1, 3j]])
    blk = np.zeros((4, 4), complex)
    blk[:2, :2], blk[2:, 2:] = a, d
    pp, (k1, k2), pm = pkp_factorize(blk, 2, 2)
    assert np.allclose(pp, 0) and np.allclose(pm, 0)
    np.testing.assert_allclose(k1, a)
    np.testing.assert_allclose(k2, d)
    z = np.array([[0.1, 0.2j], [0.3, -0.4]])
    up = np.eye(4, dtype=complex)
    up[:2, 2:] = z
    pp, (k1, k2), pm = pkp_factorize(up, 2, 2)
    np.testing.assert_allclose(pp, z)
    np.testing.assert_allclose(k1, np.eye(2))
    np.testing.assert_allclose(pm, 0)


def test_pkp_reassembly():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_element(rng, 2, 2, scale=0.8).matrix
        assert np.max(np.abs(pkp_assemble(*pkp_factorize(g, 2, 2)) - g)) < 1e-10


def test_continued_power_integer_case():
    # lam = p: the power is j itself, no branch ambiguity
    rng = np.random.default_rng(6)
    g = random_element(rng, 2, 1)
    z = random_points(rng, 2, 1, 20)
    np.testing.assert_allclose(continued_power(g, z, 3.0), jacobian_factor(g, z), rtol=1e-10)


def test_continued_power_tracks_winding():
    # rotation by theta: j = e^{i theta}; the continued power is e^{i lam theta / p}
    rot = rotation_subgroup()
    z = np.zeros((1, 1, 1), complex)
    for th in (1.0, 3.5, 5.9, -4.0):
        v = continued_power(rot.element(th), z, 2.5)
        assert v[0] == pytest.approx(np.exp(1j * 2.5 * th / 2), abs=1e-12)


def test_pi_identity_and_rotation():
    basis = bergman_basis(disk(), 2.0, 10)
    np.testing.assert_allclose(pi_lambda_matrix(basis, GroupElement.identity(1, 1)).entries,
                               np.eye(11), atol=1e-13)
    th = 0.9
    u = pi_lambda_matrix(basis, rotation_subgroup().element(th)).entries
    k = np.arange(11)
    np.testing.assert_allclose(u, np.diag(np.exp(-1j * (k + 1) * th)), atol=1e-13)


def test_pi_fractional_weight_rotation():
    lam, th = 2.5, 2.2
    basis = bergman_basis(disk(), lam, 8)
    u = pi_lambda_matrix(basis, rotation_subgroup().element(th)).entries
    k = np.arange(9)
    np.testing.assert_allclose(u, np.diag(np.exp(-1j * (k + lam / 2) * th)), atol=1e-13)


def test_pi_unitary_and_homomorphic_on_compact_elements():
    basis = bergman_basis(disk(), 2.5, 16)
    rot = rotation_subgroup()
    u = pi_lambda_matrix(basis, rot.element(1.3)).entries
    assert np.linalg.norm(u.conj().T @ u - np.eye(17), 2) < 1e-8
    v = pi_lambda_matrix(basis, rot.element(0.4)).entries
    w = pi_lambda_matrix(basis, rot.element(1.7)).entries
    np.testing.assert_allclose(u @ v, w, atol=1e-12)

    b2 = bergman_basis(unit_ball(2), 3.5, 5)
    for h in maximal_compact_subgroup(2, 1).sample(4, 0):
        u = pi_lambda_matrix(b2, h).entries
        assert np.linalg.norm(u.conj().T @ u - np.eye(b2.dim), 2) < 1e-8


def test_pi_on_matrix_ball():
    rule = mc_sample(matrix_ball(2, 2), 5.0, 50_000, 2)
    basis = bergman_basis(matrix_ball(2, 2), 5.0, 2, rule)
    # torus elements act diagonally on monomials, so the result is exact
    h = torus_subgroup(2, 2).element([0.3, 1.1, -0.4])
    u = pi_lambda_matrix(basis, h).entries
    assert np.linalg.norm(u.conj().T @ u - np.eye(basis.dim), 2) < 1e-8
    assert np.all(np.abs(u[~basis.mask]) < 1e-10)
    # general K elements: unitary up to the Monte Carlo error of the basis Gram
    for g in maximal_compact_subgroup(2, 2).sample(3, 1):
        u = pi_lambda_matrix(basis, g).entries
        assert np.linalg.norm(u.conj().T @ u - np.eye(basis.dim), 2) < 5e-2


def test_pi_noncompact_needs_rule():
    basis = bergman_basis(disk(), 2.0, 30)
    g = hyperbolic_subgroup().element(0.3)
    with pytest.raises(GroupError):
        pi_lambda_matrix(basis, g)
    with pytest.raises(GroupError):
        pi_lambda_matrix(basis, g, exact=False)
    u = pi_lambda_matrix(basis, g, exact=False, rule=radial_rule(disk(), 2.0, 60)).entries
    # pi(g) 1 is a unit vector of H^2; the truncation keeps almost all of it
    assert np.sum(np.abs(u[:, 0]) ** 2) == pytest.approx(1.0, abs=1e-8)


def test_pi_rejects_wrong_weight():
    basis = bergman_basis(disk(), 2.0, 4)
    with pytest.raises(GroupError):
        pi_lambda_matrix(basis, GroupElement.identity(1, 1), lam=3.0)


def test_intertwining():
    rule = radial_rule(disk(), 2.0, 20)
    basis = bergman_basis(disk(), 2.0, 16)
    rot = rotation_subgroup()
    assert intertwine_defect(basis, GroupElement.identity(1, 1), expression("real(z)", 1.0), rule) < 1e-12
    assert intertwine_defect(basis, rot.element(np.pi / 3), expression("real(z)", 1.0), rule) < 1e-6
    b = bergman_basis(disk(), 2.5, 16)
    r = radial_rule(disk(), 2.5, 20)
    assert intertwine_defect(b, rot.element(1.0), radial("exp(-r**2)"), r) < 1e-8


def test_intertwining_detects_wrong_translate():
    # using phi instead of phi_h on the right breaks the identity for non-invariant phi
    rule = radial_rule(disk(), 2.0, 20)
    basis = bergman_basis(disk(), 2.0, 10)
    h = rotation_subgroup().element(np.pi / 3)
    u = pi_lambda_matrix(basis, h).entries
    t = toeplitz_matrix(basis, expression("real(z)", 1.0), rule).entries
    assert np.linalg.norm(u @ t - t @ u, 2) > 0.1


def test_average_symbol():
    rot = rotation_subgroup()
    g = rot.rule(points_per_circle=16)
    z = np.array([0.1, 0.4 + 0.3j, -0.7j]).reshape(-1, 1, 1)
    one = average_symbol(rot, radial("r**2"), g)
    np.testing.assert_allclose(one(z), np.abs(z[:, 0, 0]) ** 2, atol=1e-15)
    assert one.invariance == "rotation"
    np.testing.assert_allclose(average_symbol(rot, expression("real(z)", 1.0), g)(z), 0, atol=1e-15)
    both = radial("r**2") + expression("real(z)", 1.0)
    np.testing.assert_allclose(average_symbol(rot, both, g)(z), np.abs(z[:, 0, 0]) ** 2, atol=1e-15)
    with pytest.raises(GroupError):
        average_symbol(hyperbolic_subgroup(), radial("r"), g)


def test_average_operator_both_ways():
    lam = 2.0
    rot = rotation_subgroup()
    g = rot.rule(points_per_circle=40)
    basis = bergman_basis(disk(), lam, 16)
    rule = radial_rule(disk(), lam, 20)
    t_rad = toeplitz_matrix(basis, radial("r**2"), rule)
    np.testing.assert_allclose(average_operator(rot, basis, t_rad, g).entries, t_rad.entries, atol=1e-12)
    t_re = toeplitz_matrix(basis, expression("real(z)", 1.0), rule)
    assert np.max(np.abs(average_operator(rot, basis, t_re, g).entries)) < 1e-8
    phi = radial("r**2") + expression("real(z)", 1.0)
    avg_t = average_operator(rot, basis, toeplitz_matrix(basis, phi, rule), g).entries
    np.testing.assert_allclose(avg_t, t_rad.entries, atol=1e-8)
    t_hat = toeplitz_matrix(basis, average_symbol(rot, phi, g), rule).entries
    np.testing.assert_allclose(avg_t, t_hat, atol=1e-8)


def test_subgroup_samples_are_members():
    for sg in (torus_subgroup(2, 2), maximal_compact_subgroup(2, 2), rotation_subgroup(),
               hyperbolic_subgroup(), parabolic_subgroup(), real_form_subgroup(2),
               real_form_subgroup(3)):
        for h in sg.sample(10, 3):
            assert h.membership_defect < 1e-10
    with pytest.raises(GroupError):
        subgroup_from_name("lorentz")
    with pytest.raises(GroupError):
        hyperbolic_subgroup().rule()


@pytest.mark.parametrize("sym,group,dom", [
    (radial("exp(-r**2)"), "rotation", disk()),
    (hyperbolic_arc("cos(u)**2"), "hyperbolic", disk()),
    (parabolic("t**2"), "parabolic_n", disk()),
    (real_form("cot(t)**2"), "real_form", unit_ball(2)),
    (radial("r**3"), "maximal_compact", unit_ball(2)),
    (k_invariant("arctan(t2)"), "maximal_compact", matrix_ball(2, 2)),
    (torus_invariant("cross_re + a12"), "torus", matrix_ball(2, 2)),
])
def test_declared_invariance(sym, group, dom):
    n, m = dom.shape
    rep = invariance_defect(sym, subgroup_from_name(group, n, m), dom, elements=20, points=100)
    assert rep["max_defect"] < 1e-9
    assert rep["max_membership_defect"] < 1e-10


@pytest.mark.parametrize("sym,group,dom", [
    (radial("r**2"), "hyperbolic", disk()),
    (hyperbolic_arc("cos(u)**2"), "parabolic_n", disk()),
    (real_form("cot(t)**2"), "maximal_compact", unit_ball(2)),
    (torus_invariant("cross_re"), "maximal_compact", matrix_ball(2, 2)),
])
def test_invariance_check_has_power(sym, group, dom):
    n, m = dom.shape
    rep = invariance_defect(sym, subgroup_from_name(group, n, m), dom, elements=20, points=100)
    assert rep["max_defect"] > 1e-3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(1, 1), (2, 1), (2, 2), (1, 2)]))
def test_action_preserves_domain_and_inverts(seed, shape):
    n, m = shape
    rng = np.random.default_rng(seed)
    g = random_element(rng, n, m, scale=0.7)
    z = random_points(rng, n, m, 20, 0.95)
    w = mobius_apply(g, z)
    assert np.all(np.linalg.svd(w, compute_uv=False)[:, 0] < 1)
    np.testing.assert_allclose(mobius_apply(g.inverse(), w), z, atol=1e-9)
