import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stentsim import SingularMatrixError, ValidationError, paper_params
from stentsim.fem import (
    MEDIA,
    STENT,
    TridiagonalMatrix,
    assemble_a,
    assemble_b,
    assemble_mass,
    assemble_stiffness,
    build_mesh,
    build_operators,
    discrete_norm,
    solve_tridiagonal,
)

import oracles

P = paper_params()


def entrywise_close(dense, oracle, rtol=1e-12):
    scale = max(np.max(np.abs(oracle)), 1e-300)
    np.testing.assert_allclose(dense, oracle, rtol=rtol, atol=rtol * scale)


# ---------------------------------------------------------------- meshes


def test_media_mesh_quarters():
    m = build_mesh(MEDIA, 4)
    np.testing.assert_allclose(m.nodes, [0.0, 0.25, 0.5, 0.75, 1.0], atol=0)
    assert m.h == 0.25


def test_stent_mesh_two_elements():
    m = build_mesh(STENT, 2, l=0.028)
    np.testing.assert_allclose(m.nodes, [-0.028, -0.014, 0.0], atol=1e-18)
    assert m.h == pytest.approx(0.014, rel=1e-15)


def test_empty_mesh_rejected():
    with pytest.raises(ValidationError):
        build_mesh(MEDIA, 0)
    with pytest.raises(ValidationError):
        build_mesh(STENT, 3)  # missing thickness


@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_mesh_nodes_uniform(n):
    m = build_mesh(STENT, n, l=0.028)
    assert m.nodes[0] == m.a and m.nodes[-1] == m.b
    widths = np.diff(m.nodes)
    assert np.all(widths > 0)
    ulp_scale = 4 * np.finfo(float).eps * max(abs(m.a), abs(m.b))
    np.testing.assert_allclose(widths, m.h, rtol=0, atol=ulp_scale)


# ------------------------------------------------------------- assembly


def test_mass_media_two_elements():
    # h=0.5: diagonal (1/6, 1/3, 1/6), off-diagonal 1/12
    m = assemble_mass(build_mesh(MEDIA, 2))
    np.testing.assert_allclose(m.diag, [1 / 6, 1 / 3, 1 / 6], rtol=1e-15)
    np.testing.assert_allclose(m.lower, [1 / 12, 1 / 12], rtol=1e-15)
    np.testing.assert_allclose(m.upper, [1 / 12, 1 / 12], rtol=1e-15)


def test_mass_single_element():
    m = assemble_mass(build_mesh(MEDIA, 1))
    entrywise_close(m.to_dense(), [[1 / 3, 1 / 6], [1 / 6, 1 / 3]])


@pytest.mark.parametrize("domain,n", [(MEDIA, 1), (MEDIA, 5), (STENT, 1), (STENT, 9)])
def test_mass_partition_of_unity(domain, n):
    mesh = build_mesh(domain, n, l=P.l)
    m = assemble_mass(mesh)
    total = m.diag.sum() + m.lower.sum() + m.upper.sum()
    assert total == pytest.approx(mesh.b - mesh.a, rel=1e-13)


def test_stent_operator_single_element():
    # closed form: [[d/l, -d/l], [-d/l, d/l + d*P]]
    a = assemble_a(build_mesh(STENT, 1, l=P.l), P)
    dl = P.delta / P.l
    expected = [[dl, -dl], [-dl, dl + P.delta * P.p_tilde]]
    entrywise_close(a.to_dense(), expected)
    assert P.delta * P.p_tilde == pytest.approx(0.018, rel=1e-15)
    assert dl == pytest.approx(1.4285714285714286e-05, rel=1e-15)


@pytest.mark.parametrize("n", range(1, 65))
def test_assembly_matches_quadrature_oracle(n):
    mesh_s = build_mesh(STENT, n, l=P.l)
    mesh_m = build_mesh(MEDIA, n)
    entrywise_close(assemble_mass(mesh_m).to_dense(), oracles.quad_mass(mesh_m.nodes))
    entrywise_close(assemble_mass(mesh_s).to_dense(), oracles.quad_mass(mesh_s.nodes))
    entrywise_close(
        assemble_stiffness(mesh_m).to_dense(), oracles.quad_stiffness(mesh_m.nodes)
    )
    entrywise_close(assemble_a(mesh_s, P).to_dense(), oracles.quad_a(mesh_s.nodes, P))
    entrywise_close(assemble_b(mesh_m, P).to_dense(), oracles.quad_b(mesh_m.nodes, P))


@pytest.mark.parametrize("n", range(1, 65))
def test_row_sum_identities(n):
    # A @ 1 = delta*P * e_last;  B @ 1 = da * Psi_m @ 1 + (delta*P + pe) * e_first
    a = assemble_a(build_mesh(STENT, n, l=P.l), P)
    ones_s = np.ones(n + 1)
    expected_a = np.zeros(n + 1)
    expected_a[-1] = P.delta * P.p_tilde
    scale_a = np.max(np.abs(a.to_dense()))
    np.testing.assert_allclose(
        a.matvec(ones_s), expected_a, atol=1e-13 * max(scale_a, 1.0)
    )

    mesh_m = build_mesh(MEDIA, n)
    b = assemble_b(mesh_m, P)
    psi_m = assemble_mass(mesh_m)
    ones_m = np.ones(n + 1)
    expected_b = P.da * psi_m.matvec(ones_m)
    expected_b[0] += P.delta * P.p_tilde + P.pe
    scale_b = np.max(np.abs(b.to_dense()))
    np.testing.assert_allclose(
        b.matvec(ones_m), expected_b, atol=1e-13 * max(scale_b, 1.0)
    )
    # test-side constants: 1' B = da * (Psi_m 1)' + pe * e_last' + delta*P * e_first'
    col_sums = b.to_dense().sum(axis=0)
    expected_cols = P.da * psi_m.matvec(ones_m)
    expected_cols[-1] += P.pe
    expected_cols[0] += P.delta * P.p_tilde
    np.testing.assert_allclose(col_sums, expected_cols, atol=1e-13 * max(scale_b, 1.0))


def test_mass_matrices_spd_and_dominant():
    ops = build_operators(P, 8, 8)
    for m in (ops.psi_s, ops.psi_m):
        dense = m.to_dense()
        np.testing.assert_allclose(dense, dense.T, atol=0)
        assert np.all(m.diag > 0) and np.all(m.lower > 0)
        assert np.all(np.linalg.eigvalsh(dense) > 0)
        # strict diagonal dominance
        off = np.abs(dense).sum(axis=1) - np.abs(np.diag(dense))
        assert np.all(np.diag(dense) > off)


def test_stent_operator_symmetric_psd():
    ops = build_operators(P, 12, 8)
    dense = ops.mat_a.to_dense()
    np.testing.assert_allclose(dense, dense.T, atol=0)
    eigs = np.linalg.eigvalsh(dense)
    assert np.all(eigs > -1e-18)
    ones = np.ones(dense.shape[0])
    assert ones @ dense @ ones == pytest.approx(P.delta * P.p_tilde, rel=1e-12)


def test_media_operator_skew_split():
    # B minus its convection part is symmetric; the remainder is the
    # skew convection (whenever pe > 0, B itself is nonsymmetric)
    mesh_m = build_mesh(MEDIA, 6)
    b = assemble_b(mesh_m, P).to_dense()
    assert not np.allclose(b, b.T)
    stiff = assemble_stiffness(mesh_m).to_dense()
    mass = assemble_mass(mesh_m).to_dense()
    sym_part = stiff + P.da * mass
    sym_part[0, 0] += P.delta * P.p_tilde + P.pe
    conv = b - sym_part
    entrywise_close(conv, P.pe * oracles.quad_convection(mesh_m.nodes))


def test_b_corner_entry_matches_oracle():
    mesh_m = build_mesh(MEDIA, 2)
    b = assemble_b(mesh_m, P)
    oracle = oracles.quad_b(mesh_m.nodes, P)
    assert b.diag[0] == pytest.approx(oracle[0, 0], rel=1e-12)


# ------------------------------------------------------------ tridiagonal


def test_solve_identity():
    ident = TridiagonalMatrix(np.zeros(3), np.ones(4), np.zeros(3))
    rhs = np.array([1.0, -2.0, 3.0, 0.5])
    np.testing.assert_allclose(solve_tridiagonal(ident, rhs), rhs, atol=0)


def test_solve_constructed_solution():
    psi = assemble_mass(build_mesh(MEDIA, 2))
    ones = np.ones(3)
    x = solve_tridiagonal(psi, psi.matvec(ones))
    np.testing.assert_allclose(x, ones, rtol=1e-13)


def test_solve_random_dominant_residual():
    rng = np.random.default_rng(7)
    n = 100
    lower = rng.uniform(-1, 1, n - 1)
    upper = rng.uniform(-1, 1, n - 1)
    bulk = np.zeros(n)
    bulk[:-1] += np.abs(upper)
    bulk[1:] += np.abs(lower)
    diag = bulk + rng.uniform(0.5, 1.5, n)
    m = TridiagonalMatrix(lower, diag, upper)
    rhs = rng.standard_normal(n)
    x = solve_tridiagonal(m, rhs)
    resid = np.max(np.abs(m.matvec(x) - rhs))
    assert resid <= 1e-12 * (1.0 + np.max(np.abs(rhs)))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=2**31))
def test_solve_dominant_property(n, seed):
    rng = np.random.default_rng(seed)
    lower = rng.uniform(-1, 1, n - 1)
    upper = rng.uniform(-1, 1, n - 1)
    bulk = np.zeros(n)
    bulk[:-1] += np.abs(upper)
    bulk[1:] += np.abs(lower)
    diag = (bulk + rng.uniform(0.1, 2.0, n)) * rng.choice([-1.0, 1.0], n)
    m = TridiagonalMatrix(lower, diag, upper)
    rhs = rng.standard_normal(n)
    x = solve_tridiagonal(m, rhs)
    assert np.max(np.abs(m.matvec(x) - rhs)) <= 1e-12 * (1.0 + np.max(np.abs(rhs)))


def test_singular_pivot_detected():
    m = TridiagonalMatrix(np.array([1.0]), np.array([0.0, 1.0]), np.array([1.0]))
    with pytest.raises(SingularMatrixError, match="singular"):
        solve_tridiagonal(m, np.ones(2))


# ----------------------------------------------------------------- norms


def test_norm_examples():
    ops = build_operators(P, 10, 8)
    ones_m = np.ones(9)
    assert discrete_norm(ones_m, ops, "l2", MEDIA) == pytest.approx(1.0, rel=1e-14)
    ones_s = np.ones(11)
    assert discrete_norm(ones_s, ops, "l2", STENT) == pytest.approx(
        np.sqrt(0.028), rel=1e-14
    )
    assert discrete_norm(
        ops.mesh_m.nodes.copy(), ops, "h1_semi", MEDIA
    ) == pytest.approx(1.0, rel=1e-13)


def test_norm_dimension_mismatch():
    ops = build_operators(P, 4, 4)
    with pytest.raises(ValidationError, match="dimension mismatch"):
        discrete_norm(np.ones(3), ops, "l2", MEDIA)
    with pytest.raises(ValidationError):
        discrete_norm(np.ones(5), ops, "l2", "lumen")
    with pytest.raises(ValidationError):
        discrete_norm(np.ones(5), ops, "sup", MEDIA)
