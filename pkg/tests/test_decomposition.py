"""Isometry subspaces, Wold/canonical/Levan splits, and the l_p showcase."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab import decomposition, dilation, operators, shifts, spaces
from banachlab.errors import ArgumentError
from banachlab.subspace import principal_angle

# ---------------------------------------------------------------------------
# coordinate spans and the showcase index formulas


def test_coordinate_span_basics():
    sp = spaces.Lp(5, 3.0)
    sub = decomposition.coordinate_span(sp, [3, 1, 1])
    assert sub.dim == 2
    assert decomposition.coordinate_span(sp, []).dim == 0
    with pytest.raises(ArgumentError):
        decomposition.coordinate_span(sp, [5])


def test_gallery_index_formulas_at_the_acceptance_window():
    window, nmax = 64, 8
    x_idx = decomposition.gallery_x_indices(window, nmax)
    w_idx = decomposition.gallery_unitary_indices(window)
    s_idx = decomposition.gallery_shift_indices(window, nmax)
    assert w_idx == [4 * k + 1 for k in range(16)]
    # chains survive nmax steps only while 4k+3 + 4*nmax stays inside
    assert s_idx == [4 * k + 3 for k in range(8)]
    assert sorted(w_idx + s_idx) == x_idx
    assert len(x_idx) == 24 and len(w_idx) == 16 and len(s_idx) == 8


def test_gallery_operator_columns():
    t = decomposition.gallery_operator(16, 3.0)
    m = t.matrix
    assert m[0, 0] == pytest.approx(0.5)  # e_0 contracted by 2^-1
    assert m[2, 2] == pytest.approx(0.25)  # e_2 contracted by 2^-2
    assert m[1, 1] == pytest.approx(1.0)  # fixed point
    assert m[7, 3] == pytest.approx(1.0)  # chain edge e_3 -> e_7
    assert np.abs(m[:, 15]).max() == 0.0  # 15 + 4 leaves the window
    with pytest.raises(ArgumentError):
        decomposition.gallery_operator(7)


# ---------------------------------------------------------------------------
# isometry subspaces: structural versus dilation-kernel routes


def _hilbert_diag():
    sp = spaces.Lp(3, 2.0)
    return operators.diagonal_operator(sp, [1.0, 0.5, np.exp(0.9j)])


def test_isometry_subspace_from_nagy_kernel():
    t = _hilbert_diag()
    bundle = dilation.build_nagy_dilation(t, 6)
    for n in (1, 2, 3):
        sub = decomposition.isometry_subspace(t, bundle, n)
        assert sub.dim == 2
        exp = decomposition.coordinate_span(t.domain, [0, 2])
        assert principal_angle(sub, exp) < 1e-8
    with pytest.raises(ArgumentError):
        decomposition.isometry_subspace(t, bundle, bundle.depth)


def test_x_of_T_structural_and_dilation_agree():
    t = _hilbert_diag()
    struct = decomposition.x_of_T(t, 4, method="structural")
    assert struct.is_subspace and struct.subspace.dim == 2
    bundle = dilation.build_nagy_dilation(t, 8)
    dil = decomposition.x_of_T(t, 4, method="dilation", bundle=bundle)
    assert dil.is_subspace and dil.subspace.dim == 2
    assert principal_angle(struct.subspace, dil.subspace) < 1e-8


def test_x_of_T_guards():
    t = _hilbert_diag()
    with pytest.raises(ArgumentError):
        decomposition.x_of_T(t, 3, method="dilation")  # no bundle
    with pytest.raises(ArgumentError):
        decomposition.x_of_T(t, 3, method="sampled-only")


def test_x_of_T_not_a_subspace_on_l1():
    # (x, y, z) -> (x - y, 0, z): e_1 and e_3 are isometric directions
    # but their sum loses mass, so the isometric set has no linear span
    sp = spaces.Lp(3, 1.0)
    m = np.array([[1, -1, 0], [0, 0, 0], [0, 0, 1]], dtype=np.complex128)
    t = operators.Operator(m, sp, sp)
    xres = decomposition.x_of_T(t, 3, restarts=8, seed=0)
    assert not xres.is_subspace
    assert xres.subspace is None
    u, v = xres.failing_pair
    for w in (u, v):
        assert spaces._norm(sp, m @ w) == pytest.approx(
            spaces._norm(sp, w), abs=1e-7
        )
    s = u + v
    assert spaces._norm(sp, m @ s) < spaces._norm(sp, s) - 1e-7
    res = decomposition.canonical_decompose(t, 3, seed=0)
    assert not res.ok
    assert "closure" in res.refusal


def test_x_of_T_subspace_while_triangle_fails():
    # (x, y, z) -> (x, lam (y - z), 0) on l_1^3: A_T is not even a
    # seminorm, yet the isometric directions do form the line through e_1
    sp = spaces.Lp(3, 1.0)
    lam = 0.5
    m = np.array(
        [[1, 0, 0], [0, lam, -lam], [0, 0, 0]], dtype=np.complex128
    )
    t = operators.Operator(m, sp, sp)
    cert = dilation.triangle_violation_search(t, budget=8, seed=0)
    assert cert.verdict == "violation"
    xres = decomposition.x_of_T(t, 3, restarts=8, seed=0)
    assert xres.is_subspace
    line = decomposition.coordinate_span(sp, [0])
    assert principal_angle(xres.subspace, line) < 1e-7


# ---------------------------------------------------------------------------
# canonical and Levan splits on the showcase


def test_canonical_decompose_small_window():
    window, nmax = 16, 3
    t = decomposition.gallery_operator(window, 3.0)
    res = decomposition.canonical_decompose(t, nmax, seed=0)
    assert res.ok
    w_exp = decomposition.coordinate_span(
        t.domain, decomposition.gallery_unitary_indices(window)
    )
    assert principal_angle(res.parts["unitary"], w_exp) < 1e-9
    x_exp = decomposition.coordinate_span(
        t.domain, decomposition.gallery_x_indices(window, nmax)
    )
    assert principal_angle(res.parts["x_of_t"], x_exp) < 1e-9
    assert res.residuals["left_inverse_on_xt"] <= 1e-12
    assert res.residuals["w_invariance"] <= 1e-12
    assert res.residuals["w_surjectivity"] == 0.0
    assert res.residuals["w_isometry"] <= 1e-12
    assert res.residuals["cnu_counterexample_gap"] > 1e-3
    # the left inverse really reverses T on X(T)
    a = res.notes["left_inverse"]
    for j in res.notes["x_indices"]:
        e = np.zeros(window, dtype=np.complex128)
        e[j] = 1.0
        assert np.abs(a @ (t.matrix @ e) - e).max() < 1e-12


def test_levan_refinement_partitions_the_window():
    window, nmax = 16, 3
    t = decomposition.gallery_operator(window, 3.0)
    lev = decomposition.levan_decompose(t, nmax, seed=0)
    assert lev.ok
    u = lev.parts["unitary"]
    s = lev.parts["shift"]
    rest = lev.parts["non_isometric"]
    assert u.dim + s.dim + rest.dim == window
    s_exp = decomposition.coordinate_span(
        t.domain, decomposition.gallery_shift_indices(window, nmax)
    )
    assert principal_angle(s, s_exp) < 1e-9
    # coordinate parts are mutually orthogonal
    assert np.abs(u.q.conj().T @ s.q).max() < 1e-12
    assert np.abs(u.q.conj().T @ rest.q).max() < 1e-12
    assert lev.residuals["cni_counterexample_gap"] > 1e-3


def test_levan_refuses_without_orbit_annotation():
    sp = spaces.Lp(3, 1.0)
    m = np.array([[1, -1, 0], [0, 0, 0], [0, 0, 1]], dtype=np.complex128)
    t = operators.Operator(m, sp, sp)
    lev = decomposition.levan_decompose(t, 3, seed=0)
    assert not lev.ok


# ---------------------------------------------------------------------------
# Wold decompositions of annotated isometries


def test_wold_pure_shift():
    v = shifts.make_unilateral_shift(spaces.Lp(2, 3.0), 4)
    res = decomposition.wold_decompose(v, seed=0)
    assert res.parts["surjective"].dim == 0
    assert res.parts["shift"].dim == spaces.dim(v.domain)
    assert res.parts["wandering"].dim == 2
    assert res.residuals["wandering_bj_gap"] <= 1e-9
    assert res.residuals["dimension_split"] == 0.0


def test_wold_unitary_plus_shift_recovers_both_parts():
    th = 0.7
    u_mat = np.exp(0.3j) * np.array(
        [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]],
        dtype=np.complex128,
    )
    u_op = operators.Operator(u_mat, spaces.Lp(2, 2.0), spaces.Lp(2, 2.0))
    v = shifts.make_unitary_plus_shift(u_op, spaces.Lp(1, 3.0), 4)
    res = decomposition.wold_decompose(v, seed=0)
    x1_exp = decomposition.coordinate_span(v.domain, [0, 1])
    x2_exp = decomposition.coordinate_span(v.domain, [2, 3, 4, 5])
    assert principal_angle(res.parts["surjective"], x1_exp) < 1e-9
    assert principal_angle(res.parts["shift"], x2_exp) < 1e-9
    assert res.residuals["x1_invariance"] <= 1e-12
    assert res.residuals["x1_surjectivity"] <= 1e-9
    assert res.residuals["x1_isometry"] <= 1e-10
    assert abs(res.residuals["dimension_split"]) < 0.5
    # the compressed surjective block is the rotation again
    ru = res.restrictions["surjective"]
    assert np.abs(ru.conj().T @ ru - np.eye(2)).max() < 1e-12


def test_wold_refuses_unannotated_operators():
    sp = spaces.Lp(3, 2.0)
    t = operators.diagonal_operator(sp, [1.0, 1.0, 1.0])
    with pytest.raises(ArgumentError):
        decomposition.wold_decompose(t)


# ---------------------------------------------------------------------------
# property: unit-modulus diagonal entries are exactly X(T)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.sampled_from([1.0, 0.9, 0.5, 0.2]), min_size=2, max_size=6
    ),
    st.integers(0, 2**31 - 1),
)
def test_diagonal_x_of_T_is_the_unit_modulus_span(mods, seed):
    rng = np.random.default_rng(seed)
    vals = [m * np.exp(1j * rng.uniform(0, 2 * np.pi)) for m in mods]
    sp = spaces.Lp(len(mods), 3.0)
    t = operators.diagonal_operator(sp, vals)
    xres = decomposition.x_of_T(t, 5, method="structural")
    assert xres.is_subspace
    idx = [i for i, m in enumerate(mods) if m == 1.0]
    exp = decomposition.coordinate_span(sp, idx)
    assert xres.subspace.dim == exp.dim
    if idx:
        assert principal_angle(xres.subspace, exp) < 1e-10
