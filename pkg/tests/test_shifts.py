import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab import operators, shifts, spaces
from banachlab.errors import ArgumentError


def test_unilateral_shift_is_isometric_below_the_rim():
    base = spaces.Lp(2, 3.0)
    v = shifts.make_unilateral_shift(base, 4)
    x = spaces.zero(v.domain)
    x[:6] = np.array([1.0, -0.5, 0.25j, 0.1, 0.0, 2.0])
    assert spaces.norm(v.domain, v.matrix @ x) == pytest.approx(
        spaces.norm(v.domain, x), rel=1e-12
    )
    # the top block is truncated away
    top = spaces.embed_block(v.domain, 3, [1.0, 0.0])
    assert spaces.norm(v.domain, v.matrix @ top) == 0.0


def test_backward_shift_reverses_blocks():
    base = spaces.Lp(1, 2.0)
    b = shifts.make_backward_shift(base, 3)
    x = np.array([1.0, 2.0, 3.0], dtype=np.complex128)
    assert np.allclose(b.matrix @ x, [2.0, 3.0, 0.0])


def test_flat_shift_moves_coordinates():
    v = shifts.make_flat_shift(spaces.Lp(4, 3.0), 1)
    e1 = spaces.basis_vector(v.domain, 0)
    assert np.allclose(v.matrix @ e1, spaces.basis_vector(v.domain, 1))


def test_unitary_plus_shift_structure():
    th = 0.9
    u_mat = np.array(
        [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]],
        dtype=np.complex128,
    )
    u_op = operators.Operator(u_mat, spaces.Lp(2, 2.0), spaces.Lp(2, 2.0))
    v = shifts.make_unitary_plus_shift(u_op, spaces.Lp(1, 3.0), 3)
    assert spaces.dim(v.domain) == 5
    assert np.allclose(v.matrix[:2, :2], u_mat)
    x = spaces.zero(v.domain)
    x[:4] = [0.5, -0.5, 1.0, 0.25]
    assert spaces.norm(v.domain, v.matrix @ x) == pytest.approx(
        spaces.norm(v.domain, x), rel=1e-12
    )


def test_sigma_shift_bilateral_norms_coincide():
    bundle = shifts.make_sigma_shift(spaces.Lp(1, 3.0), 4)
    rng = np.random.default_rng(0)
    for _ in range(5):
        l = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        # the two norms are one and the same norm here
        assert bundle.norm_sigma(l) == bundle.norm_y(l)
        l[-1] = 0.0  # boundary-safe: the rim block is truncated away
        assert bundle.norm_y(bundle.vtilde.matrix @ l) == pytest.approx(
            bundle.norm_sigma(l), rel=1e-12
        )
    assert bundle.kind == "bilateral"


def test_sigma_extension_root_two_inequality_and_embedding():
    v = shifts.make_flat_shift(spaces.Lp(8, 3.0), 1)
    bundle = shifts.sigma_extension(v)
    rng = np.random.default_rng(1)
    for _ in range(10):
        l = rng.standard_normal(spaces.dim(bundle.space))
        l = l + 1j * rng.standard_normal(l.size)
        ns, ny = bundle.norm_sigma(l), bundle.norm_y(l)
        assert ns <= math.sqrt(2.0) * ny + 1e-9
        assert bundle.norm_y(bundle.vtilde.matrix @ l) == pytest.approx(
            ns, rel=1e-12
        )
    x = spaces.random_unit(v.domain, 2)
    emb = shifts.extension_embed(bundle, x)
    assert bundle.norm_y(emb) == pytest.approx(1.0, rel=1e-12)
    lhs = bundle.vtilde.matrix @ emb
    rhs = shifts.extension_embed(bundle, v.matrix @ x)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_sigma_extension_norms_differ_off_the_diagonal():
    v = shifts.make_flat_shift(spaces.Lp(8, 3.0), 1)
    bundle = shifts.sigma_extension(v)
    probe = bundle.safe_embed({0: [1.0], -1: [1.0]})
    ratio = bundle.norm_sigma(probe) / bundle.norm_y(probe)
    # one slot pair lands disjointly, the other stacks on one coordinate:
    # the ratio is 2^(1/3) / 2^(1/2)
    assert ratio == pytest.approx(2.0 ** (1.0 / 3.0 - 0.5), rel=1e-9)


def test_sigma_extension_hilbert_collapses():
    v = shifts.make_flat_shift(spaces.Lp(8, 2.0), 1)
    bundle = shifts.sigma_extension(v)
    rng = np.random.default_rng(3)
    d = spaces.dim(bundle.base)
    for _ in range(10):
        l = rng.standard_normal(spaces.dim(bundle.space))
        l = l + 1j * rng.standard_normal(l.size)
        l[l.size - d :] = 0.0  # boundary-safe: the shift drops the rim slot
        assert bundle.norm_sigma(l) == pytest.approx(
            bundle.norm_y(l), rel=1e-9
        )


def test_sigma_extension_refuses_non_shifts():
    sp = spaces.Lp(3, 2.0)
    t = operators.diagonal_operator(sp, [0.5, 0.5, 0.5])
    with pytest.raises(ArgumentError):
        shifts.sigma_extension(t)


def test_spectrum_probe_unit_circle_versus_interior():
    bundle = shifts.make_sigma_shift(spaces.Lp(1, 3.0), 12)
    on_circle = shifts.spectrum_probe(bundle, 1.0, seed=0, maxiter=60)
    inside = shifts.spectrum_probe(bundle, 0.5, seed=0, maxiter=60)
    assert on_circle < 0.25
    assert inside >= 0.5 - 1e-12
    # the window residual shrinks as the window grows
    larger = shifts.make_sigma_shift(spaces.Lp(1, 3.0), 24)
    assert (
        shifts.spectrum_probe(larger, 1.0, seed=0, maxiter=60)
        <= on_circle + 1e-12
    )


def test_spectrum_probe_horizon_guard():
    bundle = shifts.make_sigma_shift(spaces.Lp(1, 2.0), 4)
    with pytest.raises(ArgumentError):
        shifts.spectrum_probe(bundle, 1.0, horizon=9)


def test_spectrum_scan_schema():
    bundle = shifts.make_sigma_shift(spaces.Lp(1, 2.0), 4)
    rows = shifts.spectrum_scan(bundle, [1.0, 1.0j], seed=0)
    assert len(rows) == 2
    for lam_re, lam_im, residual, horizon in rows:
        assert isinstance(residual, float) and residual >= 0.0
        assert horizon == 3
    assert rows[1][0] == pytest.approx(0.0)
    assert rows[1][1] == pytest.approx(1.0)


def test_phi_alpha_group_law_and_guard():
    sp = spaces.Lp(3, 2.0)
    rng = np.random.default_rng(4)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    t = operators.Operator(m / (2 * np.linalg.norm(m, 2)), sp, sp)
    phi = shifts.phi_alpha(t, 0.3 + 0.2j)
    back = shifts.phi_alpha(phi, -(0.3 + 0.2j))
    assert np.abs(back.matrix - t.matrix).max() < 1e-10
    assert phi.annotation["kind"] == "mobius"
    with pytest.raises(ArgumentError):
        shifts.phi_alpha(t, 1.0)


def test_phi_alpha_fixed_point_of_zero_is_minus_alpha():
    sp = spaces.Lp(2, 2.0)
    z = operators.Operator(np.zeros((2, 2), dtype=np.complex128), sp, sp)
    phi = shifts.phi_alpha(z, 0.5)
    assert np.allclose(phi.matrix, -0.5 * np.eye(2))


def test_mobius_expands_rank_one_on_l3():
    sp = spaces.Lp(2, 3.0)
    t = operators.rank_one_operator(
        sp, spaces.basis_vector(sp, 0), spaces.basis_vector(sp, 1), 0.99
    )
    assert operators.operator_norm(t).value <= 1.0
    phi = shifts.phi_alpha(t, 0.45)
    est = operators.operator_norm(phi, seed=0)
    assert est.value > 1.0 + 1e-3
    # frozen from an alpha-grid refinement: the best real alpha near 0.45
    # pushes the norm to about 1.0234
    assert est.value == pytest.approx(1.0233793907938948, abs=1e-6)


def test_bilateral_phi_witness_dichotomy():
    w = shifts.bilateral_phi_witness(
        spaces.Lp(2, 3.0), alpha=0.5, samples=120, seed=0
    )
    assert w.ratio > 1.0 + 1e-4
    assert w.exact_application < 1e-12
    assert w.lhs > w.rhs
    # (U - alpha) x_vec occupies three slots: (-alpha x | x - alpha y | y),
    # and (I - conj(alpha) U) x_vec gives (x | y - conj(alpha) x | -conj(alpha) y)
    sp = spaces.Lp(2, 3.0)
    nx = spaces._norm(sp, w.x)
    ny = spaces._norm(sp, w.y)
    a2 = abs(w.alpha) ** 2
    expected = math.sqrt(
        (a2 * nx**2 + w.lhs**2 + ny**2) / (nx**2 + w.rhs**2 + a2 * ny**2)
    )
    assert w.ratio == pytest.approx(expected, rel=1e-9)
    h = shifts.bilateral_phi_witness(
        spaces.Lp(1, 2.0), alpha=0.5, samples=60, seed=0
    )
    assert h.ratio <= 1.0 + 1e-9


def test_block_subspace_picks_one_slot():
    bundle = shifts.make_sigma_shift(spaces.Lp(2, 2.0), 3)
    gen = bundle.generating
    assert gen.dim == 2
    v = gen.q[:, 0]
    assert np.abs(v[: 3 * 2]).max() == 0.0  # slots -3, -2, -1 empty


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31),
    st.floats(min_value=0.0, max_value=0.9),
)
def test_mobius_preserves_hilbert_contractions(seed, r):
    sp = spaces.Lp(2, 2.0)
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    m = m / (np.linalg.norm(m, 2) * (1.0 + rng.uniform(0.01, 1.0)))
    t = operators.Operator(m, sp, sp)
    alpha = r * np.exp(2j * np.pi * rng.uniform())
    phi = shifts.phi_alpha(t, alpha)
    assert operators.operator_norm(phi).value <= 1.0 + 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=2**31))
def test_sigma_shift_is_sigma_isometry_property(seed):
    bundle = shifts.make_sigma_shift(spaces.Lp(1, 1.5), 5)
    rng = np.random.default_rng(seed)
    l = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    l[-1] = 0.0  # stay below the rim so nothing is truncated
    assert bundle.norm_y(bundle.vtilde.matrix @ l) == pytest.approx(
        bundle.norm_sigma(l), rel=1e-12
    )
