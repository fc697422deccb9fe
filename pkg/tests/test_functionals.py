import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab import functionals, operators, shifts, spaces
from banachlab.errors import NonSmoothError


def test_support_functional_norms_and_value():
    sp = spaces.Lp(2, 3.0)
    x = np.array([1.0, 1.0], dtype=np.complex128)
    f = functionals.support_functional(sp, x)
    nx = spaces.norm(sp, x)
    assert functionals.dual_norm(sp, f) == pytest.approx(nx, rel=1e-10)
    assert functionals.apply_functional(f, x) == pytest.approx(
        nx * nx, rel=1e-10
    )


def test_support_functional_hilbert_is_the_vector_itself():
    sp = spaces.Lp(3, 2.0)
    x = np.array([1.0, -2.0j, 0.5], dtype=np.complex128)
    f = functionals.support_functional(sp, x)
    # pairing f(y) = sum f_i y_i, so f must be conj(x) on l_2
    assert np.allclose(f, x.conj())


def test_j_inverse_round_trip():
    sp = spaces.Lp(4, 3.0)
    x = spaces.random_unit(sp, 3)
    f = functionals.support_functional(sp, x)
    back = functionals.j_inverse(sp, f)
    assert np.allclose(back, x, atol=1e-9)


def test_functional_attainment_set():
    sp = spaces.Lp(2, 2.0)
    f = np.array([1.0, 0.0], dtype=np.complex128)
    att = functionals.functional_attainment(sp, f)
    assert spaces.norm(sp, att) == pytest.approx(1.0)
    assert abs(functionals.apply_functional(f, att)) == pytest.approx(1.0)


def test_hahn_banach_extension_on_hilbert_matches_projection():
    # on l_2 the minimal extension of f restricted to a plane is the
    # functional that kills the orthogonal complement
    sp = spaces.Lp(3, 2.0)
    basis = np.eye(3, dtype=np.complex128)[[0, 1]]
    ext = functionals.hahn_banach_extend(sp, basis, [2.0, -1.0], seed=0)
    assert ext.converged
    assert np.allclose(ext.coeffs, [2.0, -1.0, 0.0], atol=1e-7)
    assert ext.value == pytest.approx(ext.restriction_norm, rel=1e-7)


def test_hahn_banach_extension_preserves_restriction_norm_on_lp():
    sp = spaces.Lp(4, 3.0)
    basis = np.eye(4, dtype=np.complex128)[[0, 2]]
    ext = functionals.hahn_banach_extend(sp, basis, [1.0, 0.5j], seed=0)
    assert ext.converged
    # the extension is minimal: dual norm equals the restriction norm
    assert ext.value == pytest.approx(ext.restriction_norm, rel=1e-6)
    # and it interpolates the data
    assert ext.coeffs[0] == pytest.approx(1.0, abs=1e-7)
    assert ext.coeffs[2] == pytest.approx(0.5j, abs=1e-7)


def test_hahn_banach_refuses_non_smooth_spaces():
    sp = spaces.Lp(3, 1.0)
    with pytest.raises(NonSmoothError):
        functionals.hahn_banach_extend(
            sp, np.eye(3, dtype=np.complex128)[[0]], [1.0]
        )


def test_hb_linearity_probe_coordinate_subspace_is_additive():
    sp = spaces.Lp(4, 3.0)
    basis = np.zeros((2, 4), dtype=np.complex128)
    basis[0, 0] = basis[1, 1] = 1.0
    rep = functionals.hb_linearity_probe(sp, basis, trials=30, seed=0)
    assert rep.verdict == "linear"
    assert rep.defect < 1e-8


def test_hb_linearity_probe_skew_subspace_is_not():
    sp = spaces.Lp(4, 3.0)
    basis = np.zeros((2, 4), dtype=np.complex128)
    basis[0, 0] = basis[0, 1] = 1.0
    basis[1, 1] = basis[1, 2] = 1.0
    rep = functionals.hb_linearity_probe(sp, basis, trials=60, seed=0)
    assert rep.verdict == "nonlinear"
    assert rep.defect > 1e-3
    assert rep.witness is not None


def test_star_adjoint_on_hilbert_is_conjugate_transpose():
    sp = spaces.Lp(3, 2.0)
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    t = operators.Operator(m, sp, sp)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    got = functionals.star_adjoint_eval(t, x)
    assert np.allclose(got, m.conj().T @ x, atol=1e-9)


def test_star_adjoint_of_block_shift_is_backward_shift():
    base = spaces.Lp(2, 3.0)
    mz = shifts.make_unilateral_shift(base, 5)
    mhat = shifts.make_backward_shift(base, 5)
    rng = np.random.default_rng(1)
    x = spaces.zero(mz.domain)
    x[:8] = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    got = functionals.star_adjoint_eval(mz, x)
    assert np.abs(got - mhat.matrix @ x).max() < 1e-10


def test_star_linearity_dichotomy():
    sp2 = spaces.Lp(3, 2.0)
    rng = np.random.default_rng(2)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    t2 = operators.Operator(m / (2 * np.linalg.norm(m, 2)), sp2, sp2)
    rep2 = functionals.star_linearity_probe(t2, trials=30, seed=0)
    assert rep2.verdict == "linear"

    sp3 = spaces.Lp(3, 3.0)
    t3 = operators.rank_one_operator(
        sp3,
        spaces.basis_vector(sp3, 0) + spaces.basis_vector(sp3, 1),
        spaces.basis_vector(sp3, 2),
        0.9,
    )
    rep3 = functionals.star_linearity_probe(t3, trials=60, seed=0)
    assert rep3.verdict == "nonlinear"
    assert rep3.defect > 1e-3


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31),
    st.sampled_from([1.5, 2.0, 3.0, 4.0]),
)
def test_support_functional_is_hoelder_tight(seed, p):
    sp = spaces.Lp(3, p)
    x = spaces.random_unit(sp, seed)
    f = functionals.support_functional(sp, x)
    # |f(y)| <= ||f||_q ||y||_p with equality at y = x
    y = spaces.random_unit(sp, seed + 7)
    fy = abs(functionals.apply_functional(f, y))
    assert fy <= functionals.dual_norm(sp, f) * (1.0 + 1e-9) + 1e-12
    assert abs(functionals.apply_functional(f, x)) == pytest.approx(
        1.0, rel=1e-9
    )


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**31))
def test_minimal_extension_never_beats_restriction_norm(seed):
    sp = spaces.Lp(3, 1.5)
    rng = np.random.default_rng(seed)
    basis = rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3))
    ext = functionals.hahn_banach_extend(
        sp, basis, [1.0], seed=seed, starts=2, maxiter=2000
    )
    # any extension has dual norm >= the restriction norm
    assert ext.value >= ext.restriction_norm * (1.0 - 1e-7)
