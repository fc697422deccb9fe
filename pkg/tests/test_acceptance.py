"""Acceptance gate: the ten headline reproductions, one test per criterion.

Each test prints a single pass line with its measured runtime; pytest -v
adds the matching PASSED/FAILED verdict.  Runtime budgets are asserted,
not just reported, so a regression that makes a criterion slow fails it.
"""

import math
import time

import numpy as np
import pytest

from banachlab import (
    decomposition,
    dilation,
    functionals,
    gallery,
    operators,
    orthogonality,
    shifts,
    spaces,
)
from banachlab.subspace import principal_angle

EX6_MARGIN = 2.0 * math.sqrt(0.51) - 2.0 ** (2.0 / 3.0)


def _done(num, budget, t0, detail):
    elapsed = time.perf_counter() - t0
    assert elapsed < budget, "criterion %d blew its %gs budget: %.1fs" % (
        num, budget, elapsed
    )
    print("criterion %02d PASS in %.2fs (budget %gs): %s"
          % (num, elapsed, budget, detail))


def test_criterion_01_triangle_violation_l15():
    t0 = time.perf_counter()
    t = gallery.ex6_case1_operator()
    cert = dilation.triangle_violation_search(t, budget=8, seed=0)
    assert cert.verdict == "violation"
    assert abs(cert.margin - EX6_MARGIN) < 1e-6
    wx, wy = cert.witness_pair
    e1 = spaces.basis_vector(t.domain, 0)
    e2 = spaces.basis_vector(t.domain, 1)
    assert max(np.abs(wx - e1).max(), np.abs(wy - e2).max()) < 1e-9
    total = operators.a_T(t, e1) + operators.a_T(t, e2)
    assert abs(total - 2.0 * math.sqrt(0.51)) < 1e-9
    assert abs(operators.a_T(t, e1 + e2) - 2.0 ** (2.0 / 3.0)) < 1e-9
    _done(1, 1.0, t0, "margin %.8f at (e1, e2) on l_1.5^2" % cert.margin)


def test_criterion_02_triangle_violation_l3():
    t0 = time.perf_counter()
    s = gallery.ex6_case2_operator()
    cert = dilation.triangle_violation_search(s, budget=8, seed=0)
    assert cert.verdict == "violation"
    assert abs(cert.margin - EX6_MARGIN) < 1e-6
    c = 2.0 ** (-1.0 / 3.0)
    u = c * np.array([1.0, 1.0], dtype=np.complex128)
    v = c * np.array([-1.0, 1.0], dtype=np.complex128)
    wx, wy = cert.witness_pair
    assert max(np.abs(wx - u).max(), np.abs(wy - v).max()) < 1e-9
    assert abs(spaces.norm(s.domain, s.matrix @ u) - 0.7) < 1e-9
    _done(2, 1.0, t0, "margin %.8f at the hat pair on l_3^2" % cert.margin)


def test_criterion_03_hilbert_contractions_certify_norm():
    t0 = time.perf_counter()
    sp = spaces.Lp(8, 2.0)
    worst_margin = np.inf
    worst_defect_slack = -np.inf
    for i in range(100):
        rng = np.random.default_rng(i)
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        m = m / (np.linalg.norm(m, 2) * (1.0 + rng.uniform(0.05, 1.0)))
        t = operators.Operator(m, sp, sp)
        cert = dilation.triangle_violation_search(t, budget=6, seed=i)
        assert cert.verdict == "norm"
        worst_margin = min(worst_margin, cert.margin)
        w = dilation.nagy_backward_intertwiner(t, 20)
        bound = np.linalg.norm(m, 2) ** 20
        defect = 0.0
        for k in range(3):
            x = spaces.random_unit(sp, 1000 * i + k)
            defect = max(defect, abs(np.linalg.norm(w.matrix @ x) - 1.0))
        worst_defect_slack = max(worst_defect_slack, defect - bound)
    assert worst_margin >= -1e-10
    assert worst_defect_slack <= 0.0
    _done(3, 30.0, t0,
          "100/100 norm, min margin %.2e, intertwiner within ||T||^20"
          % worst_margin)


def test_criterion_04_min_dilation_identity_and_fault():
    t0 = time.perf_counter()
    worst = 0.0
    for sp, vals in (
        (spaces.Lp(3, 2.0), [0.9, 0.5, 0.3j]),
        (spaces.Lp(4, 3.0),
         [0.6, 0.6 * np.exp(0.4j), 0.6 * np.exp(-1.1j), -0.6]),
    ):
        t = operators.diagonal_operator(sp, vals)
        cert = dilation.triangle_violation_search(t, budget=8, seed=0)
        bundle = dilation.build_min_dilation(t, 6, cert)
        check = dilation.verify_dilation(bundle, t, kmax=4, seed=0)
        assert check.passed
        worst = max(worst, check.worst_residual)
    assert worst < 1e-10
    vbad = bundle.V.copy()
    vbad[0, 3 * bundle.W.shape[1]] += 0.05  # s-part of block one
    corrupted = dilation.DilationBundle(
        vbad, bundle.W, bundle.P, bundle.space, bundle.base, bundle.depth,
        bundle.construction, bundle.certificate, bundle.safe_blocks,
    )
    bad = dilation.verify_dilation(corrupted, t, kmax=4, seed=0)
    assert not bad.passed
    assert bad.worst_k is not None and bad.worst_k >= 2
    assert bad.worst_x is not None
    assert max(bad.residual_by_k[:2]) <= 1e-10
    _done(4, 10.0, t0,
          "P V^k W = W T^k to %.1e; corruption caught at k=%d"
          % (worst, bad.worst_k))


def test_criterion_05_disk_algebra_orthogonality():
    t0 = time.perf_counter()
    sp = spaces.PolySup(7, 4096)
    for n in range(1, 7):
        zn = gallery._monomial(n)
        for m in range(n):
            cert = orthogonality.bj_orthogonal(sp, zn, gallery._monomial(m))
            assert cert.orthogonal, "z^%d not BJ-orthogonal to z^%d" % (n, m)
    f = gallery._monomial(1) + gallery._monomial(2)
    one = gallery._monomial(0)
    assert not orthogonality.bj_orthogonal(sp, f, one).orthogonal
    res = orthogonality.bj_min(sp, f, one)
    assert res.value < 2.0 - 0.02
    _done(5, 5.0, t0,
          "z^n perp z^m for all 21 pairs; min ||z+z^2+lam|| = %.6f"
          % res.value)


def test_criterion_06_sigma_shift_spectrum():
    t0 = time.perf_counter()
    details = []
    for p in (2.0, 3.0):
        base = spaces.Lp(1, p)
        bundle = shifts.make_sigma_shift(base, 200)
        worst = 0.0
        for k in range(8):
            lam = np.exp(2j * np.pi * k / 8)
            worst = max(
                worst, shifts.spectrum_probe(bundle, lam, seed=0, maxiter=30)
            )
        assert worst <= 0.15
        inside = shifts.spectrum_probe(bundle, 0.5, seed=0, maxiter=30)
        assert inside >= 0.5
        trail = [
            shifts.spectrum_probe(
                shifts.make_sigma_shift(base, hw), 1.0, seed=0, maxiter=30
            )
            for hw in (50, 100, 200)
        ]
        assert trail[0] >= trail[1] >= trail[2]
        details.append("p=%g circle %.3f inside %.3f trail %.4f>=%.4f>=%.4f"
                       % (p, worst, inside, *trail))
    _done(6, 60.0, t0, "; ".join(details))


def test_criterion_07_canonical_decomposition_gallery():
    t0 = time.perf_counter()
    window, nmax = 64, 8
    t = decomposition.gallery_operator(window, 3.0)
    xres = decomposition.x_of_T(t, nmax)
    assert xres.is_subspace
    x_exp = decomposition.coordinate_span(
        t.domain, decomposition.gallery_x_indices(window, nmax)
    )
    ax = principal_angle(xres.subspace, x_exp)
    assert ax < 1e-8
    res = decomposition.canonical_decompose(t, nmax, seed=0)
    assert res.ok
    w_exp = decomposition.coordinate_span(
        t.domain, decomposition.gallery_unitary_indices(window)
    )
    aw = principal_angle(res.parts["unitary"], w_exp)
    assert aw < 1e-8
    assert res.residuals["left_inverse_on_xt"] <= 1e-12
    _done(7, 20.0, t0,
          "X(T) angle %.1e, W angle %.1e at window 64, nmax 8" % (ax, aw))


def test_criterion_08_hahn_banach_linearity_dichotomy():
    t0 = time.perf_counter()
    sp = spaces.Lp(4, 3.0)
    coord = np.zeros((2, 4), dtype=np.complex128)
    coord[0, 0] = coord[1, 1] = 1.0
    rep = functionals.hb_linearity_probe(sp, coord, trials=40, seed=0)
    assert rep.defect < 1e-8
    skew = np.zeros((2, 4), dtype=np.complex128)
    skew[0, 0] = skew[0, 1] = 1.0
    skew[1, 1] = skew[1, 2] = 1.0
    rep2 = functionals.hb_linearity_probe(sp, skew, trials=200, seed=0)
    assert rep2.defect > 1e-3
    _done(8, 30.0, t0,
          "coordinate defect %.1e, skew-plane defect %.3f"
          % (rep.defect, rep2.defect))


def test_criterion_09_star_adjoints():
    t0 = time.perf_counter()
    base = spaces.Lp(2, 3.0)
    mz = shifts.make_unilateral_shift(base, 6)
    mhat = shifts.make_backward_shift(base, 6)
    rng = np.random.default_rng(0)
    worst_mz = 0.0
    for _ in range(10):
        x = spaces.zero(mz.domain)
        x[: 2 * 5] = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        worst_mz = max(worst_mz, np.abs(
            functionals.star_adjoint_eval(mz, x) - mhat.matrix @ x
        ).max())
    assert worst_mz <= 1e-10
    bundle = shifts.make_sigma_shift(spaces.Lp(1, 3.0), 4)
    u = bundle.vtilde
    uinv = np.linalg.pinv(u.matrix)
    worst_u = 0.0
    for _ in range(10):
        x = spaces.zero(bundle.space)
        x[1:-1] = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        worst_u = max(worst_u, np.abs(
            functionals.star_adjoint_eval(u, x) - uinv @ x
        ).max())
    assert worst_u <= 1e-10
    sp3 = spaces.Lp(3, 3.0)
    t = operators.rank_one_operator(
        sp3,
        spaces.basis_vector(sp3, 0) + spaces.basis_vector(sp3, 1),
        spaces.basis_vector(sp3, 2),
        0.9,
    )
    rep = functionals.star_linearity_probe(t, trials=60, seed=0)
    assert rep.defect > 1e-3
    sp2 = spaces.Lp(4, 2.0)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    top = operators.Operator(m / (2 * np.linalg.norm(m, 2)), sp2, sp2)
    rep2 = functionals.star_linearity_probe(top, trials=40, seed=0)
    assert rep2.defect <= 1e-10
    _done(9, 20.0, t0,
          "Mz* backward to %.1e, U* inverse to %.1e, rank-one defect %.3f, "
          "Hilbert linear to %.1e"
          % (worst_mz, worst_u, rep.defect, rep2.defect))


def test_criterion_10_mobius_dichotomy():
    t0 = time.perf_counter()
    sp = spaces.Lp(3, 2.0)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        m = m / (np.linalg.norm(m, 2) * (1.0 + rng.uniform(0.05, 1.0)))
        t = operators.Operator(m, sp, sp)
        alpha = rng.uniform(0.0, 0.95) * np.exp(2j * np.pi * rng.uniform())
        phi = shifts.phi_alpha(t, alpha)
        worst = max(worst, operators.operator_norm(phi, seed=0).value)
    assert worst <= 1.0 + 1e-9
    sp3 = spaces.Lp(2, 3.0)
    t3 = operators.rank_one_operator(
        sp3, spaces.basis_vector(sp3, 0), spaces.basis_vector(sp3, 1), 0.99
    )
    best = 0.0
    for r in np.linspace(0.15, 0.9, 6):
        for th in np.linspace(0.0, 2 * np.pi, 8, endpoint=False):
            phi = shifts.phi_alpha(t3, r * np.exp(1j * th))
            best = max(
                best, operators.operator_norm(phi, restarts=8, seed=0).value
            )
    assert best > 1.0 + 1e-3
    w = shifts.bilateral_phi_witness(sp3, alpha=0.5, samples=120, seed=0)
    assert w.ratio > 1.0 + 1e-4
    assert w.lhs > w.rhs  # ||x - alpha y|| beats ||y - conj(alpha) x||
    h = shifts.bilateral_phi_witness(spaces.Lp(1, 2.0), alpha=0.5,
                                     samples=60, seed=0)
    assert h.ratio <= 1.0 + 1e-9
    _done(10, 30.0, t0,
          "Hilbert worst %.6f, rank-one best %.4f, bilateral ratio %.4f"
          % (worst, best, w.ratio))
