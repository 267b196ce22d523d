"""Boundary integral operators: kernels, singular quadrature, symbols,
Calderon diagnostics, Yukawa transmission operator."""

import numpy as np
import pytest
from scipy.integrate import dblquad
from scipy.special import hankel1 as sp_hankel1

from fembem import bem, geometry, specfun
from fembem.coupling import principal_angle_deg

from conftest import KAPPA_OFF, KAPPA_RES_1, KAPPA_RES_2


# ---------------------------------------------------------------------------
# Green kernel
# ---------------------------------------------------------------------------
def test_green_kernel_radial_symmetry():
    x = np.array([0.3, -1.2])
    assert bem.green_kernel(2.0, x) == bem.green_kernel(2.0, -x)


def test_green_kernel_value():
    # (i/4) H1_0(1) with J_0(1), Y_0(1) from the special-function layer
    val = bem.green_kernel(1.0, np.array([1.0, 0.0]))
    expected = 0.25j * (0.7651976865579666 + 0.0882569642156770j)
    assert val == pytest.approx(expected, rel=1e-9)


def test_green_kernel_asymptotics():
    kappa, r = 2.0, 100.0
    val = abs(bem.green_kernel(kappa, np.array([r, 0.0])))
    assert val == pytest.approx(0.25 * np.sqrt(2 / (np.pi * kappa * r)), rel=0.01)


def test_green_kernel_singular_origin():
    with pytest.raises(ValueError):
        bem.green_kernel(1.0, np.array([0.0, 0.0]))


# ---------------------------------------------------------------------------
# singular quadrature against an adaptive reference
# ---------------------------------------------------------------------------
def _brute_entry(iface, kappa, a, b, p, q, kernel):
    """Adaptive dblquad of kernel * hat_p * hat_q over panel pair (a, b)."""
    n0, n1 = iface.panels[a]
    m0, m1 = iface.panels[b]
    A0, ta = iface.nodes[n0], iface.nodes[n1] - iface.nodes[n0]
    B0, tb = iface.nodes[m0], iface.nodes[m1] - iface.nodes[m0]
    ha = np.linalg.norm(ta)
    hb = np.linalg.norm(tb)

    def f(t, s):
        x = A0 + s * ta
        y = B0 + t * tb
        lp = (1 - s) if p == 0 else s
        lq = (1 - t) if q == 0 else t
        return kernel(x, y) * lp * lq

    re = dblquad(lambda t, s: f(t, s).real, 0, 1, 0, 1, epsabs=1e-11, epsrel=1e-11)[0]
    im = dblquad(lambda t, s: f(t, s).imag, 0, 1, 0, 1, epsabs=1e-11, epsrel=1e-11)[0]
    return (re + 1j * im) * ha * hb


@pytest.fixture(scope="module")
def quad_setup(coarse_iface):
    kappa = 3.0
    return coarse_iface, kappa, bem.assemble_bios(coarse_iface, kappa)


def _g_kernel(kappa):
    def g(x, y):
        r = np.linalg.norm(x - y)
        return 0.25j * sp_hankel1(0, kappa * r) if r > 1e-14 else 0.0
    return g


def _k_kernel(kappa, nrm):
    def k(x, y):
        d = x - y
        r = np.linalg.norm(d)
        return -0.25j * kappa * sp_hankel1(1, kappa * r) * np.dot(nrm, d) / r
    return k


@pytest.mark.parametrize("pq", [(0, 0), (1, 0), (1, 1)])
def test_single_layer_coincident_panel(quad_setup, pq):
    iface, kappa, bios = quad_setup
    p, q = pq
    i = iface.panels[5][p]
    j = iface.panels[5][q]
    ref = _brute_entry(iface, kappa, 5, 5, p, q, _g_kernel(kappa))
    # isolate the (5,5) pair contribution: subtract every other pair of (i, j)
    full = bios.V[i, j]
    other = 0.0 + 0.0j
    for a in range(iface.n_panels):
        for b in range(iface.n_panels):
            if (a, b) == (5, 5):
                continue
            pa, qa = _hat_pos(iface, a, i), _hat_pos(iface, b, j)
            if pa is None or qa is None:
                continue
            other += _brute_entry(iface, kappa, a, b, pa, qa, _g_kernel(kappa))
    assert full - other == pytest.approx(ref, rel=5e-9)


def _hat_pos(iface, panel, node):
    if iface.panels[panel][0] == node:
        return 0
    if iface.panels[panel][1] == node:
        return 1
    return None


@pytest.mark.parametrize("pair", [(5, 6), (6, 5)])
def test_single_layer_adjacent_pair_moments(quad_setup, pair):
    # compare raw adjacent-pair moments against adaptive quadrature
    iface, kappa, _ = quad_setup
    cache = bem._pair_cache(iface)
    adj = cache.adjacent
    idx = next(k for k in range(len(adj.pa))
               if (adj.pa[k], adj.pb[k]) == pair)
    mu = bem._adjacent_even_moments(adj, kappa, bem._J0C + 0j, bem._PHIG, -1 / (2 * np.pi))
    mhat = bem._corner_to_hat(mu, adj.alpha_a, adj.beta_a, adj.alpha_b, adj.beta_b)
    a, b = pair
    for (p, q), got in zip(((0, 0), (1, 0), (0, 1), (1, 1)),
                           (mhat[0][idx], mhat[1][idx], mhat[2][idx], mhat[3][idx])):
        want = _brute_entry(iface, kappa, a, b, p, q, _g_kernel(kappa))
        assert got == pytest.approx(want, rel=2e-9)


def test_double_layer_adjacent_pair_moments(quad_setup):
    iface, kappa, _ = quad_setup
    cache = bem._pair_cache(iface)
    adj = cache.adjacent
    pair = (7, 8)
    idx = next(k for k in range(len(adj.pa)) if (adj.pa[k], adj.pb[k]) == pair)
    muK, muKp = bem._adjacent_dlp_moments(adj, kappa)
    mK = bem._corner_to_hat(muK, adj.alpha_a, adj.beta_a, adj.alpha_b, adj.beta_b)
    a, b = pair
    kern = _k_kernel(kappa, iface.normals[b])
    for (p, q), got in zip(((0, 0), (1, 1)), (mK[0][idx], mK[3][idx])):
        want = _brute_entry(iface, kappa, a, b, p, q, kern)
        assert got == pytest.approx(want, rel=1e-7)


def test_separated_pair_entry(quad_setup):
    iface, kappa, bios = quad_setup
    # an isolated node pair touched only by well-separated panels
    a, b = 3, 20
    i, j = iface.panels[a][0], iface.panels[b][1]
    ref = 0.0 + 0.0j
    for pa in range(iface.n_panels):
        for pb in range(iface.n_panels):
            pi, pj = _hat_pos(iface, pa, i), _hat_pos(iface, pb, j)
            if pi is None or pj is None:
                continue
            ref += _brute_entry(iface, kappa, pa, pb, pi, pj, _g_kernel(kappa))
    assert bios.V[i, j] == pytest.approx(ref, rel=1e-8)


# ---------------------------------------------------------------------------
# matrix invariants and symbols
# ---------------------------------------------------------------------------
def test_matrix_symmetries(bios_off):
    bios_off.validate(tol=1e-10)
    assert np.linalg.norm(bios_off.V - bios_off.V.T) <= 1e-10 * np.linalg.norm(bios_off.V)
    assert np.linalg.norm(bios_off.W - bios_off.W.T) <= 1e-10 * np.linalg.norm(bios_off.W)
    # transpose relation with global sign s = -1
    assert np.linalg.norm(bios_off.K.T + bios_off.Kp) <= 1e-10 * np.linalg.norm(bios_off.K)


def test_symbols_satisfy_calderon_identity():
    kappa, R = 3.0, 2.0
    for n in range(0, 21):
        sv = bem.circle_symbol("V", n, kappa, R)
        sk = bem.circle_symbol("K", n, kappa, R)
        sw = bem.circle_symbol("W", n, kappa, R)
        assert abs(sk**2 + sv * sw - 0.25) < 1e-10
        assert bem.circle_symbol("Kp", n, kappa, R) == pytest.approx(-sk, rel=1e-14)


def test_symbols_even_in_mode():
    for op in ("V", "K", "Kp", "W"):
        assert bem.circle_symbol(op, 7, 3.0, 2.0) == bem.circle_symbol(op, -7, 3.0, 2.0)


def test_single_layer_symbol_vanishes_at_resonance():
    val = bem.circle_symbol("V", 0, KAPPA_RES_1, 2.0)
    assert abs(val) < 1e-10


def test_galerkin_symbols_match_circle_symbols(bios_off, iface400):
    for op, A in (("V", bios_off.V), ("K", bios_off.K),
                  ("Kp", bios_off.Kp), ("W", bios_off.W)):
        for n in range(0, 21):
            gal = bem.galerkin_symbol(A, bios_off.M, iface400, n)
            sym = bem.circle_symbol(op, n, KAPPA_OFF, 2.0)
            assert abs(gal - sym) / abs(sym) < 0.01, (op, n)


def test_symbol_error_second_order():
    errs = []
    for n_panels in (100, 200, 400):
        iface = geometry.circle_interface(2.0, n_panels)
        bios = bem.assemble_bios(iface, KAPPA_OFF)
        worst = max(
            abs(bem.galerkin_symbol(bios.V, bios.M, iface, n)
                - bem.circle_symbol("V", n, KAPPA_OFF, 2.0))
            / abs(bem.circle_symbol("V", n, KAPPA_OFF, 2.0))
            for n in range(21)
        )
        errs.append(worst)
    rate1 = np.log2(errs[0] / errs[1])
    rate2 = np.log2(errs[1] / errs[2])
    assert rate1 == pytest.approx(2.0, abs=0.4)
    assert rate2 == pytest.approx(2.0, abs=0.4)


def test_bio_smoothness_in_kappa(coarse_iface):
    # central differences at two step sizes agree: the assembly is smooth in kappa
    kappa = 3.1

    def deriv(delta):
        up = bem.assemble_bios(coarse_iface, kappa + delta).V
        dn = bem.assemble_bios(coarse_iface, kappa - delta).V
        return (up - dn) / (2 * delta)

    d1 = deriv(1e-3)
    d2 = deriv(5e-4)
    assert np.linalg.norm(d1 - d2) / np.linalg.norm(d2) < 1e-3


# ---------------------------------------------------------------------------
# Calderon projector
# ---------------------------------------------------------------------------
def test_calderon_defect_small_and_decreasing():
    defects = []
    for n_panels in (100, 200, 400):
        iface = geometry.circle_interface(2.0, n_panels)
        defects.append(bem.calderon_projector_defect(bem.assemble_bios(iface, KAPPA_OFF)))
    assert defects[2] <= 5e-2
    assert defects[2] < defects[1] < defects[0]
    # observed refinement order at least 1
    assert np.log2(defects[0] / defects[2]) / 2 >= 1.0


def test_calderon_defect_detects_wrong_kernel_constant():
    iface = geometry.circle_interface(2.0, 200)
    good = bem.calderon_projector_defect(bem.assemble_bios(iface, KAPPA_OFF))
    # the paper-style 1/(4 pi) normalization is 1/pi of the correct constant
    bad = bem.calderon_projector_defect(
        bem.assemble_bios(iface, KAPPA_OFF, kernel_scale=1.0 / np.pi))
    assert bad > 50 * good
    assert bad > 1e-2


def test_calderon_equation_residual_fixes_global_sign(bios_off, iface400):
    # (M/2 - K) gd = V gn for radiating traces; flipping the kernel sign breaks it
    theta = np.arctan2(iface400.nodes[:, 1], iface400.nodes[:, 0])
    z = KAPPA_OFF * 2.0
    gd = specfun.hankel1(2, z) * np.exp(2j * theta)
    gn = -KAPPA_OFF * specfun.hankel1p(2, z) * np.exp(2j * theta)
    resid = (0.5 * bios_off.M - bios_off.K) @ gd - bios_off.V @ gn
    scale = np.linalg.norm(bios_off.M @ gd)
    assert np.linalg.norm(resid) / scale < 5e-3
    flipped = (0.5 * bios_off.M + bios_off.K) @ gd + bios_off.V @ gn
    assert np.linalg.norm(flipped) / scale > 0.1


# ---------------------------------------------------------------------------
# mode-wise resonance of the single layer
# ---------------------------------------------------------------------------
def _mass_weighted_smallest(A, M):
    ev, U = np.linalg.eigh(M)
    Mih = (U * ev**-0.5) @ U.T
    _, s, Vh = np.linalg.svd(Mih @ A @ Mih)
    return s[-1], Mih @ Vh[-1].conj()


def test_single_layer_resonance_dip(bios_res1, bios_res2, iface400):
    for bios, kres, mode in ((bios_res1, KAPPA_RES_1, 0), (bios_res2, KAPPA_RES_2, 5)):
        s_res, vec = _mass_weighted_smallest(bios.V, bios.M)
        shifted = [
            _mass_weighted_smallest(
                bem.assemble_bios(iface400, kres + d).V, bios.M)[0]
            for d in (-0.05, 0.05)
        ]
        assert max(shifted) >= 100 * s_res
        c = np.abs(np.fft.fft(vec)) ** 2
        frac = (c[mode] + c[-mode]) / c.sum() if mode else c[0] / c.sum()
        assert frac >= 0.95


def test_remark1_near_kernels_align(bios_res1):
    # ker(V) vs ker(M/2 + Kp) at the first resonance, mass inner product
    sV, vV = _mass_weighted_smallest(bios_res1.V, bios_res1.M)
    sK, vK = _mass_weighted_smallest(0.5 * bios_res1.M + bios_res1.Kp, bios_res1.M)
    ang = principal_angle_deg(vV, vK, bios_res1.M)
    assert ang <= 5.0


# ---------------------------------------------------------------------------
# Yukawa transmission operator
# ---------------------------------------------------------------------------
def test_yukawa_spd_and_symmetric(yukawa_off):
    yukawa_off.validate()  # raises on asymmetry / non-SPD


def test_yukawa_positive_on_constants(yukawa_off, iface400):
    ones = np.ones(iface400.n_panels)
    assert ones @ yukawa_off.Wy @ ones > 0.1


def test_yukawa_fourier_diagonal(yukawa_off):
    n = yukawa_off.Wy.shape[0]
    F = np.fft.fft(np.eye(n)) / np.sqrt(n)
    D = np.conj(F) @ yukawa_off.Wy @ F.T
    off = np.sqrt(max(np.sum(np.abs(D) ** 2) - np.sum(np.abs(np.diag(D)) ** 2), 0.0))
    assert off / np.linalg.norm(yukawa_off.Wy, "fro") <= 0.01


def test_yukawa_symbol_match(yukawa_off, bios_off, iface400):
    for n in (0, 1, 5, 20):
        gal = bem.galerkin_symbol(yukawa_off.Wy, bios_off.M, iface400, n).real
        sym = bem.yukawa_circle_symbol(n, KAPPA_OFF, 2.0)
        assert gal == pytest.approx(sym, rel=0.01)


def test_coarse_mesh_rejected():
    iface = geometry.circle_interface(2.0, 16)
    with pytest.raises(ValueError):
        bem.assemble_bios(iface, 10.0)


def test_matrix_dump(tmp_path, coarse_iface):
    bios = bem.assemble_bios(coarse_iface, 3.0)
    path = tmp_path / "V.txt"
    bem.dump_matrix(path, bios.V[:3, :3])
    lines = path.read_text().splitlines()
    assert len(lines) == 9
    i, j, re, im = lines[4].split()
    assert (int(i), int(j)) == (1, 1)
    assert complex(float(re), float(im)) == pytest.approx(bios.V[1, 1])
