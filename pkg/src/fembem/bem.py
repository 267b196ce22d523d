"""Galerkin boundary integral operators on a closed polygonal interface.

Assembles the four Helmholtz boundary integral operators (single layer,
double layer, adjoint double layer, hypersingular) and the Yukawa
hypersingular transmission operator on the interface P1 space, with analytic
circle symbols as oracles and a discrete Calderon projector diagnostic.

Conventions (locked by the Calderon tests, documented here once):

* Green kernel ``G(x) = (i/4) H1_0(kappa |x|)``, the outgoing 2D fundamental
  solution normalized so that ``(Delta + kappa^2) G = -delta``.
* The interface normal ``n`` points toward the origin (outward normal of the
  unbounded exterior subdomain).
* Kernels: V uses ``G(x - y)``; K uses ``n(y) . (grad G)(x - y)``; Kp uses
  ``n(x) . (grad G)(x - y)``; W uses the integration-by-parts form
  ``intint G v' w' - kappa^2 intint G (n_x . n_y) v w`` with arclength
  derivatives of the P1 hats.
* All pairings are bilinear (no complex conjugation).  Galerkin matrices map
  primal coefficient vectors to dual (tested) vectors; discrete operator
  composition inserts the inverse interface mass matrix.
* Transpose relations: V and W are symmetric, and ``K^T = -Kp`` (global sign
  s = -1), which realizes the adjoint relation between the two double layers.
* The Yukawa transmission kernel is ``K_0(kappa |x|) / (2 pi)`` and its
  hypersingular form carries ``+kappa^2 (n_x . n_y)`` (wavenumber ``i kappa``
  flips the zeroth-order sign), making the Galerkin matrix real SPD.

Singular quadrature: coincident panels use exact log-moment formulas after
extracting ``H1_0(z) = (2i/pi) ln(z) J_0(z) + analytic``; adjacent panels use
Duffy corner coordinates with the same log extraction for the even kernels and
plain tensor Gauss for the (much milder) double-layer kernels; separated
panels use distance-tiered tensor Gauss-Legendre.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import hankel1 as _hankel1
from scipy.special import ive, kv, kve

from .geometry import InterfaceMesh
from . import specfun

logger = logging.getLogger(__name__)

_EG = np.euler_gamma
_SERIES_TERMS = 14
_Z_SERIES_MAX = 2.5  # series domain bound for kappa * (h_a + h_b)

# smooth-part tensor Gauss orders
_N_ADJ = 12
_TIERS = ((3.5, 12), (9.0, 6), (np.inf, 3))  # (centroid dist / h_max, GL order)


# ---------------------------------------------------------------------------
# kernel series:  G(r) = -(1/2pi) J0(z) ln z + PhiG(z),   z = kappa r
#                 Gy(r) = -(1/2pi) I0(z) ln z + PhiY(z)
# ---------------------------------------------------------------------------
def _series_tables(m_terms: int):
    m = np.arange(m_terms)
    fact2 = np.array([math.factorial(k) ** 2 for k in m], dtype=float)
    harm = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, m_terms))])[:m_terms]
    j0 = (-1.0) ** m / (4.0**m * fact2)
    i0 = 1.0 / (4.0**m * fact2)
    c0 = 0.25j + (np.log(2.0) - _EG) / (2.0 * np.pi)
    phi_g = c0 * j0 + ((-1.0) ** m * harm) / (2.0 * np.pi * 4.0**m * fact2)
    phi_y = ((np.log(2.0) - _EG) * i0 + harm / (4.0**m * fact2)) / (2.0 * np.pi)
    return j0, i0, phi_g, phi_y


_J0C, _I0C, _PHIG, _PHIY = _series_tables(_SERIES_TERMS)


def _eval_even_series(coef, z):
    """sum_m coef[m] * z^(2m), vectorized in z."""
    z2 = np.asarray(z) ** 2
    out = np.zeros(np.shape(z2), dtype=np.result_type(coef.dtype, float))
    for c in coef[::-1]:
        out = out * z2 + c
    return out


def green_kernel(kappa: float, x) -> complex:
    """Outgoing Helmholtz Green kernel (i/4) H1_0(kappa |x|) at offset(s) x."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValueError("green_kernel is singular at x = 0")
    out = 0.25j * _hankel1(0, kappa * r)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# closed-form log moments on [0,1]^2 (coincident panels)
# ---------------------------------------------------------------------------
def _harmonic(n: int) -> float:
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def _lambda_log_moment(a: int, b: int) -> float:
    """intint_[0,1]^2 s^a t^b ln|s - t| ds dt, exactly."""
    total = -_harmonic(a + 1) / (a + 1) + _harmonic(a + b + 2) / (a + b + 2)
    total -= 1.0 / (a + b + 2) ** 2
    total -= sum(1.0 / ((j + 1) * (a + b + 1 - j)) for j in range(b + 1))
    return total / (b + 1)


def _coincident_tables(m_terms: int):
    """B[m,p,q] = intint |s-t|^{2m} s^p t^q,  C adds a ln|s-t| factor."""
    size = 2 * m_terms + 2
    lam = np.array([[_lambda_log_moment(a, b) for b in range(size)] for a in range(size)])
    B = np.zeros((m_terms, 2, 2))
    C = np.zeros((m_terms, 2, 2))
    for m in range(m_terms):
        for k in range(2 * m + 1):
            w = math.comb(2 * m, k) * (-1.0) ** k
            for p in range(2):
                for q in range(2):
                    B[m, p, q] += w / ((p + 2 * m - k + 1) * (q + k + 1))
                    C[m, p, q] += w * lam[p + 2 * m - k, q + k]
    return B, C


_BMOM, _CMOM = _coincident_tables(_SERIES_TERMS)

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss01(n: int):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


# ---------------------------------------------------------------------------
# pair cache: geometry-only quadrature data, reused across kappa and kernels
# ---------------------------------------------------------------------------
class _RegularTier:
    def __init__(self, ia, ib, interface: InterfaceMesh, order: int):
        self.ia, self.ib = ia, ib
        s, ws = _gauss01(order)
        S, T = np.meshgrid(s, s, indexing="ij")
        WW = np.outer(ws, ws).ravel()
        self.s_hat = S.ravel()
        self.t_hat = T.ravel()
        nodes, panels = interface.nodes, interface.panels
        h = interface.panel_lengths
        A0 = nodes[panels[ia, 0]]
        ta = nodes[panels[ia, 1]] - A0
        B0 = nodes[panels[ib, 0]]
        tb = nodes[panels[ib, 1]] - B0
        X = A0[:, None, :] + self.s_hat[None, :, None] * ta[:, None, :]
        Y = B0[:, None, :] + self.t_hat[None, :, None] * tb[:, None, :]
        d = X - Y
        self.r = np.linalg.norm(d, axis=-1)
        na, nb = interface.normals[ia], interface.normals[ib]
        self.rho_a = np.einsum("pqi,pi->pq", d, na)
        self.rho_b = np.einsum("pqi,pi->pq", d, nb)
        self.w = WW[None, :] * (h[ia] * h[ib])[:, None]
        self.nanb = np.einsum("pi,pi->p", na, nb)
        self.hh = h[ia] * h[ib]


class _AdjacentData:
    """Ordered adjacent pairs in corner coordinates (distance from the shared
    vertex along each panel, normalized by panel length)."""

    def __init__(self, interface: InterfaceMesh):
        panels = interface.panels
        nodes = interface.nodes
        h = interface.panel_lengths
        that = interface.tangents
        nrm = interface.normals
        n = interface.n_panels
        pa, pb = [], []
        aa, ba, ab, bb = [], [], [], []
        da_l, db_l = [], []
        for a in range(n):
            for b in ((a + 1) % n, (a - 1) % n):
                if b == a:
                    continue
                shared = set(panels[a]) & set(panels[b])
                if len(shared) != 1:
                    raise ValueError("adjacent panels must share exactly one node")
                c = shared.pop()
                pa.append(a)
                pb.append(b)
                if c == panels[a][1]:
                    aa.append(1.0), ba.append(-1.0), da_l.append(-that[a])
                else:
                    aa.append(0.0), ba.append(1.0), da_l.append(that[a])
                if c == panels[b][1]:
                    ab.append(1.0), bb.append(-1.0), db_l.append(-that[b])
                else:
                    ab.append(0.0), bb.append(1.0), db_l.append(that[b])
        self.pa = np.array(pa)
        self.pb = np.array(pb)
        self.alpha_a = np.array(aa)
        self.beta_a = np.array(ba)
        self.alpha_b = np.array(ab)
        self.beta_b = np.array(bb)
        da = np.array(da_l)
        db = np.array(db_l)
        self.ha = h[self.pa]
        self.hb = h[self.pb]
        self.cab = np.einsum("pi,pi->p", da, db)
        self.ga = np.einsum("pi,pi->p", nrm[self.pa], db)  # n_a . d_b
        self.gb = np.einsum("pi,pi->p", nrm[self.pb], da)  # n_b . d_a
        self.nanb = np.einsum("pi,pi->p", nrm[self.pa], nrm[self.pb])
        w, ww = _gauss01(_N_ADJ)
        self.sig, self.wsig = w, ww
        # D1: |x - y| = sigma * D1(w) on the tau <= sigma triangle; D2 swaps roles
        self.D1 = np.sqrt(
            self.ha[:, None] ** 2
            + (self.hb[:, None] * w[None, :]) ** 2
            - 2.0 * (self.ha * self.hb * self.cab)[:, None] * w[None, :]
        )
        self.D2 = np.sqrt(
            self.hb[:, None] ** 2
            + (self.ha[:, None] * w[None, :]) ** 2
            - 2.0 * (self.ha * self.hb * self.cab)[:, None] * w[None, :]
        )


class _PairCache:
    def __init__(self, interface: InterfaceMesh):
        n = interface.n_panels
        panels = interface.panels
        mids = interface.midpoints
        h = interface.panel_lengths
        self.adjacent = _AdjacentData(interface)
        adj = set(zip(self.adjacent.pa.tolist(), self.adjacent.pb.tolist()))
        ia, ib = np.triu_indices(n, k=1)
        keep = np.array([(a, b) not in adj for a, b in zip(ia, ib)])
        ia, ib = ia[keep], ib[keep]
        dist = np.linalg.norm(mids[ia] - mids[ib], axis=1)
        u = dist / np.maximum(h[ia], h[ib])
        self.tiers = []
        lo = 0.0
        for bound, order in _TIERS:
            sel = (u > lo) & (u <= bound) if np.isfinite(bound) else (u > lo)
            if np.any(sel):
                self.tiers.append(_RegularTier(ia[sel], ib[sel], interface, order))
            lo = bound
        self.h = h
        self.panels = panels


def _pair_cache(interface: InterfaceMesh) -> _PairCache:
    cache = getattr(interface, "_bem_pair_cache", None)
    if cache is None:
        cache = _PairCache(interface)
        object.__setattr__(interface, "_bem_pair_cache", cache)
    return cache


# ---------------------------------------------------------------------------
# moment accumulation
# ---------------------------------------------------------------------------
def _scatter(mat, a0, a1, b0, b1, m00, m10, m01, m11):
    """Add P1-hat combinations of raw moments into matrix entries."""
    np.add.at(mat, (a0, b0), m00 - m10 - m01 + m11)
    np.add.at(mat, (a0, b1), m01 - m11)
    np.add.at(mat, (a1, b0), m10 - m11)
    np.add.at(mat, (a1, b1), m11)


def _scatter_deriv(mat, a0, a1, b0, b1, m00_over_hh):
    """Arclength-derivative loadings: signs (-,+) per panel endpoint."""
    np.add.at(mat, (a0, b0), m00_over_hh)
    np.add.at(mat, (a0, b1), -m00_over_hh)
    np.add.at(mat, (a1, b0), -m00_over_hh)
    np.add.at(mat, (a1, b1), m00_over_hh)


def _corner_to_hat(m, alpha_a, beta_a, alpha_b, beta_b):
    """Transform corner-coordinate raw moments to hat-coordinate moments."""
    mu00, mu10, mu01, mu11 = m
    m00 = mu00
    m10 = alpha_a * mu00 + beta_a * mu10
    m01 = alpha_b * mu00 + beta_b * mu01
    m11 = (
        alpha_a * alpha_b * mu00
        + alpha_a * beta_b * mu01
        + beta_a * alpha_b * mu10
        + beta_a * beta_b * mu11
    )
    return m00, m10, m01, m11


def _coincident_even_moments(kappa, h, coef_log, coef_phi, scale_log):
    """Raw moments of an even kernel  scale_log * S(z) ln z + Phi(z)  on a
    panel with itself, z = kappa h |s - t|.  Returns (P, 2, 2) array."""
    zh = kappa * h
    powers = zh[:, None] ** (2 * np.arange(_SERIES_TERMS))[None, :]
    log_zh = np.log(zh)
    out = np.zeros((len(h), 2, 2), dtype=complex)
    for m in range(_SERIES_TERMS):
        amp_log = scale_log * coef_log[m] * powers[:, m]
        amp_b = (coef_phi[m] + scale_log * coef_log[m] * log_zh) * powers[:, m]
        out += amp_log[:, None, None] * _CMOM[m][None] + amp_b[:, None, None] * _BMOM[m][None]
    return out * (h**2)[:, None, None]


def _adjacent_even_moments(adj, kappa, coef_log, coef_phi, scale_log):
    """Raw corner moments mu_jk of an even kernel on ordered adjacent pairs."""
    sig, wsig = adj.sig, adj.wsig
    mu = np.zeros((4, len(adj.pa)), dtype=complex)
    hh = adj.ha * adj.hb
    for D, wexp in ((adj.D1, "k"), (adj.D2, "j")):
        zD = kappa * D  # (P, nw)
        # smooth part: Phi(z) + scale_log * ln(kappa D) * S(z), z = kappa sig D
        lnkD = np.log(zD)
        z = sig[None, :, None] * zD[:, None, :]  # (P, ns, nw)
        smooth = _eval_even_series(coef_phi, z) + scale_log * lnkD[:, None, :] * _eval_even_series(
            coef_log, z
        )
        pow_s = {jk: sig ** (jk + 1) for jk in range(3)}
        pow_w = {e: sig**e for e in range(2)}  # w-nodes coincide with sigma nodes
        wts = np.outer(wsig, wsig)  # (ns, nw)
        # log part coefficients: S(z) = sum coef_log[m] (kappa sig D)^{2m}
        Dpow = zD[:, None, :] ** (2 * np.arange(_SERIES_TERMS))[None, :, None]  # (P, M, nw)
        idx = 0
        for j in range(2):
            for k in range(2):
                jk = j + k
                wexp_val = k if wexp == "k" else j
                integ = smooth * (pow_s[jk][None, :, None] * pow_w[wexp_val][None, None, :])
                val = np.einsum("psw,sw->p", integ, wts)
                # exact sigma-log moments: int_0^1 s^(jk+1+2m) ln s ds = -1/(jk+2m+2)^2
                mlog = -coef_log[: _SERIES_TERMS] / (jk + 2.0 * np.arange(_SERIES_TERMS) + 2.0) ** 2
                wint = np.einsum(
                    "pmw,w->pm", Dpow, wsig * pow_w[wexp_val]
                )  # (P, M)
                val = val + scale_log * (wint @ mlog)
                mu[idx] += hh * val
                idx += 1
    return mu[0], mu[1], mu[2], mu[3]


def _adjacent_dlp_moments(adj, kappa):
    """Raw corner moments of the two double-layer kernels on adjacent pairs.

    Returns (muK, muKp), each a tuple of the four jk moments.  Kernel
    K: gamma1 H1_1(kappa r) rho_b / r with gamma1 = -(i kappa / 4); Kp uses
    rho_a.  The Duffy jacobian cancels the Cauchy-type factor, leaving only a
    weak z^2 ln z remainder which tensor Gauss handles.
    """
    sig, wsig = adj.sig, adj.wsig
    g1 = -0.25j * kappa
    muK = [np.zeros(len(adj.pa), dtype=complex) for _ in range(4)]
    muKp = [np.zeros(len(adj.pa), dtype=complex) for _ in range(4)]
    hh = adj.ha * adj.hb
    for tri, D in ((1, adj.D1), (2, adj.D2)):
        z = sig[None, :, None] * (kappa * D)[:, None, :]  # (P, ns, nw)
        H1 = _hankel1(1, z)
        if tri == 1:
            # T1: rho_b / r = h_a g_b / D1 ; rho_a / r = -h_b w g_a / D1
            fac_b = (adj.ha * adj.gb)[:, None, None] / D[:, None, :]
            fac_a = -(adj.hb * adj.ga)[:, None, None] * (sig[None, None, :] / D[:, None, :])
        else:
            # T2: rho_b / r = h_a w g_b / D2 ; rho_a / r = -h_b g_a / D2
            fac_b = (adj.ha * adj.gb)[:, None, None] * (sig[None, None, :] / D[:, None, :])
            fac_a = -(adj.hb * adj.ga)[:, None, None] / D[:, None, :]
        wts = np.outer(wsig, wsig)
        idx = 0
        for j in range(2):
            for k in range(2):
                jk = j + k
                wexp_val = k if tri == 1 else j
                loading = sig[:, None] ** (jk + 1) * sig[None, :] ** wexp_val  # (ns, nw)
                base = g1 * H1 * (loading * wts)[None, :, :]
                muK[idx] += hh * np.einsum("psw->p", base * fac_b)
                muKp[idx] += hh * np.einsum("psw->p", base * fac_a)
                idx += 1
    return tuple(muK), tuple(muKp)


# ---------------------------------------------------------------------------
# public assembly
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BioMatrices:
    """Dense Galerkin matrices of the four Helmholtz BIOs plus interface mass.

    All matrices map primal coefficient vectors to dual vectors under the
    bilinear pairing.  ``K.T == -Kp`` holds by construction (sign s = -1).
    """

    kappa: float
    M: np.ndarray
    V: np.ndarray
    K: np.ndarray
    Kp: np.ndarray
    W: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def validate(self, tol: float = 1e-10) -> None:
        for name, A in (("V", self.V), ("W", self.W)):
            dev = np.linalg.norm(A - A.T) / np.linalg.norm(A)
            if dev > tol:
                raise ValueError(f"{name} symmetry violated: {dev:.2e}")
        dev = np.linalg.norm(self.K.T + self.Kp) / np.linalg.norm(self.K)
        if dev > tol:
            raise ValueError(f"K^T = -Kp violated: {dev:.2e}")


@dataclass(frozen=True)
class YukawaTransmission:
    """SPD Galerkin matrix of the Yukawa hypersingular transmission operator."""

    kappa: float
    Wy: np.ndarray

    def validate(self) -> None:
        dev = np.linalg.norm(self.Wy - self.Wy.T) / np.linalg.norm(self.Wy)
        if dev > 1e-12:
            raise ValueError(f"Yukawa operator not symmetric: {dev:.2e}")
        try:
            np.linalg.cholesky(0.5 * (self.Wy + self.Wy.T))
        except np.linalg.LinAlgError as exc:
            raise ValueError("Yukawa transmission operator is not positive definite") from exc


def interface_mass_matrix(interface: InterfaceMesh) -> np.ndarray:
    """Panel-exact P1 mass matrix on the interface (bilinear pairing)."""
    n = interface.n_panels
    h = interface.panel_lengths
    M = np.zeros((n, n))
    a0, a1 = interface.panels[:, 0], interface.panels[:, 1]
    np.add.at(M, (a0, a0), h / 3.0)
    np.add.at(M, (a1, a1), h / 3.0)
    np.add.at(M, (a0, a1), h / 6.0)
    np.add.at(M, (a1, a0), h / 6.0)
    return M


def _check_resolution(interface: InterfaceMesh, kappa: float) -> None:
    zmax = kappa * 2.0 * float(np.max(interface.panel_lengths))
    if zmax > _Z_SERIES_MAX:
        raise ValueError(
            f"mesh too coarse for singular quadrature: kappa * 2h = {zmax:.3f} "
            f"exceeds {_Z_SERIES_MAX} (refine the interface or lower kappa)"
        )


def assemble_bios(interface: InterfaceMesh, kappa: float, kernel_scale: complex = 1.0) -> BioMatrices:
    """Assemble M, V, K, Kp, W on the interface P1 space at wavenumber kappa.

    ``kernel_scale`` multiplies the Green kernel; it exists so the Calderon
    projector test can demonstrate that a wrong kernel constant is detected.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    _check_resolution(interface, kappa)
    cache = _pair_cache(interface)
    n = interface.n_panels
    panels = interface.panels
    h = interface.panel_lengths
    nrm = interface.normals

    V = np.zeros((n, n), dtype=complex)
    K = np.zeros((n, n), dtype=complex)
    Kp = np.zeros((n, n), dtype=complex)
    W = np.zeros((n, n), dtype=complex)
    k2 = kappa * kappa

    # separated pairs: tensor Gauss, scatter both (a,b) and (b,a)
    for tier in cache.tiers:
        z = kappa * tier.r
        G = kernel_scale * 0.25j * _hankel1(0, z)
        dG = kernel_scale * (-0.25j) * kappa * _hankel1(1, z) / tier.r
        Kb = dG * tier.rho_b
        Ka = dG * tier.rho_a
        sh, th = tier.s_hat, tier.t_hat
        ld = (np.ones_like(sh), sh, th, sh * th)
        a0, a1 = panels[tier.ia, 0], panels[tier.ia, 1]
        b0, b1 = panels[tier.ib, 0], panels[tier.ib, 1]
        mG = [np.einsum("pq,pq->p", G * l[None, :], tier.w) for l in ld]
        mK = [np.einsum("pq,pq->p", Kb * l[None, :], tier.w) for l in ld]
        mKp = [np.einsum("pq,pq->p", Ka * l[None, :], tier.w) for l in ld]
        _scatter(V, a0, a1, b0, b1, *mG)
        _scatter(V, b0, b1, a0, a1, mG[0], mG[2], mG[1], mG[3])
        _scatter(K, a0, a1, b0, b1, *mK)
        _scatter(K, b0, b1, a0, a1, -mKp[0], -mKp[2], -mKp[1], -mKp[3])
        _scatter(Kp, a0, a1, b0, b1, *mKp)
        _scatter(Kp, b0, b1, a0, a1, -mK[0], -mK[2], -mK[1], -mK[3])
        coupl = k2 * tier.nanb
        _scatter(W, a0, a1, b0, b1, *[-coupl * m for m in mG])
        _scatter(W, b0, b1, a0, a1, -coupl * mG[0], -coupl * mG[2], -coupl * mG[1], -coupl * mG[3])
        der = mG[0] / tier.hh
        _scatter_deriv(W, a0, a1, b0, b1, der)
        _scatter_deriv(W, b0, b1, a0, a1, der)

    # adjacent pairs (ordered): log-extracted even kernel + Duffy double layers
    adj = cache.adjacent
    mu = _adjacent_even_moments(adj, kappa, kernel_scale * _J0C, kernel_scale * _PHIG, -1.0 / (2 * np.pi))
    mG = _corner_to_hat(mu, adj.alpha_a, adj.beta_a, adj.alpha_b, adj.beta_b)
    muK, muKp = _adjacent_dlp_moments(adj, kappa)
    mK = _corner_to_hat(tuple(kernel_scale * m for m in muK), adj.alpha_a, adj.beta_a, adj.alpha_b, adj.beta_b)
    mKp = _corner_to_hat(tuple(kernel_scale * m for m in muKp), adj.alpha_a, adj.beta_a, adj.alpha_b, adj.beta_b)
    a0, a1 = panels[adj.pa, 0], panels[adj.pa, 1]
    b0, b1 = panels[adj.pb, 0], panels[adj.pb, 1]
    _scatter(V, a0, a1, b0, b1, *mG)
    _scatter(K, a0, a1, b0, b1, *mK)
    _scatter(Kp, a0, a1, b0, b1, *mKp)
    coupl = k2 * adj.nanb
    _scatter(W, a0, a1, b0, b1, *[-coupl * m for m in mG])
    _scatter_deriv(W, a0, a1, b0, b1, mG[0] / (adj.ha * adj.hb))

    # coincident panels: exact log moments; double layers vanish on flat panels
    mco = _coincident_even_moments(kappa, h, kernel_scale * _J0C, kernel_scale * _PHIG, -1.0 / (2 * np.pi))
    a0, a1 = panels[:, 0], panels[:, 1]
    _scatter(V, a0, a1, a0, a1, mco[:, 0, 0], mco[:, 1, 0], mco[:, 0, 1], mco[:, 1, 1])
    _scatter(W, a0, a1, a0, a1, *[-k2 * m for m in (mco[:, 0, 0], mco[:, 1, 0], mco[:, 0, 1], mco[:, 1, 1])])
    _scatter_deriv(W, a0, a1, a0, a1, mco[:, 0, 0] / h**2)

    M = interface_mass_matrix(interface)
    return BioMatrices(kappa=float(kappa), M=M, V=V, K=K, Kp=Kp, W=W)


def assemble_yukawa_hypersingular(interface: InterfaceMesh, kappa: float) -> YukawaTransmission:
    """Galerkin matrix of the Yukawa hypersingular operator (real SPD)."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    _check_resolution(interface, kappa)
    cache = _pair_cache(interface)
    n = interface.n_panels
    panels = interface.panels
    h = interface.panel_lengths
    k2 = kappa * kappa
    Wy = np.zeros((n, n))

    for tier in cache.tiers:
        G = kv(0, kappa * tier.r) / (2.0 * np.pi)
        sh, th = tier.s_hat, tier.t_hat
        ld = (np.ones_like(sh), sh, th, sh * th)
        mG = [np.einsum("pq,pq->p", G * l[None, :], tier.w) for l in ld]
        a0, a1 = panels[tier.ia, 0], panels[tier.ia, 1]
        b0, b1 = panels[tier.ib, 0], panels[tier.ib, 1]
        coupl = k2 * tier.nanb
        _scatter(Wy, a0, a1, b0, b1, *[coupl * m for m in mG])
        _scatter(Wy, b0, b1, a0, a1, coupl * mG[0], coupl * mG[2], coupl * mG[1], coupl * mG[3])
        der = mG[0] / tier.hh
        _scatter_deriv(Wy, a0, a1, b0, b1, der)
        _scatter_deriv(Wy, b0, b1, a0, a1, der)

    adj = cache.adjacent
    mu = _adjacent_even_moments(adj, kappa, _I0C + 0j, _PHIY + 0j, -1.0 / (2 * np.pi))
    mG = _corner_to_hat(mu, adj.alpha_a, adj.beta_a, adj.alpha_b, adj.beta_b)
    mGr = [m.real for m in mG]
    a0, a1 = panels[adj.pa, 0], panels[adj.pa, 1]
    b0, b1 = panels[adj.pb, 0], panels[adj.pb, 1]
    coupl = k2 * adj.nanb
    _scatter(Wy, a0, a1, b0, b1, *[coupl * m for m in mGr])
    _scatter_deriv(Wy, a0, a1, b0, b1, mGr[0] / (adj.ha * adj.hb))

    mco = _coincident_even_moments(kappa, h, _I0C + 0j, _PHIY + 0j, -1.0 / (2 * np.pi)).real
    a0, a1 = panels[:, 0], panels[:, 1]
    _scatter(Wy, a0, a1, a0, a1, *[k2 * m for m in (mco[:, 0, 0], mco[:, 1, 0], mco[:, 0, 1], mco[:, 1, 1])])
    _scatter_deriv(Wy, a0, a1, a0, a1, mco[:, 0, 0] / h**2)

    out = YukawaTransmission(kappa=float(kappa), Wy=0.5 * (Wy + Wy.T))
    out.validate()
    return out


# ---------------------------------------------------------------------------
# circle symbols (separation-of-variables oracles)
# ---------------------------------------------------------------------------
def circle_symbol(op: str, n: int, kappa: float, R: float) -> complex:
    """Fourier symbol of a BIO on the circle of radius R in the basis e^{in t}.

    Derived by separation of variables with the library's normal orientation
    (pointing toward the origin) and Green-kernel constant.  ``op`` is one of
    V, K, Kp, W.
    """
    if R <= 0 or kappa <= 0:
        raise ValueError("R and kappa must be positive")
    z = kappa * R
    m = abs(int(n))
    J = specfun.bessel_j(m, z)
    Jp = specfun.bessel_jp(m, z)
    H = specfun.hankel1(m, z)
    Hp = specfun.hankel1p(m, z)
    if op == "V":
        return 0.5j * np.pi * R * J * H
    if op == "K":
        return 0.25j * np.pi * z * (Jp * H + J * Hp)
    if op == "Kp":
        return -0.25j * np.pi * z * (Jp * H + J * Hp)
    if op == "W":
        return -0.5j * np.pi * z * kappa * Jp * Hp
    raise ValueError(f"unknown operator {op!r}")


def yukawa_circle_symbol(n: int, kappa: float, R: float) -> float:
    """Fourier symbol of the Yukawa hypersingular operator on the circle."""
    z = kappa * R
    m = abs(int(n))
    ik = lambda j: float(ive(j, z) * kve(j, z))  # scaled product == iv * kv
    return m * m * ik(m) / R + 0.5 * z * kappa * (ik(m - 1) + ik(m + 1))


def galerkin_symbol(A: np.ndarray, M: np.ndarray, interface: InterfaceMesh, n: int) -> complex:
    """Generalized Fourier eigenvalue (e_-n, A e_n) / (e_-n, M e_n)."""
    theta = np.arctan2(interface.nodes[:, 1], interface.nodes[:, 0])
    ep = np.exp(1j * n * theta)
    em = np.exp(-1j * n * theta)
    return complex((em @ A @ ep) / (em @ M @ ep))


# ---------------------------------------------------------------------------
# Calderon projector diagnostic
# ---------------------------------------------------------------------------
def calderon_projector_defect(bios: BioMatrices) -> float:
    """Scaled defect ||P^2 - P|| / ||P|| of the discrete Calderon projector.

    P = (1/2) I + C in the mass-mediated calculus: as a primal-to-dual map,
    P_d = (1/2) diag(M, M) + [[K, V], [W, Kp]], and the square composes
    through diag(M, M)^{-1}.  The norm is the mass-weighted spectral norm.
    """
    M = bios.M
    evals, evecs = np.linalg.eigh(M)
    if np.any(evals <= 0):
        raise ValueError("interface mass matrix not positive definite")
    Mih = (evecs * evals**-0.5) @ evecs.T  # M^{-1/2}
    n = bios.n
    Pd = np.block([[bios.K, bios.V], [bios.W, bios.Kp]]) + 0.5 * np.block(
        [[M, np.zeros_like(M)], [np.zeros_like(M), M]]
    )
    Mihb = np.block([[Mih, np.zeros_like(M)], [np.zeros_like(M), Mih]])
    Pw = Mihb @ Pd @ Mihb  # weighted primal-to-primal projector
    defect = np.linalg.norm(Pw @ Pw - Pw, 2) / np.linalg.norm(Pw, 2)
    return float(defect)


def dump_matrix(path, A: np.ndarray) -> None:
    """Plain-text coordinate dump (debugging aid): row col re im."""
    with open(path, "w", encoding="utf-8") as f:
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                v = complex(A[i, j])
                f.write(f"{i} {j} {v.real!r} {v.imag!r}\n")
