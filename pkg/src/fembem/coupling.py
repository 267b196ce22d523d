"""Interface coupling operators, substructured system, and kernel diagnostics.

Implements the two classical volume/boundary coupling variants (Johnson-
Nedelec and Costabel) in three forms:

* the local interface operator with impedance shift, its resolvent and the
  associated scattering operator of the exterior subdomain,
* the substructured fixed-point system ``(Id + Pi S) q = rhs`` on the pair of
  incoming impedance traces, solved matrix-free with GMRES,
* the monolithic coupled variational solve, used as the equivalence oracle.

The exchange operator couples subdomains through the consistency conditions
(continuous trace, opposite fluxes): with outgoing traces ``o`` of both
sides, the common trace is ``u = -i (T_B + T_F)^{-1} (o_B + o_F)`` and the
incoming traces are ``o - 2 i T u`` per side.  The library applies the
overall sign ``EXCHANGE_SIGN = -1`` so the fixed point takes the standard
``(Id + Pi S) q = -Pi (0, source)`` form; the sign pair is locked by the
direct-coupling equivalence tests.

Representation discipline: trace vectors are tagged primal (P1 coefficients)
or dual (tested functionals); conversion goes through the interface mass
matrix, and every public operation validates the tag.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import krylov
from .bem import BioMatrices, YukawaTransmission
from .fem import FemSystem, LocalOperatorF, scattering_F, source_outgoing_F

logger = logging.getLogger(__name__)

EXCHANGE_SIGN = -1.0  # locked by the direct-coupling oracle (test suite)

PRIMAL = "primal"
DUAL = "dual"


@dataclass(frozen=True)
class TraceVector:
    """Interface coefficient vector tagged with its representation."""

    values: np.ndarray
    rep: str

    def __post_init__(self):
        if self.rep not in (PRIMAL, DUAL):
            raise ValueError(f"unknown representation {self.rep!r}")

    def require(self, rep: str) -> np.ndarray:
        if self.rep != rep:
            raise ValueError(f"expected a {rep} trace, got {self.rep}")
        return self.values

    def to_dual(self, mass: np.ndarray) -> "TraceVector":
        if self.rep == DUAL:
            return self
        return TraceVector(mass @ self.values, DUAL)

    def to_primal(self, mass: np.ndarray) -> "TraceVector":
        if self.rep == PRIMAL:
            return self
        return TraceVector(np.linalg.solve(mass, self.values), PRIMAL)


class CouplingKind(enum.Enum):
    JOHNSON_NEDELEC = "JN"
    COSTABEL = "Costabel"


def mass_norm(mass: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(abs(np.vdot(v, mass @ v))))


def rel_err(mass: np.ndarray, v: np.ndarray, ref: np.ndarray) -> float:
    return mass_norm(mass, v - ref) / mass_norm(mass, ref)


# ---------------------------------------------------------------------------
# local interface operator of the exterior subdomain
# ---------------------------------------------------------------------------
@dataclass
class LocalOperatorB:
    """Impedance-shifted coupling operator on the trace pair (phi, p).

    blocks (rows map primal pairs to dual pairs):
      JN:        [[-i T,      M       ], [M/2 - K, -V]]
      Costabel:  [[ W - i T,  M/2 + Kp], [M/2 - K, -V]]
    """

    kind: CouplingKind
    bios: BioMatrices
    T: np.ndarray = field(repr=False)
    blocks: np.ndarray = field(repr=False)
    lu: krylov.DenseLU = field(repr=False)

    @property
    def n(self) -> int:
        return self.bios.n

    def resolve(self, g_dual: np.ndarray):
        """(phi, p) primal pair solving blocks (phi, p) = (g, 0)."""
        rhs = np.concatenate([np.asarray(g_dual, complex), np.zeros(self.n, complex)])
        v = self.lu.solve(rhs)
        return v[: self.n], v[self.n :]


def coupling_blocks(kind: CouplingKind, bios: BioMatrices, T: np.ndarray) -> np.ndarray:
    M, V, K, Kp, W = bios.M, bios.V, bios.K, bios.Kp, bios.W
    if kind is CouplingKind.JOHNSON_NEDELEC:
        top = [-1j * T, M.astype(complex)]
    elif kind is CouplingKind.COSTABEL:
        top = [W - 1j * T, 0.5 * M + Kp]
    else:
        raise ValueError(f"unknown coupling kind {kind!r}")
    bottom = [0.5 * M - K, -V]
    return np.block([top, bottom])


def local_operator_B(kind: CouplingKind, bios: BioMatrices,
                     transmission: YukawaTransmission) -> LocalOperatorB:
    T = transmission.Wy
    if T.shape != bios.M.shape:
        raise ValueError("transmission operator size mismatch")
    blocks = coupling_blocks(kind, bios, T)
    lu = krylov.dense_lu(blocks)
    if lu.rcond < 1e-12:
        logger.warning("local interface operator nearly singular (rcond %.2e) "
                       "at kappa=%.6f: spurious resonance regime", lu.rcond, bios.kappa)
    return LocalOperatorB(kind=kind, bios=bios, T=T, blocks=blocks, lu=lu)


def scattering_B(local: LocalOperatorB, g: TraceVector) -> TraceVector:
    """Outgoing dual trace g + 2i T phi with phi from the local resolvent."""
    gv = g.require(DUAL)
    phi, _ = local.resolve(gv)
    return TraceVector(gv + 2j * (local.T @ phi), DUAL)


def reconstruct_traces(local: LocalOperatorB, g: TraceVector):
    """(Dirichlet primal, Neumann dual) reconstructed from incoming data."""
    gv = g.require(DUAL)
    phi, p = local.resolve(gv)
    return TraceVector(phi, PRIMAL), TraceVector(local.bios.M @ p, DUAL)


# ---------------------------------------------------------------------------
# exchange operator
# ---------------------------------------------------------------------------
@dataclass
class ExchangeOperator:
    T_bem: np.ndarray = field(repr=False)
    T_fem: np.ndarray = field(repr=False)
    _chol: tuple = field(repr=False)
    sign: float = EXCHANGE_SIGN

    @classmethod
    def build(cls, T_bem: np.ndarray, T_fem: np.ndarray) -> "ExchangeOperator":
        return cls(T_bem=T_bem, T_fem=T_fem,
                   _chol=sla.cho_factor(T_bem + T_fem, lower=True))

    def common_trace(self, q_bem: np.ndarray, q_fem: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self._chol, -1j * (q_bem + q_fem))


def exchange(op: ExchangeOperator, q_bem: TraceVector, q_fem: TraceVector):
    """Map an outgoing dual trace pair to the opposite incoming pair."""
    qb = q_bem.require(DUAL)
    qf = q_fem.require(DUAL)
    u = op.common_trace(qb, qf)
    out_b = op.sign * (qb - 2j * (op.T_bem @ u))
    out_f = op.sign * (qf - 2j * (op.T_fem @ u))
    return TraceVector(out_b, DUAL), TraceVector(out_f, DUAL)


# ---------------------------------------------------------------------------
# substructured system
# ---------------------------------------------------------------------------
@dataclass
class GosmSystem:
    """Matrix-free fixed-point system on stacked incoming traces (q_B ++ q_F)."""

    kind: CouplingKind
    local_bem: LocalOperatorB
    local_fem: LocalOperatorF
    exchange_op: ExchangeOperator
    rhs: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.local_bem.n

    def split(self, x: np.ndarray):
        return x[: self.n], x[self.n :]


def gosm_build(kind: CouplingKind, bios: BioMatrices, transmission: YukawaTransmission,
               local_fem: LocalOperatorF) -> GosmSystem:
    local_bem = local_operator_B(kind, bios, transmission)
    ex = ExchangeOperator.build(transmission.Wy, local_fem.transmission.S)
    s_f = source_outgoing_F(local_fem)
    zero = TraceVector(np.zeros_like(s_f), DUAL)
    rb, rf = exchange(ex, zero, TraceVector(s_f, DUAL))
    rhs = -np.concatenate([rb.values, rf.values])
    return GosmSystem(kind=kind, local_bem=local_bem, local_fem=local_fem,
                      exchange_op=ex, rhs=rhs)


def gosm_apply(system: GosmSystem, x: np.ndarray) -> np.ndarray:
    """x + Pi S x with S = diag(scattering_B, scattering_F)."""
    qb, qf = system.split(np.asarray(x, dtype=complex))
    sb = scattering_B(system.local_bem, TraceVector(qb, DUAL))
    sf = scattering_F(system.local_fem, qf)
    eb, ef = exchange(system.exchange_op, sb, TraceVector(sf, DUAL))
    return x + np.concatenate([eb.values, ef.values])


def gosm_solve(system: GosmSystem, gmres_cfg: krylov.GmresConfig | None = None):
    """Solve the substructured system; returns (q_B, q_F, GmresReport)."""
    cfg = gmres_cfg or krylov.GmresConfig()
    x, report = krylov.gmres(lambda v: gosm_apply(system, v), system.rhs,
                             tol=cfg.tol, restart=cfg.restart, maxit=cfg.maxit,
                             check_linearity=cfg.check_linearity)
    qb, qf = system.split(x)
    return TraceVector(qb, DUAL), TraceVector(qf, DUAL), report


# ---------------------------------------------------------------------------
# monolithic coupled solve (oracle)
# ---------------------------------------------------------------------------
def direct_coupling_solve(kind: CouplingKind, fem_sys: FemSystem, bios: BioMatrices,
                          kappa: float):
    """Solve the coupled variational system; returns (u volume, p TraceVector).

    The volume block is the Helmholtz form with Dirichlet lifting on the
    obstacle ring; the interface rows carry the coupling pairing; the second
    block row is the discrete Calderon equation linking the trace pair.  p is
    returned in primal representation (P1 density coefficients).
    """
    from .fem import dirichlet_data_planewave

    n = bios.n
    A = fem_sys.helmholtz(kappa).tocsc()
    free = np.concatenate([fem_sys.interior, fem_sys.trace_map])
    nf = len(free)
    sigma_pos = np.arange(nf - n, nf)
    A_ff = A[np.ix_(free, free)].tolil()

    E = sp.lil_matrix((n, nf), dtype=complex)
    E[np.arange(n), sigma_pos] = 1.0
    E = E.tocsr()

    M, V, K, Kp, W = bios.M, bios.V, bios.K, bios.Kp, bios.W
    if kind is CouplingKind.COSTABEL:
        A_ff[np.ix_(sigma_pos, sigma_pos)] = A_ff[np.ix_(sigma_pos, sigma_pos)] + sp.lil_matrix(W)
        C12 = 0.5 * M + Kp
    elif kind is CouplingKind.JOHNSON_NEDELEC:
        C12 = M.astype(complex)
    else:
        raise ValueError(f"unknown coupling kind {kind!r}")

    top = sp.hstack([A_ff.tocsc(), (E.T @ sp.csr_matrix(C12)).tocsc()])
    bottom = sp.hstack([(sp.csr_matrix(0.5 * M - K) @ E).tocsc(),
                        sp.csc_matrix(-V)])
    system = sp.vstack([top, bottom]).tocsc()

    u_d = dirichlet_data_planewave(fem_sys, kappa)
    lift = -(A[np.ix_(free, fem_sys.gamma_o)] @ u_d)
    rhs = np.concatenate([np.asarray(lift).ravel(), np.zeros(n, complex)])

    try:
        factor = krylov.sparse_lu(system)
        sol = factor.solve(rhs)
    except RuntimeError as exc:
        raise RuntimeError(
            f"coupled system singular at kappa={kappa} (spurious resonance)") from exc
    if not np.all(np.isfinite(sol)):
        raise RuntimeError(f"coupled system produced non-finite solution at kappa={kappa}")

    u = np.zeros(fem_sys.n_dof, dtype=complex)
    u[free] = sol[:nf]
    u[fem_sys.gamma_o] = u_d
    p = sol[nf:]
    return u, TraceVector(p, PRIMAL)


# ---------------------------------------------------------------------------
# weighted spectral diagnostics
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TraceNorms:
    """Discrete trace-space geometry induced by an SPD transmission operator.

    The operator plays the role of a squared norm on the Dirichlet trace
    space; the Neumann-trace norm is its mass-mediated dual.  Cholesky
    factors of T = L L^T provide the weightings used by the singular-value
    diagnostics: Dirichlet primal R = L^T, Neumann primal R = L^{-1} M,
    functionals on H^{1/2} R = L^{-1}, functionals on H^{-1/2} R = L^T M^{-1}.
    """

    mass: np.ndarray
    L: np.ndarray

    @classmethod
    def build(cls, mass: np.ndarray, T: np.ndarray) -> "TraceNorms":
        return cls(mass=mass, L=np.linalg.cholesky(0.5 * (T + T.T)))

    # left applications (rows of an operator matrix = output weighting)
    def out_dual_d(self, X):  # L^{-1} X
        return sla.solve_triangular(self.L, X, lower=True)

    def out_dual_n(self, X):  # L^T M^{-1} X
        return self.L.T @ np.linalg.solve(self.mass, X)

    # right applications (columns = inverse input weighting)
    def in_dirichlet_inv(self, X):  # X L^{-T}
        return sla.solve_triangular(self.L, X.T, lower=True).T

    def in_neumann_inv(self, X):  # X M^{-1} L
        return np.linalg.solve(self.mass, X.T).T @ self.L

    # recover primal vectors from weighted right singular vectors
    def lift_dirichlet(self, v):  # L^{-T} v
        return sla.solve_triangular(self.L, v, trans="T", lower=True)

    def lift_neumann(self, v):  # M^{-1} L v
        return np.linalg.solve(self.mass, self.L @ v)

    def gram_neumann(self) -> np.ndarray:
        """Inner-product matrix of the H^{-1/2} primal norm: M T^{-1} M."""
        Li_m = sla.solve_triangular(self.L, self.mass, lower=True)
        return Li_m.T @ Li_m


def weighted_block_svd(blocks: np.ndarray, norms: TraceNorms):
    """Smallest singular pair of the coupling blocks in trace norms.

    Input pairs live in H^{1/2} x H^{-1/2}; the dual output rows pair against
    the same spaces.  Returns (sigma_min, phi, p) with (phi, p) primal.
    """
    n = norms.mass.shape[0]
    B = np.vstack([norms.out_dual_d(blocks[:n]), norms.out_dual_n(blocks[n:])])
    B = np.hstack([norms.in_dirichlet_inv(B[:, :n]), norms.in_neumann_inv(B[:, n:])])
    (sigma, _, v), = krylov.svd_smallest(B, 1)
    phi = norms.lift_dirichlet(v[:n])
    p = norms.lift_neumann(v[n:])
    return sigma, phi, p


def dominant_fourier_mode(values: np.ndarray) -> int:
    """Dominant |mode| of a vector sampled on the ordered interface nodes."""
    c = np.fft.fft(values)
    n = len(values)
    folded = np.abs(c) ** 2
    half = n // 2
    energy = folded[: half + 1].copy()
    energy[1:half] += folded[n - 1 : half : -1]
    return int(np.argmax(energy))


@dataclass(frozen=True)
class KernelStudy:
    kind: CouplingKind
    kappa: float
    sigma_min: float
    r_jn: float
    r_costabel: float
    mode_phi: int
    mode_p: int


def kernel_study(kind: CouplingKind, bios: BioMatrices,
                 transmission: YukawaTransmission) -> KernelStudy:
    """Smallest singular pair of the local operator and its structure metrics.

    r_jn measures closeness to the relation ``p = i T phi`` (the exterior
    kernel shape of the ordinary coupling); r_costabel measures the vanishing
    of the Dirichlet component (the symmetric coupling's kernel shape).  The
    singular geometry uses the transmission-operator trace norms; the metrics
    are mass-weighted as plain L2 comparisons.
    """
    T = transmission.Wy
    M = bios.M
    blocks = coupling_blocks(kind, bios, T)
    norms = TraceNorms.build(M, T)
    sigma, phi, p = weighted_block_svd(blocks, norms)
    t_phi = np.linalg.solve(M, T @ phi)  # dual -> primal
    r_jn = mass_norm(M, p - 1j * t_phi) / mass_norm(M, p)
    r_c = mass_norm(M, phi) / mass_norm(M, p)
    return KernelStudy(kind=kind, kappa=bios.kappa, sigma_min=float(sigma),
                       r_jn=r_jn, r_costabel=r_c,
                       mode_phi=dominant_fourier_mode(phi),
                       mode_p=dominant_fourier_mode(p))


# ---------------------------------------------------------------------------
# impedance combined operator and Remark-1 diagnostics
# ---------------------------------------------------------------------------
def impedance_bio(bios: BioMatrices, transmission: YukawaTransmission) -> np.ndarray:
    """Combined-field operator D* = (M/2 - K) - i V M^{-1} T (primal -> dual)."""
    T = transmission.Wy
    return (0.5 * bios.M - bios.K) - 1j * (bios.V @ np.linalg.solve(bios.M, T))


def impedance_bio_adjoint(bios: BioMatrices, transmission: YukawaTransmission) -> np.ndarray:
    """Bilinear adjoint D = (M/2 + Kp) - i T M^{-1} V (transpose of D*)."""
    return impedance_bio(bios, transmission).T


def impedance_kernel_probe(bios: BioMatrices, transmission: YukawaTransmission):
    """(sigma_min, phi) of D* in trace norms (H^{1/2} -> dual-of-H^{-1/2})."""
    norms = TraceNorms.build(bios.M, transmission.Wy)
    D = impedance_bio(bios, transmission)
    B = norms.in_dirichlet_inv(norms.out_dual_n(D))
    (sigma, _, v), = krylov.svd_smallest(B, 1)
    return float(sigma), norms.lift_dirichlet(v)


def near_kernel_vectors(bios: BioMatrices, transmission: YukawaTransmission):
    """Near-kernel (smallest right singular) vectors of V, M/2 + Kp, and D.

    All three act on the Neumann trace space; vectors are primal and the
    singular geometry uses the transmission trace norms.
    """
    norms = TraceNorms.build(bios.M, transmission.Wy)
    out = {}
    # V: H^{-1/2} -> dual of H^{-1/2} (an H^{1/2}-valued functional)
    B = norms.in_neumann_inv(norms.out_dual_n(bios.V))
    (_, _, v), = krylov.svd_smallest(B, 1)
    out["V"] = norms.lift_neumann(v)
    # M/2 + Kp: H^{-1/2} -> dual of H^{1/2}
    B = norms.in_neumann_inv(norms.out_dual_d(0.5 * bios.M + bios.Kp))
    (_, _, v), = krylov.svd_smallest(B, 1)
    out["half_plus_Kp"] = norms.lift_neumann(v)
    # D: H^{-1/2} -> dual of H^{1/2}
    B = norms.in_neumann_inv(norms.out_dual_d(impedance_bio_adjoint(bios, transmission)))
    (_, _, v), = krylov.svd_smallest(B, 1)
    out["D"] = norms.lift_neumann(v)
    return out, norms


def principal_angle_deg(u: np.ndarray, v: np.ndarray, gram: np.ndarray) -> float:
    """Angle between two one-dimensional subspaces in an SPD inner product."""
    num = abs(np.vdot(u, gram @ v))
    den = np.sqrt(abs(np.vdot(u, gram @ u)) * abs(np.vdot(v, gram @ v)))
    return float(np.degrees(np.arccos(min(num / den, 1.0))))
