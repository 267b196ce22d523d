"""P1 finite elements on the annulus: Helmholtz/Yukawa forms, Dirichlet
lifting, the Schur-complement transmission operator, and the local solver
for the volume subdomain.

DOF layout follows the mesh: vertex index = ring * n_theta + j, so the
obstacle ring (Dirichlet data) comes first and the interface ring last.  The
interface trace map aligns volume sigma-DOFs with interface-mesh nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import krylov
from .geometry import AnnulusMesh, InterfaceMesh, extract_interface

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FemSystem:
    """P1 stiffness and mass matrices with a DOF partition.

    stiffness, mass : real sparse symmetric (CSR)
    interior, gamma_o, sigma : disjoint vertex index arrays covering the mesh
    trace_map : sigma DOFs listed in interface-node order
    """

    mesh: AnnulusMesh = field(repr=False)
    stiffness: sp.csr_matrix = field(repr=False)
    mass: sp.csr_matrix = field(repr=False)
    interior: np.ndarray
    gamma_o: np.ndarray
    sigma: np.ndarray
    trace_map: np.ndarray
    interface: InterfaceMesh = field(repr=False)

    @property
    def n_dof(self) -> int:
        return self.stiffness.shape[0]

    def helmholtz(self, kappa: float) -> sp.csr_matrix:
        """Complex Helmholtz bilinear form stiffness - kappa^2 mass."""
        return (self.stiffness - kappa**2 * self.mass).astype(complex)


def assemble_fem(mesh: AnnulusMesh, kappa: float = 1.0) -> FemSystem:
    """Exact P1 element integrals on every triangle (closed forms)."""
    pts = mesh.vertices
    tris = mesh.triangles
    p = pts[tris]  # (nt, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    if np.any(area <= 0):
        raise ValueError("degenerate or mis-oriented triangle in mesh")

    # gradients of barycentric hats: grad lambda_i = rot(edge_opposite) / (2A)
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    rot = lambda v: np.column_stack([-v[:, 1], v[:, 0]])
    grads = np.stack([rot(e0), rot(e1), rot(e2)], axis=1) / (2.0 * area)[:, None, None]

    kloc = np.einsum("tia,tja->tij", grads, grads) * area[:, None, None]
    mref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    mloc = mref[None, :, :] * area[:, None, None]

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    nv = len(pts)
    K = sp.coo_matrix((kloc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    M = sp.coo_matrix((mloc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()

    gamma_o = mesh.gamma_o_vertices
    sigma = mesh.sigma_vertices
    mask = np.ones(nv, dtype=bool)
    mask[gamma_o] = False
    mask[sigma] = False
    interior = np.nonzero(mask)[0]

    interface = extract_interface(mesh)
    trace_map = interface.vertex_ids
    return FemSystem(
        mesh=mesh,
        stiffness=K,
        mass=M,
        interior=interior,
        gamma_o=gamma_o,
        sigma=sigma,
        trace_map=trace_map,
        interface=interface,
    )


@dataclass(frozen=True)
class SchurTransmission:
    """Dense real SPD transmission operator on sigma DOFs (Yukawa DtN)."""

    kappa: float
    S: np.ndarray

    def validate(self) -> None:
        dev = np.linalg.norm(self.S - self.S.T) / np.linalg.norm(self.S)
        if dev > 1e-10:
            raise ValueError(f"Schur transmission not symmetric: {dev:.2e}")
        try:
            np.linalg.cholesky(0.5 * (self.S + self.S.T))
        except np.linalg.LinAlgError as exc:
            raise ValueError("Schur transmission not positive definite") from exc


def schur_transmission(fem: FemSystem, kappa: float) -> SchurTransmission:
    """Eliminate non-interface DOFs from the Yukawa form (natural on Gamma_O).

    S = A_ss - A_si A_ii^{-1} A_is with A = stiffness + kappa^2 mass; maps
    primal sigma coefficients to dual coefficients.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    A = (fem.stiffness + kappa**2 * fem.mass).tocsc()
    keep = fem.trace_map  # sigma DOFs in interface order
    others = np.concatenate([fem.interior, fem.gamma_o])
    A_ii = A[np.ix_(others, others)]
    A_is = A[np.ix_(others, keep)].toarray()
    A_ss = A[np.ix_(keep, keep)].toarray()
    factor = krylov.sparse_ldl(A_ii)
    X = factor.solve(A_is)
    S = A_ss - A_is.T @ X
    out = SchurTransmission(kappa=float(kappa), S=0.5 * (S + S.T))
    out.validate()
    return out


def dirichlet_data_planewave(fem: FemSystem, kappa: float) -> np.ndarray:
    """Scattered-field Dirichlet data -exp(i kappa x1) at the obstacle nodes."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    x1 = fem.mesh.vertices[fem.gamma_o, 0]
    return -np.exp(1j * kappa * x1)


@dataclass
class LocalOperatorF:
    """Factorized volume-side local operator with impedance closure.

    Realizes the Helmholtz form on non-obstacle DOFs with the interface block
    shifted by -i S, plus the Dirichlet lifting of the plane-wave data.
    solve() maps dual interface data to a full volume coefficient vector.
    """

    fem: FemSystem
    kappa: float
    transmission: SchurTransmission
    _factor: krylov.SparseFactor = field(repr=False)
    _free: np.ndarray = field(repr=False)
    _sigma_pos: np.ndarray = field(repr=False)
    _lift_rhs: np.ndarray = field(repr=False)
    _dirichlet: np.ndarray = field(repr=False)

    def solve(self, g: np.ndarray | None, include_source: bool = False) -> np.ndarray:
        """Solve the local problem for dual interface data g (None = zero)."""
        rhs = np.zeros(len(self._free), dtype=complex)
        if g is not None:
            rhs[self._sigma_pos] += np.asarray(g, dtype=complex)
        if include_source:
            rhs += self._lift_rhs
        u_free = self._factor.solve(rhs)
        u = np.zeros(self.fem.n_dof, dtype=complex)
        u[self._free] = u_free
        if include_source:
            u[self.fem.gamma_o] = self._dirichlet
        return u

    def interface_trace(self, u: np.ndarray) -> np.ndarray:
        """Primal interface coefficients from a volume coefficient vector."""
        return u[self.fem.trace_map]


def local_operator_F(fem: FemSystem, kappa: float, transmission: SchurTransmission) -> LocalOperatorF:
    """Build and factorize the volume local operator at wavenumber kappa."""
    A = fem.helmholtz(kappa).tolil()
    keep = fem.trace_map
    # impedance closure: subtract i S on the interface block
    A[np.ix_(keep, keep)] = A[np.ix_(keep, keep)] - 1j * sp.lil_matrix(transmission.S)
    A = A.tocsc()
    free = np.concatenate([fem.interior, keep])
    gamma_o = fem.gamma_o
    dirichlet = dirichlet_data_planewave(fem, kappa)
    lift = -(A[np.ix_(free, gamma_o)] @ dirichlet)
    A_ff = A[np.ix_(free, free)]
    factor = krylov.sparse_ldl(A_ff)
    sigma_pos = np.arange(len(fem.interior), len(free))
    return LocalOperatorF(
        fem=fem,
        kappa=float(kappa),
        transmission=transmission,
        _factor=factor,
        _free=free,
        _sigma_pos=sigma_pos,
        _lift_rhs=np.asarray(lift).ravel(),
        _dirichlet=dirichlet,
    )


def scattering_F(local: LocalOperatorF, g: np.ndarray) -> np.ndarray:
    """Outgoing dual trace g + 2i S (interface trace of the local solve)."""
    u = local.solve(g, include_source=False)
    return np.asarray(g, dtype=complex) + 2j * (local.transmission.S @ local.interface_trace(u))


def source_outgoing_F(local: LocalOperatorF) -> np.ndarray:
    """Outgoing dual trace produced by the Dirichlet source data alone."""
    u = local.solve(None, include_source=True)
    return 2j * (local.transmission.S @ local.interface_trace(u))
