"""Structured meshing of the annulus domain and interface polygon extraction.

The scattering experiment lives on the annulus between the obstacle circle
(radius ``r_in``) and the coupling interface (radius ``r_out``).  Meshing is a
deterministic structured polar grid: ``n_theta`` uniform angular nodes and
``n_r`` uniform radial layers, each quad split into two counterclockwise
triangles.  The interface is the outer boundary ring, ordered
counterclockwise, with panel normals pointing toward the origin (the exterior
domain's outward normal, since the exterior subdomain is the unbounded one).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAMMA_O = "GammaO"
SIGMA = "Sigma"

_CEIL_GUARD = 1e-9  # absorbs float rounding in n = ceil(length / h)


def mesh_resolution(kappa_mesh: float, points_per_wavelength: float) -> float:
    """Target edge length h = 2*pi / (kappa * points_per_wavelength)."""
    if kappa_mesh <= 0 or points_per_wavelength <= 0:
        raise ValueError("kappa_mesh and points_per_wavelength must be > 0")
    return 2.0 * np.pi / (kappa_mesh * points_per_wavelength)


@dataclass(frozen=True)
class AnnulusMesh:
    """Triangulated annulus with labelled boundary loops.

    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counterclockwise
    boundary_edges : list of ((v0, v1), label) with label GammaO or Sigma
    h : target edge length used to build the grid
    n_theta, n_r : grid dimensions (vertex index = ring * n_theta + j)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: list = field(repr=False)
    h: float
    r_in: float
    r_out: float
    n_theta: int
    n_r: int

    @property
    def gamma_o_vertices(self) -> np.ndarray:
        return np.arange(self.n_theta)

    @property
    def sigma_vertices(self) -> np.ndarray:
        return self.n_r * self.n_theta + np.arange(self.n_theta)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def area(self) -> float:
        return float(np.sum(self.signed_areas()))

    def export_text(self, path) -> None:
        """Debug dump: one entity per line (vertex / triangle / boundary edge)."""
        with open(path, "w", encoding="utf-8") as f:
            for i, (x, y) in enumerate(self.vertices):
                f.write(f"vertex {i} {x!r} {y!r}\n")
            for i, t in enumerate(self.triangles):
                f.write(f"triangle {i} {t[0]} {t[1]} {t[2]}\n")
            for (v0, v1), label in self.boundary_edges:
                f.write(f"boundary {v0} {v1} {label}\n")


@dataclass(frozen=True)
class InterfaceMesh:
    """Closed polygonal interface: ordered nodes, panels, inward unit normals.

    nodes : (n, 2) points on the interface circle, counterclockwise
    panels : (n, 2) consecutive node index pairs, closing the loop
    normals : (n, 2) unit normal per panel with normal . midpoint < 0
    vertex_ids : volume-mesh vertex index per node (None for standalone use)
    """

    nodes: np.ndarray
    panels: np.ndarray
    normals: np.ndarray
    vertex_ids: np.ndarray | None = None

    @property
    def n_panels(self) -> int:
        return len(self.panels)

    @property
    def panel_lengths(self) -> np.ndarray:
        d = self.nodes[self.panels[:, 1]] - self.nodes[self.panels[:, 0]]
        return np.linalg.norm(d, axis=1)

    @property
    def tangents(self) -> np.ndarray:
        d = self.nodes[self.panels[:, 1]] - self.nodes[self.panels[:, 0]]
        return d / self.panel_lengths[:, None]

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[self.panels[:, 0]] + self.nodes[self.panels[:, 1]])

    def perimeter(self) -> float:
        return float(np.sum(self.panel_lengths))


def _guarded_ceil(x: float) -> int:
    return int(np.ceil(x - _CEIL_GUARD))


def build_annulus_mesh(r_in: float, r_out: float, h: float) -> AnnulusMesh:
    """Structured polar triangulation of the annulus r_in < r < r_out."""
    if not (0 < r_in < r_out):
        raise ValueError("need 0 < r_in < r_out")
    if not (0 < h < r_in):
        raise ValueError("need 0 < h < r_in")
    n_theta = _guarded_ceil(2.0 * np.pi * r_out / h)
    n_r = _guarded_ceil((r_out - r_in) / h)
    if n_theta < 8:
        raise ValueError(f"h={h} gives only {n_theta} angular nodes (< 8)")

    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    radii = np.linspace(r_in, r_out, n_r + 1)
    vertices = np.empty(((n_r + 1) * n_theta, 2))
    for k, r in enumerate(radii):
        vertices[k * n_theta : (k + 1) * n_theta, 0] = r * np.cos(theta)
        vertices[k * n_theta : (k + 1) * n_theta, 1] = r * np.sin(theta)

    tris = []
    for k in range(n_r):
        base = k * n_theta
        for j in range(n_theta):
            jn = (j + 1) % n_theta
            v00, v10 = base + j, base + jn
            v01, v11 = v00 + n_theta, v10 + n_theta
            # split along the v00-v11 diagonal, both triangles counterclockwise
            tris.append((v00, v01, v11))
            tris.append((v00, v11, v10))
    triangles = np.array(tris, dtype=np.int64)

    edges = []
    for j in range(n_theta):
        jn = (j + 1) % n_theta
        edges.append(((j, jn), GAMMA_O))
        edges.append(((n_r * n_theta + j, n_r * n_theta + jn), SIGMA))

    return AnnulusMesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=edges,
        h=h,
        r_in=r_in,
        r_out=r_out,
        n_theta=n_theta,
        n_r=n_r,
    )


def _interface_from_loop(nodes: np.ndarray, vertex_ids=None) -> InterfaceMesh:
    n = len(nodes)
    panels = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    tang = nodes[panels[:, 1]] - nodes[panels[:, 0]]
    tang /= np.linalg.norm(tang, axis=1)[:, None]
    normals = np.column_stack([-tang[:, 1], tang[:, 0]])  # +90 deg: inward for CCW
    mids = 0.5 * (nodes[panels[:, 0]] + nodes[panels[:, 1]])
    if not np.all(np.einsum("ij,ij->i", normals, mids) < 0):
        raise ValueError("interface orientation broken: normals must point inward")
    return InterfaceMesh(nodes=nodes, panels=panels, normals=normals, vertex_ids=vertex_ids)


def extract_interface(mesh: AnnulusMesh) -> InterfaceMesh:
    """Interface polygon from the Sigma-labelled boundary loop of the mesh."""
    sigma_edges = [e for e, label in mesh.boundary_edges if label == SIGMA]
    succ = {v0: v1 for v0, v1 in sigma_edges}
    start = sigma_edges[0][0]
    loop = [start]
    v = succ[start]
    while v != start:
        loop.append(v)
        if v not in succ:
            raise ValueError("Sigma boundary loop is not closed")
        v = succ[v]
    if len(loop) != len(sigma_edges):
        raise ValueError("Sigma boundary loop is not a single closed loop")
    ids = np.array(loop, dtype=np.int64)
    nodes = mesh.vertices[ids].copy()
    # counterclockwise start at the node of smallest angle
    ang = np.arctan2(nodes[:, 1], nodes[:, 0])
    roll = int(np.argmin(np.mod(ang, 2.0 * np.pi)))
    ids = np.roll(ids, -roll)
    nodes = mesh.vertices[ids].copy()
    return _interface_from_loop(nodes, vertex_ids=ids)


def circle_interface(radius: float, n_panels: int) -> InterfaceMesh:
    """Standalone uniform polygon interface on a circle (no volume mesh)."""
    if n_panels < 8:
        raise ValueError("need at least 8 panels")
    theta = 2.0 * np.pi * np.arange(n_panels) / n_panels
    nodes = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return _interface_from_loop(nodes)
