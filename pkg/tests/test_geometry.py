"""Structured annulus meshing and interface extraction."""

import numpy as np
import pytest

from fembem import geometry


def test_mesh_resolution_formula():
    assert geometry.mesh_resolution(10, 20) == pytest.approx(2 * np.pi / 200, rel=1e-14)
    assert geometry.mesh_resolution(1, 2 * np.pi) == pytest.approx(1.0, rel=1e-14)
    assert geometry.mesh_resolution(2 * np.pi, 1) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        geometry.mesh_resolution(0, 20)


def test_coarse_mesh_counts():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    assert mesh.n_theta == 26
    assert mesh.n_r == 2
    assert len(mesh.triangles) == 2 * 26 * 2


def test_paper_mesh_counts():
    h = geometry.mesh_resolution(10, 20)
    mesh = geometry.build_annulus_mesh(1.0, 2.0, h)
    assert mesh.n_theta == 400
    assert mesh.n_r == 32


def test_triangles_positively_oriented():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    assert np.all(mesh.signed_areas() > 0)


def test_boundary_vertices_on_circles():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.25)
    r_in = np.linalg.norm(mesh.vertices[mesh.gamma_o_vertices], axis=1)
    r_out = np.linalg.norm(mesh.vertices[mesh.sigma_vertices], axis=1)
    assert np.max(np.abs(r_in - 1.0)) < 1e-12
    assert np.max(np.abs(r_out - 2.0)) < 1e-12


def test_boundary_loops_closed():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    for label in (geometry.GAMMA_O, geometry.SIGMA):
        edges = [e for e, lab in mesh.boundary_edges if lab == label]
        succ = dict(edges)
        start = edges[0][0]
        seen = 1
        v = succ[start]
        while v != start:
            v = succ[v]
            seen += 1
        assert seen == len(edges)


def test_rejects_bad_resolution():
    with pytest.raises(ValueError):
        geometry.build_annulus_mesh(1.0, 2.0, 1.9)  # fewer than 8 angular nodes
    with pytest.raises(ValueError):
        geometry.build_annulus_mesh(2.0, 1.0, 0.1)


def test_mesh_area_converges():
    h = geometry.mesh_resolution(10, 20)
    mesh = geometry.build_annulus_mesh(1.0, 2.0, h)
    assert mesh.area() == pytest.approx(3 * np.pi, rel=1e-3)


def test_extract_interface_panels_and_lengths():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    iface = geometry.extract_interface(mesh)
    assert iface.n_panels == 26
    expected = 2 * 2.0 * np.sin(np.pi / 26)
    assert np.allclose(iface.panel_lengths, expected, rtol=1e-12)


def test_interface_normals_point_inward_and_unit():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    iface = geometry.extract_interface(mesh)
    assert np.allclose(np.linalg.norm(iface.normals, axis=1), 1.0, atol=1e-12)
    dots = np.einsum("ij,ij->i", iface.normals, iface.midpoints)
    assert np.all(dots < 0)


def test_interface_loop_closes():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    iface = geometry.extract_interface(mesh)
    tangents = iface.nodes[iface.panels[:, 1]] - iface.nodes[iface.panels[:, 0]]
    assert np.linalg.norm(tangents.sum(axis=0)) < 1e-12


def test_interface_perimeter_converges():
    h = geometry.mesh_resolution(10, 20)
    mesh = geometry.build_annulus_mesh(1.0, 2.0, h)
    iface = geometry.extract_interface(mesh)
    assert iface.perimeter() == pytest.approx(4 * np.pi, rel=1e-3)


def test_interface_vertex_ids_align_with_mesh():
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    iface = geometry.extract_interface(mesh)
    assert np.allclose(mesh.vertices[iface.vertex_ids], iface.nodes)


def test_circle_interface_standalone():
    iface = geometry.circle_interface(2.0, 100)
    assert iface.n_panels == 100
    assert iface.vertex_ids is None
    assert iface.perimeter() == pytest.approx(2 * 100 * 2.0 * np.sin(np.pi / 100), rel=1e-13)


def test_export_text(tmp_path):
    mesh = geometry.build_annulus_mesh(1.0, 2.0, 0.5)
    path = tmp_path / "mesh.txt"
    mesh.export_text(path)
    lines = path.read_text().splitlines()
    kinds = {ln.split()[0] for ln in lines}
    assert kinds == {"vertex", "triangle", "boundary"}
    assert sum(ln.startswith("vertex") for ln in lines) == len(mesh.vertices)
    assert sum(ln.startswith("triangle") for ln in lines) == len(mesh.triangles)
