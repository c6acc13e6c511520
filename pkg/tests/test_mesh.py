import math

import numpy as np
import pytest

from emaclab import mesh
from emaclab.config import resolve_mesh_text

MINIMAL = """emaclab-mesh 1
4 2 4
0 0
1 0
1 1
0 1
0 1 2
0 2 3
0 1 wall
1 2 wall
2 3 wall
3 0 wall
"""


def test_unit_square_smallest():
    m = mesh.generate_unit_square(1)
    assert m.num_vertices == 4
    assert m.num_triangles == 2
    assert len(m.boundary_edges) == 4


def test_unit_square_counting():
    m = mesh.generate_unit_square(4)
    assert (m.num_vertices, m.num_triangles) == (25, 32)
    assert len(m.boundary_edges) == 16


def test_unit_square_area_partition():
    m = mesh.generate_unit_square(8)
    assert abs(mesh.triangle_areas(m).sum() - 1.0) <= 1e-14


def test_mesh_size():
    assert abs(mesh.mesh_size(mesh.generate_unit_square(1)) - math.sqrt(2)) <= 1e-14
    assert abs(mesh.mesh_size(mesh.generate_unit_square(4)) - math.sqrt(2) / 4) <= 1e-15
    assert mesh.mesh_size(mesh.generate_unit_square(3)) > 0


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_refinement_halves_mesh_size_exactly(n):
    assert mesh.mesh_size(mesh.generate_unit_square(2 * n)) == mesh.mesh_size(
        mesh.generate_unit_square(n)
    ) / 2


def test_periodic_strip_pairs():
    m = mesh.generate_periodic_strip(4)
    assert len(m.periodic_pairs) == 5
    left = m.vertices[m.periodic_pairs[:, 0]]
    right = m.vertices[m.periodic_pairs[:, 1]]
    assert np.all(left[:, 1] == right[:, 1])
    assert np.all(left[:, 0] == 0.0)
    assert np.all(right[:, 0] == 1.0)


def test_periodic_strip_area():
    m = mesh.generate_periodic_strip(8)
    assert abs(mesh.triangle_areas(m).sum() - 1.0) <= 1e-14


def test_periodic_strip_markers():
    m = mesh.generate_periodic_strip(4)
    assert m.markers() == {"slip_bottom", "slip_top", "periodic_left", "periodic_right"}


def test_read_minimal_file():
    m = mesh.read_mesh(MINIMAL)
    assert m.num_vertices == 4
    assert m.num_triangles == 2


def test_read_rejects_clockwise_triangle():
    bad = MINIMAL.replace("0 1 2\n", "0 2 1\n", 1).replace("0 2 3\n", "0 1 2\n", 1)
    with pytest.raises(mesh.MeshInvariantError, match="negative area"):
        mesh.read_mesh(bad)


def test_read_reports_line_numbers():
    with pytest.raises(mesh.MeshFormatError, match="line 1"):
        mesh.read_mesh("not-a-mesh\n")
    with pytest.raises(mesh.MeshFormatError, match="line 3"):
        mesh.read_mesh("emaclab-mesh 1\n4 2 4\nbroken vertex\n")


def test_read_rejects_unknown_marker():
    bad = MINIMAL.replace("0 1 wall", "0 1 lid")
    with pytest.raises(mesh.MeshFormatError, match="lid"):
        mesh.read_mesh(bad)


def test_write_read_round_trip_bit_exact():
    m = mesh.generate_periodic_strip(5)
    rt = mesh.read_mesh(mesh.write_mesh(m))
    assert np.array_equal(rt.vertices, m.vertices)
    assert np.array_equal(rt.triangles, m.triangles)
    assert rt.boundary_edges == m.boundary_edges
    assert np.array_equal(rt.periodic_pairs, m.periodic_pairs)
    # irrational coordinates survive the text round trip too
    m2 = mesh.TriMesh(
        m.vertices * math.pi / 3.0, m.triangles, m.boundary_edges, m.periodic_pairs
    )
    rt2 = mesh.read_mesh(mesh.write_mesh(m2))
    assert np.array_equal(rt2.vertices, m2.vertices)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_edge_manifold_counting(n):
    m = mesh.generate_unit_square(n)
    edges, tri_edges = mesh.edge_structure(m)
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    assert set(np.unique(counts)) <= {1, 2}
    assert (counts == 1).sum() == len(m.boundary_edges)
    # Euler relation for the disk: V - E + T = 1
    assert m.num_vertices - len(edges) + m.num_triangles == 1


def test_boundary_mismatch_rejected():
    bad = MINIMAL.replace("4 2 4", "4 2 3").replace("3 0 wall\n", "")
    with pytest.raises(mesh.MeshInvariantError, match="boundary mismatch"):
        mesh.read_mesh(bad)


@pytest.mark.parametrize("name", ["cylinder_coarse.mesh", "cylinder_fine.mesh"])
def test_cylinder_mesh_valid_and_area(name):
    m = mesh.read_mesh(resolve_mesh_text(f"builtin:{name}"))
    # annulus topology
    edges, _ = mesh.edge_structure(m)
    assert m.num_vertices - len(edges) + m.num_triangles == 0
    assert m.markers() == {"wall", "inlet", "outlet", "cylinder"}
    target = 2.2 * 0.41 - math.pi * 0.05**2
    area = mesh.triangle_areas(m).sum()
    assert abs(area - target) / target <= 0.005  # polygonal circle deficit
    cyl = [e for e in m.boundary_edges if e[2] == "cylinder"]
    assert len(cyl) >= 64
