"""Conforming triangulations of the benchmark domains.

A :class:`TriMesh` is plain data: vertex coordinates, counterclockwise
triangles, marked boundary edges and (optionally) a periodic pairing of
left/right boundary vertices.  Structured generators cover the unit square
and the periodic strip; channel meshes with a cylindrical hole are imported
from the ASCII format documented at :func:`read_mesh`.

Meshes are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Recognized boundary-edge markers.
MARKERS = (
    "wall",
    "inlet",
    "outlet",
    "cylinder",
    "periodic_left",
    "periodic_right",
    "slip_bottom",
    "slip_top",
)


class MeshError(ValueError):
    """Base class for mesh construction failures."""


class MeshFormatError(MeshError):
    """Malformed mesh file; message carries the offending line number."""


class MeshInvariantError(MeshError):
    """A structural invariant (orientation, manifoldness, Euler relation) failed."""


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray                     # (V, 2) float
    triangles: np.ndarray                    # (T, 3) int, counterclockwise
    boundary_edges: tuple                    # of (i0, i1, marker)
    periodic_pairs: np.ndarray | None = None # (P, 2) int, (left, right)

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)
        if self.periodic_pairs is not None:
            self.periodic_pairs.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def markers(self) -> set:
        return {m for _, _, m in self.boundary_edges}


def triangle_areas(mesh: TriMesh) -> np.ndarray:
    """Signed areas; positive for counterclockwise triangles."""
    p = mesh.vertices[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def edge_structure(mesh: TriMesh):
    """Unique edges and the per-triangle edge map.

    Returns
    -------
    edges : (E, 2) int array, each row sorted, rows in lexicographic order
    tri_edges : (T, 3) int array, tri_edges[t, k] is the global index of the
        edge opposite local vertex k of triangle t
    """
    t = mesh.triangles
    v = mesh.num_vertices
    raw = np.stack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]], axis=1)  # (T,3,2)
    raw = np.sort(raw, axis=2)
    keys = raw[:, :, 0].astype(np.int64) * v + raw[:, :, 1]
    uniq, inverse = np.unique(keys, return_inverse=True)
    edges = np.column_stack([uniq // v, uniq % v]).astype(t.dtype)
    return edges, inverse.reshape(-1, 3)


def mesh_size(mesh: TriMesh) -> float:
    """Longest edge over all triangles (the global mesh size h)."""
    p = mesh.vertices[mesh.triangles]
    lengths = [
        np.hypot(*(p[:, i] - p[:, j]).T) for i, j in ((0, 1), (1, 2), (2, 0))
    ]
    return float(max(l.max() for l in lengths))


def validate(mesh: TriMesh) -> None:
    """Check all TriMesh invariants; raise MeshInvariantError on failure."""
    areas = triangle_areas(mesh)
    if np.any(areas <= 0):
        bad = int(np.argmin(areas))
        raise MeshInvariantError(
            f"negative area: triangle {bad} has signed area {areas[bad]:.3e}"
        )

    for i0, i1, m in mesh.boundary_edges:
        if m not in MARKERS:
            raise MeshInvariantError(f"unknown boundary marker {m!r}")
        if not (0 <= i0 < mesh.num_vertices and 0 <= i1 < mesh.num_vertices):
            raise MeshInvariantError(f"boundary edge ({i0},{i1}) out of range")

    edges, tri_edges = edge_structure(mesh)
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    if counts.max() > 2:
        raise MeshInvariantError("non-manifold edge: shared by more than two triangles")

    true_boundary = {tuple(e) for e in edges[counts == 1]}
    declared = {tuple(sorted((i0, i1))) for i0, i1, _ in mesh.boundary_edges}
    if declared != true_boundary:
        missing = true_boundary - declared
        extra = declared - true_boundary
        raise MeshInvariantError(
            f"boundary mismatch: {len(missing)} undeclared, {len(extra)} spurious edges"
        )
    if len(mesh.boundary_edges) != len(declared):
        raise MeshInvariantError("duplicate boundary edges")

    # Euler characteristic: 1 for a disk, 0 for an annulus (cylinder hole).
    chi = mesh.num_vertices - len(edges) + mesh.num_triangles
    if chi not in (0, 1):
        raise MeshInvariantError(f"Euler characteristic {chi}, expected 1 (disk) or 0 (annulus)")

    if mesh.periodic_pairs is not None and len(mesh.periodic_pairs):
        x = mesh.vertices[:, 0]
        period = x.max() - x.min()
        left = mesh.vertices[mesh.periodic_pairs[:, 0]]
        right = mesh.vertices[mesh.periodic_pairs[:, 1]]
        if np.any(np.abs(left[:, 1] - right[:, 1]) > 1e-12):
            raise MeshInvariantError("periodic pair with mismatched y coordinates")
        if np.any(np.abs(np.abs(right[:, 0] - left[:, 0]) - period) > 1e-12):
            raise MeshInvariantError("periodic pair not separated by the domain period")


def generate_unit_square(n: int) -> TriMesh:
    """Uniform triangulation of [0,1]^2 with n x n cells.

    Each cell is split along the lower-left to upper-right diagonal.  All
    boundary edges are marked ``wall``; callers may re-mark them.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    verts, tris, bottom, top, left, right = _square_grid(n)
    boundary = tuple(
        (i0, i1, "wall") for side in (bottom, right, top, left) for i0, i1 in side
    )
    mesh = TriMesh(verts, tris, boundary)
    validate(mesh)
    return mesh


def generate_periodic_strip(n: int) -> TriMesh:
    """Unit-square mesh periodic in x, with slip markers at y=0 and y=1."""
    if n < 2:
        raise ValueError("n must be >= 2")
    verts, tris, bottom, top, left, right = _square_grid(n)
    boundary = []
    boundary += [(i0, i1, "slip_bottom") for i0, i1 in bottom]
    boundary += [(i0, i1, "periodic_right") for i0, i1 in right]
    boundary += [(i0, i1, "slip_top") for i0, i1 in top]
    boundary += [(i0, i1, "periodic_left") for i0, i1 in left]
    vid = lambda i, j: j * (n + 1) + i
    pairs = np.array([[vid(0, j), vid(n, j)] for j in range(n + 1)], dtype=int)
    mesh = TriMesh(verts, tris, tuple(boundary), periodic_pairs=pairs)
    validate(mesh)
    return mesh


def _square_grid(n: int):
    """Vertices, triangles and the four boundary edge chains of an n x n grid."""
    coords = np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords)          # row j = y level j
    verts = np.column_stack([xx.ravel(), yy.ravel()])
    vid = lambda i, j: j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))          # diagonal v00 -> v11
            tris.append((v00, v11, v01))
    tris = np.array(tris, dtype=int)

    bottom = [(vid(i, 0), vid(i + 1, 0)) for i in range(n)]
    top = [(vid(i, n), vid(i + 1, n)) for i in range(n)]
    left = [(vid(0, j), vid(0, j + 1)) for j in range(n)]
    right = [(vid(n, j), vid(n, j + 1)) for j in range(n)]
    return verts, tris, bottom, top, left, right


# --------------------------------------------------------------------------
# ASCII mesh file format ("emaclab-mesh 1"):
#
#   line 1:  emaclab-mesh 1
#   line 2:  <V> <T> <B>
#   V lines: <x> <y>
#   T lines: <i0> <i1> <i2>          (0-based, counterclockwise)
#   B lines: <i0> <i1> <marker>
#   optional: periodic <P> followed by P lines <ileft> <iright>
#
# '#' starts a comment; blank lines are ignored.
# --------------------------------------------------------------------------

def read_mesh(text: str) -> TriMesh:
    """Parse and validate a mesh from the ASCII format above."""
    lines = [
        (k + 1, ln.split("#", 1)[0].strip())
        for k, ln in enumerate(text.splitlines())
    ]
    lines = [(k, ln) for k, ln in lines if ln]
    pos = 0

    def take(what: str):
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError(f"line {lines[-1][0] if lines else 0}: unexpected end of file, expected {what}")
        k, ln = lines[pos]
        pos += 1
        return k, ln

    k, header = take("header")
    if header != "emaclab-mesh 1":
        raise MeshFormatError(f"line {k}: bad header {header!r}, expected 'emaclab-mesh 1'")

    k, counts = take("counts")
    try:
        nv, nt, nb = (int(s) for s in counts.split())
    except ValueError:
        raise MeshFormatError(f"line {k}: expected '<V> <T> <B>'") from None

    verts = np.empty((nv, 2))
    for i in range(nv):
        k, ln = take("vertex")
        try:
            x, y = (float(s) for s in ln.split())
        except ValueError:
            raise MeshFormatError(f"line {k}: expected '<x> <y>'") from None
        verts[i] = (x, y)

    tris = np.empty((nt, 3), dtype=int)
    for i in range(nt):
        k, ln = take("triangle")
        try:
            tris[i] = [int(s) for s in ln.split()]
        except ValueError:
            raise MeshFormatError(f"line {k}: expected '<i0> <i1> <i2>'") from None

    boundary = []
    for _ in range(nb):
        k, ln = take("boundary edge")
        parts = ln.split()
        if len(parts) != 3:
            raise MeshFormatError(f"line {k}: expected '<i0> <i1> <marker>'")
        try:
            i0, i1 = int(parts[0]), int(parts[1])
        except ValueError:
            raise MeshFormatError(f"line {k}: bad vertex index") from None
        if parts[2] not in MARKERS:
            raise MeshFormatError(f"line {k}: unknown marker {parts[2]!r}")
        boundary.append((i0, i1, parts[2]))

    pairs = None
    if pos < len(lines):
        k, ln = take("periodic section")
        parts = ln.split()
        if parts[0] != "periodic" or len(parts) != 2:
            raise MeshFormatError(f"line {k}: expected 'periodic <P>'")
        np_pairs = int(parts[1])
        pairs = np.empty((np_pairs, 2), dtype=int)
        for i in range(np_pairs):
            k, ln = take("periodic pair")
            try:
                pairs[i] = [int(s) for s in ln.split()]
            except ValueError:
                raise MeshFormatError(f"line {k}: expected '<ileft> <iright>'") from None
    if pos < len(lines):
        raise MeshFormatError(f"line {lines[pos][0]}: trailing content")

    mesh = TriMesh(verts, tris, tuple(boundary), periodic_pairs=pairs)
    validate(mesh)
    return mesh


def write_mesh(mesh: TriMesh) -> str:
    """Serialize to the ASCII format; read_mesh(write_mesh(m)) is bit-exact."""
    out = ["emaclab-mesh 1"]
    out.append(f"{mesh.num_vertices} {mesh.num_triangles} {len(mesh.boundary_edges)}")
    out += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    out += [f"{a} {b} {c}" for a, b, c in mesh.triangles]
    out += [f"{i0} {i1} {m}" for i0, i1, m in mesh.boundary_edges]
    if mesh.periodic_pairs is not None:
        out.append(f"periodic {len(mesh.periodic_pairs)}")
        out += [f"{l} {r}" for l, r in mesh.periodic_pairs]
    return "\n".join(out) + "\n"
