"""Run artifacts: diagnostics CSV, legacy-VTK snapshots, manifest.

CSV columns, in order:
    t,E,enstrophy,Mx,My,Mang,div_residual,newton_iters[,L2err,H1err][,cl,cd]
Floats are printed with 17 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import numpy as np

from .diagnostics import TimeSeriesRecord
from .fespace import TaylorHoodSpace

BASE_COLUMNS = ("t", "E", "enstrophy", "Mx", "My", "Mang", "div_residual", "newton_iters")
ERROR_COLUMNS = ("L2err", "H1err")
FORCE_COLUMNS = ("cl", "cd")


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


class CsvWriter:
    """Streams TimeSeriesRecord rows; header written on open."""

    def __init__(self, path, errors: bool = False, forces: bool = False):
        self.columns = BASE_COLUMNS + (ERROR_COLUMNS if errors else ()) + (
            FORCE_COLUMNS if forces else ()
        )
        self.errors = errors
        self.forces = forces
        self._fh = open(path, "w")
        self._fh.write(",".join(self.columns) + "\n")

    def write(self, rec: TimeSeriesRecord):
        rec.validate()
        vals = [rec.t, rec.E, rec.enstrophy, rec.Mx, rec.My, rec.Mang,
                rec.div_residual, rec.newton_iters]
        if self.errors:
            vals += [rec.L2err, rec.H1err]
        if self.forces:
            vals += [rec.cl, rec.cd]
        self._fh.write(",".join(_fmt(v) for v in vals) + "\n")

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_csv(path) -> dict[str, np.ndarray]:
    """Read a diagnostics CSV into column arrays."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
    return {name: data[:, k] for k, name in enumerate(header)}


# ---------------------------------------------------------------------------
# Legacy VTK unstructured-grid snapshots.  P2 fields are written pointwise at
# the vertices plus edge midpoints; each triangle becomes four subtriangles.
# ---------------------------------------------------------------------------

def write_vtk_snapshot(path, space: TaylorHoodSpace, u_full: np.ndarray,
                       p_red: np.ndarray, title: str = "emaclab snapshot"):
    mesh = space.mesh
    xy = space.node_xy
    nv = mesh.num_vertices
    npts = space.num_vnodes

    tri = mesh.triangles
    mid = nv + space.tri_edges                      # midpoint node opposite vertex k
    cells = np.concatenate(
        [
            np.stack([tri[:, 0], mid[:, 2], mid[:, 1]], axis=1),
            np.stack([tri[:, 1], mid[:, 0], mid[:, 2]], axis=1),
            np.stack([tri[:, 2], mid[:, 1], mid[:, 0]], axis=1),
            mid,
        ]
    )

    vel = u_full.reshape(npts, 2)
    p_full = space.expand_pressure(np.asarray(p_red, dtype=float))
    pressure = np.concatenate(
        [p_full, 0.5 * (p_full[space.edges[:, 0]] + p_full[space.edges[:, 1]])]
    )
    vorticity = _nodal_vorticity(space, u_full)

    out = []
    out.append("# vtk DataFile Version 2.0")
    out.append(title)
    out.append("ASCII")
    out.append("DATASET UNSTRUCTURED_GRID")
    out.append(f"POINTS {npts} double")
    out += [f"{x:.17g} {y:.17g} 0" for x, y in xy]
    out.append(f"CELLS {len(cells)} {4 * len(cells)}")
    out += [f"3 {a} {b} {c}" for a, b, c in cells]
    out.append(f"CELL_TYPES {len(cells)}")
    out += ["5"] * len(cells)
    out.append(f"POINT_DATA {npts}")
    out.append("VECTORS velocity double")
    out += [f"{vx:.17g} {vy:.17g} 0" for vx, vy in vel]
    out.append("SCALARS pressure double")
    out.append("LOOKUP_TABLE default")
    out += [f"{v:.17g}" for v in pressure]
    out.append("SCALARS vorticity double")
    out.append("LOOKUP_TABLE default")
    out += [f"{v:.17g}" for v in vorticity]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _nodal_vorticity(space: TaylorHoodSpace, u_full: np.ndarray) -> np.ndarray:
    """Cell-average of curl(u) at each P2 node (vorticity of P2 is discontinuous)."""
    from . import assembly

    ctx = assembly.context(space)
    tvert = space.mesh.vertices[space.mesh.triangles]
    # evaluate the per-cell linear vorticity at the 6 local node positions
    ul = u_full[ctx.cell_vdofs].reshape(-1, 6, 2)
    lam_nodes = np.array(
        [
            [1, 0, 0], [0, 1, 0], [0, 0, 1],
            [0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0],
        ]
    )
    phi, gref = assembly._p2_basis(lam_nodes)
    # physical gradients at the node points, per cell
    p = tvert
    j11 = p[:, 1, 0] - p[:, 0, 0]
    j21 = p[:, 1, 1] - p[:, 0, 1]
    j12 = p[:, 2, 0] - p[:, 0, 0]
    j22 = p[:, 2, 1] - p[:, 0, 1]
    det = j11 * j22 - j12 * j21
    inv = np.empty((len(p), 2, 2))
    inv[:, 0, 0] = j22 / det
    inv[:, 0, 1] = -j12 / det
    inv[:, 1, 0] = -j21 / det
    inv[:, 1, 1] = j11 / det
    g = np.einsum("tmk,qlm->tqlk", inv, gref)       # (T, 6nodes, 6basis, 2)
    gu = np.einsum("tqlk,tlc->tqck", g, ul)
    omega = gu[:, :, 1, 0] - gu[:, :, 0, 1]         # (T, 6 nodes)

    acc = np.zeros(space.num_vnodes)
    cnt = np.zeros(space.num_vnodes)
    np.add.at(acc, ctx.cell_nodes, omega)
    np.add.at(cnt, ctx.cell_nodes, 1.0)
    return acc / cnt


def write_manifest(path, cfg, version: str, wall_clock: float):
    from .config import format_config

    body = format_config(cfg)
    with open(path, "w") as fh:
        fh.write("# emaclab run manifest (re-runnable with 'emaclab run')\n")
        fh.write(body)
        fh.write(f"code_version = {version}\n")
        fh.write(f"wall_clock_seconds = {wall_clock:.3f}\n")
