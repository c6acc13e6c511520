#!/usr/bin/env python3
"""Generate the channel-with-cylinder meshes shipped under src/emaclab/meshes/.

Geometry: 2.2 x 0.41 channel, circle of radius 0.05 centered at (0.2, 0.2),
circle approximated by an inscribed polygon (>= 64 segments).  A structured
polar annulus wraps the circle (so the hole boundary is recovered exactly by
the Delaunay triangulation); a graded tensor grid fills the channel.  Interior
points get a few rounds of Laplacian smoothing before the final triangulation.

Usage: python3 tools/make_cylinder_mesh.py [outdir]
"""

import os
import sys

import numpy as np
from scipy.spatial import Delaunay

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from emaclab import mesh as emesh  # noqa: E402

L, H = 2.2, 0.41
CX, CY, R = 0.2, 0.2, 0.05
TOL = 1e-9


def graded_axis(stops, steps):
    """1D nodes from 0 to stops[-1]; steps[i] is the target h on segment i."""
    xs = [0.0]
    for (a, b), h in zip(zip(stops[:-1], stops[1:]), steps):
        n = max(1, round((b - a) / h))
        xs.extend(np.linspace(a, b, n + 1)[1:])
    return np.array(xs)


def build_points(m_circle, r_max, alpha, grow, hx_near, hx_mid, hx_far, ny):
    theta = 2 * np.pi * (np.arange(m_circle) + 0.5) / m_circle
    pts = []
    r, k = R, 0
    while r <= r_max:
        pts.append(np.column_stack([CX + r * np.cos(theta), CY + r * np.sin(theta)]))
        r += alpha * (2 * np.pi * R / m_circle) * grow**k
        k += 1
    annulus = np.vstack(pts)
    r_outer = float(np.hypot(annulus[-1, 0] - CX, annulus[-1, 1] - CY))

    xg = graded_axis([0.0, 0.44, 1.0, L], [hx_near, hx_mid, hx_far])
    yg = np.linspace(0.0, H, ny + 1)
    xx, yy = np.meshgrid(xg, yg)
    grid = np.column_stack([xx.ravel(), yy.ravel()])
    d = np.hypot(grid[:, 0] - CX, grid[:, 1] - CY)
    keep = d > r_outer + 0.45 * hx_near
    grid = grid[keep]

    return np.vstack([annulus, grid]), len(annulus), r_outer


def on_boundary(pts):
    return (
        (np.abs(pts[:, 0]) < TOL)
        | (np.abs(pts[:, 0] - L) < TOL)
        | (np.abs(pts[:, 1]) < TOL)
        | (np.abs(pts[:, 1] - H) < TOL)
    )


def triangulate(points, n_annulus):
    tri = Delaunay(points)
    t = tri.simplices
    cen = points[t].mean(axis=1)
    inside = np.hypot(cen[:, 0] - CX, cen[:, 1] - CY) < R
    t = t[~inside]
    # enforce counterclockwise orientation
    p = points[t]
    area2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    flip = area2 < 0
    t[flip] = t[flip][:, [0, 2, 1]]
    return t


def smooth(points, tris, n_fixed_annulus, rounds=4):
    """Laplacian smoothing of free interior points (annulus and walls fixed)."""
    fixed = on_boundary(points)
    fixed[: n_fixed_annulus + 0] = True
    for _ in range(rounds):
        acc = np.zeros_like(points)
        cnt = np.zeros(len(points))
        for a, b in ((0, 1), (1, 2), (2, 0)):
            np.add.at(acc, tris[:, a], points[tris[:, b]])
            np.add.at(cnt, tris[:, a], 1.0)
            np.add.at(acc, tris[:, b], points[tris[:, a]])
            np.add.at(cnt, tris[:, b], 1.0)
        new = acc / cnt[:, None]
        points = np.where(fixed[:, None], points, new)
        tris = triangulate(points, 0)
    return points, tris


def classify_boundary(points, tris):
    edges, tri_edges = np.unique(
        np.sort(
            np.stack([tris[:, [1, 2]], tris[:, [2, 0]], tris[:, [0, 1]]], axis=1), axis=2
        ).reshape(-1, 2),
        axis=0,
        return_inverse=False,
    ), None
    # recompute edge counts
    raw = np.sort(
        np.stack([tris[:, [1, 2]], tris[:, [2, 0]], tris[:, [0, 1]]], axis=1), axis=2
    ).reshape(-1, 2)
    keys = raw[:, 0].astype(np.int64) * len(points) + raw[:, 1]
    uniq, counts = np.unique(keys, return_counts=True)
    bkeys = uniq[counts == 1]
    bedges = np.column_stack([bkeys // len(points), bkeys % len(points)])

    out = []
    for a, b in bedges:
        pa, pb = points[a], points[b]
        mid = 0.5 * (pa + pb)
        if abs(pa[0]) < TOL and abs(pb[0]) < TOL:
            marker = "inlet"
        elif abs(pa[0] - L) < TOL and abs(pb[0] - L) < TOL:
            marker = "outlet"
        elif (abs(pa[1]) < TOL and abs(pb[1]) < TOL) or (
            abs(pa[1] - H) < TOL and abs(pb[1] - H) < TOL
        ):
            marker = "wall"
        elif abs(np.hypot(mid[0] - CX, mid[1] - CY) - R) < 0.2 * R:
            marker = "cylinder"
        else:
            raise RuntimeError(f"unclassifiable boundary edge at {mid}")
        out.append((int(a), int(b), marker))
    return out


def min_angle(points, tris):
    p = points[tris]
    angs = []
    for i in range(3):
        a = p[:, i] - p[:, (i + 1) % 3]
        b = p[:, i] - p[:, (i + 2) % 3]
        cosv = (a * b).sum(1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        angs.append(np.degrees(np.arccos(np.clip(cosv, -1, 1))))
    return np.min(angs)


def make(name, **kw):
    points, n_ann, r_outer = build_points(**kw)
    tris = triangulate(points, n_ann)
    points, tris = smooth(points, tris, n_ann)
    boundary = classify_boundary(points, tris)
    m = emesh.TriMesh(points, tris, tuple(boundary))
    emesh.validate(m)
    edges, _ = emesh.edge_structure(m)
    vdofs = 2 * (m.num_vertices + len(edges))
    area = emesh.triangle_areas(m).sum()
    target = L * H - np.pi * R**2
    print(
        f"{name}: V={m.num_vertices} T={m.num_triangles} vel dofs={vdofs} "
        f"min angle={min_angle(points, tris):.1f} deg "
        f"area={area:.6f} (target {target:.6f}, dev {abs(area-target)/target:.2e})"
    )
    return m


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "src", "emaclab", "meshes"
    )
    os.makedirs(outdir, exist_ok=True)

    coarse = make(
        "coarse", m_circle=96, r_max=0.115, alpha=0.9, grow=1.16,
        hx_near=0.016, hx_mid=0.028, hx_far=0.045, ny=24,
    )
    fine = make(
        "fine", m_circle=144, r_max=0.115, alpha=0.9, grow=1.12,
        hx_near=0.011, hx_mid=0.02, hx_far=0.03, ny=36,
    )
    for name, m in (("cylinder_coarse.mesh", coarse), ("cylinder_fine.mesh", fine)):
        path = os.path.join(outdir, name)
        with open(path, "w") as fh:
            fh.write(emesh.write_mesh(m))
        print("wrote", path)


if __name__ == "__main__":
    main()
