"""Fast invariant battery behind ``emaclab verify``.

Each check is cheap (seconds total) and returns (name, passed, detail);
the CLI prints one line per check and exits nonzero on any failure.
"""

from __future__ import annotations

import math

import numpy as np

from . import assembly, diagnostics, fespace, linsolve, mesh
from .assembly import FormKind
from .quadrature import DEFAULT_RULE


def compact_support_field(space, rng) -> np.ndarray:
    """Random velocity vanishing on every cell that touches the boundary."""
    ctx = assembly.context(space)
    edges, tri_edges = space.edges, space.tri_edges
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    boundary_cells = (counts[tri_edges] == 1).any(axis=1)
    banned = np.nonzero(
        np.bincount(ctx.cell_nodes[boundary_cells].ravel(),
                    minlength=space.num_vnodes) > 0
    )[0]
    u = rng.standard_normal(space.num_vdofs)
    u[2 * banned] = 0.0
    u[2 * banned + 1] = 0.0
    return u


def h1_scale(space, v: np.ndarray) -> float:
    ops = assembly.operators(space)
    return float(np.sqrt(v @ (ops.A @ v) + v @ (ops.M @ v)))


def _check_quadrature():
    lam = DEFAULT_RULE.points
    x, y = lam[:, 1], lam[:, 2]
    worst = 0.0
    for i in range(7):
        for j in range(7 - i):
            exact = math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
            got = float(np.sum(DEFAULT_RULE.weights * x**i * y**j))
            worst = max(worst, abs(got - exact))
    return worst <= 1e-14, f"max monomial error {worst:.2e}"


def _check_mesh_counts():
    m = mesh.generate_unit_square(4)
    ok = (m.num_vertices, m.num_triangles, len(m.boundary_edges)) == (25, 32, 16)
    area = mesh.triangle_areas(m).sum()
    ok = ok and abs(area - 1.0) <= 1e-14
    rt = mesh.read_mesh(mesh.write_mesh(m))
    ok = ok and np.array_equal(rt.vertices, m.vertices)
    return ok, f"counts/areas/round-trip on n=4 (area {float(area)!r})"


def _check_cancellation():
    m = mesh.generate_unit_square(4)
    space = fespace.build_space(m, {"wall": fespace.Dirichlet((0.0, 0.0))})
    rng = np.random.default_rng(2024)
    worst_c = worst_b = 0.0
    for _ in range(10):
        v = space.P_v @ rng.standard_normal(space.num_free_vdofs)
        u = space.P_v @ rng.standard_normal(space.num_free_vdofs)
        sv, su = h1_scale(space, v), h1_scale(space, u)
        worst_c = max(worst_c, abs(assembly.eval_trilinear(FormKind.EMAC, space, v, v, v)) / sv**3)
        worst_b = max(worst_b, abs(assembly.eval_trilinear(FormKind.SKEW, space, u, v, v)) / (su * sv**2))
    ok = worst_c <= 1e-12 and worst_b <= 1e-12
    return ok, f"|c(v,v,v)| {worst_c:.1e}, |b*(u,v,v)| {worst_b:.1e}"


def _check_jacobians():
    m = mesh.generate_unit_square(3)
    space = fespace.build_space(m, {"wall": fespace.Dirichlet((0.0, 0.0))})
    rng = np.random.default_rng(7)
    u = rng.standard_normal(space.num_vdofs)
    d = rng.standard_normal(space.num_vdofs)
    eps, worst = 1e-6, 0.0
    for form in FormKind:
        J = assembly.nonlinear_jacobian(form, space, u)
        fd = (
            assembly.nonlinear_residual(form, space, u + eps * d)
            - assembly.nonlinear_residual(form, space, u - eps * d)
        ) / (2 * eps)
        worst = max(worst, np.linalg.norm(J @ d - fd) / np.linalg.norm(fd))
    return worst <= 1e-6, f"worst FD relative error {worst:.1e}"


def _check_stokes_projection():
    from .problems import lattice_velocity

    m = mesh.generate_unit_square(8)
    w = lattice_velocity(1e-2, 0.0)
    space = fespace.build_space(
        m, {"wall": fespace.Dirichlet(lambda x, y, t: w(x, y))}
    )
    p1 = fespace.stokes_project(space, w)
    p2 = fespace.stokes_project(space, p1)
    dev = np.abs(p1.values - p2.values).max()
    div = diagnostics.div_residual(space, p1)
    ok = dev <= 1e-10 and div <= 1e-10
    return ok, f"idempotence {dev:.1e}, div residual {div:.1e}"


def _check_conservation_functionals():
    m = mesh.generate_unit_square(8)
    space = fespace.build_space(m, {"wall": fespace.Dirichlet((0.0, 0.0))})
    rot = fespace.interpolate(space, lambda x, y: np.stack([-y, x], axis=-1), "velocity")
    ang = diagnostics.angular_momentum(space, rot)
    ens = diagnostics.enstrophy(space, rot)
    ok = abs(ang - (-2.0 / 3.0)) <= 1e-13 and abs(ens - 2.0) <= 1e-13
    return ok, f"rigid rotation: Mang {ang:.15g}, enstrophy {ens:.15g}"


CHECKS = [
    ("quadrature degree-6 exactness", _check_quadrature),
    ("mesh generation and file round-trip", _check_mesh_counts),
    ("EMAC/SKEW cancellation identities", _check_cancellation),
    ("analytic Jacobians vs finite differences", _check_jacobians),
    ("discrete Stokes projection", _check_stokes_projection),
    ("conserved-quantity functionals", _check_conservation_functionals),
]


def run_all(report=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        report(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
