"""Taylor-Hood (P2/P1) spaces with boundary constraints.

Velocity nodes are mesh vertices followed by one node per edge (standard
Lagrange P2, edge nodes at midpoints); velocity dofs interleave components,
``dof = 2*node + comp``.  Pressure dofs are the vertices.

Constraints are one of: Dirichlet (both components prescribed), slip
(normal component fixed to zero on an axis-aligned boundary), or periodic
identification of left/right nodes.  Constraint elimination is expressed
through a prolongation matrix P: ``u_full = P @ u_reduced + d(t)`` where
d(t) carries the Dirichlet values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import TriMesh, edge_structure, triangle_areas


class SpaceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Boundary condition descriptors
# ---------------------------------------------------------------------------

class Dirichlet:
    """Prescribed velocity vector; fn(x, y, t) -> (n, 2) values."""

    def __init__(self, fn):
        if callable(fn):
            self.fn = fn
        else:
            const = np.asarray(fn, dtype=float).reshape(2)
            self.fn = lambda x, y, t: np.broadcast_to(const, (np.size(x), 2))

    def __call__(self, x, y, t):
        vals = self.fn(np.asarray(x, float), np.asarray(y, float), t)
        if isinstance(vals, tuple):
            vals = np.column_stack([np.broadcast_to(v, np.shape(x)) for v in vals])
        return np.asarray(vals, dtype=float).reshape(np.size(x), 2)


class SlipNormal:
    """u . n = 0, strongly enforced on axis-aligned boundaries."""


class Periodic:
    """Identify dofs with the partner across the periodic pairing."""


class Natural:
    """Do-nothing boundary (no constraint)."""


@dataclass
class FieldCoeffs:
    """Coefficient vector of a discrete field, in dof order."""

    kind: str                 # "velocity" | "pressure"
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def copy(self) -> "FieldCoeffs":
        return FieldCoeffs(self.kind, self.values.copy())


class VectorField:
    """Analytic vector field; gradient falls back to central differences."""

    def __init__(self, value, gradient=None):
        self._value = value
        self._gradient = gradient

    def __call__(self, x, y):
        vals = self._value(np.asarray(x, float), np.asarray(y, float))
        if isinstance(vals, tuple):
            vals = np.stack([np.broadcast_to(v, np.shape(x)) for v in vals], axis=-1)
        return np.asarray(vals, dtype=float)

    def gradient(self, x, y):
        """G[..., c, k] = d u_c / d x_k."""
        if self._gradient is not None:
            g = self._gradient(np.asarray(x, float), np.asarray(y, float))
            return np.asarray(g, dtype=float)
        eps = 1e-6
        gx = (self(x + eps, y) - self(x - eps, y)) / (2 * eps)
        gy = (self(x, y + eps) - self(x, y - eps)) / (2 * eps)
        return np.stack([gx, gy], axis=-1)


# ---------------------------------------------------------------------------
# Space construction
# ---------------------------------------------------------------------------

class TaylorHoodSpace:
    """Dof numbering and constraint maps for one mesh; immutable after build."""

    def __init__(self, mesh: TriMesh, bc_spec: dict, pressure_gauge: str):
        if pressure_gauge not in ("mean_zero_multiplier", "pin_dof"):
            raise SpaceError(f"unknown pressure gauge {pressure_gauge!r}")
        self.mesh = mesh
        self.bc_spec = dict(bc_spec)
        self.pressure_gauge = pressure_gauge

        self.edges, self.tri_edges = edge_structure(mesh)
        mids = 0.5 * (mesh.vertices[self.edges[:, 0]] + mesh.vertices[self.edges[:, 1]])
        self.node_xy = np.vstack([mesh.vertices, mids])
        self.num_vnodes = len(self.node_xy)
        self.num_vdofs = 2 * self.num_vnodes
        self.num_pdofs = mesh.num_vertices

        self._build_constraints()
        self._build_prolongations()

        # caches filled lazily by the assembly module
        self._context = None
        self._operators = None

    # -- constraint assembly -------------------------------------------------

    def _edge_lookup(self):
        return {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges)}

    def _build_constraints(self):
        mesh, bc = self.mesh, self.bc_spec
        present = mesh.markers()
        for marker in bc:
            if marker not in present:
                raise SpaceError(f"bc_spec marker {marker!r} not present in mesh")

        lookup = self._edge_lookup()
        by_marker: dict = {}
        for i0, i1, m in mesh.boundary_edges:
            by_marker.setdefault(m, []).append((int(i0), int(i1)))

        vel_master = np.arange(self.num_vdofs)
        p_master = np.arange(self.num_pdofs)

        # periodic identification first: left dofs become slaves of right dofs
        needs_pairs = any(isinstance(c, Periodic) for c in bc.values())
        if needs_pairs:
            if mesh.periodic_pairs is None:
                raise SpaceError("periodic condition requested but mesh has no periodic_pairs")
            left_of = {int(l): int(r) for l, r in mesh.periodic_pairs}
            for l, r in left_of.items():
                vel_master[2 * l] = 2 * r
                vel_master[2 * l + 1] = 2 * r + 1
                p_master[l] = r
            for marker, cond in bc.items():
                if not isinstance(cond, Periodic):
                    continue
                for a, b in by_marker.get(marker, []):
                    if a in left_of and b in left_of:
                        e_l = lookup[tuple(sorted((a, b)))]
                        key = tuple(sorted((left_of[a], left_of[b])))
                        if key not in lookup:
                            raise SpaceError("periodic partner edge missing from mesh")
                        e_r = lookup[key]
                        nl = mesh.num_vertices + e_l
                        nr = mesh.num_vertices + e_r
                        vel_master[2 * nl] = 2 * nr
                        vel_master[2 * nl + 1] = 2 * nr + 1

        if np.any(vel_master[vel_master] != vel_master):
            raise SpaceError("identification graph is not single-level (cycle or chain)")

        # Dirichlet / slip groups, kept in marker declaration order
        self.slip_groups = []       # (node array, component)
        self.dirichlet_groups = []  # (node array, Dirichlet)
        for marker, cond in bc.items():
            edges_m = by_marker.get(marker, [])
            if isinstance(cond, (Periodic, Natural)):
                continue
            nodes = set()
            if isinstance(cond, SlipNormal):
                comp = None
                for a, b in edges_m:
                    dx, dy = np.abs(mesh.vertices[b] - mesh.vertices[a])
                    this = 1 if dy <= 1e-12 else (0 if dx <= 1e-12 else None)
                    if this is None:
                        raise SpaceError(f"slip boundary {marker!r} is not axis-aligned")
                    if comp is None:
                        comp = this
                    elif comp != this:
                        raise SpaceError(f"slip boundary {marker!r} mixes orientations")
                    nodes.update((a, b, mesh.num_vertices + lookup[tuple(sorted((a, b)))]))
                self.slip_groups.append((np.array(sorted(nodes)), comp))
            elif isinstance(cond, Dirichlet):
                for a, b in edges_m:
                    nodes.update((a, b, mesh.num_vertices + lookup[tuple(sorted((a, b)))]))
                self.dirichlet_groups.append((np.array(sorted(nodes)), cond))
            else:
                raise SpaceError(f"unsupported condition {cond!r}")

        fixed = np.zeros(self.num_vdofs, dtype=bool)
        for nodes, comp in self.slip_groups:
            fixed[vel_master[2 * nodes + comp]] = True
        for nodes, _ in self.dirichlet_groups:
            fixed[vel_master[2 * nodes]] = True
            fixed[vel_master[2 * nodes + 1]] = True

        self.vel_master = vel_master
        self.p_master = p_master
        self.vel_fixed = fixed[vel_master]   # per dof, resolved through identification

        self.p_fixed = np.zeros(self.num_pdofs, dtype=bool)
        if self.pressure_gauge == "pin_dof":
            self.p_fixed[p_master[0]] = True
            self.p_fixed = self.p_fixed[p_master]

    def _build_prolongations(self):
        def prolongation(master, fixed):
            n = len(master)
            is_repr = master == np.arange(n)
            free = is_repr & ~fixed
            col = -np.ones(n, dtype=int)
            col[free] = np.arange(free.sum())
            rows = np.nonzero(~fixed)[0]
            cols = col[master[rows]]
            keep = cols >= 0
            rows, cols = rows[keep], cols[keep]
            P = sp.csr_matrix(
                (np.ones(len(rows)), (rows, cols)), shape=(n, free.sum())
            )
            return P, int(free.sum())

        self.P_v, self.num_free_vdofs = prolongation(self.vel_master, self.vel_fixed)
        self.P_p, self.num_free_pdofs = prolongation(self.p_master, self.p_fixed)

    # -- constraint application ----------------------------------------------

    def dirichlet_values(self, t: float) -> np.ndarray:
        """Full velocity vector holding prescribed values at fixed dofs, 0 elsewhere."""
        raw = np.zeros(self.num_vdofs)
        x, y = self.node_xy[:, 0], self.node_xy[:, 1]
        for nodes, comp in self.slip_groups:
            raw[self.vel_master[2 * nodes + comp]] = 0.0
        for nodes, cond in self.dirichlet_groups:
            vals = cond(x[nodes], y[nodes], t)
            raw[self.vel_master[2 * nodes]] = vals[:, 0]
            raw[self.vel_master[2 * nodes + 1]] = vals[:, 1]
        return np.where(self.vel_fixed, raw[self.vel_master], 0.0)

    def expand_velocity(self, u_red: np.ndarray, dvals: np.ndarray) -> np.ndarray:
        return self.P_v @ u_red + dvals

    def expand_pressure(self, p_red: np.ndarray) -> np.ndarray:
        return self.P_p @ p_red

    def pressure_area_vector(self) -> np.ndarray:
        """m with m_q = integral of the q-th P1 basis function."""
        m = np.zeros(self.num_pdofs)
        contrib = np.repeat(triangle_areas(self.mesh) / 3.0, 3)
        np.add.at(m, self.mesh.triangles.ravel(), contrib)
        return m

    def check_constraints(self, u_full: np.ndarray, t: float, tol: float = 1e-12):
        d = self.dirichlet_values(t)
        dev = np.abs(u_full[self.vel_fixed] - d[self.vel_fixed])
        if dev.size and dev.max() > tol:
            raise SpaceError(f"field violates Dirichlet data by {dev.max():.3e}")
        slaves = np.nonzero(self.vel_master != np.arange(self.num_vdofs))[0]
        dev = np.abs(u_full[slaves] - u_full[self.vel_master[slaves]])
        if dev.size and dev.max() > tol:
            raise SpaceError(f"field violates periodic identification by {dev.max():.3e}")


def build_space(mesh: TriMesh, bc_spec: dict,
                pressure_gauge: str = "mean_zero_multiplier") -> TaylorHoodSpace:
    """Construct the P2/P1 space with the given marker -> condition map.

    Markers present in the mesh but absent from bc_spec are natural
    (unconstrained); unknown markers in bc_spec raise SpaceError.
    """
    return TaylorHoodSpace(mesh, bc_spec, pressure_gauge)


# ---------------------------------------------------------------------------
# Interpolation and discrete Stokes problems
# ---------------------------------------------------------------------------

def interpolate(space: TaylorHoodSpace, f, kind: str) -> FieldCoeffs:
    """Nodal interpolation of an analytic field."""
    x, y = space.node_xy[:, 0], space.node_xy[:, 1]
    if kind == "velocity":
        vals = f(x, y)
        if isinstance(vals, tuple):
            vals = np.stack([np.broadcast_to(v, x.shape) for v in vals], axis=-1)
        vals = np.asarray(vals, dtype=float).reshape(space.num_vnodes, 2)
        return FieldCoeffs("velocity", vals.reshape(-1))
    if kind == "pressure":
        xv, yv = x[: space.num_pdofs], y[: space.num_pdofs]
        return FieldCoeffs("pressure", np.broadcast_to(f(xv, yv), xv.shape).astype(float))
    raise ValueError(f"unknown kind {kind!r}")


def _stokes_dirichlet_from(space, w) -> np.ndarray:
    if isinstance(w, FieldCoeffs):
        vals = w.values
    else:
        x, y = space.node_xy[:, 0], space.node_xy[:, 1]
        vals = np.asarray(w(x, y), dtype=float).reshape(-1, 2).reshape(-1)
    return np.where(space.vel_fixed, vals[space.vel_master], 0.0)


def stokes_project(space: TaylorHoodSpace, w) -> FieldCoeffs:
    """Discrete Stokes projection: grad-matching, weakly divergence-free.

    ``w`` is either velocity FieldCoeffs or an analytic field (VectorField
    or any object with value/gradient evaluation).  Boundary dofs are set to
    the nodal values of w.
    """
    from . import assembly, linsolve

    ops = assembly.operators(space)
    if isinstance(w, FieldCoeffs):
        rhs_full = ops.A @ w.values
    else:
        if not isinstance(w, VectorField):
            w = VectorField(w)
        rhs_full = assembly.gradient_load_vector(space, w)
    dvals = _stokes_dirichlet_from(space, w)
    u_full, _ = linsolve.solve_stokes(space, rhs_full, dvals)
    return FieldCoeffs("velocity", u_full)


def boundary_extension(space: TaylorHoodSpace, marker: str, value) -> FieldCoeffs:
    """Discrete Stokes extension of a constant vector on one marked boundary."""
    from . import linsolve

    if marker not in space.mesh.markers():
        raise SpaceError(f"marker {marker!r} not present in mesh")
    value = np.asarray(value, dtype=float).reshape(2)

    lookup = space._edge_lookup()
    nodes = set()
    for i0, i1, m in space.mesh.boundary_edges:
        if m == marker:
            e = lookup[tuple(sorted((int(i0), int(i1))))]
            nodes.update((int(i0), int(i1), space.mesh.num_vertices + e))
    nodes = np.array(sorted(nodes))

    dvals = np.zeros(space.num_vdofs)
    dvals[space.vel_master[2 * nodes]] = value[0]
    dvals[space.vel_master[2 * nodes + 1]] = value[1]
    dvals = np.where(space.vel_fixed, dvals[space.vel_master], 0.0)

    u_full, _ = linsolve.solve_stokes(space, np.zeros(space.num_vdofs), dvals)
    return FieldCoeffs("velocity", u_full)
