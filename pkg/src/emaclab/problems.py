"""The three benchmark problems: decaying lattice vortex (exact solution),
2D Kelvin-Helmholtz shear layer, and channel flow past a cylinder.

Each ProblemSpec knows how to build its mesh, boundary conditions and
initial velocity; the lattice vortex also exposes its exact solution for
error computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fespace, mesh
from .fespace import Dirichlet, FieldCoeffs, Periodic, SlipNormal, VectorField


class ProblemError(ValueError):
    pass


TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Lattice vortex: u = v exp(-8 nu pi^2 t) with
# v = (sin 2pi x sin 2pi y, cos 2pi x cos 2pi y); an exact NSE solution with
# zero forcing, zero momentum and zero angular momentum for all t.
# ---------------------------------------------------------------------------

def lattice_velocity(nu: float, t: float) -> VectorField:
    decay = np.exp(-8.0 * nu * np.pi**2 * t)

    def value(x, y):
        sx, cx = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
        sy, cy = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
        return decay * np.stack([sx * sy, cx * cy], axis=-1)

    def gradient(x, y):
        sx, cx = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
        sy, cy = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
        g = np.empty(np.shape(x) + (2, 2))
        g[..., 0, 0] = cx * sy
        g[..., 0, 1] = sx * cy
        g[..., 1, 0] = -sx * cy
        g[..., 1, 1] = -cx * sy
        return (TWO_PI * decay) * g

    return VectorField(value, gradient)


def lattice_pressure(nu: float, t: float):
    decay = np.exp(-16.0 * nu * np.pi**2 * t)

    def value(x, y):
        return -0.5 * decay * (np.sin(TWO_PI * x) ** 2 + np.cos(TWO_PI * y) ** 2)

    return value


def lattice_energy(nu: float, t: float) -> float:
    """Exact kinetic energy 1/4 * exp(-16 nu pi^2 t)."""
    return 0.25 * np.exp(-16.0 * nu * np.pi**2 * t)


def exact_lattice_solution(nu: float, t: float):
    """(velocity VectorField, pressure callable) of the decaying vortex at time t."""
    return lattice_velocity(nu, t), lattice_pressure(nu, t)


# ---------------------------------------------------------------------------
# Kelvin-Helmholtz shear layer on the x-periodic unit square
# ---------------------------------------------------------------------------

KH_DELTA0 = 1.0 / 28.0
KH_UINF = 1.0
KH_NOISE = 1e-3


def kh_viscosity(Re: float) -> float:
    """Re = delta0 * uinf / nu = 1 / (28 nu)."""
    return 1.0 / (28.0 * Re)


def kh_initial(x, y, Re: float | None = None):
    """Initial velocity: tanh shear layer plus a small perturbation stream function."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d2 = KH_DELTA0**2
    gauss = KH_UINF * np.exp(-((y - 0.5) ** 2) / d2)
    cospart = np.cos(8 * np.pi * x) + np.cos(20 * np.pi * x)
    dpsi_dy = gauss * (-2.0 * (y - 0.5) / d2) * cospart
    dpsi_dx = gauss * (-8 * np.pi * np.sin(8 * np.pi * x) - 20 * np.pi * np.sin(20 * np.pi * x))
    base = KH_UINF * np.tanh((2.0 * y - 1.0) / KH_DELTA0)
    return np.stack([base + KH_NOISE * dpsi_dy, -KH_NOISE * dpsi_dx], axis=-1)


# ---------------------------------------------------------------------------
# Channel flow past a cylinder (2.2 x 0.41 channel, r=0.05 circle at (0.2,0.2))
# ---------------------------------------------------------------------------

CYLINDER_NU = 5e-4


def channel_inflow(x, y, t=0.0):
    """Parabolic profile prescribed at both the inlet and the outlet."""
    prof = (6.0 / 0.41**2) * y * (0.41 - y)
    return np.stack([prof, np.zeros_like(prof)], axis=-1)


# ---------------------------------------------------------------------------
# Problem specs
# ---------------------------------------------------------------------------

@dataclass
class LatticeVortexProblem:
    n: int
    nu: float
    name = "lattice_vortex"

    def __post_init__(self):
        if self.n < 1 or self.nu < 0:
            raise ProblemError("lattice vortex needs n >= 1 and nu >= 0")

    def build(self):
        msh = mesh.generate_unit_square(self.n)
        nu = self.nu

        def bc_fn(x, y, t):
            return lattice_velocity(nu, t)(x, y)

        space = fespace.build_space(msh, {"wall": Dirichlet(bc_fn)})
        u0 = fespace.interpolate(space, lattice_velocity(nu, 0.0), "velocity")
        return space, u0

    def exact_velocity(self, t):
        return lattice_velocity(self.nu, t)


@dataclass
class KelvinHelmholtzProblem:
    n: int
    Re: float
    name = "kelvin_helmholtz"

    def __post_init__(self):
        if self.n < 2 or self.Re <= 0:
            raise ProblemError("Kelvin-Helmholtz needs n >= 2 and Re > 0")

    @property
    def nu(self) -> float:
        return kh_viscosity(self.Re)

    def build(self):
        msh = mesh.generate_periodic_strip(self.n)
        space = fespace.build_space(
            msh,
            {
                "periodic_left": Periodic(),
                "periodic_right": Periodic(),
                "slip_bottom": SlipNormal(),
                "slip_top": SlipNormal(),
            },
        )
        u0 = fespace.interpolate(space, lambda x, y: kh_initial(x, y), "velocity")
        return space, u0


@dataclass
class CylinderProblem:
    mesh_text: str
    nu: float = CYLINDER_NU
    name = "cylinder"

    def __post_init__(self):
        if self.nu <= 0:
            raise ProblemError("cylinder problem needs nu > 0")

    def build(self):
        msh = mesh.read_mesh(self.mesh_text)
        required = {"wall", "inlet", "outlet", "cylinder"}
        if not required <= msh.markers():
            missing = sorted(required - msh.markers())
            raise ProblemError(f"cylinder mesh lacks markers: {', '.join(missing)}")
        space = fespace.build_space(
            msh,
            {
                "wall": Dirichlet((0.0, 0.0)),
                "cylinder": Dirichlet((0.0, 0.0)),
                "inlet": Dirichlet(channel_inflow),
                "outlet": Dirichlet(channel_inflow),
            },
        )
        u0 = FieldCoeffs("velocity", np.zeros(space.num_vdofs))
        # start from rest: ramp nothing, the inflow is enforced from the first step
        u0.values[:] = 0.0
        d0 = space.dirichlet_values(0.0)
        u0.values[space.vel_fixed] = d0[space.vel_fixed]
        return space, u0
