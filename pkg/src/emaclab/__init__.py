"""emaclab: 2D incompressible Navier-Stokes on Taylor-Hood elements,
comparing the EMAC nonlinearity with the classical CONV/SKEW/ROT/CONS forms."""

from .assembly import FormKind
from .fespace import (
    Dirichlet,
    FieldCoeffs,
    Natural,
    Periodic,
    SlipNormal,
    VectorField,
    boundary_extension,
    build_space,
    interpolate,
    stokes_project,
)
from .mesh import (
    TriMesh,
    generate_periodic_strip,
    generate_unit_square,
    mesh_size,
    read_mesh,
    write_mesh,
)
from .timestep import SchemeConfig, TransientState, initialize, run_transient, step

__version__ = "0.1.0"

__all__ = [
    "Dirichlet",
    "FieldCoeffs",
    "FormKind",
    "Natural",
    "Periodic",
    "SchemeConfig",
    "SlipNormal",
    "TransientState",
    "TriMesh",
    "VectorField",
    "boundary_extension",
    "build_space",
    "generate_periodic_strip",
    "generate_unit_square",
    "initialize",
    "interpolate",
    "mesh_size",
    "read_mesh",
    "run_transient",
    "step",
    "stokes_project",
    "__version__",
]
