import numpy as np
import pytest
import scipy.sparse as sp

from emaclab import assembly, fespace, linsolve, mesh
from emaclab.fespace import Dirichlet
from emaclab.linsolve import BlockSystem, SolverError


def _space(n, gauge="mean_zero_multiplier"):
    return fespace.build_space(
        mesh.generate_unit_square(n), {"wall": Dirichlet((0.0, 0.0))},
        pressure_gauge=gauge,
    )


def test_identity_system_returns_rhs():
    n = 40
    rng = np.random.default_rng(0)
    f = rng.standard_normal(n)
    system = BlockSystem(
        K=sp.identity(n, format="csr"),
        B=sp.csr_matrix((0, n)),
        gauge=None, f=f, g=np.zeros(0),
    )
    u, p, lam = linsolve.solve(system)
    assert np.abs(u - f).max() <= 1e-12
    assert len(p) == 0 and lam == 0.0


def test_stokes_recovers_constructed_solution():
    space = _space(8)
    ops = assembly.operators(space)
    rng = np.random.default_rng(4)
    # manufacture a weakly divergence-free field, then feed its viscous action back
    raw = space.P_v @ rng.standard_normal(space.num_free_vdofs)
    w, _ = linsolve.solve_stokes(space, ops.A @ raw, np.zeros(space.num_vdofs))
    u, _ = linsolve.solve_stokes(space, ops.A @ w, np.zeros(space.num_vdofs))
    assert np.abs(u - w).max() <= 1e-8 * max(1.0, np.abs(w).max())
    assert np.abs(space.P_p.T @ (ops.B @ u)).max() <= 1e-10


def test_achieved_residual_meets_tolerance():
    space = _space(8)
    ops = assembly.operators(space)
    rng = np.random.default_rng(5)
    f = space.P_v.T @ (ops.M @ (space.P_v @ rng.standard_normal(space.num_free_vdofs)))
    system = BlockSystem(
        K=ops.Ar, B=ops.Br, gauge=ops.area_vec_r,
        f=f, g=np.zeros(ops.Br.shape[0]),
    )
    u, p, lam = linsolve.solve(system, tol=1e-10)
    res_mom = ops.Ar @ u - ops.Br.T @ p - f
    res_cont = ops.Br @ u + ops.area_vec_r * lam
    res = np.sqrt(res_mom @ res_mom + res_cont @ res_cont)
    assert res <= 1e-10 * np.linalg.norm(f)
    # the multiplier is zero for compatible data
    assert abs(lam) <= 1e-12


def test_pressure_is_mean_zero():
    space = _space(8)
    ops = assembly.operators(space)
    rng = np.random.default_rng(6)
    f = space.P_v.T @ rng.standard_normal(space.num_vdofs)
    system = BlockSystem(
        K=ops.Ar, B=ops.Br, gauge=ops.area_vec_r, f=f, g=np.zeros(ops.Br.shape[0])
    )
    _, p, _ = linsolve.solve(system)
    assert abs(ops.area_vec_r @ p) <= 1e-12 * np.abs(p).max()


def test_pin_dof_gauge_matches_mean_zero_velocity():
    rng = np.random.default_rng(7)
    rhs_full = rng.standard_normal(0)
    sols = {}
    for gauge in ("mean_zero_multiplier", "pin_dof"):
        space = _space(6, gauge)
        rhs = np.sin(np.arange(space.num_vdofs))
        u, _ = linsolve.solve_stokes(space, rhs, np.zeros(space.num_vdofs))
        sols[gauge] = u
    dev = np.abs(sols["mean_zero_multiplier"] - sols["pin_dof"]).max()
    assert dev <= 1e-9


def test_singular_system_reported():
    # full pressure block without any gauge has the constant-pressure nullspace
    space = _space(4)
    ops = assembly.operators(space)
    system = BlockSystem(
        K=ops.Ar, B=ops.Br, gauge=None,
        f=np.ones(ops.Ar.shape[0]), g=np.zeros(ops.Br.shape[0]),
    )
    with pytest.raises(SolverError):
        linsolve.solve(system)


def test_solver_deterministic():
    space = _space(6)
    ops = assembly.operators(space)
    f = np.cos(np.arange(space.num_vdofs))
    a = linsolve.solve_stokes(space, f, np.zeros(space.num_vdofs))
    b = linsolve.solve_stokes(space, f, np.zeros(space.num_vdofs))
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
