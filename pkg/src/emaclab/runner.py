"""Run orchestration: build the problem, step it, stream diagnostics and
snapshots, and leave a re-runnable manifest in the output directory."""

from __future__ import annotations

import os
import time

import numpy as np

from . import __version__, diagnostics, fespace, timestep
from .config import RunConfig
from .diagnostics import TimeSeriesRecord
from .output import CsvWriter, write_manifest, write_vtk_snapshot


def run(cfg: RunConfig) -> timestep.TransientState:
    """Execute one configured run; artifacts land in cfg.outdir."""
    cfg.validate()
    started = time.time()
    os.makedirs(cfg.outdir, exist_ok=True)

    problem = cfg.problem
    space, u0 = problem.build()

    is_lattice = problem.name == "lattice_vortex"
    is_cylinder = problem.name == "cylinder"

    v_d = v_l = None
    if is_cylinder:
        v_d = fespace.boundary_extension(space, "cylinder", (1.0, 0.0))
        v_l = fespace.boundary_extension(space, "cylinder", (0.0, 1.0))

    history = [u0.values.copy()]   # trailing velocities for the BDF2 lift/drag difference

    csv_path = os.path.join(cfg.outdir, "diagnostics.csv")
    writer = CsvWriter(csv_path, errors=is_lattice, forces=is_cylinder)

    def record(state: timestep.TransientState):
        nonlocal history
        if cfg.diagnostics_interval and state.step_index % cfg.diagnostics_interval == 0:
            mom = diagnostics.momentum(space, state.u)
            rec = TimeSeriesRecord(
                t=state.t,
                E=diagnostics.kinetic_energy(space, state.u),
                enstrophy=diagnostics.enstrophy(space, state.u),
                Mx=mom[0],
                My=mom[1],
                Mang=diagnostics.angular_momentum(space, state.u),
                div_residual=diagnostics.div_residual(space, state.u),
                newton_iters=state.newton_iters,
            )
            if is_lattice:
                exact = problem.exact_velocity(state.t)
                rec.L2err, rec.H1err = diagnostics.error_norms(space, state.u, exact)
            if is_cylinder and len(history) == 2:
                rec.cd, rec.cl = diagnostics.lift_drag(
                    space, cfg.scheme, state.u, history[-1], history[-2],
                    state.p, v_d, v_l,
                )
            writer.write(rec)
        if is_cylinder:
            history = (history + [state.u])[-2:]

    def snapshot(state: timestep.TransientState):
        if cfg.snapshot_interval and state.step_index % cfg.snapshot_interval == 0:
            path = os.path.join(cfg.outdir, f"snap_{state.step_index:06d}.vtk")
            write_vtk_snapshot(path, space, state.u, state.p,
                               title=f"{problem.name} t={state.t:.6g}")

    try:
        final = timestep.run_transient(
            space, cfg.scheme, u0, observers=(record, snapshot)
        )
    finally:
        writer.close()

    write_manifest(
        os.path.join(cfg.outdir, "manifest.txt"), cfg, __version__,
        wall_clock=time.time() - started,
    )
    return final
