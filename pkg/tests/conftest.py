import os
import subprocess
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from emaclab import assembly, fespace, mesh  # noqa: E402

# Deterministic run outputs are cached here; delete the directory to force
# fresh runs (each acceptance run is reproducible bit-for-bit).
RUN_CACHE = os.path.join(os.path.dirname(__file__), "..", "acceptance_runs")


@pytest.fixture(scope="session")
def dirichlet_square_8():
    m = mesh.generate_unit_square(8)
    return fespace.build_space(m, {"wall": fespace.Dirichlet((0.0, 0.0))})


@pytest.fixture(scope="session")
def dirichlet_square_16():
    m = mesh.generate_unit_square(16)
    return fespace.build_space(m, {"wall": fespace.Dirichlet((0.0, 0.0))})


def zero_trace_field(space, rng):
    """Random coefficient vector of the constrained velocity space."""
    return space.P_v @ rng.standard_normal(space.num_free_vdofs)


def compact_support_field(space, rng):
    """Random velocity vanishing on every boundary-adjacent cell."""
    from emaclab.verify import compact_support_field as impl

    return impl(space, rng)


def h1_scale(space, v):
    ops = assembly.operators(space)
    return float(np.sqrt(v @ (ops.A @ v) + v @ (ops.M @ v)))


def cached_cli_run(outdir_name: str, preset: str, overrides: dict) -> str:
    """Run `emaclab preset` once and cache the artifacts (outputs are
    deterministic, so reuse across sessions is sound)."""
    outdir = os.path.join(RUN_CACHE, outdir_name)
    csv = os.path.join(outdir, "diagnostics.csv")
    manifest = os.path.join(outdir, "manifest.txt")
    if os.path.exists(csv) and os.path.exists(manifest):
        return outdir
    args = [sys.executable, "-m", "emaclab.cli", "preset", preset,
            "--override", f"outdir={outdir}"]
    for k, v in overrides.items():
        args += ["--override", f"{k}={v}"]
    env = dict(os.environ)
    env["PYTHONPATH"] = os.path.join(os.path.dirname(__file__), "..", "src")
    subprocess.run(args, check=True, env=env)
    return outdir
