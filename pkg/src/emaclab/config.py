"""Run configuration: a flat key-value text format, presets, and the manifest.

Grammar: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines ignored.  Unknown keys are rejected except the manifest metadata keys
(code_version, wall_clock_seconds), which parse as no-ops so a manifest can
be fed back to ``emaclab run`` unchanged.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

from .assembly import FormKind
from .problems import (
    CYLINDER_NU,
    CylinderProblem,
    KelvinHelmholtzProblem,
    LatticeVortexProblem,
)
from .timestep import ConfigError, NewtonParams, SchemeConfig


_MANIFEST_KEYS = {"code_version", "wall_clock_seconds"}

_KEYS = {
    "problem": str,
    "n": int,
    "nu": float,
    "Re": float,
    "mesh_file": str,
    "form": str,
    "stepper": str,
    "dt": float,
    "end_time": float,
    "graddiv_gamma": float,
    "newton_abs_tol": float,
    "newton_rel_tol": float,
    "newton_max_iter": int,
    "linear_tol": float,
    "outdir": str,
    "diagnostics_interval": int,
    "snapshot_interval": int,
}

_DEFAULTS = {
    "form": "emac",
    "stepper": "bdf2",
    "dt": 0.001,            # the benchmarks' full-scale step size
    "graddiv_gamma": 0.0,
    "newton_abs_tol": 1e-10,
    "newton_rel_tol": 1e-8,
    "newton_max_iter": 25,
    "linear_tol": 1e-10,
    "outdir": "run-output",
    "diagnostics_interval": 1,
    "snapshot_interval": 0,
}


@dataclass
class RunConfig:
    problem: object                  # one of the ProblemSpec dataclasses
    scheme: SchemeConfig
    outdir: str
    diagnostics_interval: int = 1
    snapshot_interval: int = 0       # 0 disables snapshots
    raw: dict = field(default_factory=dict)

    def validate(self):
        from .timestep import num_steps

        steps = num_steps(self.scheme)
        for name, iv in (
            ("diagnostics_interval", self.diagnostics_interval),
            ("snapshot_interval", self.snapshot_interval),
        ):
            if iv < 0:
                raise ConfigError(f"{name} must be >= 0")
            if iv and steps % iv:
                raise ConfigError(f"{name}={iv} does not divide step count {steps}")


def parse_pairs(text: str) -> dict:
    """Parse the key-value grammar into an ordered dict of strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def resolve_mesh_text(ref: str) -> str:
    """Load mesh-file contents; 'builtin:<name>' reads the packaged meshes."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        res = importlib.resources.files("emaclab").joinpath("meshes", name)
        return res.read_text()
    with open(ref) as fh:
        return fh.read()


def config_from_pairs(pairs: dict) -> RunConfig:
    pairs = {k: v for k, v in pairs.items() if k not in _MANIFEST_KEYS}
    for key in pairs:
        if key not in _KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
    if "problem" not in pairs:
        raise ConfigError("missing required key 'problem'")

    def get(key, default=None):
        if key in pairs:
            try:
                return _KEYS[key](pairs[key])
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {pairs[key]!r}") from None
        if default is None and key not in _DEFAULTS:
            raise ConfigError(f"missing required key {key!r}")
        return default if default is not None else _DEFAULTS[key]

    kind = pairs["problem"]
    if kind == "lattice_vortex":
        problem = LatticeVortexProblem(n=get("n"), nu=get("nu"))
        nu = problem.nu
    elif kind == "kelvin_helmholtz":
        problem = KelvinHelmholtzProblem(n=get("n"), Re=get("Re"))
        nu = problem.nu
    elif kind == "cylinder":
        ref = get("mesh_file")
        problem = CylinderProblem(
            mesh_text=resolve_mesh_text(ref), nu=get("nu", CYLINDER_NU)
        )
        problem.mesh_ref = ref
        nu = problem.nu
    else:
        raise ConfigError(f"unknown problem {kind!r}")

    scheme = SchemeConfig(
        form=FormKind.parse(get("form")),
        nu=nu,
        dt=get("dt"),
        stepper=get("stepper"),
        graddiv_gamma=get("graddiv_gamma"),
        newton=NewtonParams(
            abs_tol=get("newton_abs_tol"),
            rel_tol=get("newton_rel_tol"),
            max_iter=get("newton_max_iter"),
        ),
        end_time=get("end_time"),
        linear_tol=get("linear_tol"),
    )
    cfg = RunConfig(
        problem=problem,
        scheme=scheme,
        outdir=get("outdir"),
        diagnostics_interval=get("diagnostics_interval"),
        snapshot_interval=get("snapshot_interval"),
        raw=dict(pairs),
    )
    cfg.validate()
    return cfg


def parse_config(text: str) -> RunConfig:
    return config_from_pairs(parse_pairs(text))


def format_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig back to the key-value grammar (round-trips)."""
    p = cfg.problem
    pairs = {"problem": p.name}
    if p.name == "lattice_vortex":
        pairs["n"] = str(p.n)
        pairs["nu"] = repr(p.nu)
    elif p.name == "kelvin_helmholtz":
        pairs["n"] = str(p.n)
        pairs["Re"] = repr(p.Re)
    else:
        pairs["mesh_file"] = getattr(p, "mesh_ref", "cylinder.mesh")
        pairs["nu"] = repr(p.nu)
    s = cfg.scheme
    pairs.update(
        form=s.form.value,
        stepper=s.stepper,
        dt=repr(s.dt),
        end_time=repr(s.end_time),
        graddiv_gamma=repr(s.graddiv_gamma),
        newton_abs_tol=repr(s.newton.abs_tol),
        newton_rel_tol=repr(s.newton.rel_tol),
        newton_max_iter=str(s.newton.max_iter),
        linear_tol=repr(s.linear_tol),
        outdir=cfg.outdir,
        diagnostics_interval=str(cfg.diagnostics_interval),
        snapshot_interval=str(cfg.snapshot_interval),
    )
    return "".join(f"{k} = {v}\n" for k, v in pairs.items())


# Desk-scale presets run on a laptop; *-full presets use the full-scale
# benchmark settings and are long-running.
PRESETS = {
    "lattice-desk": {
        "problem": "lattice_vortex", "n": "32", "nu": "1e-5",
        "form": "emac", "stepper": "crank_nicolson", "dt": "0.002",
        "end_time": "5.0", "outdir": "runs/lattice-desk",
    },
    "kh-desk": {
        "problem": "kelvin_helmholtz", "n": "64", "Re": "100",
        "form": "emac", "stepper": "bdf2", "dt": "0.002",
        "end_time": "5.0", "outdir": "runs/kh-desk",
    },
    "cylinder-desk": {
        "problem": "cylinder", "mesh_file": "builtin:cylinder_coarse.mesh",
        "nu": "0.0005", "form": "emac", "stepper": "bdf2", "dt": "0.002",
        "end_time": "10.0", "outdir": "runs/cylinder-desk",
    },
    "lattice-full": {
        "problem": "lattice_vortex", "n": "64", "nu": "1e-5",
        "form": "emac", "stepper": "crank_nicolson", "dt": "0.001",
        "end_time": "10.0", "outdir": "runs/lattice-full",
    },
    "kh-full": {
        "problem": "kelvin_helmholtz", "n": "196", "Re": "1000",
        "form": "emac", "stepper": "bdf2", "dt": "0.001",
        "end_time": "14.0", "outdir": "runs/kh-full",
    },
    "cylinder-full": {
        "problem": "cylinder", "mesh_file": "builtin:cylinder_fine.mesh",
        "nu": "0.0005", "form": "emac", "stepper": "bdf2", "dt": "0.001",
        "end_time": "10.0", "outdir": "runs/cylinder-full",
    },
}


def preset_config(name: str, overrides: dict | None = None) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    pairs = dict(PRESETS[name])
    if overrides:
        pairs.update(overrides)
    return config_from_pairs(pairs)
