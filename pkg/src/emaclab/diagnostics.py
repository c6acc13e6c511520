"""Conserved-quantity functionals, error norms, lower-bound estimators and
the volume-integral lift/drag coefficients.

Sign convention for the angular momentum: the z-component of u x x, i.e.
integral of (u_1 y - u_2 x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import assembly
from .assembly import FormKind
from .fespace import FieldCoeffs, TaylorHoodSpace


@dataclass
class TimeSeriesRecord:
    """One diagnostics row; optional fields stay None when not recorded."""

    t: float
    E: float
    enstrophy: float
    Mx: float
    My: float
    Mang: float
    div_residual: float
    newton_iters: int
    L2err: float | None = None
    H1err: float | None = None
    cl: float | None = None
    cd: float | None = None

    def validate(self):
        if self.E < 0 or self.enstrophy < 0 or self.div_residual < 0:
            raise ValueError("E, enstrophy and div_residual must be nonnegative")


def _vals(u):
    return u.values if isinstance(u, FieldCoeffs) else np.asarray(u, dtype=float)


def kinetic_energy(space: TaylorHoodSpace, u) -> float:
    """E = |u|^2 / 2 integrated, via the mass matrix."""
    v = _vals(u)
    return 0.5 * float(v @ (assembly.operators(space).M @ v))


def momentum(space: TaylorHoodSpace, u) -> np.ndarray:
    """M = integral of u, componentwise."""
    ctx = assembly.context(space)
    U, _ = assembly.velocity_at_qp(ctx, _vals(u))
    return np.einsum("qt,qtc->c", ctx.wdet, U)


def angular_momentum(space: TaylorHoodSpace, u) -> float:
    """Integral of u_1 y - u_2 x (z-component of u x x)."""
    ctx = assembly.context(space)
    U, _ = assembly.velocity_at_qp(ctx, _vals(u))
    return float(np.einsum("qt,qt->", ctx.wdet, U[:, :, 0] * ctx.qpy - U[:, :, 1] * ctx.qpx))


def enstrophy(space: TaylorHoodSpace, u) -> float:
    """Half the squared L2 norm of the scalar vorticity."""
    ctx = assembly.context(space)
    _, G = assembly.velocity_at_qp(ctx, _vals(u))
    omega = G[:, :, 1, 0] - G[:, :, 0, 1]
    return 0.5 * float(np.einsum("qt,qt->", ctx.wdet, omega**2))


def div_residual(space: TaylorHoodSpace, u) -> float:
    """Max over (merged) pressure test functions of |(div u, q)|."""
    ops = assembly.operators(space)
    r = space.P_p.T @ (ops.B @ _vals(u))
    return float(np.abs(r).max()) if len(r) else 0.0


def error_norms(space: TaylorHoodSpace, u, exact) -> tuple[float, float]:
    """(L2, H1-seminorm) distance between a discrete field and an analytic one.

    ``exact`` is a VectorField (or anything with value and gradient
    evaluation) frozen at the comparison time.
    """
    ctx = assembly.context(space)
    U, G = assembly.velocity_at_qp(ctx, _vals(u))
    Ue = exact(ctx.qpx, ctx.qpy)
    Ge = exact.gradient(ctx.qpx, ctx.qpy)
    dU = U - Ue
    dG = G - Ge
    l2 = np.sqrt(np.einsum("qt,qtc,qtc->", ctx.wdet, dU, dU))
    h1 = np.sqrt(np.einsum("qt,qtck,qtck->", ctx.wdet, dG, dG))
    return float(l2), float(h1)


def momentum_lower_bound(mom_err: np.ndarray, domain_area: float) -> float:
    """Certified lower bound on the L2 velocity error from the momentum error."""
    return float(np.max(np.abs(mom_err)) / np.sqrt(domain_area))


def energy_lower_bound(E_true: float, E_h: float) -> float:
    """Certified lower bound on the L2 velocity error from the energy error."""
    denom = E_true + E_h
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(2.0) * abs(E_true - E_h) / np.sqrt(denom))


def lift_drag(space: TaylorHoodSpace, config, un, unm1, unm2, p_red,
              v_d: FieldCoeffs, v_l: FieldCoeffs) -> tuple[float, float]:
    """(c_d, c_l) at t^n from the BDF2 history and Stokes-extension test fields.

    Uses the global volume-integral formulation: the momentum residual of
    the running scheme tested with the boundary extensions, scaled by -20.
    """
    for h in (unm1, unm2):
        if h is None:
            raise ValueError("lift/drag needs two steps of BDF2 history")
    ops = assembly.operators(space)
    un, unm1, unm2 = _vals(un), _vals(unm1), _vals(unm2)
    dt, nu = config.dt, config.nu
    accel = (1.5 * un - 2.0 * unm1 + 0.5 * unm2) / dt
    p_full = space.expand_pressure(np.asarray(p_red, dtype=float))

    coeffs = []
    for v in (v_d, v_l):
        vv = _vals(v)
        val = vv @ (ops.M @ accel)
        val += assembly.eval_trilinear(config.form, space, un, un, vv)
        val -= p_full @ (ops.B @ vv)
        val += nu * (vv @ (ops.A @ un))
        coeffs.append(-20.0 * val)
    return coeffs[0], coeffs[1]
