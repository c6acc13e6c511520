"""Implicit time stepping (Crank-Nicolson / BDF2) with Newton's method.

Crank-Nicolson evaluates every spatial term at the averaged state
ubar = (u^{n+1} + u^n)/2 and the nonlinearity at (ubar, ubar); that choice
makes the EMAC and SKEW schemes exactly energy-conservative in the inviscid
limit.  BDF2 is fully implicit at t^{n+1} and starts with one CN step.
The discrete divergence constraint is enforced on u^{n+1} every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import assembly, linsolve
from .assembly import FormKind
from .fespace import FieldCoeffs, TaylorHoodSpace


class NewtonError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class NewtonParams:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_iter: int = 25


@dataclass
class SchemeConfig:
    form: FormKind
    nu: float
    dt: float
    stepper: str = "crank_nicolson"      # or "bdf2"
    graddiv_gamma: float = 0.0
    newton: NewtonParams = field(default_factory=NewtonParams)
    forcing: object = None               # f(x, y, t) -> (..., 2), or None
    end_time: float = 0.0
    linear_tol: float = linsolve.DEFAULT_TOL

    def __post_init__(self):
        if isinstance(self.form, str):
            self.form = FormKind.parse(self.form)
        if self.stepper not in ("crank_nicolson", "bdf2"):
            raise ConfigError(f"unknown stepper {self.stepper!r}")
        if self.nu < 0 or self.dt <= 0:
            raise ConfigError("need nu >= 0 and dt > 0")


@dataclass
class TransientState:
    t: float
    step_index: int
    u: np.ndarray                 # full velocity dofs at t
    u_prev: np.ndarray | None     # at t - dt (None before the first step)
    p: np.ndarray                 # reduced pressure of the last solve
    newton_iters: int = 0
    newton_residuals: tuple = ()  # residual history of the last Newton solve


def initialize(space: TaylorHoodSpace, config: SchemeConfig, u0: FieldCoeffs) -> TransientState:
    """Starting state; u0 must satisfy the constraint set at t=0."""
    vals = np.asarray(u0.values if isinstance(u0, FieldCoeffs) else u0, dtype=float)
    if vals.shape != (space.num_vdofs,):
        raise ConfigError("u0 has the wrong length for this space")
    space.check_constraints(vals, t=0.0)
    return TransientState(
        t=0.0, step_index=0, u=vals.copy(), u_prev=None,
        p=np.zeros(space.num_free_pdofs),
    )


def _newton_solve(space, config, residual_fn, jacobian_fn, w0, p0):
    """Generic Newton loop on (velocity, pressure, gauge multiplier)."""
    ops = assembly.operators(space)
    gauge = ops.area_vec_r if space.pressure_gauge == "mean_zero_multiplier" else None
    w, p, lam = w0.copy(), p0.copy(), 0.0
    params = config.newton

    def full_residual(w, p, lam):
        r_mom, r_div = residual_fn(w, p)
        if gauge is not None:
            r_div = r_div + gauge * lam
            r_gauge = np.array([gauge @ p])
        else:
            r_gauge = np.zeros(0)
        norm = np.sqrt(r_mom @ r_mom + r_div @ r_div + r_gauge @ r_gauge)
        return r_mom, r_div, r_gauge, norm

    r_mom, r_div, r_gauge, r0 = full_residual(w, p, lam)
    threshold = max(params.abs_tol, params.rel_tol * r0)

    history = [r0]
    for it in range(1, params.max_iter + 1):
        K = jacobian_fn(w)
        system = linsolve.BlockSystem(
            K=K, B=ops.Br, gauge=gauge, f=-r_mom, g=-r_div,
            h=float(r_gauge[0]) if gauge is not None else 0.0,
        )
        du, dp, dlam = linsolve.solve(system, config.linear_tol)
        w = w + space.P_v @ du
        p = p + dp
        lam = lam + dlam
        r_mom, r_div, r_gauge, r = full_residual(w, p, lam)
        history.append(r)
        if r <= threshold:
            return w, p, it, history
    raise NewtonError(
        f"Newton failed to reach {threshold:.3e} in {params.max_iter} iterations "
        f"(residual history: {', '.join(f'{x:.3e}' for x in history)})"
    )


def step(state: TransientState, space: TaylorHoodSpace, config: SchemeConfig) -> TransientState:
    """Advance one time step; returns the new state."""
    ops = assembly.operators(space)
    dt, nu, gamma = config.dt, config.nu, config.graddiv_gamma
    t1 = state.t + dt
    dvals = space.dirichlet_values(t1)
    un = state.u

    use_bdf2 = config.stepper == "bdf2" and state.u_prev is not None
    if use_bdf2:
        unm1 = state.u_prev

        def residual_fn(w, p):
            r_full = ops.M @ ((1.5 * w - 2.0 * un + 0.5 * unm1) / dt)
            r_full += nu * (ops.A @ w) + assembly.nonlinear_residual(config.form, space, w)
            if gamma:
                r_full += gamma * (ops.G @ w)
            r_full -= ops.B.T @ space.expand_pressure(p)
            if config.forcing is not None:
                r_full -= assembly.load_vector(space, config.forcing, t1)
            return space.P_v.T @ r_full, space.P_p.T @ (ops.B @ w)

        def jacobian_fn(w):
            Jn = assembly.nonlinear_jacobian(config.form, space, w)
            K = assembly.combine_vv(ops, Jn, mass=1.5 / dt, viscous=nu, graddiv=gamma)
            return (space.P_v.T @ K @ space.P_v).tocsr()

    else:
        t_mid = state.t + 0.5 * dt

        def residual_fn(w, p):
            ubar = 0.5 * (w + un)
            r_full = ops.M @ ((w - un) / dt)
            r_full += nu * (ops.A @ ubar) + assembly.nonlinear_residual(config.form, space, ubar)
            if gamma:
                r_full += gamma * (ops.G @ ubar)
            r_full -= ops.B.T @ space.expand_pressure(p)
            if config.forcing is not None:
                r_full -= assembly.load_vector(space, config.forcing, t_mid)
            return space.P_v.T @ r_full, space.P_p.T @ (ops.B @ w)

        def jacobian_fn(w):
            ubar = 0.5 * (w + un)
            Jn = assembly.nonlinear_jacobian(config.form, space, ubar)
            K = assembly.combine_vv(
                ops, Jn, mass=1.0 / dt, viscous=0.5 * nu, graddiv=0.5 * gamma,
                nonlinear=0.5,
            )
            return (space.P_v.T @ K @ space.P_v).tocsr()

    # initial guess: previous velocity with updated boundary values
    w0 = np.where(space.vel_fixed, dvals, un)
    w0 = np.where(space.vel_master != np.arange(space.num_vdofs),
                  w0[space.vel_master], w0)
    w, p, iters, history = _newton_solve(space, config, residual_fn, jacobian_fn, w0, state.p)

    return TransientState(
        t=t1, step_index=state.step_index + 1, u=w, u_prev=un, p=p,
        newton_iters=iters, newton_residuals=tuple(history),
    )


def num_steps(config: SchemeConfig) -> int:
    ratio = config.end_time / config.dt
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9:
        raise ConfigError(
            f"end_time/dt = {ratio!r} is not an integer step count"
        )
    return n


def run_transient(space: TaylorHoodSpace, config: SchemeConfig, u0: FieldCoeffs,
                  observers=()) -> TransientState:
    """Step from 0 to end_time, invoking every observer after each step."""
    state = initialize(space, config, u0)
    for _ in range(num_steps(config)):
        state = step(state, space, config)
        for obs in observers:
            obs(state)
    return state
