#!/usr/bin/env python3
"""Tour of the five nonlinearity forms and their discrete conservation
properties.

Builds a small Taylor-Hood space, evaluates the trilinear forms on random
fields, and shows which forms annihilate the energy, momentum and angular
momentum test functions -- the discrete analogue of the conservation table
that motivates the EMAC scheme.

Runs in a few seconds:  python3 demos/01_forms_and_conservation.py
"""

import numpy as np

from emaclab import Dirichlet, FormKind, build_space, generate_unit_square, interpolate
from emaclab.assembly import eval_trilinear, nonlinear_residual
from emaclab.verify import compact_support_field, h1_scale

mesh = generate_unit_square(12)
space = build_space(mesh, {"wall": Dirichlet((0.0, 0.0))})
rng = np.random.default_rng(1)

print("== energy cancellation: form(v, v, v) for zero-trace v ==")
v = space.P_v @ rng.standard_normal(space.num_free_vdofs)
scale = h1_scale(space, v) ** 3
for form in FormKind:
    val = eval_trilinear(form, space, v, v, v) / scale
    print(f"  {form.name:5s}: {val:+.3e}   {'conserves energy' if abs(val) < 1e-12 else ''}")

print("\n== momentum / angular momentum: N(u).w for compact-support u ==")
ex = interpolate(space, lambda x, y: (1.0 + 0 * x, 0 * y), "velocity").values
rot = interpolate(space, lambda x, y: np.stack([-y, x], axis=-1), "velocity").values
u = compact_support_field(space, rng)
scale = 2.0 * h1_scale(space, u) ** 2
for form in FormKind:
    n = nonlinear_residual(form, space, u)
    mom = abs(n @ ex) / scale
    ang = abs(n @ rot) / scale
    marks = ("+" if mom < 1e-12 else " ", "+" if ang < 1e-12 else " ")
    print(f"  {form.name:5s}: momentum {mom:.2e} [{marks[0]}]   angular {ang:.2e} [{marks[1]}]")

print("\nOnly EMAC carries a '+' in every column.")
