#!/usr/bin/env python3
"""Channel flow past a cylinder: impulsive start on the shipped coarse mesh.

Advances the Re=200 configuration for a short window and prints the
volume-integral drag/lift coefficients as the wake develops.  The full
benchmark (T=10, statistics over 7 <= t <= 10) takes hours; see the
reproduction guide in the README.

About 15 minutes:  python3 demos/05_cylinder_startup.py [end_time]
"""

import sys

import numpy as np

from emaclab.config import config_from_pairs
from emaclab.output import read_csv
from emaclab.runner import run

T = sys.argv[1] if len(sys.argv) > 1 else "0.4"
outdir = "runs/cylinder-demo"
cfg = config_from_pairs({
    "problem": "cylinder",
    "mesh_file": "builtin:cylinder_coarse.mesh",
    "form": "emac",
    "stepper": "bdf2",
    "dt": "0.002",
    "end_time": T,
    "diagnostics_interval": "1",
    "outdir": outdir,
})
run(cfg)

data = read_csv(f"{outdir}/diagnostics.csv")
keep = np.isfinite(data["cd"])
print(f"\n t        c_d        c_l")
for k in range(0, keep.sum(), max(1, keep.sum() // 12)):
    t, cd, cl = data["t"][keep][k], data["cd"][keep][k], data["cl"][keep][k]
    print(f"{t:6.3f}  {cd:9.4f}  {cl:9.4f}")
print(f"\nfinal drag {data['cd'][keep][-1]:.4f} (steady-state max is about 3.3)")
