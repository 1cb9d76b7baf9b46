#!/usr/bin/env python3
"""Escape-time picture of the parameter gasket.

Each pixel of a barycentric raster is iterated under the accelerated
induction until a hole appears; the surviving black set is the fractal
parameter region where the induction runs forever.
"""

import os

from rauzygasket.induction import (
    depth_grid,
    survival_fractions,
    write_depth_csv,
    write_ppm,
)

RES = 512
DEPTH = 12

grid = depth_grid(RES, DEPTH, precision=53)
fracs = survival_fractions(grid, DEPTH)

print(f"{RES}x{RES} raster, escape depth capped at {DEPTH}")
print("depth  fraction surviving >= depth")
for k, f in enumerate(fracs):
    print(f"  {k:2d}   {f:.4f}")

out = os.environ.get("DEMO_OUT", "/tmp/rauzygasket-demo")
os.makedirs(out, exist_ok=True)
write_ppm(grid, DEPTH, os.path.join(out, "gasket.ppm"))
write_depth_csv(grid, os.path.join(out, "gasket_depth.csv"))
print("wrote", os.path.join(out, "gasket.ppm"))
print("white = immediate hole, darker = longer survival, black = still alive,")
print("red = pixels whose branch decisions fell below the float margin")
