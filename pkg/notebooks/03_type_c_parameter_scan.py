"""
Scanning the type C parameter plane
===================================

eta is dimensionless, so only the ratio r2 / d4 matters.  A coarse 6 x 6
scan already shows the best designs near the diagonal.  The field is saved
as CSV and its isocontours as SVG in the working directory.
"""

import numpy as np

from rdw3r import io
from rdw3r.kinematics import ManipulatorType
from rdw3r.sweep import GridSpec, extract_contours, region_area, sweep_eta

grid = GridSpec.for_type(ManipulatorType.C, lo=0.5, hi=3.0, step=0.5)
field = sweep_eta(ManipulatorType.C, grid, progress=lambda i, n: print(f"\r{i}/{n}", end=""))
print()

np.set_printoptions(precision=3, suppress=True)
print("rows r2 =", grid.values1, "  columns d4 =", grid.values2)
print(field.eta)

params, best = field.argmax()
print("best:", params, "eta", round(best, 4), " r2/d4 =", round(params["r2"] / params["d4"], 3))
print("share of designs with eta >= 0.5:", region_area(field, 0.5))

with open("type_c_scan.csv", "w", newline="") as fh:
    io.write_sweep_csv(field, fh)
with open("type_c_contours.svg", "w") as fh:
    fh.write(io.contour_svg(extract_contours(field, [0.4, 0.5, 0.55]), grid))
print("wrote type_c_scan.csv and type_c_contours.svg")
