"""
Singularity-free square and RDW of one manipulator
==================================================

Walks through the pipeline for a type C arm with d4 = 1.5 and r2 = 1:
singular curves in the (rho, z) section, their crossings of the z = 0 axis,
the largest square free of singularities and the square on which the
conditioning index stays above 0.25.
"""

import numpy as np

from rdw3r.kinematics import ManipulatorType
from rdw3r.rdw import clearance, compute_rdw, initial_center, max_free_square
from rdw3r.singularity import axis_crossings, max_reach, singular_set

geom = ManipulatorType.C.geometry(d4=1.5, r2=1.0)
print("geometry:", geom)
print("reach:", max_reach(geom))

# The singular set is a point cloud; for this arm it is a circle of radius
# d4 around (r2, 0) plus two isolated points on the axis.
s = singular_set(geom)
print(f"{len(s)} singular samples, largest gap {s.max_gap:.2e}")
print("z = 0 crossings:", np.round(axis_crossings(s), 4))

# Start in the middle of the widest reachable gap between crossings.
m0 = initial_center(geom, s)
print("start point:", m0, " clearance:", round(clearance(m0, s), 4))

# Hooke-Jeeves moves the centre towards the inner side of the circle.
free = max_free_square(geom, s)
print("free square: centre", np.round(free.center, 4), "edge", round(free.edge, 4))

# The RDW square is smaller: near the curves k^-1 drops below the threshold.
r = compute_rdw(geom, k_min_inv=0.25)
print("RDW square:", r.rdw_square.as_dict())
print("eta = a_RDW / rho_max =", round(r.eta, 4))
