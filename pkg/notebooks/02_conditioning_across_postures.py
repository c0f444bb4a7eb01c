"""
Conditioning index across inverse kinematic solutions
=====================================================

A reachable point inside a well-connected workspace has four postures.
det J is the same for all four, but the ratio of extreme singular values
need not be: it is for arms without an r3 offset and it is not once r3 is
nonzero.  The RDW therefore uses the smallest k^-1 over the postures.
"""

import numpy as np

from rdw3r.kinematics import ManipulatorType, conditioning_index, det_jacobian, forward_kinematics, jacobian, solve_ik

arms = {
    "C (r2=4, d4=4)": ManipulatorType.C.geometry(r2=4.0, d4=4.0),
    "G (d3=4, d4=2.5, r3=1)": ManipulatorType.G.geometry(d3=4.0, d4=2.5, r3=1.0),
}
q = np.array([0.3, 0.8, 1.1])

for name, geom in arms.items():
    target = forward_kinematics(geom, q)
    print(name, " target", np.round(target, 4))
    for sol in solve_ik(geom, target).solutions:
        k = conditioning_index(jacobian(geom, sol))
        print(f"   q = {np.round(sol, 4)}   |det J| = {abs(det_jacobian(geom, sol)):.6f}   k^-1 = {k:.6f}")
