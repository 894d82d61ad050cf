"""
Twinning forces the singlet
===========================

A twinned pure state must lie in the kernel of every D(n).  Six directions
(the axes and the three diagonal bisectors) already cut that kernel down
to one ray, and exact arithmetic shows the ray is the singlet.
"""

from twinspin.linop import DEFAULT_TOL
from twinspin.scalar import EXACT
from twinspin.spin import Direction
from twinspin.theorem import (DirectionSet, certifying_set, elimination_factors, joint_kernel,
                              ls_spectrum, singlet_overlap, verify_strong_theorem)

# one axis leaves a five-dimensional kernel: every |m1, m2> with m1^2 = m2^2
print("z only:", len(joint_kernel(DirectionSet((Direction.axis("z"),)))), "dimensions")

# the certifying set leaves exactly one vector, with integer entries
(k,) = joint_kernel(certifying_set(EXACT))
print("kernel vector:", [str(v) for v in k.entries])
print("overlap with the singlet:", singlet_overlap([k]))

# why: 2(L.S)^2 + L.S - 6 kills only the j = 0 subspace
spectrum, _ = ls_spectrum(EXACT, DEFAULT_TOL)
print("L.S spectrum:", spectrum)
factors, _ = elimination_factors(EXACT)
print("2(L.S)^2 + L.S - 6 on j = 0, 1, 2:", factors)

report = verify_strong_theorem()
print("full check:", report.verdict, "| kernel dimension", report.kernel_dimension)
