"""
Twinned spins and the twin functional
=====================================

Two spin-1 particles are twinned along n when a spin-zero measurement of
both along n always gives the same answer.  For a state rho this is the
condition Tr(rho D(n)^2) = 0, with D(n) = (n.L)^2 - (n.S)^2.
"""

import numpy as np

from twinspin.correlations import DensityMatrix, joint_spin_zero_distribution
from twinspin.scalar import EXACT, SQRT2
from twinspin.spin import Direction, product_state, singlet
from twinspin.theorem import classify_twin_state, twin_functional

# the singlet passes at every direction, and exactly so on field-valued ones
phi = DensityMatrix.from_vector(singlet(EXACT))
h = 1 / SQRT2
n = Direction(h, 0, h)
print("singlet, n = (1,0,1)/sqrt2:", twin_functional(phi, n))

rng = np.random.default_rng(0)
worst = max(twin_functional(singlet(), Direction.random(rng)) for _ in range(200))
print("singlet, worst of 200 random directions:", worst)

# the answers are perfectly correlated: yes with probability 1/3, never split
dist = joint_spin_zero_distribution(phi, [n, n])
print("joint answers:", {k: str(v) for k, v in dist.outcomes.items()})

# |0,0> agrees along z but not along the diagonal
zz = DensityMatrix.from_vector(product_state(0, 0, EXACT))
print("|00>, along z:", twin_functional(zz, Direction.axis("z")))
print("|00>, along n:", twin_functional(zz, n))

# the classifier reports a witness direction for anything that is not twinned
verdict = classify_twin_state(zz)
print(verdict.label, "witness:", verdict.witness, "functional:", verdict.max_functional)
