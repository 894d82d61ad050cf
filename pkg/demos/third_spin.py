"""
A third spin cannot echo the twins
==================================

Twinned spins are in a pure state, so they carry no correlation with any
other system.  A third spin measured along the same direction therefore
agrees with the twins at most 2/3 of the time.
"""

from fractions import Fraction

from twinspin.correlations import (DensityMatrix, factorization_gap, joint_spin_zero_distribution,
                                   max_agreement_probability, product_state, sample_outcomes)
from twinspin.linop import diag
from twinspin.scalar import EXACT
from twinspin.spin import Direction, singlet

z = Direction.axis("z")
twins = DensityMatrix.from_vector(singlet(EXACT))

# a third spin that says yes half the time
third = DensityMatrix(diag([Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)], backend=EXACT))
rho = product_state(twins, third)
print("factorization gap:", factorization_gap(rho))

dist = joint_spin_zero_distribution(rho, [z, z, z])
print("P(twins, third):", {k: str(v) for k, v in dist.outcomes.items() if v})
print("dependence between twins and third:", dist.independence_gap([0, 1], [2]))

# the best third spin always says no, matching the twins' "no" two times in three
bound = max_agreement_probability(z)
print("max agreement:", bound.value, "| perfect echo possible:", bound.cloning_feasible)

# sampling the twins alone never produces a split answer
stats = sample_outcomes(twins.to_float(), [z.to_float(), z.to_float()], 100_000, seed=1)
print("counts:", stats.counts, "| discord:", stats.discord_count())
