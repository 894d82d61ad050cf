"""Checks that twinned spin-1 pairs must be in the singlet state.

Modules:

- ``scalar``: exact arithmetic in Q(i, sqrt2, sqrt3) and the exact/float backends
- ``linop``: vectors, matrices, tensor products, Jacobi eigensolver, null spaces
- ``spin``: spin operators, spin-zero projectors, total-j projectors, the singlet
- ``theorem``: defect operators, twin functional, joint kernel, verification report
- ``correlations``: density matrices, partial traces, outcome statistics, agreement bound
- ``cli``: the ``twinspin`` command
"""

__version__ = "0.1.0"
