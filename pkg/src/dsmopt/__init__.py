"""Optimal transmit power allocation for fully coordinated multi-pair DSL.

Subpackages
-----------
numlin      small dense complex linear algebra kernels (Cholesky, SVD)
binder      problem instances: channels, noise covariances, DMT grid, I/O
spectra     per-tone solves, dual multiplier searches, KKT auditing
structures  optimal Tx/Rx matrices, Monte Carlo validation, DP/ZF baselines
harness     experiment configuration, sweeps, CSV reporting
cli         command line driver (``dsmopt gen|solve|sweep|audit|selftest``)

The hot numeric kernels are JIT compiled with numba by default; set
``DSMOPT_BACKEND=numpy`` to force the pure-numpy fallback (see
``dsmopt.backend``).
"""

__version__ = "0.1.0"
