"""Numerical laboratory for the Nyman-Beurling reformulation of the Riemann hypothesis.

Modules:

* :mod:`~nymanlab.zeta_engine` - zeta by Euler-Maclaurin, zero tables.
* :mod:`~nymanlab.step_kernels` - the kernels rho_alpha as exact step
  functions, inner products, Mellin transforms.
* :mod:`~nymanlab.gram_projection` - finite-section distance from 1.
* :mod:`~nymanlab.blaschke` - Blaschke products over hypothetical zeros.
* :mod:`~nymanlab.line_integrals` - integrals over the critical line.
* :mod:`~nymanlab.cli` - the ``nymanlab`` command.
"""

__version__ = "0.1.0"
