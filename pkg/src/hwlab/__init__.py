"""Numerical laboratory for half-wave traveling waves, two-soliton modulation
dynamics, and resonant Szego soliton growth.

Modules
-------
spectral    grids, transforms, multipliers, projectors, norms, conserved laws
profiles    Q+ / ground state / speed-beta traveling-wave solvers and oracles
modulation  two-soliton parameter ODEs (sharp and turbulent right-hand sides)
szego       exact two-soliton ODEs of the cubic Szego equation
evolution   pseudo-spectral PDE steppers, ansatz synthesis, diagnostics
acceptance  end-to-end acceptance checks (also driven by the CLI)
cli         command-line surface
"""

__version__ = "0.1.0"
