"""Reduced-order pipeline for parametric hull shape design.

Subpackages:
  geometry   free-form deformation, surface meshes, volume/drag integrals
  dmd        exact dynamic mode decomposition, forecasting, steady state
  subspaces  active subspaces and shared subspaces from gradient samples
  response   polynomial response surfaces and constrained minimization
  pipeline   campaign orchestration, surrogates, persistence
"""

__version__ = "0.1.0"
