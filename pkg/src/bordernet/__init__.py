"""Sub-Riemannian completion curves, oriented filters and an
occlusion-robustness benchmark for small digit classifiers.

The package splits into five layers:

* ``geodesics``: Hamiltonian and reduced pendulum-phase integrators for
  completion-curve fans on the roto-translation group.
* ``vision``: orientation maps, periodic stripe/grid occlusions, PGM io.
* ``filters``: the four fixed oriented 7x7 kernels.
* ``nn`` / ``datasets``: a from-scratch convolutional network engine
  (manual backprop, Adam) plus IDX dataset io.
* ``harness`` / ``report``: the paired multi-cycle benchmark with
  bootstrap statistics and CSV/SVG output.
"""

from . import datasets, filters, geodesics, harness, nn, report, vision

__version__ = "1.0.0"

__all__ = [
    "datasets",
    "filters",
    "geodesics",
    "harness",
    "nn",
    "report",
    "vision",
    "__version__",
]
