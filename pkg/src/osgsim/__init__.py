"""Quantum-trajectory simulation of wave-packet splitting in a standing-wave cavity.

A two-level atom crosses a quantized cavity mode; its center-of-mass motion
along the cavity axis is tracked on a uniform momentum grid (units of the
photon recoil ``hbar*k``).  Open-system dynamics follow the Monte Carlo
wave-function unraveling: non-Hermitian coherent evolution between jumps,
interrupted by atomic-emission and cavity-transmission collapse events.

Subpackages / modules:

- ``model``        domain types and initial-state construction
- ``dressed``      analytic dressed-state algebra for the first couplet
- ``dynamics``     coherent (non-Hermitian) evolution and integrators
- ``jumps``        collapse probabilities and jump channels
- ``trajectory``   single-trajectory driver (stochastic/scheduled/no-jump/closed)
- ``observables``  momentum/position distributions and summary statistics
- ``experiment``   transit-envelope Monte Carlo ensembles (beam through cavity)
- ``presets``      ready-made run configurations
- ``service``      FastAPI wrapper exposing runs over HTTP
- ``cli``          thin command-line client writing TSV outputs
"""

__version__ = "0.1.0"
