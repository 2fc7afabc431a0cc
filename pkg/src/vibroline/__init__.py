"""Phonon sidebands, mode couplings, and lattice dynamics for point-defect
emission at desk scale."""

from . import errors, ifcfit, model, phonons, synthetic, thermal, vibronic

__all__ = [
    "errors",
    "ifcfit",
    "model",
    "phonons",
    "synthetic",
    "thermal",
    "vibronic",
]

__version__ = "0.1.0"
