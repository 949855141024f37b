"""mechq: simulate and estimate a dispersively hybridized transmon-phonon qubit."""

from . import device, dynamics, estimation, hilbert, sequences
from .device import DeviceParams, DerivedRates

__version__ = "0.1.0"

__all__ = [
    "DeviceParams",
    "DerivedRates",
    "device",
    "dynamics",
    "estimation",
    "hilbert",
    "sequences",
    "__version__",
]
