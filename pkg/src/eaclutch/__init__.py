"""Electroadhesive clutch dynamics: simulation, calibration, and
measurement analysis."""

__version__ = "0.1.0"

from .contact import AirProperties, ContactModel
from .dynamics import ClutchConfig, LambdaLaw, LoadCellModel, SimResult
from .electrostatics import ClutchGeometry, FieldSolution, MaterialElectrical
from .polarization import DielectricModel, DriveSignal

__all__ = [
    "AirProperties",
    "ClutchConfig",
    "ClutchGeometry",
    "ContactModel",
    "DielectricModel",
    "DriveSignal",
    "FieldSolution",
    "LambdaLaw",
    "LoadCellModel",
    "MaterialElectrical",
    "SimResult",
    "__version__",
]
