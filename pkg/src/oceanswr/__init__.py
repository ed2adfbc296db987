"""Schwarz waveform relaxation for the linearized primitive equations."""

from .core import (ConfigurationError, DomainError, GridSpec, PhysicalParams, SolverError, State,
                   SurfaceField, VelocityField, mean_velocity, nondimensionalize)
from .transmission import TransmissionParams, TransmissionRecord

__all__ = [
    "ConfigurationError", "DomainError", "GridSpec", "PhysicalParams", "SolverError", "State",
    "SurfaceField", "VelocityField", "mean_velocity", "nondimensionalize", "TransmissionParams",
    "TransmissionRecord",
]
