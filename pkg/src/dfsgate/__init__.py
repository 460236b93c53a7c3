"""Simulation and calibration of adiabatic two-qubit exchange gates on
three-spin decoherence-free-subsystem qubits."""

__version__ = "0.1.0"
