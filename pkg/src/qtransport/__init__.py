"""Non-adiabatic transport of a quantum state in a moving harmonic well with distorted controls."""

__version__ = "0.1.0"
