"""
hyperwitness
============

Simulation of two photons hyperentangled in polarization, momentum and
emission cone, stabilizer-based entanglement witnesses, their robustness to
noise, and the analysis of measured stabilizer tables and interference
patterns.
"""

__version__ = "0.1.0"

from .utils.logger import configure_package_logging

__all__ = ["__version__", "configure_package_logging"]
