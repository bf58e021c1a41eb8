"""
Configuration Module
====================

Exports configuration management for hyperwitness.
"""

from .config_manager import ConfigManager

__all__ = ["ConfigManager"]
