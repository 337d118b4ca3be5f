"""
Utility modules for DarkShield
"""

from darkshield.utils.logger import setup_logging

__all__ = ["setup_logging"]
