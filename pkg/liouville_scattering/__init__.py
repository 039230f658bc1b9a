"""Forward scattering for Liouville surfaces with two asymptotically hyperbolic ends."""

import logging

from .const import DOMAIN

__version__ = "0.2.0"

LOGGER = logging.getLogger(__name__)

__all__ = ["DOMAIN", "LOGGER", "__version__"]
