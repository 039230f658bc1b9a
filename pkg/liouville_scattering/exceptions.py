class LiouvilleError(Exception):
    """Base class for every error raised by the scattering engine."""
