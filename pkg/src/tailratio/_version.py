"""Single source of the package version string."""
__version__ = "0.1.0"
