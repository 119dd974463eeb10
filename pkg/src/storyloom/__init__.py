"""Pattern-guided story composition toolkit."""

__version__ = "0.1.0"
