"""Border rank lower bounds via Borel-fixed border apolarity."""

__version__ = "0.1.0"
