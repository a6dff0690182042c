"""Shape containment on a simulated amoebot structure with reconfigurable circuits."""

__version__ = "0.1.0"
