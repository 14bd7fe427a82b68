"""Learn first-order symmetry-breaking constraints for the Partner Unit Problem."""

__version__ = "0.1.0"
