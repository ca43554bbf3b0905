"""RadChar: synthetic pulsed-radar dataset generation and multi-task signal characterisation."""

__version__ = "1.0.0"
