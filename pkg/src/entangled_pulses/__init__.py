"""Time-bin entangled light pulses from a trapped atom in a cavity."""

__version__ = "0.1.0"
