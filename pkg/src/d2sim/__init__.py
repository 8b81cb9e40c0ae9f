"""d2sim: deterministic round-based simulation of leader election and
broadcast-tree construction on diameter-two networks."""

__version__ = "0.1.0"
