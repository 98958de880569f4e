"""Desk-scale bimanual magnetic micromanipulation pipeline.

Simulator, demonstration datasets, a phase-conditioned action-chunking
policy trained by imitation, and a receding-horizon executor with temporal
ensembling.
"""

__version__ = "0.1.0"
