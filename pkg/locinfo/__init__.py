"""
locinfo - bounds on localisable information and information deficit
of bipartite quantum states
"""

__version__ = "0.1.0"
