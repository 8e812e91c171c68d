"""Robinson-tiling constructions for ground-state energy density questions."""

__version__ = "0.1.0"
