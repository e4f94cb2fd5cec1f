"""Offline figure rendering for evaluation CSV outputs.

Pure views: these scripts parse the documented CSV contracts and draw; they
never recompute any model quantity.
"""

__version__ = "0.1.0"

from .errors import FigureError
from .sparsity import plot_sparsity
from .traversal import plot_traversal

__all__ = ["plot_sparsity", "plot_traversal", "FigureError", "__version__"]
