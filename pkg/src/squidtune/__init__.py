"""Simulation and pulse planning for hysteretic rf-SQUID qubit flux bias.

Modules: ``core`` (parameters), ``statics`` (wells and hysteresis),
``dynamics`` (RCSJ integration), ``planner`` (pulse sequences),
``qubitmap`` (qubit flux and frequency), ``thermal`` (escape rates),
``stability`` (noise transduction), ``tdm`` (switch-tree fabric) and
``cli``.
"""

from .core import CONST, PHI0, SquidParams, classify_damping, derive_params, fig1e_params, fit_from_iv
from .errors import SquidError

__version__ = "0.1.0"

__all__ = ["CONST", "PHI0", "SquidParams", "SquidError", "classify_damping", "derive_params", "fig1e_params",
           "fit_from_iv", "__version__"]
