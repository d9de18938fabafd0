"""Nuclear spin dephasing and relaxation near an optically pumped NV center.

Three independent engines compute the same nuclear dissipation rates:
closed-form analytics (:mod:`nvspin.rates`), exact Lindblad numerics
(:mod:`nvspin.liouville`, :mod:`nvspin.dynamics`), and Monte Carlo telegraph
sampling (:mod:`nvspin.telegraph`).
"""

from . import errors, model, numerics, rates  # noqa: F401
from . import dynamics, liouville, telegraph  # noqa: F401

__version__ = "0.1.0"
