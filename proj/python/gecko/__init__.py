"""Post-hoc optimization of quantum control pulses along fidelity level sets.

The package re-exports the pybind11 extension; see the C++ headers under
include/gecko/ for the full reference documentation.
"""

from ._gecko import *  # noqa: F401,F403

__version__ = "0.1.0"
