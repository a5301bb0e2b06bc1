# MPRK Analytics Module
# Conservation diagnostics, speedup model, studies and output writers

from .metrics import (
    ConservationHistory,
    courant_number,
    l2_error,
    l2_error_coupled,
    total_energy,
    total_mass,
)
from .speedup import SpeedupInputs, measured_speedup, parallel_speedup, serial_speedup
