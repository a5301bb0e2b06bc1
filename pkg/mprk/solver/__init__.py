# MPRK Solver
# Tableaus, coupled finite-volume discretization and multirate time stepping

from .butcher import ButcherTableau, MprkTableauSet, base_rk2, generate_mprk, rk4_classic
from .config import ConfigError, resolve_config
from .integrator import RhsEvalLedger, Scheme, integrate, mprk_step, single_rate_step
from .physics import FluidParams, NonPhysicalState
from .scenarios import build_scenario
