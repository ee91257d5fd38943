"""Matrix-product-state engine: DMRG ground states, TDVP evolution, state algebra."""
from .checkpoint import load_mps, save_mps
from .dmrg import DmrgConvergenceWarning, DmrgInfo, dmrg_ground_state
from .mps import MpoOperator, MpsState, expect_local, expect_mpo, overlap, truncated_svd
from .tdvp import TdvpEngine, TdvpStats, tdvp_step

__all__ = [
    "MpoOperator", "MpsState", "overlap", "expect_local", "expect_mpo", "truncated_svd",
    "dmrg_ground_state", "DmrgInfo", "DmrgConvergenceWarning",
    "TdvpEngine", "TdvpStats", "tdvp_step", "save_mps", "load_mps",
]
