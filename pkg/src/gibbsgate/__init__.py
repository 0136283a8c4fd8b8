"""Gibbs-sampler admissibility, convergence and simulation on finite joints."""
from .errors import BudgetExceeded, GibbsgateError, InvariantViolation, JointError
from .space import FiniteJoint, Rectangle, build_joint, product_joint
from .sigma import check_gibbs_admissible, d_atoms, oracle_condition_6
from .kernel import bc_iterates, build_kernel, verify_theorem_41
from .ergodic import analyze, doeblin_certificate, tv_curve
from .chain import ChainConfig, simulate, slln_estimate
from .kgibbs import KJoint, build_kjoint, check_k_admissible

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "ChainConfig",
    "FiniteJoint",
    "GibbsgateError",
    "InvariantViolation",
    "JointError",
    "KJoint",
    "Rectangle",
    "analyze",
    "bc_iterates",
    "build_joint",
    "build_kernel",
    "build_kjoint",
    "check_gibbs_admissible",
    "check_k_admissible",
    "d_atoms",
    "doeblin_certificate",
    "oracle_condition_6",
    "product_joint",
    "simulate",
    "slln_estimate",
    "tv_curve",
    "verify_theorem_41",
]
