"""Locally recoverable codes from Suzuki, Ree and Hermitian curves."""
from .gf import FieldCtx, FieldElement, field_new, gf
from .codes import LinearCode, evaluate_code, product_code
from .locality import RecoveryStructure, certify_recovery_set, repair
from .analysis import DistanceReport, ParamRecord, theorem_params

__version__ = "0.1.0"
