"""Multi-input RNS-CKKS ciphertext multiplication.

The package covers modular and NTT arithmetic, RNS contexts, basis
conversion, key generation and encryption, single and combined rescaling,
tuple products with relinearization, a partition planner for n-input
products, and an architectural cost model.
"""
from .context import Context, RnsBasis, build_context, load_context, save_context
from .cost import CostReport, mult3_cost, multi_rs_cost, plan_cost_report
from .counters import OpCounters
from .errors import CkksError
from .keys import (
    CiphertextTuple,
    EvalKeySet,
    PublicKey,
    SecretKey,
    decrypt_tuple,
    encrypt,
    keygen,
    keygen_eval,
)
from .multiply import mult3_improved, mult_binary_tree, mult_n, pm_tuple, relinearize, rescale
from .planner import PlanNode, baseline_binary_plan, cost_of, optimize_partition, plan_from_string, to_string
from .rescale import multi_rs, rs_coeff, rs_ntt, rs_star

__all__ = [
    "CiphertextTuple",
    "CkksError",
    "Context",
    "CostReport",
    "EvalKeySet",
    "OpCounters",
    "PlanNode",
    "PublicKey",
    "RnsBasis",
    "SecretKey",
    "baseline_binary_plan",
    "build_context",
    "cost_of",
    "decrypt_tuple",
    "encrypt",
    "keygen",
    "keygen_eval",
    "load_context",
    "mult3_cost",
    "mult3_improved",
    "mult_binary_tree",
    "mult_n",
    "multi_rs",
    "multi_rs_cost",
    "optimize_partition",
    "plan_cost_report",
    "plan_from_string",
    "pm_tuple",
    "relinearize",
    "rescale",
    "rs_coeff",
    "rs_ntt",
    "rs_star",
    "save_context",
    "to_string",
]
