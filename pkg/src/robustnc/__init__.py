"""Robust linear network function computation over finite fields."""

from .capacity import CapacityReport, robust_lower, robust_upper
from .decoder import DecodeResult, erasure_decode, md_decode, outage_decode
from .distance import min_distance
from .errors import RobustNCError
from .field import GF, Field, FieldMatrix, ones_column
from .gradient import DataAssignment, WorkerProfile, build_scheme, master_decode, worker_encode
from .identity_construction import construct_identity_code
from .linear_code import STAR, LinearNetworkCode, derive_matrices, transmit
from .network import Edge, Network, cut_quantities, min_cut, validate
from .sum_construction import construct_sum_code, three_layer_sum_code

__version__ = "0.1.0"

__all__ = [
    "CapacityReport", "DataAssignment", "DecodeResult", "Edge", "Field", "FieldMatrix", "GF",
    "LinearNetworkCode", "Network", "RobustNCError", "STAR", "WorkerProfile", "build_scheme",
    "construct_identity_code", "construct_sum_code", "cut_quantities", "derive_matrices",
    "erasure_decode", "master_decode", "md_decode", "min_cut", "min_distance", "ones_column",
    "outage_decode", "robust_lower", "robust_upper", "three_layer_sum_code", "transmit",
    "validate", "worker_encode",
]
