"""Activation-sharing multi-resolution coordinate networks."""

from .coords import PartitionScheme, decompose, make_scheme, parse_scheme, recompose
from .model import AsmrModel, SirenModel, forward_naive, forward_shared, init_asmr, init_siren
from .profiler import mac_asmr, mac_siren
from .train import TrainConfig, fit

__all__ = [
    "PartitionScheme", "decompose", "make_scheme", "parse_scheme", "recompose",
    "AsmrModel", "SirenModel", "forward_naive", "forward_shared", "init_asmr", "init_siren",
    "mac_asmr", "mac_siren", "TrainConfig", "fit",
]
