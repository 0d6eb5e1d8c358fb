"""Multi-time measurement statistics and hidden quantum memory witnesses."""

from .circuits import hidden_memory_circuit, incompatible_circuit, oracle_tables
from .classical import ClassicalMemorylessModel, classical_family, classical_predict, fit_classical
from .quantum import DilatedProcess, KrausChannel, ProbeSchedule, all_pattern_statistics, run_schedule
from .qrf import FitConfig, MemorylessQuantumModel, certify, fit_memoryless, qrf_family
from .stats import (
    AnalysisReport,
    JointDistribution,
    StatisticsFamily,
    Verdict,
    conditional,
    is_compatible,
    is_markovian_full,
    is_markovian_sub,
    kolmogorov_consistent,
    witness_hidden_memory,
)

__all__ = [
    "AnalysisReport",
    "ClassicalMemorylessModel",
    "DilatedProcess",
    "FitConfig",
    "JointDistribution",
    "KrausChannel",
    "MemorylessQuantumModel",
    "ProbeSchedule",
    "StatisticsFamily",
    "Verdict",
    "all_pattern_statistics",
    "certify",
    "classical_family",
    "classical_predict",
    "conditional",
    "fit_classical",
    "fit_memoryless",
    "hidden_memory_circuit",
    "incompatible_circuit",
    "is_compatible",
    "is_markovian_full",
    "is_markovian_sub",
    "kolmogorov_consistent",
    "oracle_tables",
    "qrf_family",
    "run_schedule",
    "witness_hidden_memory",
]
