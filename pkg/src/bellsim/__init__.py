"""Simulator for a linear-optical Bell-state analyzer built from a
non-destructive CNOT (two PBS parity checks and an entangled ancilla pair)."""

from .detection import (
    SETTING_LABELS,
    SETTINGS,
    TRUTH,
    CountTable,
    fidelity,
    fourfold_probability,
    sample_counts,
    setting_probability,
    trace_temporal,
)
from .elements import Basis, PbsSpec, PlateKind, WaveplateSpec, pbs, polarizer, waveplate
from .experiments import (
    BsaResult,
    CircuitConfig,
    calibrate_imperfections,
    overlap_scan,
    run_bsa,
    run_encoding,
    superposition_test,
    theta_scan,
)
from .fock import (
    FockState,
    Mode,
    ModeTransform,
    QuantumState,
    TruncationError,
    apply_transform,
    change_pol_basis,
    create_photon,
    inner_product,
    project_occupation,
)
from .source import BellKind, BellState, PreparationSpec, SpdcSpec, bell_pair, prepare_input, spdc_state

__all__ = [
    "Basis",
    "BellKind",
    "BellState",
    "BsaResult",
    "CircuitConfig",
    "CountTable",
    "FockState",
    "Mode",
    "ModeTransform",
    "PbsSpec",
    "PlateKind",
    "PreparationSpec",
    "QuantumState",
    "SETTINGS",
    "SETTING_LABELS",
    "SpdcSpec",
    "TRUTH",
    "TruncationError",
    "WaveplateSpec",
    "apply_transform",
    "bell_pair",
    "calibrate_imperfections",
    "change_pol_basis",
    "create_photon",
    "fidelity",
    "fourfold_probability",
    "inner_product",
    "overlap_scan",
    "pbs",
    "polarizer",
    "prepare_input",
    "project_occupation",
    "run_bsa",
    "run_encoding",
    "sample_counts",
    "setting_probability",
    "spdc_state",
    "superposition_test",
    "theta_scan",
    "trace_temporal",
    "waveplate",
]

__version__ = "0.1.0"
