"""Photon-pair sources and input-state preparation.

The double-pass source emits a ``phi+`` pair into the forward modes (3, 4)
and the backward modes (1, 2).  Backward photons can be delayed relative to
the forward ones: their wave packet is ``v |slot 0> + sqrt(1 - v^2) |slot 1>``
so ``v`` is the overlap with the forward photons.  Imperfect preparation
(dephasing) moves part of the ``V`` component of one photon into the spare
slots 2 and 3, which no detector can tell apart from slots 0 and 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .elements import rotator_matrix
from .fock import (
    DEFAULT_TRUNCATION,
    Mode,
    ModeTransform,
    QuantumState,
    apply_transform,
    create_photon,
    polarization_transform,
)

DEPHASING_SLOT_OFFSET = 2


class BellKind(str, Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


BELL_KINDS = (BellKind.PHI_PLUS, BellKind.PHI_MINUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS)

# (sign, flip): pair term |x>|x xor flip> with relative sign on |1>|.>
_BELL_TABLE = {
    BellKind.PHI_PLUS: (1, False),
    BellKind.PHI_MINUS: (-1, False),
    BellKind.PSI_PLUS: (1, True),
    BellKind.PSI_MINUS: (-1, True),
}


@dataclass(frozen=True)
class BellState:
    kind: BellKind
    pair: tuple[str, str] = ("1", "2")

    def __post_init__(self):
        object.__setattr__(self, "kind", BellKind(self.kind))
        object.__setattr__(self, "pair", tuple(str(p) for p in self.pair))


def _pair_terms(kind: BellKind):
    sign, flip = _BELL_TABLE[BellKind(kind)]
    other = {"H": "V", "V": "H"}
    first = ("H", other["H"] if flip else "H")
    second = ("V", other["V"] if flip else "V")
    return [(first, 1.0 / math.sqrt(2)), (second, sign / math.sqrt(2))]


def apply_pair_creation(
    state: QuantumState, kind: BellKind, pair: tuple[str, str], temporal: int = 0
) -> QuantumState:
    """Act with the Bell pair-creation operator on ``state`` (not renormalized)."""
    x, y = pair
    out = QuantumState.zero(state.truncation)
    for (p1, p2), c in _pair_terms(kind):
        term = create_photon(create_photon(state, Mode(x, p1, temporal)), Mode(y, p2, temporal))
        out = out + term * c
    return out


def bell_pair(b: BellState, temporal: int = 0, truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
    return apply_pair_creation(QuantumState.vacuum(truncation), b.kind, b.pair, temporal)


@dataclass(frozen=True)
class SpdcSpec:
    """Double-pass emission.

    ``order=1`` keeps vacuum, single pairs and the one-forward-one-backward
    four-photon term.  ``order=2`` uses the full second-order term
    ``chi^2/2 (P12 + P34)^2`` which adds same-pair double emission.
    """

    pair_amplitude: float = 0.1
    forward_pair: tuple[str, str] = ("3", "4")
    backward_pair: tuple[str, str] = ("1", "2")
    order: int = 1
    backward_overlap: float = 1.0

    def __post_init__(self):
        if self.pair_amplitude < 0:
            raise ValueError("pair amplitude must be non-negative")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if not 0.0 <= self.backward_overlap <= 1.0:
            raise ValueError("backward_overlap must lie in [0, 1]")


def delay_transform(spatial_modes, overlap: float) -> ModeTransform:
    """Rotate slot 0 into ``overlap |0> + sqrt(1 - overlap^2) |1>`` on the given modes."""
    w = math.sqrt(max(0.0, 1.0 - overlap * overlap))
    rot = np.array([[overlap, -w], [w, overlap]])
    modes, blocks = [], []
    for s in spatial_modes:
        for pol in "HV":
            modes += [Mode(s, pol, 0), Mode(s, pol, 1)]
            blocks.append(rot)
    return ModeTransform(modes, _block_diag(blocks))


def _block_diag(blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def spdc_state(s: SpdcSpec, truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
    if truncation < 4:
        raise ValueError("the four-photon sector needs truncation >= 4")
    chi = s.pair_amplitude
    vac = QuantumState.vacuum(truncation)

    def pairs(state):
        return apply_pair_creation(state, BellKind.PHI_PLUS, s.backward_pair) + apply_pair_creation(
            state, BellKind.PHI_PLUS, s.forward_pair
        )

    one = pairs(vac)
    if s.order == 1:
        four = apply_pair_creation(
            apply_pair_creation(vac, BellKind.PHI_PLUS, s.forward_pair),
            BellKind.PHI_PLUS,
            s.backward_pair,
        )
        state = vac + one * chi + four * chi**2
    else:
        state = vac + one * chi + pairs(one) * (chi**2 / 2)
    state = state.normalized()
    if s.backward_overlap < 1.0:
        state = apply_transform(state, delay_transform(s.backward_pair, s.backward_overlap))
    return state


def same_pair_double_emission(pair: tuple[str, str] = ("1", "2"), truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
    """Normalized ``(P_ij^dag)^2 |0>`` for the phi+ pair operator."""
    vac = QuantumState.vacuum(truncation)
    once = apply_pair_creation(vac, BellKind.PHI_PLUS, pair)
    return apply_pair_creation(once, BellKind.PHI_PLUS, pair).normalized()


@dataclass(frozen=True)
class PreparationSpec:
    """Requested input on modes (1, 2).

    ``input_kind`` is a Bell kind or ``"superposition"``, in which case
    ``coefficients`` weights ``(phi+, phi-)``.  ``hwp_angle`` adds a rotation
    of the mode-1 polarization (zero for the nominal state).
    """

    input_kind: BellKind | str = BellKind.PHI_PLUS
    coefficients: tuple[complex, complex] = (1.0, 0.0)
    hwp_angle: float = 0.0
    dephasing: float = 0.0

    def __post_init__(self):
        if self.input_kind != "superposition":
            object.__setattr__(self, "input_kind", BellKind(self.input_kind))
        else:
            a, b = (complex(c) for c in self.coefficients)
            if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-9:
                raise ValueError("superposition coefficients must be normalized")
            object.__setattr__(self, "coefficients", (a, b))
        if not 0.0 <= self.dephasing <= 1.0:
            raise ValueError("dephasing must lie in [0, 1]")


def superposition_spec(alpha: complex, beta: complex, dephasing: float = 0.0) -> PreparationSpec:
    return PreparationSpec("superposition", (alpha, beta), dephasing=dephasing)


_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.diag([1.0, -1.0])
_I = np.eye(2)


def _local_ops(p: PreparationSpec) -> tuple[np.ndarray, np.ndarray]:
    if p.input_kind == "superposition":
        a, b = p.coefficients
        # a phi+ + b phi- = ((a+b) HH + (a-b) VV)/sqrt2: diagonal on photon 1
        return np.diag([a + b, a - b]), _I
    return {
        BellKind.PHI_PLUS: (_I, _I),
        BellKind.PHI_MINUS: (_Z, _I),
        BellKind.PSI_PLUS: (_I, _X),
        BellKind.PSI_MINUS: (_Z, _X),
    }[p.input_kind]


def dephasing_transform(spatial, dephasing: float) -> ModeTransform:
    """Partially move the V component of ``spatial`` to hidden slots.

    The coherence between the ``H`` and ``V`` branches drops by a factor
    ``1 - dephasing``.
    """
    c = 1.0 - dephasing
    s = math.sqrt(max(0.0, 1.0 - c * c))
    rot = np.array([[c, -s], [s, c]])
    modes, blocks = [], []
    for t in range(DEPHASING_SLOT_OFFSET):
        modes += [Mode(spatial, "V", t), Mode(spatial, "V", t + DEPHASING_SLOT_OFFSET)]
        blocks.append(rot)
    return ModeTransform(modes, _block_diag(blocks))


def prepare_input(base: QuantumState, p: PreparationSpec) -> QuantumState:
    """Map the phi+ pair on (1, 2) to the requested input state."""
    m1, m2 = _local_ops(p)
    if p.hwp_angle:
        m1 = rotator_matrix(p.hwp_angle) @ m1
    unitary = np.allclose(m1.conj().T @ m1, _I, atol=1e-12)
    state = apply_transform(base, polarization_transform("1", m1, is_unitary=unitary))
    if not np.array_equal(m2, _I):
        state = apply_transform(state, polarization_transform("2", m2))
    if p.dephasing > 0.0:
        state = apply_transform(state, dephasing_transform("1", p.dephasing))
    return state


def prepared_pair(p: PreparationSpec, truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
    """The bare two-photon input on (1, 2) after preparation."""
    return prepare_input(bell_pair(BellState(BellKind.PHI_PLUS), truncation=truncation), p)
