"""Optical elements as mode transforms.

All constructors act identically on every temporal slot.  Polarization
matrices follow the Jones convention: column 0 is the image of ``|H>``,
column 1 the image of ``|V>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fock import HADAMARD, Mode, ModeTransform, polarization_transform

PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)
MINUS = np.array([1.0, -1.0]) / math.sqrt(2.0)
H_VEC = np.array([1.0, 0.0])
V_VEC = np.array([0.0, 1.0])


class Basis(str, Enum):
    HV = "HV"
    DIAG = "DIAG"


class PlateKind(str, Enum):
    ROTATOR = "ROTATOR"
    HWP = "HWP"
    QWP = "QWP"


@dataclass(frozen=True)
class PbsSpec:
    in1: str
    in2: str
    out1: str
    out2: str
    basis: Basis = Basis.HV
    transmission_extinction: float = 0.0
    reflection_extinction: float = 0.0
    # 1 keeps every coefficient real; 1j gives the symmetric i-on-reflection convention.
    reflection_phase: complex = 1.0

    def __post_init__(self):
        ports = [str(p) for p in (self.in1, self.in2, self.out1, self.out2)]
        if len(set(ports)) != 4:
            raise ValueError(f"PBS ports must be distinct, got {ports}")
        for name in ("in1", "in2", "out1", "out2"):
            object.__setattr__(self, name, str(getattr(self, name)))
        object.__setattr__(self, "basis", Basis(self.basis))
        for eps in (self.transmission_extinction, self.reflection_extinction):
            if not 0.0 <= eps <= 1.0:
                raise ValueError(f"extinction {eps} outside [0, 1]")


@dataclass(frozen=True)
class WaveplateSpec:
    spatial: str
    kind: PlateKind = PlateKind.ROTATOR
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "spatial", str(self.spatial))
        object.__setattr__(self, "kind", PlateKind(self.kind))


def rotator_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def hwp_matrix(axis: float) -> np.ndarray:
    c, s = math.cos(2 * axis), math.sin(2 * axis)
    return np.array([[c, s], [s, -c]])


def qwp_matrix(axis: float) -> np.ndarray:
    """Quarter-wave retarder with fast axis at ``axis`` (global phase dropped)."""
    r = rotator_matrix(axis)
    return r @ np.diag([1.0, 1j]) @ r.T


def pbs(spec: PbsSpec) -> ModeTransform:
    """Polarizing beamsplitter: H transmitted (in1->out1), V reflected (in1->out2).

    Extinction ``eps`` sends amplitude ``sqrt(eps)`` of each polarization to
    the wrong output port, keeping the polarization.  The input-to-output
    block ``B`` is embedded as ``[[0, B^dag], [B, 0]]`` so the transform is
    unitary (and an involution) on the four ports.
    """
    et, er = spec.transmission_extinction, spec.reflection_extinction
    ph = complex(spec.reflection_phase)
    if abs(abs(ph) - 1.0) > 1e-12:
        raise ValueError("reflection phase must have unit modulus")
    # rows out1, out2; columns in1, in2
    t, r = math.sqrt(1 - et), math.sqrt(et)
    bh = np.array([[t, -r], [r, t]], dtype=complex)
    t, r = math.sqrt(1 - er), math.sqrt(er)
    bv = np.array([[r, ph * t], [ph * t, -r * ph * ph]], dtype=complex)
    ins = [spec.in1, spec.in2]
    outs = [spec.out1, spec.out2]
    modes = [Mode(p, pol) for p in ins for pol in "HV"] + [Mode(p, pol) for p in outs for pol in "HV"]
    b = np.zeros((4, 4), dtype=complex)
    for j in range(2):
        for i in range(2):
            b[2 * i, 2 * j] = bh[i, j]
            b[2 * i + 1, 2 * j + 1] = bv[i, j]
    if spec.basis is Basis.DIAG:
        w = np.kron(np.eye(2), HADAMARD)
        b = w @ b @ w
    full = np.zeros((8, 8), dtype=complex)
    full[4:, :4] = b
    full[:4, 4:] = b.conj().T
    return ModeTransform(modes, full, is_unitary=True, every_slot=True)


def waveplate(spec: WaveplateSpec) -> ModeTransform:
    if spec.kind is PlateKind.ROTATOR:
        m = rotator_matrix(spec.angle)
    elif spec.kind is PlateKind.HWP:
        m = hwp_matrix(spec.angle)
    else:
        m = qwp_matrix(spec.angle)
    return polarization_transform(spec.spatial, m)


def rotator(spatial, theta: float) -> ModeTransform:
    return waveplate(WaveplateSpec(spatial, PlateKind.ROTATOR, theta))


def polarizer(spatial, pass_state) -> ModeTransform:
    """Projector onto ``pass_state`` for every photon in ``spatial`` (non-unitary)."""
    p = np.asarray(pass_state, dtype=complex)
    if abs(np.vdot(p, p) - 1.0) > 1e-12:
        raise ValueError("polarizer pass state must be normalized")
    return polarization_transform(spatial, np.outer(p, p.conj()), is_unitary=False)


def pol_vector(label: str) -> np.ndarray:
    return {"H": H_VEC, "V": V_VEC, "+": PLUS, "-": MINUS}[label]
