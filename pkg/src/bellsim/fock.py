"""Sparse bosonic Fock-space states and linear-optical mode transforms.

A photon lives in a :class:`Mode` (spatial port x polarization x temporal
slot).  A :class:`QuantumState` is a sparse map from canonical
:class:`FockState` keys to complex amplitudes.  Linear optics act on the
creation operators, so a :class:`ModeTransform` is a matrix whose column
``j`` is the image of ``a_j^dagger``; :func:`apply_transform` lifts it to the
multi-photon space by expanding each creation-operator monomial.
"""

from __future__ import annotations

import json
import math
from collections import namedtuple
from collections.abc import Iterable, Mapping
from types import MappingProxyType

import numpy as np

SPATIAL_LABELS = ("1", "2", "3", "4", "a", "b", "c", "d")
POLARIZATIONS = ("H", "V")
MAX_TEMPORAL = 3
DEFAULT_TRUNCATION = 4
PRUNE_EPS = 1e-14

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


class TruncationError(ValueError):
    """Raised when an operation would exceed the photon-number truncation."""


_ModeBase = namedtuple("_ModeBase", "spatial pol temporal")


class Mode(_ModeBase):
    """One bosonic mode.  Tuple ordering is the canonical mode order."""

    __slots__ = ()

    def __new__(cls, spatial, pol: str, temporal: int = 0):
        spatial = str(spatial)
        if spatial not in SPATIAL_LABELS:
            raise ValueError(f"unknown spatial label {spatial!r}")
        if pol not in POLARIZATIONS:
            raise ValueError(f"polarization must be H or V, got {pol!r}")
        temporal = int(temporal)
        if not 0 <= temporal <= MAX_TEMPORAL:
            raise ValueError(f"temporal slot {temporal} outside [0, {MAX_TEMPORAL}]")
        return super().__new__(cls, spatial, pol, temporal)

    def __repr__(self) -> str:
        return f"Mode({self.spatial}{self.pol}{self.temporal})"

    def in_slot(self, temporal: int) -> Mode:
        return Mode(self.spatial, self.pol, temporal)


class FockState:
    """Occupation numbers over modes, stored sorted with no zero entries."""

    __slots__ = ("_occ", "_hash")

    def __init__(self, occupations: Mapping[Mode, int] | Iterable[tuple[Mode, int]] = ()):
        items = occupations.items() if isinstance(occupations, Mapping) else occupations
        merged: dict[Mode, int] = {}
        for mode, n in items:
            n = int(n)
            if n < 0:
                raise ValueError("occupation numbers must be non-negative")
            if n:
                merged[mode] = merged.get(mode, 0) + n
        self._occ = tuple(sorted(merged.items()))
        self._hash = hash(self._occ)

    @classmethod
    def from_modes(cls, modes: Iterable[Mode]) -> FockState:
        """Build from a multiset of modes (one entry per photon)."""
        counts: dict[Mode, int] = {}
        for m in modes:
            counts[m] = counts.get(m, 0) + 1
        return cls(counts)

    @property
    def occupations(self) -> tuple[tuple[Mode, int], ...]:
        return self._occ

    @property
    def total_photons(self) -> int:
        return sum(n for _, n in self._occ)

    def count(self, mode: Mode) -> int:
        for m, n in self._occ:
            if m == mode:
                return n
        return 0

    def photons(self) -> list[Mode]:
        return [m for m, n in self._occ for _ in range(n)]

    def spatial_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m, n in self._occ:
            out[m.spatial] = out.get(m.spatial, 0) + n
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, FockState) and self._occ == other._occ

    def __lt__(self, other: FockState) -> bool:
        return self._occ < other._occ

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self._occ:
            return "|vac>"
        body = ",".join(f"{n}{m.spatial}{m.pol}{m.temporal}" for m, n in self._occ)
        return f"|{body}>"


VACUUM = FockState()


class QuantumState:
    """Sparse superposition of Fock states.  Treated as an immutable value."""

    __slots__ = ("_amps", "truncation")

    def __init__(
        self,
        amplitudes: Mapping[FockState, complex] | None = None,
        truncation: int = DEFAULT_TRUNCATION,
    ):
        self.truncation = int(truncation)
        amps = {}
        for fs, a in (amplitudes or {}).items():
            a = complex(a)
            if abs(a) < PRUNE_EPS:
                continue
            if fs.total_photons > self.truncation:
                raise TruncationError(
                    f"{fs} has {fs.total_photons} photons, truncation is {self.truncation}"
                )
            amps[fs] = a
        self._amps = MappingProxyType(amps)

    @classmethod
    def vacuum(cls, truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
        return cls({VACUUM: 1.0}, truncation)

    @classmethod
    def zero(cls, truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
        return cls({}, truncation)

    @property
    def amplitudes(self) -> Mapping[FockState, complex]:
        return self._amps

    def items(self):
        return sorted(self._amps.items())

    def amplitude(self, fs: FockState) -> complex:
        return self._amps.get(fs, 0j)

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(sorted(self._amps))

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def normalized(self) -> QuantumState:
        n2 = self.norm2()
        if n2 == 0.0:
            raise ValueError("cannot normalize the zero state")
        return self * (1.0 / math.sqrt(n2))

    def with_truncation(self, truncation: int) -> QuantumState:
        return QuantumState(self._amps, truncation)

    def photon_sector(self, n: int) -> QuantumState:
        """Terms with exactly ``n`` photons (not renormalized)."""
        return QuantumState(
            {fs: a for fs, a in self._amps.items() if fs.total_photons == n},
            self.truncation,
        )

    def filter(self, keep) -> QuantumState:
        return QuantumState({fs: a for fs, a in self._amps.items() if keep(fs)}, self.truncation)

    def __add__(self, other: QuantumState) -> QuantumState:
        out = dict(self._amps)
        for fs, a in other._amps.items():
            out[fs] = out.get(fs, 0j) + a
        return QuantumState(out, max(self.truncation, other.truncation))

    def __sub__(self, other: QuantumState) -> QuantumState:
        return self + other * -1.0

    def __mul__(self, scalar: complex) -> QuantumState:
        return QuantumState({fs: scalar * a for fs, a in self._amps.items()}, self.truncation)

    __rmul__ = __mul__

    def __neg__(self) -> QuantumState:
        return self * -1.0

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.4g}){fs}" for fs, a in self.items())
        return f"QuantumState({terms or '0'})"

    def modes(self) -> set[Mode]:
        return {m for fs in self._amps for m, _ in fs.occupations}

    def canonical_phase(self) -> QuantumState:
        """Global phase fixed so the first nonzero amplitude (canonical order) is real positive."""
        if not self._amps:
            return self
        first = self._amps[min(self._amps)]
        return self * (abs(first) / first)

    def allclose(self, other: QuantumState, atol: float = 1e-12, up_to_phase: bool = False) -> bool:
        a, b = (self.canonical_phase(), other.canonical_phase()) if up_to_phase else (self, other)
        return max_abs_diff(a, b) <= atol

    def to_json(self) -> dict:
        terms = []
        for fs, a in self.items():
            occ = [[m.spatial, m.pol, m.temporal, n] for m, n in fs.occupations]
            terms.append({"occ": occ, "re": a.real, "im": a.imag})
        return {"truncation": self.truncation, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> QuantumState:
        amps = {}
        for term in data["terms"]:
            fs = FockState((Mode(s, p, t), n) for s, p, t, n in term["occ"])
            amps[fs] = complex(term["re"], term["im"])
        return cls(amps, data["truncation"])

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> QuantumState:
        return cls.from_json(json.loads(text))


def max_abs_diff(s1: QuantumState, s2: QuantumState) -> float:
    keys = set(s1.amplitudes) | set(s2.amplitudes)
    if not keys:
        return 0.0
    return max(abs(s1.amplitude(k) - s2.amplitude(k)) for k in keys)


def ket(*modes: Mode, truncation: int = DEFAULT_TRUNCATION) -> QuantumState:
    """Normalized Fock state with one photon per listed mode (repeats allowed)."""
    fs = FockState.from_modes(modes)
    return QuantumState({fs: 1.0}, truncation)


def create_photon(state: QuantumState, mode: Mode) -> QuantumState:
    """Apply ``a^dagger(mode)``; amplitudes pick up ``sqrt(n + 1)``, no renormalization."""
    out: dict[FockState, complex] = {}
    for fs, a in state.amplitudes.items():
        if fs.total_photons + 1 > state.truncation:
            raise TruncationError(
                f"creating a photon in {mode} exceeds truncation {state.truncation}"
            )
        n = fs.count(mode)
        occ = dict(fs.occupations)
        occ[mode] = n + 1
        new = FockState(occ)
        out[new] = out.get(new, 0j) + a * math.sqrt(n + 1)
    return QuantumState(out, state.truncation)


def inner_product(s1: QuantumState, s2: QuantumState) -> complex:
    """<s1|s2>, conjugate-linear in ``s1``."""
    if s1.truncation != s2.truncation:
        raise ValueError("states have different truncation")
    small, large = (s1, s2) if len(s1) <= len(s2) else (s2, s1)
    total = 0j
    for fs in small.amplitudes:
        total += s1.amplitude(fs).conjugate() * s2.amplitude(fs)
    return total


class ModeTransform:
    """Linear map on creation operators over ``domain_modes``.

    ``matrix[i, j]`` is the coefficient of ``a_i^dagger`` in the image of
    ``a_j^dagger``.  Modes outside the domain are left alone.  With
    ``every_slot`` set, the domain modes must sit in slot 0 and the same
    action is repeated on every temporal slot.
    """

    __slots__ = ("domain_modes", "matrix", "is_unitary", "every_slot", "_columns", "_index")

    def __init__(
        self,
        domain_modes: Iterable[Mode],
        matrix,
        is_unitary: bool = True,
        every_slot: bool = False,
    ):
        self.domain_modes = tuple(domain_modes)
        if len(set(self.domain_modes)) != len(self.domain_modes):
            raise ValueError("duplicate modes in transform domain")
        m = np.array(matrix, dtype=complex)
        n = len(self.domain_modes)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match {n} domain modes")
        if every_slot and any(md.temporal != 0 for md in self.domain_modes):
            raise ValueError("every_slot transforms take slot-0 domain modes")
        if is_unitary and not np.allclose(m.conj().T @ m, np.eye(n), rtol=0, atol=1e-12):
            raise ValueError("matrix flagged unitary but is not (tol 1e-12)")
        m.setflags(write=False)
        self.matrix = m
        self.is_unitary = bool(is_unitary)
        self.every_slot = bool(every_slot)
        self._index = {md: i for i, md in enumerate(self.domain_modes)}
        self._columns = {}
        for j, src in enumerate(self.domain_modes):
            col = [(self.domain_modes[i], m[i, j]) for i in range(n) if abs(m[i, j]) > PRUNE_EPS]
            key = (src.spatial, src.pol) if every_slot else src
            self._columns[key] = col

    def image(self, mode: Mode) -> list[tuple[Mode, complex]] | None:
        """Output modes and coefficients for ``a^dagger(mode)``; ``None`` if untouched."""
        if self.every_slot:
            col = self._columns.get((mode.spatial, mode.pol))
            if col is None:
                return None
            return [(Mode(o.spatial, o.pol, mode.temporal), c) for o, c in col]
        return self._columns.get(mode)

    def dense(self, modes: list[Mode]) -> np.ndarray:
        """Full matrix on an explicit mode list (identity off-domain)."""
        idx = {m: i for i, m in enumerate(modes)}
        out = np.eye(len(modes), dtype=complex)
        for j, src in enumerate(modes):
            img = self.image(src)
            if img is None:
                continue
            out[:, j] = 0
            for dst, c in img:
                if dst not in idx:
                    raise ValueError(f"{dst} missing from mode list")
                out[idx[dst], j] += c
        return out

    def __repr__(self) -> str:
        return f"ModeTransform({len(self.domain_modes)} modes, unitary={self.is_unitary})"


def compose(*transforms: ModeTransform) -> ModeTransform:
    """``compose(t2, t1)`` acts as ``t1`` first, then ``t2``."""
    slot_flags = {t.every_slot for t in transforms}
    if len(slot_flags) != 1:
        raise ValueError("cannot compose slot-specific with every-slot transforms")
    modes = sorted({m for t in transforms for m in t.domain_modes})
    total = np.eye(len(modes), dtype=complex)
    for t in reversed(transforms):
        total = t.dense(modes) @ total
    unitary = all(t.is_unitary for t in transforms)
    return ModeTransform(modes, total, is_unitary=unitary, every_slot=slot_flags.pop())


def apply_transform(state: QuantumState, t: ModeTransform) -> QuantumState:
    """Lift a mode transform to the Fock space by monomial expansion."""
    out: dict[FockState, complex] = {}
    for fs, amp in state.amplitudes.items():
        if fs.total_photons > state.truncation:
            raise TruncationError("state exceeds its truncation")
        # |n> = prod (a_m^dag)^n_m / sqrt(n_m!) |0>
        coef = amp
        fixed: list[Mode] = []
        moving: list[list[tuple[Mode, complex]]] = []
        for m, n in fs.occupations:
            coef /= math.sqrt(math.factorial(n))
            img = t.image(m)
            if img is None:
                fixed.extend([m] * n)
            else:
                moving.extend([img] * n)
        partial: dict[tuple[Mode, ...], complex] = {(): coef}
        for img in moving:
            nxt: dict[tuple[Mode, ...], complex] = {}
            for key, c in partial.items():
                for dst, w in img:
                    k2 = tuple(sorted(key + (dst,)))
                    nxt[k2] = nxt.get(k2, 0j) + c * w
            partial = nxt
        for key, c in partial.items():
            if abs(c) < PRUNE_EPS:
                continue
            new = FockState.from_modes(key + tuple(fixed))
            norm = math.prod(math.sqrt(math.factorial(n)) for _, n in new.occupations)
            out[new] = out.get(new, 0j) + c * norm
    return QuantumState(out, state.truncation)


def apply_all(state: QuantumState, transforms: Iterable[ModeTransform]) -> QuantumState:
    for t in transforms:
        state = apply_transform(state, t)
    return state


def _aggregate_key(mode: Mode, keys: Mapping) -> object | None:
    for key in keys:
        if isinstance(key, str):
            if mode.spatial == key:
                return key
        elif mode in key:
            return key
    return None


def project_occupation(state: QuantumState, pattern: Mapping) -> tuple[QuantumState, float]:
    """Keep the terms whose photon counts match ``pattern``.

    Pattern keys are spatial labels (aggregating polarization and temporal
    slots) or collections of modes; values are the required photon counts.
    The returned state is rescaled to the input norm and the probability is
    the kept fraction of the input norm squared.
    """
    keys = list(pattern)
    for i, k1 in enumerate(keys):
        for k2 in keys[i + 1 :]:
            if isinstance(k1, str) or isinstance(k2, str):
                if isinstance(k1, str) and isinstance(k2, str):
                    if k1 == k2:
                        raise ValueError("pattern keys overlap")
                    continue
                label, group = (k1, k2) if isinstance(k1, str) else (k2, k1)
                if any(m.spatial == label for m in group):
                    raise ValueError("pattern keys overlap")
            elif set(k1) & set(k2):
                raise ValueError("pattern keys overlap")

    def matches(fs: FockState) -> bool:
        counts = {k: 0 for k in keys}
        for m, n in fs.occupations:
            k = _aggregate_key(m, keys)
            if k is not None:
                counts[k] += n
        return all(counts[k] == pattern[k] for k in keys)

    in_norm2 = state.norm2()
    kept = state.filter(matches)
    kept_norm2 = kept.norm2()
    if in_norm2 == 0.0 or kept_norm2 == 0.0:
        return QuantumState.zero(state.truncation), 0.0
    return kept * math.sqrt(in_norm2 / kept_norm2), kept_norm2 / in_norm2


def polarization_transform(spatial, matrix2, every_slot: bool = True, is_unitary: bool = True) -> ModeTransform:
    """2x2 polarization matrix (columns: images of H and V) on one spatial mode."""
    return ModeTransform(
        [Mode(spatial, "H"), Mode(spatial, "V")], matrix2, is_unitary=is_unitary, every_slot=every_slot
    )


def change_pol_basis(state: QuantumState, spatial, to: str = "DIAG") -> QuantumState:
    """Re-express one spatial mode's polarization in the H/V or +/- basis.

    In the DIAG representation the ``H`` label carries the ``|+>``
    amplitude and ``V`` carries ``|->``.  The map is its own inverse.
    """
    if to not in ("HV", "DIAG"):
        raise ValueError("basis must be 'HV' or 'DIAG'")
    return apply_transform(state, polarization_transform(spatial, HADAMARD))
