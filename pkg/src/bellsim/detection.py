"""Fourfold post-selection, polarizer settings and count statistics.

Detectors resolve spatial mode only: polarization is picked by the
polarizer in front of them and temporal slots are summed incoherently.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .elements import Basis, PbsSpec, pbs, pol_vector, polarizer
from .fock import FockState, QuantumState, apply_all, project_occupation
from .source import BELL_KINDS, BellKind

FOURFOLD = {"a": 1, "b": 1, "c": 1, "d": 1}

# column order of every count table: (pol_a, pol_b), with c and d fixed at +
SETTINGS = (("+", "+"), ("-", "+"), ("+", "-"), ("-", "-"))
SETTING_LABELS = tuple(a + b for a, b in SETTINGS)

# correct setting index for each input Bell state
TRUTH = {
    BellKind.PHI_PLUS: 0,
    BellKind.PHI_MINUS: 1,
    BellKind.PSI_PLUS: 2,
    BellKind.PSI_MINUS: 3,
}


@dataclass(frozen=True)
class SettingOutcome:
    pol_a: str
    pol_b: str
    pol_c: str = "+"
    pol_d: str = "+"
    probability: float | None = None
    counts: int | None = None

    @property
    def label(self) -> str:
        return self.pol_a + self.pol_b


def fourfold_probability(state: QuantumState) -> float:
    """P(one photon in each of a, b, c, d) within the four-photon sector."""
    sector = state.photon_sector(4)
    if sector.norm2() == 0.0:
        raise ValueError("state has no four-photon component")
    _, p = project_occupation(sector, FOURFOLD)
    return p


def setting_probability(state: QuantumState, setting: SettingOutcome | Sequence[str]) -> float:
    """Fourfold probability behind polarizers (pol_a, pol_b, pol_c, pol_d).

    Relative to the norm of ``state`` as given; temporal slots are traced.
    """
    if not isinstance(setting, SettingOutcome):
        setting = SettingOutcome(*setting)
    n2 = state.norm2()
    if n2 == 0.0:
        return 0.0
    pols = {"a": setting.pol_a, "b": setting.pol_b, "c": setting.pol_c, "d": setting.pol_d}
    filtered = apply_all(state, [polarizer(s, pol_vector(p)) for s, p in pols.items()])
    kept = filtered.filter(_matches_fourfold)
    return kept.norm2() / n2


def _matches_fourfold(fs: FockState) -> bool:
    counts = fs.spatial_counts()
    return all(counts.get(s, 0) == 1 for s in "abcd") and fs.total_photons == 4


def setting_row(state: QuantumState, pol_c: str = "+", pol_d: str = "+") -> np.ndarray:
    return np.array([setting_probability(state, (a, b, pol_c, pol_d)) for a, b in SETTINGS])


def outcome_distribution(state: QuantumState) -> dict[FockState, float]:
    """Slot-resolved detection probabilities ``|amplitude|^2``."""
    return {fs: abs(a) ** 2 for fs, a in state.amplitudes.items()}


def trace_temporal(probabilities: Mapping[FockState, float]) -> dict[tuple, float]:
    """Sum slot-resolved probabilities over temporal labels.

    Keys of the result are sorted ``(spatial, pol, count)`` tuples.
    """
    out: dict[tuple, float] = {}
    for fs, p in probabilities.items():
        merged: dict[tuple[str, str], int] = {}
        for m, n in fs.occupations:
            merged[(m.spatial, m.pol)] = merged.get((m.spatial, m.pol), 0) + n
        key = tuple(sorted((s, pol, n) for (s, pol), n in merged.items()))
        out[key] = out.get(key, 0.0) + p
    return out


def correlation_visibility(state: QuantumState, x: str, y: str, basis: Basis | str = Basis.DIAG) -> float:
    """Two-photon correlation visibility of modes ``x`` and ``y``.

    ``(P_same - P_diff) / (P_same + P_diff)`` with ideal polarizers in the
    given basis, conditioned on one photon in each mode.
    """
    labels = ("H", "V") if Basis(basis) is Basis.HV else ("+", "-")
    probs = {}
    n2 = state.norm2()
    for px in labels:
        for py in labels:
            f = apply_all(state, [polarizer(x, pol_vector(px)), polarizer(y, pol_vector(py))])
            kept = f.filter(lambda fs: fs.spatial_counts().get(x, 0) == 1 and fs.spatial_counts().get(y, 0) == 1)
            probs[(px, py)] = kept.norm2() / n2
    same = probs[(labels[0], labels[0])] + probs[(labels[1], labels[1])]
    diff = probs[(labels[0], labels[1])] + probs[(labels[1], labels[0])]
    return (same - diff) / (same + diff)


def pair_correlation_fidelity(
    pair_state: QuantumState, basis: Basis | str = Basis.HV, extinction: float = 0.0
) -> float:
    """Correlation fidelity of a bare (1, 2) pair measured with PBS analyzers.

    Photon 1 is analysed by a PBS into (a, c) and photon 2 into (b, d); the
    analyzers share the given extinction.  Returns ``P(same outcome)``.
    """
    basis = Basis(basis)
    up = pbs(PbsSpec("1", "3", "a", "c", basis, extinction, extinction))
    low = pbs(PbsSpec("2", "4", "b", "d", basis, extinction, extinction))
    out = apply_all(pair_state, [up, low])
    n2 = out.norm2()
    p = {}
    for x in "ac":
        for y in "bd":
            _, p[(x, y)] = project_occupation(out, {x: 1, y: 1})
    total = sum(p.values())
    return (p[("a", "b")] + p[("c", "d")]) / total if n2 else 0.0


@dataclass
class CountTable:
    """Fourfold counts per input (rows) and polarizer setting (columns)."""

    inputs: tuple[str, ...]
    counts: np.ndarray
    duration_s: float = 1800.0
    seed: int | None = None
    settings: tuple[str, ...] = SETTING_LABELS

    def __post_init__(self):
        self.inputs = tuple(str(i) for i in self.inputs)
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.inputs), len(self.settings))
        if (self.counts < 0).any():
            raise ValueError("counts must be non-negative")

    def row(self, inp: str) -> np.ndarray:
        return self.counts[self.inputs.index(str(inp))]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CountTable)
            and self.inputs == other.inputs
            and self.settings == other.settings
            and np.array_equal(self.counts, other.counts)
            and self.duration_s == other.duration_s
            and self.seed == other.seed
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input", "setting", "counts", "duration_s", "seed"])
        for i, inp in enumerate(self.inputs):
            for j, st in enumerate(self.settings):
                seed = "" if self.seed is None else self.seed
                w.writerow([inp, st, int(self.counts[i, j]), repr(float(self.duration_s)), seed])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> CountTable:
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty count table")
        inputs = list(dict.fromkeys(r["input"] for r in rows))
        settings = list(dict.fromkeys(r["setting"] for r in rows))
        counts = np.zeros((len(inputs), len(settings)), dtype=np.int64)
        for r in rows:
            counts[inputs.index(r["input"]), settings.index(r["setting"])] = int(r["counts"])
        seed = rows[0]["seed"]
        return cls(
            tuple(inputs),
            counts,
            float(rows[0]["duration_s"]),
            None if seed == "" else int(seed),
            tuple(settings),
        )

    def to_json(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "settings": list(self.settings),
            "counts": self.counts.tolist(),
            "duration_s": self.duration_s,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> CountTable:
        return cls(
            tuple(data["inputs"]),
            np.array(data["counts"], dtype=np.int64),
            float(data["duration_s"]),
            data["seed"],
            tuple(data["settings"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def sample_counts(
    probabilities,
    expected_total: float,
    seed: int,
    inputs: Sequence[str] | None = None,
    duration_s: float = 1800.0,
) -> CountTable:
    """Poisson counts per setting with mean ``expected_total * p / sum(p)`` per row.

    ``probabilities`` is one row or a (inputs x settings) array.
    """
    probs = np.atleast_2d(np.asarray(probabilities, dtype=float))
    if expected_total < 0:
        raise ValueError("expected_total must be non-negative")
    if inputs is None:
        inputs = [k.value for k in BELL_KINDS][: probs.shape[0]] if probs.shape[0] <= 4 else range(probs.shape[0])
    rng = np.random.default_rng(seed)
    sums = probs.sum(axis=1, keepdims=True)
    means = np.divide(probs, sums, out=np.zeros_like(probs), where=sums > 0) * expected_total
    counts = rng.poisson(means)
    return CountTable(tuple(inputs), counts, duration_s, seed)


def fidelity(counts: Sequence[int], correct: int) -> tuple[float, float]:
    """``F = N_correct / N_total`` with binomial standard error."""
    counts = np.asarray(counts)
    total = int(counts.sum())
    if total <= 0:
        raise ValueError("fidelity undefined for an empty row")
    f = float(counts[correct]) / total
    return f, math.sqrt(f * (1.0 - f) / total)


def table_fidelities(table: CountTable, truth: Mapping | None = None) -> dict[str, tuple[float, float]]:
    truth = truth or {k.value: v for k, v in TRUTH.items()}
    return {inp: fidelity(table.row(inp), truth[inp]) for inp in table.inputs}
