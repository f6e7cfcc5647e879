"""End-to-end pipelines for the linear-optical Bell-state analyzer.

Topology (defaults): the input pair sits on modes (1, 2) and the ancilla
``phi+`` pair on (3, 4).  Modes 2 and 4 pass 45 degree rotators, then the
upper PBS combines 1 and 3 into outputs (a, c) and the lower PBS combines 2
and 4 into (b, d).  Outputs c and d are projected onto ``|+>`` while a and b
carry the analysed result.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .detection import (
    FOURFOLD,
    SETTING_LABELS,
    SETTINGS,
    TRUTH,
    CountTable,
    fidelity,
    pair_correlation_fidelity,
    sample_counts,
    setting_probability,
    setting_row,
)
from .elements import (
    PLUS,
    Basis,
    PbsSpec,
    PlateKind,
    WaveplateSpec,
    pbs,
    polarizer,
    waveplate,
)
from .fock import (
    FockState,
    Mode,
    QuantumState,
    apply_all,
    apply_transform,
    create_photon,
    inner_product,
    project_occupation,
)
from .source import (
    BELL_KINDS,
    BellKind,
    BellState,
    PreparationSpec,
    SpdcSpec,
    apply_pair_creation,
    bell_pair,
    dephasing_transform,
    prepare_input,
    same_pair_double_emission,
    spdc_state,
    superposition_spec,
)

QUARTER_TURN = math.pi / 4
OVERLAP_PAIRS = (("a", "b"), ("c", "d"), ("a", "d"), ("c", "b"))


class CalibrationError(ValueError):
    """Raised for targets the imperfection model cannot reach."""


@dataclass(frozen=True)
class CircuitConfig:
    upper: PbsSpec = PbsSpec("1", "3", "a", "c", Basis.HV)
    # the +/- parity check comes from the 45 degree rotators in front of an H/V PBS
    lower: PbsSpec = PbsSpec("2", "4", "b", "d", Basis.HV)
    rotator_angles: tuple[tuple[str, float], ...] = (("2", QUARTER_TURN), ("4", QUARTER_TURN))
    qwps: tuple[tuple[str, float], ...] = ()
    pol_c: str = "+"
    pol_d: str = "+"
    spdc: SpdcSpec = SpdcSpec()
    preparation: PreparationSpec = PreparationSpec()
    ancilla_dephasing: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.ancilla_dephasing <= 1.0:
            raise ValueError("ancilla dephasing must lie in [0, 1]")
        if self.pol_c not in "+-" or self.pol_d not in "+-" or len(self.pol_c + self.pol_d) != 2:
            raise ValueError("c and d polarizers must be '+' or '-'")

    def with_input(self, kind) -> CircuitConfig:
        prep = dataclasses.replace(self.preparation, input_kind=kind, coefficients=(1.0, 0.0))
        return dataclasses.replace(self, preparation=prep)

    def with_imperfections(
        self,
        v: float | None = None,
        epsilon: float | None = None,
        dephasing: float | None = None,
        ancilla_dephasing: float | None = None,
    ) -> CircuitConfig:
        cfg = self
        if v is not None:
            cfg = dataclasses.replace(cfg, spdc=dataclasses.replace(cfg.spdc, backward_overlap=v))
        if epsilon is not None:
            cfg = dataclasses.replace(
                cfg,
                upper=dataclasses.replace(cfg.upper, transmission_extinction=epsilon, reflection_extinction=epsilon),
                lower=dataclasses.replace(cfg.lower, transmission_extinction=epsilon, reflection_extinction=epsilon),
            )
        if dephasing is not None:
            cfg = dataclasses.replace(cfg, preparation=dataclasses.replace(cfg.preparation, dephasing=dephasing))
        if ancilla_dephasing is not None:
            cfg = dataclasses.replace(cfg, ancilla_dephasing=ancilla_dephasing)
        return cfg

    def validate(self) -> None:
        ins = {self.upper.in1, self.upper.in2, self.lower.in1, self.lower.in2}
        outs = {self.upper.out1, self.upper.out2, self.lower.out1, self.lower.out2}
        if ins != {"1", "2", "3", "4"} or outs != {"a", "b", "c", "d"}:
            raise ValueError("PBS ports must take inputs 1-4 to outputs a-d")
        for s, _ in self.rotator_angles + self.qwps:
            if str(s) not in "1234abcd":
                raise ValueError(f"unknown mode {s!r} for wave plate")


def circuit_elements(cfg: CircuitConfig) -> list:
    elems = [waveplate(WaveplateSpec(s, PlateKind.ROTATOR, a)) for s, a in cfg.rotator_angles]
    elems += [pbs(cfg.upper), pbs(cfg.lower)]
    elems += [waveplate(WaveplateSpec(s, PlateKind.QWP, a)) for s, a in cfg.qwps]
    return elems


def source_state(cfg: CircuitConfig) -> QuantumState:
    """Prepared four-photon input (normalized within the four-photon sector)."""
    state = spdc_state(cfg.spdc).photon_sector(4).normalized()
    state = prepare_input(state, cfg.preparation)
    if cfg.ancilla_dephasing > 0.0:
        state = apply_transform(state, dephasing_transform("3", cfg.ancilla_dephasing))
    return state


def evolve(cfg: CircuitConfig, state: QuantumState | None = None) -> QuantumState:
    cfg.validate()
    if state is None:
        state = source_state(cfg)
    return apply_all(state, circuit_elements(cfg))


def _truth_labels() -> dict[str, int]:
    return {k.value: v for k, v in TRUTH.items()}


@dataclass
class BsaResult:
    inputs: tuple[str, ...]
    probabilities: np.ndarray
    counts: CountTable | None = None
    fidelities: dict[str, tuple[float, float]] = field(default_factory=dict)
    settings: tuple[str, ...] = SETTING_LABELS

    @property
    def conditional(self) -> np.ndarray:
        """Row-normalized P(setting | input)."""
        sums = self.probabilities.sum(axis=1, keepdims=True)
        return np.divide(self.probabilities, sums, out=np.zeros_like(self.probabilities), where=sums > 0)

    @property
    def average_fidelity(self) -> float:
        return float(np.mean([f for f, _ in self.fidelities.values()]))

    @property
    def average_sigma(self) -> float:
        return float(np.mean([s for _, s in self.fidelities.values()]))

    def to_json(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "settings": list(self.settings),
            "probabilities": self.probabilities.tolist(),
            "counts": None if self.counts is None else self.counts.to_json(),
            "fidelities": {k: {"F": f, "sigma": s} for k, (f, s) in self.fidelities.items()},
            "average_fidelity": self.average_fidelity if self.fidelities else None,
        }

    @classmethod
    def from_json(cls, data) -> BsaResult:
        counts = data.get("counts")
        return cls(
            tuple(data["inputs"]),
            np.array(data["probabilities"], dtype=float),
            None if counts is None else CountTable.from_json(counts),
            {k: (v["F"], v["sigma"]) for k, v in data["fidelities"].items()},
            tuple(data["settings"]),
        )


def bsa_row(cfg: CircuitConfig) -> np.ndarray:
    """Absolute fourfold probabilities for the four a/b settings."""
    return setting_row(evolve(cfg), cfg.pol_c, cfg.pol_d)


def run_bsa(
    config: CircuitConfig = CircuitConfig(),
    exact: bool = True,
    shots: float | None = None,
    seed: int | None = None,
    inputs: Sequence[BellKind | str] = BELL_KINDS,
    duration_s: float = 1800.0,
) -> BsaResult:
    """Evolve each Bell input through the analyzer.

    ``shots`` is the expected fourfold total per input row.  Without
    sampling (``exact``), fidelities come from the probabilities and their
    sigmas use ``shots`` as the nominal count when given.
    """
    kinds = [BellKind(k) for k in inputs]
    probs = np.array([bsa_row(config.with_input(k)) for k in kinds])
    labels = tuple(k.value for k in kinds)
    truth = _truth_labels()
    result = BsaResult(labels, probs)
    if not exact:
        if shots is None or seed is None:
            raise ValueError("sampled runs need shots and seed")
        result.counts = sample_counts(probs, shots, seed, labels, duration_s)
        for lab in labels:
            row = result.counts.row(lab)
            result.fidelities[lab] = fidelity(row, truth[lab]) if row.sum() else (float("nan"), float("nan"))
    else:
        for lab, row in zip(labels, result.conditional):
            f = float(row[truth[lab]])
            sigma = math.sqrt(f * (1 - f) / shots) if shots else 0.0
            result.fidelities[lab] = (f, sigma)
    return result


def success_probability_resolved(config: CircuitConfig = CircuitConfig(), kind: BellKind | str = BellKind.PHI_PLUS) -> float:
    """Total success with c and d read out in the +/- basis and fed forward.

    A ``-`` result at c flips the expected sign at a, likewise d for b.
    """
    state = evolve(config.with_input(kind))
    pa, pb = SETTINGS[TRUTH[BellKind(kind)]]
    flip = {"+": "-", "-": "+"}
    total = 0.0
    for sc in "+-":
        for sd in "+-":
            a = pa if sc == "+" else flip[pa]
            b = pb if sd == "+" else flip[pb]
            total += setting_probability(state, (a, b, sc, sd))
    return total


def run_encoding(alpha: complex, beta: complex, config: CircuitConfig = CircuitConfig()) -> tuple[QuantumState, float]:
    """Single photon ``alpha|H> + beta|V>`` in mode 1 meets the ancilla at the upper PBS.

    Conditioned on one photon in a and one in c passing a ``|+>`` polarizer,
    returns the normalized output and its fidelity to
    ``alpha|H>_a|H>_4 + beta|V>_a|V>_4`` (with the c photon in ``|+>``).
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise ValueError("|alpha|^2 + |beta|^2 must be 1")
    vac = QuantumState.vacuum()
    ancilla = apply_pair_creation(vac, BellKind.PHI_PLUS, ("3", "4"))
    state = create_photon(ancilla, Mode("1", "H")) * alpha + create_photon(ancilla, Mode("1", "V")) * beta
    state = apply_all(state, [pbs(config.upper), polarizer("c", PLUS)])
    kept, prob = project_occupation(state, {"a": 1, "c": 1, "4": 1})
    if prob == 0.0:
        raise RuntimeError("encoding never heralded")
    out = kept.normalized()
    plus_c = [Mode("c", "H"), Mode("c", "V")]
    target = QuantumState.zero()
    for amp, pol in ((alpha, "H"), (beta, "V")):
        for mc, pc in zip(plus_c, PLUS):
            target = target + QuantumState({FockState.from_modes((Mode("a", pol), Mode("4", pol), mc)): amp * pc})
    fid = abs(inner_product(target, out)) ** 2
    return out, float(fid)


@dataclass(frozen=True)
class ThetaPoint:
    theta_deg: float
    spurious_prob: float
    ratio: float
    cos2_fit_residual: float
    spurious_fraction: float | None = None


def spurious_fourfold(theta: float, config: CircuitConfig = CircuitConfig(), pair=("1", "2")) -> float:
    """Fourfold probability of normalized same-pair double emission, rotator on mode 2 at ``theta``."""
    cfg = dataclasses.replace(config, rotator_angles=_set_angle(config.rotator_angles, "2", theta))
    state = evolve(cfg, same_pair_double_emission(pair))
    _, p = project_occupation(state, FOURFOLD)
    return p


def _set_angle(angles, spatial, theta):
    rest = tuple((s, a) for s, a in angles if s != spatial)
    return ((spatial, theta),) + rest


def spurious_fraction(theta: float, config: CircuitConfig = CircuitConfig()) -> float:
    """Share of the fourfold rate carried by same-pair double emission in the full order-2 state."""
    spdc = dataclasses.replace(config.spdc, order=2)
    cfg = dataclasses.replace(config, spdc=spdc, rotator_angles=_set_angle(config.rotator_angles, "2", theta))
    full = source_state(cfg)

    def same_pair(fs):
        c = fs.spatial_counts()
        return c.get("1", 0) == 2 or c.get("3", 0) == 2

    spurious = full.filter(same_pair)
    _, p_all = project_occupation(evolve(cfg, full), FOURFOLD)
    out_sp = evolve(cfg, spurious)
    _, p_sp = project_occupation(out_sp, FOURFOLD)
    p_sp *= out_sp.norm2() / full.norm2()
    return p_sp / p_all if p_all else 0.0


def theta_scan(angles_deg: Iterable[float], config: CircuitConfig = CircuitConfig()) -> list[ThetaPoint]:
    p0 = spurious_fourfold(0.0, config)
    rows = []
    for deg in angles_deg:
        th = math.radians(deg)
        p = spurious_fourfold(th, config)
        ratio = p / p0
        rows.append(ThetaPoint(deg, p, ratio, abs(ratio - math.cos(2 * th) ** 2), spurious_fraction(th, config)))
    return rows


def mirror_overlap(position, sigma: float = 1.0):
    """Gaussian wave-packet overlap for a delay-mirror offset."""
    return np.exp(-np.asarray(position, dtype=float) ** 2 / (2 * sigma**2))


def pair_fringe_visibility(state: QuantumState, x: str, y: str) -> float:
    """(max - min)/(max + min) over the four +/- settings of outputs x and y.

    The two remaining outputs stay behind ``|+>`` polarizers.
    """
    others = [s for s in "abcd" if s not in (x, y)]
    vals = []
    for px, py in SETTINGS:
        pols = {x: px, y: py, others[0]: "+", others[1]: "+"}
        vals.append(setting_probability(state, (pols["a"], pols["b"], pols["c"], pols["d"])))
    hi, lo = max(vals), min(vals)
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


def overlap_scan(v_values: Iterable[float], config: CircuitConfig = CircuitConfig()) -> list[dict]:
    rows = []
    for v in v_values:
        cfg = config.with_imperfections(v=float(v)).with_input(BellKind.PHI_PLUS)
        state = evolve(cfg)
        row = {"v": float(v)}
        for x, y in OVERLAP_PAIRS:
            row[f"vis_{x}{y}"] = pair_fringe_visibility(state, x, y)
        rows.append(row)
    return rows


def overlap_visibility_closed_form(v):
    """Fringe visibility of any output pair versus backward-pair overlap ``v``."""
    v2 = np.asarray(v, dtype=float) ** 2
    return 2 * v2 / (1 + v2**2)


def superposition_test(
    config: CircuitConfig = CircuitConfig(),
    coefficients: tuple[complex, complex] = (1 / math.sqrt(2), 1j / math.sqrt(2)),
) -> np.ndarray:
    prep = superposition_spec(*coefficients, dephasing=config.preparation.dephasing)
    return bsa_row(dataclasses.replace(config, preparation=prep))


@dataclass(frozen=True)
class Calibration:
    config: CircuitConfig
    v: float
    epsilon: float
    dephasing: float
    hv_fidelity: float
    diag_fidelity: float


def input_correlations(epsilon: float, dephasing: float) -> tuple[float, float]:
    """H/V and +/- correlation fidelities of the prepared phi+ pair seen through imperfect analyzers."""
    pair = prepare_input(bell_pair(BellState(BellKind.PHI_PLUS)), PreparationSpec(dephasing=dephasing))
    return (
        pair_correlation_fidelity(pair, Basis.HV, epsilon),
        pair_correlation_fidelity(pair, Basis.DIAG, epsilon),
    )


def _bisect(f, lo, hi, what):
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise CalibrationError(f"{what}: target not bracketed")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    return optimize.bisect(f, lo, hi, xtol=1e-12)


def calibrate_imperfections(
    target_hv: float = 0.96,
    target_diag: float = 0.94,
    overlap_visibility: float | None = None,
    base: CircuitConfig = CircuitConfig(),
) -> Calibration:
    """Fit (epsilon, dephasing, v) to measured input-pair correlation fidelities.

    ``epsilon`` is fixed by the H/V fidelity, then ``dephasing`` by the +/-
    fidelity.  The same dephasing is given to the ancilla pair.  ``v`` is
    chosen so the two-photon overlap visibility ``v^2`` equals
    ``overlap_visibility``, which defaults to the +/- correlation visibility
    ``2 * target_diag - 1``.
    """
    for name, t in (("target_hv", target_hv), ("target_diag", target_diag)):
        if not 0.5 <= t <= 1.0:
            raise CalibrationError(f"{name}={t} outside [0.5, 1]")
    if overlap_visibility is None:
        overlap_visibility = 2 * target_diag - 1
    if not 0.0 <= overlap_visibility <= 1.0:
        raise CalibrationError(f"overlap_visibility={overlap_visibility} outside [0, 1]")

    if target_hv == 1.0:
        eps = 0.0
    else:
        eps = _bisect(lambda e: input_correlations(e, 0.0)[0] - target_hv, 0.0, 0.5, "epsilon")
    if input_correlations(eps, 0.0)[1] <= target_diag:
        if abs(input_correlations(eps, 0.0)[1] - target_diag) > 1e-3:
            raise CalibrationError("+/- target above what the H/V target allows")
        deph = 0.0
    else:
        deph = _bisect(lambda d: input_correlations(eps, d)[1] - target_diag, 0.0, 1.0, "dephasing")
    v = math.sqrt(overlap_visibility)
    cfg = base.with_imperfections(v=v, epsilon=eps, dephasing=deph, ancilla_dephasing=deph)
    hv, dg = input_correlations(eps, deph)
    return Calibration(cfg, v, eps, deph, hv, dg)
