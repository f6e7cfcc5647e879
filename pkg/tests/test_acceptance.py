"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured values.
"""

import math
import time

import numpy as np
import pytest

from bellsim.detection import fidelity, sample_counts
from bellsim.elements import PbsSpec, pbs, rotator
from bellsim.experiments import (
    CircuitConfig,
    calibrate_imperfections,
    overlap_scan,
    overlap_visibility_closed_form,
    run_bsa,
    run_encoding,
    spurious_fourfold,
    success_probability_resolved,
    superposition_test,
)
from bellsim.fock import Mode, ModeTransform, QuantumState, apply_transform, ket, max_abs_diff
from bellsim.source import BELL_KINDS, BellKind, BellState, bell_pair

from helpers import ALL_MODES, random_state, random_unitary
from oracles import dense_evolve

IDEAL = CircuitConfig()


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

    return emit


def test_criterion_01_truth_table(report):
    t0 = time.perf_counter()
    res = run_bsa(IDEAL)
    dt = time.perf_counter() - t0
    cond = res.conditional
    wrong = float(np.max(np.abs(cond - np.eye(4))))
    ok = np.allclose(np.diag(cond), 1, atol=1e-9) and wrong < 1e-9 and dt < 1.0
    report(1, ok, f"max deviation from identity {wrong:.1e}, {dt:.2f} s")
    assert ok


def test_criterion_02_success_rates(report):
    t0 = time.perf_counter()
    res = run_bsa(IDEAL)
    correct = np.diag(res.probabilities)
    resolved = [success_probability_resolved(IDEAL, k) for k in BELL_KINDS]
    dt = time.perf_counter() - t0
    dev16 = float(np.max(np.abs(correct - 1 / 16)))
    dev4 = float(np.max(np.abs(np.array(resolved) - 1 / 4)))
    ok = dev16 < 1e-12 and dev4 < 1e-12 and dt < 1.0
    report(2, ok, f"|p - 1/16| {dev16:.1e}, |p - 1/4| {dev4:.1e}, {dt:.2f} s")
    assert ok


def test_criterion_03_encoding(report, rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        a, b = z / np.linalg.norm(z)
        _, fid = run_encoding(a, b)
        worst = max(worst, abs(fid - 1))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 5.0
    report(3, ok, f"worst |F - 1| {worst:.1e} over 100 qubits, {dt:.2f} s")
    assert ok


def test_criterion_04_double_pair_suppression(report):
    t0 = time.perf_counter()
    p0 = spurious_fourfold(0.0)
    residuals = []
    for deg in (0, 10, 22.5, 30, 45):
        th = math.radians(deg)
        residuals.append(abs(spurious_fourfold(th) / p0 - math.cos(2 * th) ** 2))
    p45 = spurious_fourfold(math.pi / 4)
    dt = time.perf_counter() - t0
    ok = max(residuals) < 1e-9 and p45 < 1e-12 and dt < 10.0
    report(4, ok, f"max cos^2 residual {max(residuals):.1e}, P(45) {p45:.1e}, {dt:.2f} s")
    assert ok


POL = {
    "H": (1.0, 0.0),
    "V": (0.0, 1.0),
    "+": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "-": (1 / math.sqrt(2), -1 / math.sqrt(2)),
}


def _pair_ket(pair, p1, p2, c):
    """``c |p1>|p2>`` on the spatial pair; labels H, V, + or -."""
    x, y = pair
    out = QuantumState.zero()
    for i, px in enumerate("HV"):
        for j, py in enumerate("HV"):
            amp = c * POL[p1][i] * POL[p2][j]
            if amp:
                out = out + ket(Mode(x, px), Mode(y, py)) * amp
    return out


def test_criterion_05_rotated_bell_states(report):
    s = 1 / math.sqrt(2)
    p12 = ("1", "2")
    expected = {
        BellKind.PHI_PLUS: _pair_ket(p12, "H", "+", s) + _pair_ket(p12, "V", "-", -s),
        BellKind.PHI_MINUS: _pair_ket(p12, "H", "+", s) + _pair_ket(p12, "V", "-", s),
        BellKind.PSI_PLUS: _pair_ket(p12, "H", "-", -s) + _pair_ket(p12, "V", "+", s),
        BellKind.PSI_MINUS: _pair_ket(p12, "H", "-", -s) + _pair_ket(p12, "V", "+", -s),
    }
    errs = []
    for kind, exp in expected.items():
        out = apply_transform(bell_pair(BellState(kind)), rotator(2, math.pi / 4))
        errs.append(max_abs_diff(out, exp))
    # the ancilla rotated on mode 4 takes the same form as phi+
    p34 = ("3", "4")
    anc = apply_transform(bell_pair(BellState("phi+", p34)), rotator(4, math.pi / 4))
    errs.append(max_abs_diff(anc, _pair_ket(p34, "H", "+", s) + _pair_ket(p34, "V", "-", -s)))
    ok = max(errs) < 1e-12
    report(5, ok, f"max amplitude error {max(errs):.1e}")
    assert ok


def _random_circuit(rng, modes):
    steps = []
    for _ in range(int(rng.integers(1, 5))):
        kind = rng.integers(3)
        if kind == 0:
            k = int(rng.integers(2, len(modes) + 1))
            dom = [modes[i] for i in rng.choice(len(modes), size=k, replace=False)]
            steps.append(ModeTransform(dom, random_unitary(k, rng)))
        elif kind == 1:
            eps = float(rng.uniform(0, 0.1))
            steps.append(pbs(PbsSpec("1", "3", "a", "c", "HV" if rng.random() < 0.5 else "DIAG", eps, eps)))
        else:
            steps.append(rotator(str(rng.choice(list("1234abcd"))), float(rng.uniform(0, 2 * math.pi))))
    return steps


def _support(modes, steps):
    """Smallest mode set containing ``modes`` that every step maps into itself."""
    support = set(modes).union(*(t.domain_modes for t in steps))
    grown = True
    while grown:
        grown = False
        for t in steps:
            for m in list(support):
                for dst, _ in t.image(m) or ():
                    if dst not in support:
                        support.add(dst)
                        grown = True
    return sorted(support)


def test_criterion_06_oracle_equivalence(report, rng):
    t0 = time.perf_counter()
    worst = 0.0
    done = 0
    while done < 50:
        n_modes = int(rng.integers(2, 17))
        modes = sorted(ALL_MODES[i] for i in rng.choice(len(ALL_MODES), size=n_modes, replace=False))
        steps = _random_circuit(rng, modes)
        support = _support(modes, steps)
        if len(support) > 16:
            continue
        done += 1
        state = random_state(rng, modes, max_photons=4)
        sparse = state
        for t in steps:
            sparse = apply_transform(sparse, t)
        dense = dense_evolve(state, [t.dense(support) for t in steps], support)
        worst = max(worst, max_abs_diff(sparse, dense))
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and dt < 60.0
    report(6, ok, f"max deviation {worst:.1e} over 50 circuits, {dt:.2f} s")
    assert ok


def test_criterion_07_statistical_pipeline(report):
    ideal = run_bsa(IDEAL)
    table = sample_counts(ideal.probabilities, 450, seed=1, inputs=ideal.inputs)
    ideal_fids = [fidelity(table.counts[i], i) for i in range(4)]
    ideal_ok = all(f == 1.0 and s == 0.0 for f, s in ideal_fids)

    cal = calibrate_imperfections(0.96, 0.94)
    sampled = run_bsa(cal.config, exact=False, shots=450, seed=1)
    exact = run_bsa(cal.config)
    f_avg, s_avg = sampled.average_fidelity, sampled.average_sigma
    # sigma bracket: binomial error at N ~ 450 and F ~ 0.8 is about 0.02
    ok = ideal_ok and 0.70 <= f_avg <= 0.90 and 0.70 <= exact.average_fidelity <= 0.90 and 0.015 <= s_avg <= 0.05
    report(
        7,
        ok,
        f"ideal F=1 sigma=0: {ideal_ok}; calibrated v={cal.v:.3f} eps={cal.epsilon:.4f} d={cal.dephasing:.4f}, "
        f"F={f_avg:.3f}+-{s_avg:.3f} (exact {exact.average_fidelity:.3f})",
    )
    assert ok


def test_criterion_08_superposition(report):
    row = superposition_test(IDEAL)
    psi = max(row[2], row[3])
    ratio_err = abs(row[0] / row[1] - 1)
    ok = psi < 1e-12 and ratio_err < 1e-12
    report(8, ok, f"psi settings {psi:.1e}, |phi+/phi- - 1| {ratio_err:.1e} (measured 170:104 not modelled)")
    assert ok


def test_criterion_09_overlap_scan(report):
    grid = np.linspace(0.0, 1.0, 21)
    rows = overlap_scan(grid)
    closed = overlap_visibility_closed_form(grid)
    worst, monotone = 0.0, True
    for key in ("vis_ab", "vis_cd", "vis_ad", "vis_cb"):
        vals = np.array([r[key] for r in rows])
        worst = max(worst, float(np.max(np.abs(vals - closed))))
        monotone &= bool(np.all(np.diff(vals) >= -1e-12))
        monotone &= abs(vals[0]) < 1e-12 and abs(vals[-1] - 1) < 1e-12
    ok = worst < 1e-9 and monotone
    report(9, ok, f"max closed-form deviation {worst:.1e}, endpoints and monotonicity {monotone}")
    assert ok


def test_criterion_10_determinism(report):
    cfg = calibrate_imperfections(0.96, 0.94).config
    a = run_bsa(cfg, exact=False, shots=450, seed=42)
    b = run_bsa(cfg, exact=False, shots=450, seed=42)
    same = a.counts.to_csv() == b.counts.to_csv() and a.counts.dumps() == b.counts.dumps()
    c = run_bsa(cfg, exact=False, shots=450, seed=43)
    ok = same and c.counts.to_csv() != a.counts.to_csv()
    report(10, ok, f"repeat byte-identical {same}, other seed differs {c.counts != a.counts}")
    assert ok
