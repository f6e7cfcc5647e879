import math

import numpy as np
from hypothesis import strategies as st

from bellsim.fock import FockState, Mode, QuantumState

ALL_MODES = [Mode(s, p, t) for s in "1234abcd" for p in "HV" for t in (0, 1)]


def random_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, modes, max_photons=4, n_terms=5, truncation=4):
    amps = {}
    for _ in range(n_terms):
        n = int(rng.integers(0, max_photons + 1))
        picks = rng.choice(len(modes), size=n, replace=True)
        fs = FockState.from_modes(modes[i] for i in picks)
        amps[fs] = amps.get(fs, 0) + complex(rng.normal(), rng.normal())
    state = QuantumState(amps, truncation)
    return state.normalized() if state.norm2() else QuantumState.vacuum(truncation)


seeds = st.integers(min_value=0, max_value=2**32 - 1)

SQRT2 = math.sqrt(2)
