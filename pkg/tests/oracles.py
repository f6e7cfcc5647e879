"""Independent reference implementations used only by the tests.

``dense_evolve`` works in first quantization: an n-photon Fock state is a
symmetric tensor over the single-photon mode space, a linear-optical
element acts as ``U`` on every tensor axis.  No creation-operator algebra
is shared with the package.
"""

import itertools
import math

import numpy as np

from bellsim.fock import FockState, QuantumState


def _fock_to_tensor(fs, amp, index, n_modes):
    photons = [index[m] for m, k in fs.occupations for _ in range(k)]
    n = len(photons)
    t = np.zeros((n_modes,) * n, dtype=complex)
    weight = math.sqrt(math.prod(math.factorial(k) for _, k in fs.occupations) / math.factorial(n))
    for perm in set(itertools.permutations(photons)):
        t[perm] += amp * weight
    return t


def dense_evolve(state, matrices, modes):
    """Evolve ``state`` through dense single-photon matrices over ``modes``."""
    index = {m: i for i, m in enumerate(modes)}
    n_modes = len(modes)
    total = np.eye(n_modes, dtype=complex)
    for u in matrices:
        total = u @ total
    sectors = {}
    for fs, amp in state.amplitudes.items():
        n = fs.total_photons
        t = _fock_to_tensor(fs, amp, index, n_modes)
        sectors[n] = sectors.get(n, 0) + t
    out = {}
    for n, t in sectors.items():
        if n == 0:
            out[FockState()] = complex(t)
            continue
        for axis in range(n):
            t = np.moveaxis(np.tensordot(total, t, axes=([1], [axis])), 0, axis)
        nz = np.argwhere(np.abs(t) > 1e-15)
        seen = set()
        for idx in nz:
            key = tuple(sorted(int(i) for i in idx))
            if key in seen:
                continue
            seen.add(key)
            fs = FockState.from_modes(modes[i] for i in key)
            mult = math.prod(math.factorial(k) for _, k in fs.occupations)
            out[fs] = t[tuple(key)] * math.sqrt(math.factorial(n) / mult)
    return QuantumState(out, state.truncation)


def labeled_setting_probability(photon_states, single_photon_matrix, projectors, modes, required):
    """Fourfold probability for distinguishable photons.

    ``photon_states`` is a tensor with one axis per labeled photon over
    ``modes``; every photon is propagated independently and no
    symmetrization is applied.
    """
    t = photon_states
    for axis in range(t.ndim):
        t = np.moveaxis(np.tensordot(single_photon_matrix, t, axes=([1], [axis])), 0, axis)
        t = np.moveaxis(np.tensordot(projectors, t, axes=([1], [axis])), 0, axis)
    total = 0.0
    for idx in itertools.product(range(len(modes)), repeat=t.ndim):
        spatial = sorted(modes[i].spatial for i in idx)
        if spatial == sorted(required):
            total += abs(t[idx]) ** 2
    return total
