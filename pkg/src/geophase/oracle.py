"""Brute-force detection probabilities for partially distinguishable photons.

For N single photons entering the first N input ports of an arbitrary
lossless interferometer, the probability of detecting them in output
ports ``l = (l_1, ..., l_N)`` is

    P(l) = 1/M(l) * sum_{tau, sigma in S_N} J(tau^-1 sigma)
           * prod_k conj(U[k, l_tau(k)]) * U[k, l_sigma(k)]

where M(l) is the product of factorials of the port occupations and
J(nu) is the product, over the cycles (k_1 ... k_r) of nu, of
tr[rho_{k_r} ... rho_{k_1}].

The double sum is regrouped by nu = tau^-1 sigma.  For fixed nu the
inner sum over tau is the permanent of
``C_nu[k, j] = conj(A[k, j]) * A[nu^-1(k), j]`` with ``A = U[:, l]``, so
each pattern costs N! permanents, each evaluated with Ryser's formula.
This module shares no code path with the closed-form cyclic model and
is used as its ground truth.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .cyclic import InterferometerRows
from .errors import CapacityError, InvalidInputError
from .states import MixedState, PureState, as_density

MAX_PHOTONS = 8
_CHUNK = 2048


def _as_permutation(p: Sequence[int]) -> tuple[int, ...]:
    perm = tuple(int(i) for i in p)
    if sorted(perm) != list(range(len(perm))):
        raise InvalidInputError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
    return perm


def cycle_decomposition(p: Sequence[int]) -> list[tuple[int, ...]]:
    """Disjoint cycles of ``p`` (mapping i -> p[i]), fixed points included.

    Each cycle starts at its smallest element; cycles are sorted.

    >>> cycle_decomposition([1, 0, 3, 2])
    [(0, 1), (2, 3)]
    """
    perm = _as_permutation(p)
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycle = []
        i = start
        while not seen[i]:
            seen[i] = True
            cycle.append(i)
            i = perm[i]
        cycles.append(tuple(cycle))
    return cycles


def inverse(p: Sequence[int]) -> tuple[int, ...]:
    perm = _as_permutation(p)
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return tuple(inv)


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """(p o q)(i) = p[q[i]]."""
    return tuple(p[i] for i in q)


class _Traces:
    """Cached ordered traces tr[rho_{k_r} ... rho_{k_1}] for one state tuple."""

    def __init__(self, states):
        self.pure = all(isinstance(s, PureState) for s in states)
        if self.pure:
            amps = np.stack([s.amplitudes for s in states])
            # gram[a, b] = <psi_a|psi_b>
            self.gram = amps.conj() @ amps.T
        else:
            self.rhos = [as_density(s) for s in states]
        self.cache: dict[tuple[int, ...], complex] = {}

    def __call__(self, cycle: tuple[int, ...]) -> complex:
        if len(cycle) == 1:
            return 1.0 + 0j
        val = self.cache.get(cycle)
        if val is None:
            if self.pure:
                # <k1|k_r><k_r|k_{r-1}>...<k2|k1>
                val = complex(
                    np.prod([self.gram[cycle[i], cycle[i - 1]] for i in range(len(cycle))])
                )
            else:
                prod = self.rhos[cycle[-1]]
                for k in reversed(cycle[:-1]):
                    prod = prod @ self.rhos[k]
                val = complex(np.trace(prod))
            self.cache[cycle] = val
        return val


def _check_states(states, n: int | None = None):
    states = list(states)
    if n is not None and len(states) != n:
        raise InvalidInputError(f"expected {n} states, got {len(states)}")
    checked = []
    for s in states:
        if isinstance(s, (PureState, MixedState)):
            checked.append(s)
        else:
            arr = np.asarray(s)
            checked.append(MixedState(arr) if arr.ndim == 2 else PureState(arr))
    dims = {s.dim for s in checked}
    if len(dims) > 1:
        raise InvalidInputError(f"states have mismatched dimensions {sorted(dims)}")
    return checked


def distinguishability_J(p: Sequence[int], states) -> complex:
    perm = _as_permutation(p)
    states = _check_states(states, len(perm))
    traces = _Traces(states)
    return complex(np.prod([traces(c) for c in cycle_decomposition(perm)]))


@lru_cache(maxsize=None)
def _perm_tables(n: int):
    perms = list(itertools.permutations(range(n)))
    inv = np.array([inverse(p) for p in perms], dtype=np.intp)
    cycles = [tuple(c for c in cycle_decomposition(p) if len(c) > 1) for p in perms]
    subsets = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)
    signs = (-1.0) ** (n - subsets.sum(axis=1))
    return inv, cycles, subsets, signs


def _ryser(mats: np.ndarray, subsets: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Permanents of a batch of n x n matrices (Ryser inclusion-exclusion)."""
    rowsums = mats @ subsets.T  # (batch, n, 2^n)
    return np.prod(rowsums, axis=1) @ signs


def permanent(matrix) -> complex:
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError("permanent needs a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    subsets = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)
    signs = (-1.0) ** (n - subsets.sum(axis=1))
    return complex(_ryser(a[None], subsets, signs)[0])


def multiplicity(ports: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for p in ports:
        counts[p] = counts.get(p, 0) + 1
    return math.prod(math.factorial(c) for c in counts.values())


def _rows(rows) -> InterferometerRows:
    return rows if isinstance(rows, InterferometerRows) else InterferometerRows(rows)


def _j_table(states, n: int) -> np.ndarray:
    _, cycles, _, _ = _perm_tables(n)
    traces = _Traces(states)
    return np.array(
        [np.prod([traces(c) for c in cyc]) if cyc else 1.0 for cyc in cycles],
        dtype=complex,
    )


def _pattern_sum(u: np.ndarray, ports: tuple[int, ...], jtab: np.ndarray) -> complex:
    n = len(ports)
    inv, _, subsets, signs = _perm_tables(n)
    a = u[:, list(ports)]
    total = 0j
    for lo in range(0, len(inv), _CHUNK):
        block = inv[lo:lo + _CHUNK]
        mats = a.conj()[None, :, :] * a[block]
        total += np.dot(jtab[lo:lo + _CHUNK], _ryser(mats, subsets, signs))
    return total / multiplicity(ports)


def _prepare(rows, states, max_n: int):
    rows = _rows(rows)
    n = rows.n_inputs
    if n > max_n:
        raise CapacityError(f"{n} photons exceeds the brute-force cap of {max_n}")
    states = _check_states(states, n)
    return rows, states, n


def _check_ports(ports, n: int, k: int) -> tuple[int, ...]:
    ports = tuple(sorted(int(p) for p in ports))
    if len(ports) != n:
        raise InvalidInputError(f"pattern must list {n} output ports")
    if ports and (ports[0] < 0 or ports[-1] >= k):
        raise InvalidInputError(f"output ports must lie in [0, {k})")
    return ports


def output_probability_complex(rows, states, ports, max_n: int = MAX_PHOTONS) -> complex:
    """The permutation double sum before discarding its (vanishing) imaginary part."""
    rows, states, n = _prepare(rows, states, max_n)
    ports = _check_ports(ports, n, rows.n_ports)
    return _pattern_sum(rows.matrix, ports, _j_table(states, n))


def output_probability(rows, states, ports, max_n: int = MAX_PHOTONS) -> float:
    return max(0.0, output_probability_complex(rows, states, ports, max_n).real)


def _colex(patterns):
    return sorted(patterns, key=lambda l: tuple(reversed(l)))


def coincidence_port_patterns(n: int) -> list[tuple[int, ...]]:
    """One port per station for a network whose ports are 2*station + detector."""
    return _colex(
        tuple(2 * m + b for m, b in enumerate(bits))
        for bits in itertools.product((0, 1), repeat=n)
    )


def full_distribution(rows, states, restrict_to_coincidence: bool = False,
                      max_n: int = MAX_PHOTONS) -> dict[tuple[int, ...], float]:
    """Probabilities of every detection pattern, keyed by sorted port tuples.

    Patterns are listed in colexicographic order.  With
    ``restrict_to_coincidence`` only patterns with one photon per station
    are enumerated, which requires K = 2N ports grouped per station.
    """
    rows, states, n = _prepare(rows, states, max_n)
    k = rows.n_ports
    if restrict_to_coincidence:
        if k != 2 * n:
            raise InvalidInputError("coincidence patterns need 2N ports (two per station)")
        patterns = coincidence_port_patterns(n)
    else:
        patterns = _colex(itertools.combinations_with_replacement(range(k), n))
    jtab = _j_table(states, n)
    return {l: max(0.0, _pattern_sum(rows.matrix, l, jtab).real) for l in patterns}
