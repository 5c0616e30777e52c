"""Closed-form model of the N-photon cyclic interferometer.

Photon m enters a balanced beam splitter feeding the lower arm of station
m and the upper arm of station m+1 (mod N).  Station m applies a phase
shift phi_m to its upper arm, recombines both arms on a second balanced
beam splitter, and counts photons at an upper (0) and lower (1) detector.
Output ports are flattened as ``2 * station + detector``.

Only coincidence events (one photon per station) carry the many-photon
interference term; all other events have state-independent probability.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidInterferometerError
from .states import MixedState, PureState, geometric_factor, geometric_factor_mixed

ROW_TOL = 1e-10


@dataclass(frozen=True)
class CyclicConfig:
    n_photons: int
    phases: tuple[float, ...]

    def __post_init__(self):
        if int(self.n_photons) != self.n_photons or self.n_photons < 2:
            raise InvalidInputError("a cyclic interferometer needs N >= 2 photons")
        phases = tuple(float(p) for p in self.phases)
        if len(phases) != self.n_photons:
            raise InvalidInputError(
                f"expected {self.n_photons} phases, got {len(phases)}"
            )
        if not all(math.isfinite(p) for p in phases):
            raise InvalidInputError("phases must be finite")
        object.__setattr__(self, "n_photons", int(self.n_photons))
        object.__setattr__(self, "phases", phases)

    @classmethod
    def calibrated(cls, n_photons: int) -> "CyclicConfig":
        """All phase shifts zero, so the total phase is calibrated to 0."""
        return cls(n_photons, (0.0,) * n_photons)

    @property
    def total_phase(self) -> float:
        return math.fsum(self.phases)


@dataclass(frozen=True)
class OutcomePattern:
    """Detector index per station: 0 for upper, 1 for lower."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidInputError("outcome bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @property
    def label(self) -> str:
        return "".join(str(b) for b in self.bits)

    def ports(self) -> tuple[int, ...]:
        return tuple(2 * m + b for m, b in enumerate(self.bits))


@dataclass(frozen=True, eq=False)
class InterferometerRows:
    """Rows of a unitary: amplitude from each occupied input to each output port."""

    matrix: np.ndarray

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] > u.shape[1]:
            raise InvalidInterferometerError("rows must form an N x K matrix with N <= K")
        if not np.all(np.isfinite(u)):
            raise InvalidInterferometerError("interferometer entries must be finite")
        gram = u @ u.conj().T
        dev = np.max(np.abs(gram - np.eye(u.shape[0])))
        if dev > ROW_TOL:
            raise InvalidInterferometerError(
                f"rows are not orthonormal (max Gram deviation {dev:.3e})"
            )
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_ports(self) -> int:
        return self.matrix.shape[1]


def build_cyclic_rows(config: CyclicConfig) -> InterferometerRows:
    n = config.n_photons
    u = np.zeros((n, 2 * n), dtype=complex)
    for m in range(n):
        nxt = (m + 1) % n
        shift = np.exp(1j * config.phases[nxt])
        u[m, 2 * m] += 0.5
        u[m, 2 * m + 1] += 0.5j
        u[m, 2 * nxt] += -0.5 * shift
        u[m, 2 * nxt + 1] += 0.5j * shift
    return InterferometerRows(u)


def coincidence_probability_total(n: int) -> float:
    if n < 2:
        raise InvalidInputError("N must be at least 2")
    return 1.0 / 2 ** (n - 1)


def _factor(config: CyclicConfig, states: Sequence) -> complex:
    if len(states) != config.n_photons:
        raise InvalidInputError(
            f"expected {config.n_photons} states, got {len(states)}"
        )
    if all(isinstance(s, PureState) for s in states):
        return geometric_factor(states).value
    return geometric_factor_mixed(states).value


def _probability(n: int, k: int, interference: float) -> float:
    sign = -1.0 if (n + k) % 2 else 1.0
    return max(0.0, (1.0 + sign * interference) / 2 ** (2 * n - 1))


def _as_pattern(o, n: int) -> OutcomePattern:
    pattern = o if isinstance(o, OutcomePattern) else OutcomePattern(tuple(o))
    if len(pattern.bits) != n:
        raise InvalidInputError(f"outcome pattern must have {n} entries")
    return pattern


def outcome_probability(config: CyclicConfig, states: Sequence, o) -> float:
    """Probability of the coincidence outcome ``o``.

    ``states`` may mix PureState and MixedState entries; the geometric
    factor is then tr[rho_1 ... rho_N].
    """
    pattern = _as_pattern(o, config.n_photons)
    v = _factor(config, states)
    interference = (v * np.exp(-1j * config.total_phase)).real
    return _probability(config.n_photons, pattern.weight, interference)


def coincidence_distribution(config: CyclicConfig, states: Sequence) -> dict[OutcomePattern, float]:
    n = config.n_photons
    v = _factor(config, states)
    interference = (v * np.exp(-1j * config.total_phase)).real
    return {
        OutcomePattern(bits): _probability(n, sum(bits), interference)
        for bits in itertools.product((0, 1), repeat=n)
    }


def _check_partition(partition, n: int) -> tuple[frozenset[int], frozenset[int]]:
    if isinstance(partition, Mapping):
        partition = list(partition.values())
    parts = [frozenset(int(s) for s in p) for p in partition]
    if len(parts) != 2:
        raise InvalidInputError("partition must name exactly two parties")
    alice, bob = parts
    if alice & bob or (alice | bob) != frozenset(range(n)) or not alice or not bob:
        raise InvalidInputError("partition must split the stations into two disjoint non-empty sets")
    return alice, bob


def merged_outcome_distribution(config: CyclicConfig, states: Sequence, partition) -> dict[tuple[int, int], float]:
    """Postselected joint distribution of the two parties' parity outcomes.

    A party outputs +1 when an even number of its stations click in the
    lower detector and -1 otherwise.
    """
    n = config.n_photons
    if n % 2:
        raise InvalidInputError("parity correlations require an even number of photons")
    alice, bob = _check_partition(partition, n)
    dist = coincidence_distribution(config, states)
    mass = math.fsum(dist.values())
    merged = {(a, b): 0.0 for a in (1, -1) for b in (1, -1)}
    acc: dict[tuple[int, int], list[float]] = {key: [] for key in merged}
    for pattern, p in dist.items():
        ka = sum(pattern.bits[s] for s in alice)
        kb = sum(pattern.bits[s] for s in bob)
        acc[(-1) ** ka, (-1) ** kb].append(p)
    for key, vals in acc.items():
        merged[key] = math.fsum(vals) / mass
    return merged


def parity_correlator(config: CyclicConfig, states: Sequence, partition) -> float:
    """<A B> over the renormalized coincidence events (phases calibrated to 0)."""
    if abs(math.remainder(config.total_phase, 2 * math.pi)) > 1e-12:
        raise InvalidInputError("parity correlator assumes total phase calibrated to 0")
    merged = merged_outcome_distribution(config, states, partition)
    return math.fsum(a * b * p for (a, b), p in merged.items())
